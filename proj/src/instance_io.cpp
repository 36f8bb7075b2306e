#include "fafsp/instance_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fafsp {

using nlohmann::json;

namespace {

std::string line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& member(const json& obj, const char* key, const std::string& path) {
    if (!obj.is_object()) {
        throw InstanceError(path, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw InstanceError(path + "." + key, "missing field");
    }
    return *it;
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) {
        throw InstanceError(path, "expected an integer");
    }
    return v.get<int>();
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) {
        throw InstanceError(path, "expected a number");
    }
    return v.get<double>();
}

const json& as_array(const json& v, const std::string& path) {
    if (!v.is_array()) {
        throw InstanceError(path, "expected a list");
    }
    return v;
}

std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

Stage parse_stage(const json& v, const std::string& path) {
    if (v == "processing") {
        return Stage::Processing;
    }
    if (v == "assembly") {
        return Stage::Assembly;
    }
    throw InstanceError(path, "expected \"processing\" or \"assembly\"");
}

template <class T>
void sort_by_id(std::vector<T>& items) {
    std::sort(items.begin(), items.end(), [](const T& a, const T& b) { return a.id < b.id; });
}

SetupMatrix parse_setup(const json& v, std::size_t n_jobs) {
    const std::string path = "setup";
    SetupMatrix setup(n_jobs);
    if (v.is_object()) {
        const double fill = as_number(member(v, "default", path), path + ".default");
        setup = SetupMatrix(n_jobs, fill);
        for (std::size_t j = 0; j < n_jobs; ++j) {
            setup.at(static_cast<int>(j), static_cast<int>(j)) = 0.0;
        }
        if (v.contains("overrides")) {
            const auto& list = as_array(v.at("overrides"), path + ".overrides");
            for (std::size_t i = 0; i < list.size(); ++i) {
                const std::string ipath = indexed(path + ".overrides", i);
                const auto& row = as_array(list[i], ipath);
                if (row.size() != 3) {
                    throw InstanceError(ipath, "expected [from, to, minutes]");
                }
                const int from = as_int(row[0], ipath + "[0]");
                const int to = as_int(row[1], ipath + "[1]");
                if (from < 0 || to < 0 || static_cast<std::size_t>(from) >= n_jobs ||
                    static_cast<std::size_t>(to) >= n_jobs) {
                    throw InstanceError(ipath, "dangling job id in setup override");
                }
                setup.at(from, to) = as_number(row[2], ipath + "[2]");
            }
        }
        return setup;
    }
    const auto& rows = as_array(v, path);
    // Either jobs x jobs, or (1 + jobs) x jobs with the virtual start row first.
    std::size_t offset = 0;
    if (rows.size() == n_jobs + 1) {
        offset = 1;
        const auto& first = as_array(rows[0], indexed(path, 0));
        for (std::size_t c = 0; c < first.size(); ++c) {
            if (as_number(first[c], indexed(indexed(path, 0), c)) != 0.0) {
                throw InstanceError(indexed(indexed(path, 0), c), "virtual start row must be zero");
            }
        }
    } else if (rows.size() != n_jobs) {
        throw InstanceError(path, "expected " + std::to_string(n_jobs) + " rows");
    }
    for (std::size_t r = 0; r < n_jobs; ++r) {
        const std::string rpath = indexed(path, r + offset);
        const auto& row = as_array(rows[r + offset], rpath);
        if (row.size() != n_jobs) {
            throw InstanceError(rpath, "expected " + std::to_string(n_jobs) + " columns");
        }
        for (std::size_t c = 0; c < n_jobs; ++c) {
            setup.at(static_cast<int>(r), static_cast<int>(c)) = as_number(row[c], indexed(rpath, c));
        }
    }
    return setup;
}

Instance from_json(const json& doc) {
    Instance inst;
    const auto& machines = as_array(member(doc, "machines", ""), "machines");
    for (std::size_t i = 0; i < machines.size(); ++i) {
        const std::string path = indexed("machines", i);
        inst.machines.push_back(
            {as_int(member(machines[i], "id", path), path + ".id"), parse_stage(member(machines[i], "stage", path), path + ".stage")});
    }
    sort_by_id(inst.machines);

    const auto& jobs = as_array(member(doc, "jobs", ""), "jobs");
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const std::string path = indexed("jobs", i);
        Job j;
        j.id = as_int(member(jobs[i], "id", path), path + ".id");
        j.kind = parse_stage(member(jobs[i], "kind", path), path + ".kind");
        const auto& elig = member(jobs[i], "eligible", path);
        if (!elig.is_object()) {
            throw InstanceError(path + ".eligible", "expected an object of machine id -> minutes");
        }
        for (const auto& [key, value] : elig.items()) {
            const std::string epath = path + ".eligible." + key;
            int machine = 0;
            auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), machine);
            if (ec != std::errc() || ptr != key.data() + key.size()) {
                throw InstanceError(epath, "machine id must be an integer");
            }
            if (machine < 0 || static_cast<std::size_t>(machine) >= inst.machines.size()) {
                throw InstanceError(epath, "dangling machine id " + key);
            }
            j.eligible.push_back({machine, as_number(value, epath)});
        }
        std::sort(j.eligible.begin(), j.eligible.end(),
                  [](const Eligibility& a, const Eligibility& b) { return a.machine < b.machine; });
        inst.jobs.push_back(std::move(j));
    }
    sort_by_id(inst.jobs);
    const int n_jobs = static_cast<int>(inst.jobs.size());
    auto check_job_ref = [n_jobs](int id, const std::string& path) {
        if (id < 0 || id >= n_jobs) {
            throw InstanceError(path, "dangling job id " + std::to_string(id));
        }
    };

    const auto& orders = as_array(member(doc, "orders", ""), "orders");
    for (std::size_t i = 0; i < orders.size(); ++i) {
        const std::string path = indexed("orders", i);
        Order o;
        o.id = as_int(member(orders[i], "id", path), path + ".id");
        o.arrival = as_number(member(orders[i], "arrival", path), path + ".arrival");
        o.due = as_number(member(orders[i], "due", path), path + ".due");
        const auto& products = as_array(member(orders[i], "products", path), path + ".products");
        for (std::size_t k = 0; k < products.size(); ++k) {
            const std::string ppath = indexed(path + ".products", k);
            Product p;
            p.id = as_int(member(products[k], "id", ppath), ppath + ".id");
            p.assembly_job = as_int(member(products[k], "assembly_job", ppath), ppath + ".assembly_job");
            check_job_ref(p.assembly_job, ppath + ".assembly_job");
            const auto& pj = as_array(member(products[k], "processing_jobs", ppath), ppath + ".processing_jobs");
            for (std::size_t q = 0; q < pj.size(); ++q) {
                const std::string qpath = indexed(ppath + ".processing_jobs", q);
                p.processing_jobs.push_back(as_int(pj[q], qpath));
                check_job_ref(p.processing_jobs.back(), qpath);
            }
            std::sort(p.processing_jobs.begin(), p.processing_jobs.end());
            o.products.push_back(std::move(p));
        }
        sort_by_id(o.products);
        inst.orders.push_back(std::move(o));
    }
    sort_by_id(inst.orders);

    inst.setup = parse_setup(member(doc, "setup", ""), inst.jobs.size());
    link_instance(inst);

    if (auto violations = check_instance(inst); !violations.empty()) {
        std::string all;
        for (const auto& v : violations) {
            all += (all.empty() ? "" : "; ") + v;
        }
        throw InstanceError("", "integrity error: " + all);
    }
    return inst;
}

json to_json(const Instance& inst) {
    json doc = json::object();
    json machines = json::array();
    for (const auto& m : inst.machines) {
        machines.push_back({{"id", m.id}, {"stage", std::string(to_string(m.stage))}});
    }
    json orders = json::array();
    for (const auto& o : inst.orders) {
        json products = json::array();
        for (const auto& p : o.products) {
            products.push_back({{"id", p.id}, {"assembly_job", p.assembly_job}, {"processing_jobs", p.processing_jobs}});
        }
        orders.push_back({{"id", o.id}, {"arrival", o.arrival}, {"due", o.due}, {"products", std::move(products)}});
    }
    json jobs = json::array();
    for (const auto& j : inst.jobs) {
        json elig = json::object();
        for (const auto& e : j.eligible) {
            elig[std::to_string(e.machine)] = e.minutes;
        }
        jobs.push_back({{"id", j.id}, {"kind", std::string(to_string(j.kind))}, {"eligible", std::move(elig)}});
    }
    json setup = json::array();
    const int n = static_cast<int>(inst.jobs.size());
    for (int r = 0; r < n; ++r) {
        json row = json::array();
        for (int c = 0; c < n; ++c) {
            row.push_back(inst.setup(r, c));
        }
        setup.push_back(std::move(row));
    }
    doc["machines"] = std::move(machines);
    doc["orders"] = std::move(orders);
    doc["jobs"] = std::move(jobs);
    doc["setup"] = std::move(setup);
    return doc;
}

} // namespace

Instance parse_instance(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InstanceError(line_column(text, e.byte == 0 ? 0 : e.byte - 1), "parse error: " + std::string(e.what()));
    }
    return from_json(doc);
}

Instance load_instance(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InstanceError(path.string(), "cannot open file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_instance(buffer.str());
}

std::string serialize_instance(const Instance& inst) {
    if (auto violations = check_instance(inst); !violations.empty()) {
        throw InstanceError("", "refusing to serialize invalid instance: " + violations.front());
    }
    return to_json(inst).dump() + "\n";
}

void save_instance(const Instance& inst, const std::filesystem::path& path) {
    const std::string text = serialize_instance(inst);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) {
        throw std::runtime_error("cannot write instance file " + path.string());
    }
}

} // namespace fafsp
