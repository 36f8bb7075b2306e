#include "fafsp/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fafsp {

std::string_view to_string(Stage stage) {
    return stage == Stage::Processing ? "processing" : "assembly";
}

double Job::time_on(int machine) const {
    auto it = std::lower_bound(eligible.begin(), eligible.end(), machine,
                               [](const Eligibility& e, int m) { return e.machine < m; });
    if (it == eligible.end() || it->machine != machine) {
        return -1.0;
    }
    return it->minutes;
}

double Job::mean_time() const {
    if (eligible.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& e : eligible) {
        sum += e.minutes;
    }
    return sum / static_cast<double>(eligible.size());
}

std::size_t Instance::machine_count(Stage stage) const {
    return static_cast<std::size_t>(
        std::count_if(machines.begin(), machines.end(), [stage](const Machine& m) { return m.stage == stage; }));
}

bool Instance::is_assembly_of(int product_id, int job_id) const {
    const Job& j = job(job_id);
    return j.kind == JobKind::Assembly && j.product_id == product_id;
}

bool Instance::product_in_order(int order_id, int product_id) const {
    const auto& products = order(order_id).products;
    return std::any_of(products.begin(), products.end(), [&](const Product& p) { return p.id == product_id; });
}

std::vector<int> Instance::order_jobs(int order_id) const {
    std::vector<int> ids;
    for (const auto& p : order(order_id).products) {
        ids.insert(ids.end(), p.processing_jobs.begin(), p.processing_jobs.end());
        ids.push_back(p.assembly_job);
    }
    return ids;
}

void link_instance(Instance& inst) {
    const int n = static_cast<int>(inst.jobs.size());
    auto valid = [n](int id) { return id >= 0 && id < n; };
    for (auto& j : inst.jobs) {
        j.order_id = -1;
        j.product_id = -1;
        j.predecessors.clear();
    }
    for (const auto& o : inst.orders) {
        for (const auto& p : o.products) {
            for (int pj : p.processing_jobs) {
                if (valid(pj)) {
                    auto& job = inst.jobs[static_cast<std::size_t>(pj)];
                    job.order_id = o.id;
                    job.product_id = p.id;
                }
            }
            if (valid(p.assembly_job)) {
                auto& job = inst.jobs[static_cast<std::size_t>(p.assembly_job)];
                job.order_id = o.id;
                job.product_id = p.id;
                job.predecessors = p.processing_jobs;
                std::sort(job.predecessors.begin(), job.predecessors.end());
            }
        }
    }
}

std::vector<std::string> check_instance(const Instance& inst) {
    std::vector<std::string> out;
    auto add = [&out](std::string msg) { out.push_back(std::move(msg)); };

    // Machines.
    if (inst.machines.empty()) {
        add("no machines");
    }
    for (std::size_t i = 0; i < inst.machines.size(); ++i) {
        if (inst.machines[i].id != static_cast<int>(i)) {
            add("machine ids not dense at position " + std::to_string(i));
        }
    }
    if (!inst.machines.empty()) {
        if (inst.machine_count(Stage::Processing) == 0) {
            add("no processing machine");
        }
        if (inst.machine_count(Stage::Assembly) == 0) {
            add("no assembly machine");
        }
    }
    const int n_machines = static_cast<int>(inst.machines.size());

    // Jobs.
    const int n_jobs = static_cast<int>(inst.jobs.size());
    for (std::size_t i = 0; i < inst.jobs.size(); ++i) {
        const Job& j = inst.jobs[i];
        const std::string tag = "job " + std::to_string(j.id);
        if (j.id != static_cast<int>(i)) {
            add("job ids not dense at position " + std::to_string(i));
            continue;
        }
        if (j.eligible.empty()) {
            add(tag + " has no eligible machine");
        }
        for (std::size_t e = 0; e < j.eligible.size(); ++e) {
            const auto& el = j.eligible[e];
            if (e > 0 && j.eligible[e - 1].machine >= el.machine) {
                add(tag + " eligibility not sorted by machine");
            }
            if (el.machine < 0 || el.machine >= n_machines) {
                add(tag + " references unknown machine " + std::to_string(el.machine));
                continue;
            }
            if (inst.machine(el.machine).stage != j.kind) {
                add("stage mismatch job " + std::to_string(j.id) + " machine " + std::to_string(el.machine));
            }
            if (!std::isfinite(el.minutes) || el.minutes < 0.0) {
                add(tag + " has invalid processing time on machine " + std::to_string(el.machine));
            }
        }
        if (j.kind == JobKind::Processing && !j.predecessors.empty()) {
            add(tag + " is a processing job with predecessors");
        }
    }

    // Orders and products: the nesting must partition the job set.
    if (inst.orders.empty()) {
        add("no orders");
    }
    std::vector<int> owner_count(static_cast<std::size_t>(n_jobs), 0);
    int expected_product = 0;
    for (std::size_t i = 0; i < inst.orders.size(); ++i) {
        const Order& o = inst.orders[i];
        const std::string tag = "order " + std::to_string(o.id);
        if (o.id != static_cast<int>(i)) {
            add("order ids not dense at position " + std::to_string(i));
        }
        if (!std::isfinite(o.arrival) || o.arrival < 0.0) {
            add(tag + " arrival < 0");
        }
        if (!std::isfinite(o.due) || o.due < o.arrival) {
            add(tag + " due < arrival");
        }
        if (o.products.empty()) {
            add(tag + " has no products");
        }
        for (const auto& p : o.products) {
            const std::string ptag = "product " + std::to_string(p.id);
            if (p.id != expected_product) {
                add("product ids not dense at product " + std::to_string(p.id));
            }
            ++expected_product;
            if (p.processing_jobs.empty()) {
                add("assembly without kit: " + ptag);
            }
            for (int pj : p.processing_jobs) {
                if (pj < 0 || pj >= n_jobs) {
                    add(ptag + " references dangling job " + std::to_string(pj));
                    continue;
                }
                ++owner_count[static_cast<std::size_t>(pj)];
                const Job& j = inst.job(pj);
                if (j.kind != JobKind::Processing) {
                    add(ptag + " lists non-processing job " + std::to_string(pj));
                }
                if (j.order_id != o.id || j.product_id != p.id) {
                    add("job " + std::to_string(pj) + " ownership does not match " + ptag);
                }
            }
            if (p.assembly_job < 0 || p.assembly_job >= n_jobs) {
                add(ptag + " references dangling job " + std::to_string(p.assembly_job));
                continue;
            }
            ++owner_count[static_cast<std::size_t>(p.assembly_job)];
            const Job& a = inst.job(p.assembly_job);
            if (a.kind != JobKind::Assembly) {
                add(ptag + " assembly job " + std::to_string(a.id) + " is not an assembly job");
            }
            if (a.order_id != o.id || a.product_id != p.id) {
                add("job " + std::to_string(a.id) + " ownership does not match " + ptag);
            }
            std::vector<int> kit = p.processing_jobs;
            std::sort(kit.begin(), kit.end());
            if (!kit.empty() && a.predecessors != kit) {
                add("job " + std::to_string(a.id) + " predecessors differ from its product kit");
            }
        }
    }
    for (int j = 0; j < n_jobs; ++j) {
        const int c = owner_count[static_cast<std::size_t>(j)];
        if (c == 0) {
            add("job " + std::to_string(j) + " not owned by any product");
        } else if (c > 1) {
            add("job " + std::to_string(j) + " owned " + std::to_string(c) + " times");
        }
    }

    // Setup matrix.
    if (inst.setup.size() != inst.jobs.size()) {
        add("setup matrix size mismatch");
    } else {
        bool negative = false;
        bool non_finite = false;
        for (double v : inst.setup.values()) {
            negative = negative || v < 0.0;
            non_finite = non_finite || !std::isfinite(v);
        }
        if (negative) {
            add("setup < 0");
        }
        if (non_finite) {
            add("setup not finite");
        }
    }
    return out;
}

} // namespace fafsp
