#include "fafsp/bench.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "fafsp/dispatch.hpp"
#include "fafsp/text.hpp"

namespace fafsp {

double compute_ari(double value, double worst) {
    if (!(worst > 0.0)) {
        throw std::invalid_argument("ARI needs a positive worst value, got " + format_number(worst));
    }
    return (worst - value) / worst;
}

std::string scenario_label(const ScenarioConfig& cfg) {
    return std::to_string(cfg.assembly_machines) + '-' + std::to_string(cfg.processing_machines) + '-' +
           format_number(cfg.flexibility) + '-' + std::to_string(cfg.dynamic_orders) + '-' +
           format_number(cfg.load_factor);
}

std::vector<ScenarioConfig> scenario_grid(std::uint64_t seed) {
    std::vector<ScenarioConfig> out;
    const std::pair<int, int> machines[] = {{3, 6}, {5, 12}};
    for (auto [m1, m2] : machines) {
        for (double phi : {0.5, 0.7}) {
            for (int alpha : {20, 50}) {
                for (double mu : {1.0, 2.0, 4.0}) {
                    ScenarioConfig cfg;
                    cfg.assembly_machines = m1;
                    cfg.processing_machines = m2;
                    cfg.flexibility = phi;
                    cfg.dynamic_orders = alpha;
                    cfg.load_factor = mu;
                    cfg.seed = batch_seed(seed, 1000 + out.size());
                    out.push_back(cfg);
                }
            }
        }
    }
    return out;
}

BenchGrid parse_bench_grid(const std::string& json_text) {
    const auto doc = nlohmann::json::parse(json_text);
    BenchGrid grid;
    grid.replications = doc.value("replications", grid.replications);
    if (grid.replications < 1) {
        throw std::invalid_argument("replications must be >= 1");
    }
    const std::uint64_t seed = doc.value("seed", std::uint64_t{1});
    if (doc.contains("scenarios")) {
        std::size_t k = 0;
        for (const auto& s : doc["scenarios"]) {
            ScenarioConfig cfg = parse_scenario(s.dump());
            if (!s.contains("seed")) {
                cfg.seed = batch_seed(seed, 1000 + k);
            }
            ++k;
            grid.scenarios.push_back(cfg);
        }
    } else {
        grid.scenarios = scenario_grid(seed);
    }
    return grid;
}

namespace {

double mean_of(const std::vector<double>& xs) {
    // Summed in sorted order so the fold does not depend on evaluation order.
    std::vector<double> s = xs;
    std::sort(s.begin(), s.end());
    return s.empty() ? 0.0 : std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

double sd_of(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) {
        return 0.0;
    }
    std::vector<double> sq;
    for (double x : xs) {
        sq.push_back((x - mean) * (x - mean));
    }
    std::sort(sq.begin(), sq.end());
    return std::sqrt(std::accumulate(sq.begin(), sq.end(), 0.0) / static_cast<double>(xs.size() - 1));
}

std::vector<double> ari_row(const std::vector<double>& values) {
    const double worst = *std::max_element(values.begin(), values.end());
    std::vector<double> out;
    for (double v : values) {
        out.push_back(worst > 0.0 ? compute_ari(v, worst) : 0.0);
    }
    return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
    const auto t_count = static_cast<std::size_t>(std::max(1, threads));
    if (t_count == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(t_count);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < t_count; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t; i < n; i += t_count) {
                    body(i);
                }
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace

BenchReport build_report(std::vector<std::string> scenarios, std::vector<std::string> rules,
                         const std::vector<std::vector<std::vector<double>>>& values) {
    if (values.size() != scenarios.size()) {
        throw std::invalid_argument("report: value table does not match scenario count");
    }
    BenchReport r;
    r.scenarios = std::move(scenarios);
    r.rules = std::move(rules);
    const std::size_t n_rules = r.rules.size();
    std::vector<std::vector<double>> scenario_means(n_rules);
    for (const auto& row : values) {
        if (row.size() != n_rules) {
            throw std::invalid_argument("report: value table does not match rule count");
        }
        std::vector<CellStats> cells;
        std::vector<double> means;
        for (std::size_t k = 0; k < n_rules; ++k) {
            CellStats c;
            c.values = row[k];
            c.mean = mean_of(c.values);
            c.sd = sd_of(c.values, c.mean);
            means.push_back(c.mean);
            scenario_means[k].push_back(c.mean);
            cells.push_back(std::move(c));
        }
        r.ari.push_back(n_rules == 0 ? std::vector<double>{} : ari_row(means));
        r.cells.push_back(std::move(cells));
    }
    for (std::size_t k = 0; k < n_rules; ++k) {
        r.average.push_back(mean_of(scenario_means[k]));
    }
    if (n_rules > 0) {
        r.average_ari = ari_row(r.average);
    }
    std::vector<std::size_t> order(n_rules);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&r](std::size_t a, std::size_t b) { return r.average[a] < r.average[b]; });
    r.rank.assign(n_rules, 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        r.rank[order[pos]] = static_cast<int>(pos + 1);
    }
    return r;
}

BenchReport run_benchmark(std::span<const std::string> labels, std::span<const std::vector<Instance>> instances,
                          std::span<const RuleSpec> rules, int threads) {
    if (labels.size() != instances.size()) {
        throw std::invalid_argument("benchmark: one instance set per scenario label is required");
    }
    struct Job {
        std::size_t s, k, i;
    };
    std::vector<Job> jobs;
    std::vector<std::vector<std::vector<double>>> values(labels.size());
    for (std::size_t s = 0; s < labels.size(); ++s) {
        values[s].assign(rules.size(), std::vector<double>(instances[s].size(), 0.0));
        for (std::size_t k = 0; k < rules.size(); ++k) {
            for (std::size_t i = 0; i < instances[s].size(); ++i) {
                jobs.push_back({s, k, i});
            }
        }
    }
    parallel_for(jobs.size(), threads, [&](std::size_t n) {
        const Job& j = jobs[n];
        const Instance& inst = instances[j.s][j.i];
        values[j.s][j.k][j.i] = total_tardiness(run_dispatch(inst, rules[j.k]), inst.orders.size());
    });
    std::vector<std::string> rule_names;
    for (const auto& r : rules) {
        rule_names.push_back(r.name());
    }
    return build_report(std::vector<std::string>(labels.begin(), labels.end()), std::move(rule_names), values);
}

BenchReport run_benchmark(std::span<const ScenarioConfig> scenarios, std::span<const RuleSpec> rules,
                          int replications, int threads) {
    std::vector<std::string> labels;
    std::vector<std::vector<Instance>> sets(scenarios.size());
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        labels.push_back(scenario_label(scenarios[s]));
        sets[s].resize(static_cast<std::size_t>(replications));
    }
    parallel_for(scenarios.size() * static_cast<std::size_t>(replications), threads, [&](std::size_t n) {
        const std::size_t s = n / static_cast<std::size_t>(replications);
        const std::size_t i = n % static_cast<std::size_t>(replications);
        ScenarioConfig cfg = scenarios[s];
        cfg.seed = batch_seed(scenarios[s].seed, i);
        sets[s][i] = generate_instance(cfg);
    });
    return run_benchmark(labels, sets, rules, threads);
}

namespace {

std::string percent(double x) { return format_fixed(100.0 * x, 2) + '%'; }

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.insert(0, width - s.size(), ' ');
    }
    return s;
}

} // namespace

std::string format_report(const BenchReport& r) {
    std::size_t width = 10;
    for (const auto& name : r.rules) {
        width = std::max(width, name.size() + 2);
    }
    std::size_t label_width = 8;
    for (const auto& s : r.scenarios) {
        label_width = std::max(label_width, s.size() + 2);
    }
    auto row = [&](std::string label, const std::vector<std::string>& cells) {
        label.resize(label_width, ' ');
        std::string line = label;
        for (const auto& c : cells) {
            line += pad(c, width);
        }
        return line + '\n';
    };
    std::string out = row("scenario", r.rules);
    for (std::size_t s = 0; s < r.scenarios.size(); ++s) {
        std::vector<std::string> cells;
        for (const auto& c : r.cells[s]) {
            cells.push_back(format_fixed(c.mean, 2));
        }
        out += row(r.scenarios[s], cells);
    }
    std::vector<std::string> avg, ari, rank;
    for (std::size_t k = 0; k < r.rules.size(); ++k) {
        avg.push_back(format_fixed(r.average[k], 2));
        ari.push_back(percent(r.average_ari[k]));
        rank.push_back(std::to_string(r.rank[k]));
    }
    out += row("Avg", avg);
    out += row("ARI", ari);
    out += row("Rank", rank);
    return out;
}

std::string report_to_csv(const BenchReport& r) {
    std::string out = "scenario,rule,mean,sd,ari\n";
    for (std::size_t s = 0; s < r.scenarios.size(); ++s) {
        for (std::size_t k = 0; k < r.rules.size(); ++k) {
            out += r.scenarios[s] + ",\"" + r.rules[k] + "\"," + format_number(r.cells[s][k].mean) + ',' +
                   format_number(r.cells[s][k].sd) + ',' + format_number(r.ari[s][k]) + '\n';
        }
    }
    for (std::size_t k = 0; k < r.rules.size(); ++k) {
        out += "Avg,\"" + r.rules[k] + "\"," + format_number(r.average[k]) + ",," + format_number(r.average_ari[k]) +
               '\n';
    }
    return out;
}

std::string per_instance_csv(const BenchReport& r) {
    std::string out = "scenario,instance,rule,tardiness\n";
    for (std::size_t s = 0; s < r.scenarios.size(); ++s) {
        for (std::size_t k = 0; k < r.rules.size(); ++k) {
            const auto& vals = r.cells[s][k].values;
            for (std::size_t i = 0; i < vals.size(); ++i) {
                out += r.scenarios[s] + ',' + std::to_string(i) + ",\"" + r.rules[k] + "\"," +
                       format_number(vals[i]) + '\n';
            }
        }
    }
    return out;
}

std::vector<std::filesystem::path> export_traces(std::span<const JournalEntry> journal, const BenchReport* report,
                                                 std::span<const NamedSchedule> schedules,
                                                 const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::filesystem::path> written;

    std::vector<TracePoint> trace;
    for (std::size_t i = 0; i < journal.size(); ++i) {
        trace.push_back({i + 1, journal[i].best});
    }
    const auto convergence = out_dir / "convergence.csv";
    write_file(convergence.string(), trace_to_csv(trace));
    written.push_back(convergence);

    const auto per_instance = out_dir / "per_instance.csv";
    write_file(per_instance.string(),
               report != nullptr ? per_instance_csv(*report) : std::string("scenario,instance,rule,tardiness\n"));
    written.push_back(per_instance);

    if (!schedules.empty()) {
        const auto gantt = out_dir / "gantt";
        std::filesystem::create_directories(gantt);
        for (const auto& s : schedules) {
            std::string text = "job,machine,setup,start,completion\n";
            for (const auto& a : s.schedule.arcs) {
                text += std::to_string(a.job) + ',' + std::to_string(a.machine) + ',' + format_number(a.setup) + ',' +
                        format_number(a.start) + ',' + format_number(a.completion) + '\n';
            }
            const auto path = gantt / (s.name + ".csv");
            write_file(path.string(), text);
            written.push_back(path);
        }
    }
    return written;
}

} // namespace fafsp
