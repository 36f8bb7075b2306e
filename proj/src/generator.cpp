#include "fafsp/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace fafsp {

namespace {

// Substream tags. Changing any of these changes every generated instance.
enum Stream : std::uint64_t {
    kRates = 1,
    kStructure = 2,
    kEligibility = 3,
    kWork = 4,
    kSetup = 5,
    kArrivals = 6,
    kDueDates = 7,
};

struct StageSums {
    double max_processing = 0.0;
    double min_assembly = 0.0;
    double max_assembly = 0.0;
};

StageSums stage_sums(const Instance& inst, int order_id) {
    std::vector<double> per_machine(inst.machines.size(), 0.0);
    for (int j : inst.order_jobs(order_id)) {
        for (const auto& e : inst.job(j).eligible) {
            per_machine[static_cast<std::size_t>(e.machine)] += e.minutes;
        }
    }
    StageSums s;
    s.min_assembly = std::numeric_limits<double>::infinity();
    for (const auto& m : inst.machines) {
        const double v = per_machine[static_cast<std::size_t>(m.id)];
        if (m.stage == Stage::Processing) {
            s.max_processing = std::max(s.max_processing, v);
        } else {
            s.min_assembly = std::min(s.min_assembly, v);
            s.max_assembly = std::max(s.max_assembly, v);
        }
    }
    if (!std::isfinite(s.min_assembly)) {
        s.min_assembly = 0.0;
    }
    return s;
}

double truncated_normal(Rng& rng, double mean, double sd, double floor) {
    for (;;) {
        const double v = rng.normal(mean, sd);
        if (v > floor) {
            return v;
        }
    }
}

} // namespace

std::vector<std::string> ScenarioConfig::errors() const {
    std::vector<std::string> out;
    if (assembly_machines < 1) {
        out.emplace_back("m1 (assembly machines) must be >= 1");
    }
    if (processing_machines < 1) {
        out.emplace_back("m2 (processing machines) must be >= 1");
    }
    if (!(flexibility > 0.0 && flexibility <= 1.0)) {
        out.emplace_back("flexibility must lie in (0, 1]");
    }
    if (dynamic_orders < 0) {
        out.emplace_back("alpha must be >= 0");
    }
    if (initial_orders < 0) {
        out.emplace_back("n_init must be >= 0");
    }
    if (dynamic_orders + initial_orders < 1) {
        out.emplace_back("at least one order is required");
    }
    if (!(load_factor > 0.0) || !std::isfinite(load_factor)) {
        out.emplace_back("load factor must be positive and finite");
    }
    if (!(tightness >= 0.0 && tightness <= 1.0)) {
        out.emplace_back("T must lie in [0, 1]");
    }
    if (!(due_range >= 0.0 && due_range <= 1.0)) {
        out.emplace_back("R must lie in [0, 1]");
    }
    return out;
}

std::vector<std::string> ScenarioConfig::warnings() const {
    std::vector<std::string> out;
    if (1.0 - tightness - due_range / 2.0 < 0.0) {
        out.emplace_back("1 - T - R/2 < 0: some due offsets will be clamped to 0");
    }
    return out;
}

int sample_product_count(Rng& rng) { return rng.geometric_half(); }

double order_lower_bound(const Instance& inst, int order_id) {
    const StageSums s = stage_sums(inst, order_id);
    return std::max(s.max_processing + s.min_assembly, s.max_assembly);
}

double order_load_estimate(const Instance& inst, int order_id) {
    const StageSums s = stage_sums(inst, order_id);
    return s.max_processing + s.min_assembly;
}

double sample_due_date(double lower_bound, double tightness, double due_range, double arrival, Rng& rng) {
    const double lo = lower_bound * (1.0 - tightness - due_range / 2.0);
    const double hi = lower_bound * (1.0 - tightness + due_range / 2.0);
    return arrival + std::max(0.0, rng.uniform(lo, hi));
}

std::vector<double> schedule_arrivals(std::span<const double> load_estimates, int initial_orders,
                                      double load_factor, Rng& rng) {
    std::vector<double> arrivals(load_estimates.size(), 0.0);
    double arrived_load = 0.0;
    double previous = 0.0;
    for (std::size_t i = 0; i < load_estimates.size(); ++i) {
        if (static_cast<int>(i) < initial_orders) {
            arrivals[i] = 0.0;
        } else {
            double mean_gap = 0.0;
            if (i == 0) {
                // Nothing has arrived yet: the order's own estimate stands in.
                mean_gap = load_estimates[0] / load_factor;
            } else {
                mean_gap = arrived_load / (static_cast<double>(i) * load_factor);
            }
            arrivals[i] = previous + rng.exponential(mean_gap);
        }
        previous = arrivals[i];
        arrived_load += load_estimates[i];
    }
    return arrivals;
}

Instance generate_instance(const ScenarioConfig& cfg, const RateModel& rates) {
    if (auto errs = cfg.errors(); !errs.empty()) {
        throw std::invalid_argument("invalid scenario: " + errs.front());
    }
    const Rng root(cfg.seed);
    Rng rate_rng = root.split(kRates);
    Rng structure_rng = root.split(kStructure);
    Rng elig_rng = root.split(kEligibility);
    Rng work_rng = root.split(kWork);
    Rng setup_rng = root.split(kSetup);
    Rng arrival_rng = root.split(kArrivals);
    Rng due_rng = root.split(kDueDates);

    Instance inst;
    std::vector<double> speed;
    for (int m = 0; m < cfg.processing_machines; ++m) {
        inst.machines.push_back({static_cast<int>(inst.machines.size()), Stage::Processing});
        speed.push_back(truncated_normal(rate_rng, rates.processing_ratio * rates.assembly_mean,
                                         rates.processing_ratio * rates.assembly_sd, rates.min_rate));
    }
    for (int m = 0; m < cfg.assembly_machines; ++m) {
        inst.machines.push_back({static_cast<int>(inst.machines.size()), Stage::Assembly});
        speed.push_back(truncated_normal(rate_rng, rates.assembly_mean, rates.assembly_sd, rates.min_rate));
    }

    auto add_job = [&](JobKind kind) {
        Job j;
        j.id = static_cast<int>(inst.jobs.size());
        j.kind = kind;
        const double work = work_rng.uniform(4.0, 12.0);
        std::vector<int> same_stage;
        for (const auto& m : inst.machines) {
            if (m.stage == kind) {
                same_stage.push_back(m.id);
            }
        }
        std::vector<int> chosen;
        for (int m : same_stage) {
            if (elig_rng.bernoulli(cfg.flexibility)) {
                chosen.push_back(m);
            }
        }
        if (chosen.empty()) {
            chosen.push_back(same_stage[elig_rng.index(same_stage.size())]);
        }
        for (int m : chosen) {
            j.eligible.push_back({m, work / speed[static_cast<std::size_t>(m)]});
        }
        inst.jobs.push_back(std::move(j));
        return inst.jobs.back().id;
    };

    const int n_orders = cfg.initial_orders + cfg.dynamic_orders;
    int next_product = 0;
    for (int i = 0; i < n_orders; ++i) {
        Order o;
        o.id = i;
        const int n_products = sample_product_count(structure_rng);
        for (int p = 0; p < n_products; ++p) {
            Product prod;
            prod.id = next_product++;
            const auto n_proc = structure_rng.uniform_int(2, 5);
            for (std::int64_t k = 0; k < n_proc; ++k) {
                prod.processing_jobs.push_back(add_job(JobKind::Processing));
            }
            prod.assembly_job = add_job(JobKind::Assembly);
            o.products.push_back(std::move(prod));
        }
        inst.orders.push_back(std::move(o));
    }
    link_instance(inst);

    double pt_sum = 0.0;
    std::size_t pt_count = 0;
    for (const auto& j : inst.jobs) {
        for (const auto& e : j.eligible) {
            pt_sum += e.minutes;
            ++pt_count;
        }
    }
    const double setup_cap = 0.2 * pt_sum / static_cast<double>(pt_count);
    const int n_jobs = static_cast<int>(inst.jobs.size());
    inst.setup = SetupMatrix(inst.jobs.size());
    for (int a = 0; a < n_jobs; ++a) {
        for (int b = 0; b < n_jobs; ++b) {
            const double v = setup_rng.uniform(0.0, setup_cap);
            inst.setup.at(a, b) = a == b ? 0.0 : v;
        }
    }

    std::vector<double> loads;
    loads.reserve(inst.orders.size());
    for (const auto& o : inst.orders) {
        loads.push_back(order_load_estimate(inst, o.id));
    }
    const auto arrivals = schedule_arrivals(loads, cfg.initial_orders, cfg.load_factor, arrival_rng);
    for (auto& o : inst.orders) {
        o.arrival = arrivals[static_cast<std::size_t>(o.id)];
        o.due = sample_due_date(order_lower_bound(inst, o.id), cfg.tightness, cfg.due_range, o.arrival, due_rng);
    }
    return inst;
}

std::uint64_t batch_seed(std::uint64_t scenario_seed, std::uint64_t k) {
    return splitmix64(scenario_seed * 0x100000001B3ULL + k);
}

ScenarioConfig parse_scenario(const std::string& json_text) {
    const auto doc = nlohmann::json::parse(json_text);
    ScenarioConfig cfg;
    cfg.assembly_machines = doc.value("m1", cfg.assembly_machines);
    cfg.processing_machines = doc.value("m2", cfg.processing_machines);
    cfg.flexibility = doc.value("flexibility", cfg.flexibility);
    cfg.dynamic_orders = doc.value("alpha", cfg.dynamic_orders);
    cfg.load_factor = doc.value("mu", cfg.load_factor);
    cfg.tightness = doc.value("T", cfg.tightness);
    cfg.due_range = doc.value("R", cfg.due_range);
    cfg.initial_orders = doc.value("n_init", cfg.initial_orders);
    cfg.seed = doc.value("seed", cfg.seed);
    return cfg;
}

std::string serialize_scenario(const ScenarioConfig& cfg) {
    nlohmann::json doc = {{"m1", cfg.assembly_machines}, {"m2", cfg.processing_machines},
                          {"flexibility", cfg.flexibility}, {"alpha", cfg.dynamic_orders},
                          {"mu", cfg.load_factor},       {"T", cfg.tightness},
                          {"R", cfg.due_range},          {"n_init", cfg.initial_orders},
                          {"seed", cfg.seed}};
    return doc.dump(2) + "\n";
}

} // namespace fafsp
