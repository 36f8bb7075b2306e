#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fafsp/model.hpp"
#include "fafsp/rng.hpp"

namespace fafsp {

/// Scenario parameters for synthetic dynamic instances.
struct ScenarioConfig {
    int assembly_machines = 3;    // m1
    int processing_machines = 6;  // m2
    double flexibility = 0.5;     // phi in (0, 1]
    int dynamic_orders = 20;      // alpha, orders arriving after t = 0
    double load_factor = 1.0;     // mu > 0
    double tightness = 0.2;       // T
    double due_range = 0.4;       // R
    int initial_orders = 5;       // n_init
    std::uint64_t seed = 1;

    /// Hard errors; empty when the config can be generated.
    [[nodiscard]] std::vector<std::string> errors() const;
    /// Soft issues, e.g. a due-date window whose lower end is negative.
    [[nodiscard]] std::vector<std::string> warnings() const;
};

struct RateModel {
    double assembly_mean = 8.0;
    double assembly_sd = 2.0;
    double processing_ratio = 0.8;
    double min_rate = 0.5;
};

/// Products per order: P(n) = (1/2)^n on {1, 2, ...}.
int sample_product_count(Rng& rng);

/// Makespan lower bound of one order:
///   max( max_P sum PT_proc + min_A sum PT_asm , max_A sum PT_asm ),
/// where per-machine sums include only jobs qualified on that machine.
double order_lower_bound(const Instance& inst, int order_id);

/// Load estimate of one order used by the arrival process:
///   max_P sum PT_proc + min_A sum PT_asm.
double order_load_estimate(const Instance& inst, int order_id);

/// Due date AT + U, U ~ Uniform[L(1 - T - R/2), L(1 - T + R/2)], U clamped at 0.
double sample_due_date(double lower_bound, double tightness, double due_range, double arrival, Rng& rng);

/// Arrival times for orders in creation order. The first `initial_orders`
/// arrive at 0; each later order follows its predecessor by an exponential gap
/// whose mean is (sum of load estimates of orders so far) / (count * mu).
std::vector<double> schedule_arrivals(std::span<const double> load_estimates, int initial_orders,
                                      double load_factor, Rng& rng);

Instance generate_instance(const ScenarioConfig& cfg, const RateModel& rates = {});

/// Seed of the k-th instance of a scenario batch.
std::uint64_t batch_seed(std::uint64_t scenario_seed, std::uint64_t k);

ScenarioConfig parse_scenario(const std::string& json_text);
std::string serialize_scenario(const ScenarioConfig& cfg);

} // namespace fafsp
