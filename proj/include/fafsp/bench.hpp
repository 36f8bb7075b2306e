#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fafsp/evolution.hpp"
#include "fafsp/generator.hpp"
#include "fafsp/rules.hpp"
#include "fafsp/schedule.hpp"

namespace fafsp {

/// Average relative improvement over the worst method: (worst - value) / worst.
/// Throws std::invalid_argument when worst <= 0.
double compute_ari(double value, double worst);

/// "m1-m2-phi-alpha-mu", e.g. "3-6-0.5-20-1".
std::string scenario_label(const ScenarioConfig& cfg);

/// The 24 combinations of machines {3x6, 5x12}, flexibility {0.5, 0.7},
/// dynamic orders {20, 50} and load {1, 2, 4}, each with its own seed.
std::vector<ScenarioConfig> scenario_grid(std::uint64_t seed);

struct BenchGrid {
    std::vector<ScenarioConfig> scenarios;
    int replications = 20;
};

/// {"seed": s, "replications": n, "scenarios": [...]}; without "scenarios"
/// the full 24-scenario grid is used.
BenchGrid parse_bench_grid(const std::string& json_text);

struct CellStats {
    double mean = 0.0;
    double sd = 0.0;
    std::vector<double> values;  // per instance, in instance order
};

struct BenchReport {
    std::vector<std::string> scenarios;
    std::vector<std::string> rules;
    std::vector<std::vector<CellStats>> cells;  // [scenario][rule]
    std::vector<std::vector<double>> ari;       // [scenario][rule], against that scenario's worst mean
    std::vector<double> average;                // per rule: mean of scenario means
    std::vector<double> average_ari;            // per rule, against the worst average
    std::vector<int> rank;                      // per rule, 1 = lowest average
};

/// Folds per-instance tardiness values [scenario][rule][instance] into a
/// report. ARI cells are 0 when the worst value is 0.
BenchReport build_report(std::vector<std::string> scenarios, std::vector<std::string> rules,
                         const std::vector<std::vector<std::vector<double>>>& values);

/// Generates `replications` instances per scenario (seeds from batch_seed)
/// and rolls every rule out on every instance.
BenchReport run_benchmark(std::span<const ScenarioConfig> scenarios, std::span<const RuleSpec> rules,
                          int replications, int threads = 1);

/// Same over preloaded instance sets, one per scenario label.
BenchReport run_benchmark(std::span<const std::string> labels, std::span<const std::vector<Instance>> instances,
                          std::span<const RuleSpec> rules, int threads = 1);

/// Plain-text table: mean tardiness per scenario, then Avg, ARI and rank rows.
std::string format_report(const BenchReport& report);
/// Long format: scenario,rule,mean,sd,ari.
std::string report_to_csv(const BenchReport& report);
/// scenario,instance,rule,tardiness (boxplot input).
std::string per_instance_csv(const BenchReport& report);

struct NamedSchedule {
    std::string name;
    Schedule schedule;
};

/// Writes convergence.csv (one row per journaled LLM call), per_instance.csv
/// and gantt/<name>.csv for each schedule. Files are overwritten, so
/// re-exporting the same inputs is byte-identical.
std::vector<std::filesystem::path> export_traces(std::span<const JournalEntry> journal, const BenchReport* report,
                                                 std::span<const NamedSchedule> schedules,
                                                 const std::filesystem::path& out_dir);

} // namespace fafsp
