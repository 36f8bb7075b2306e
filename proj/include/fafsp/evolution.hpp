#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fafsp/llm.hpp"
#include "fafsp/model.hpp"
#include "fafsp/rng.hpp"
#include "fafsp/rules.hpp"

namespace fafsp {

struct Provenance {
    int generation = 0;  // 0 = initial population
    Operator op = Operator::Init;
    std::vector<int> parents;  // individual ids
    double temperature = 0.0;
    bool fallback = false;  // copy made after the retry budget ran out
};

struct RuleIndividual {
    int id = -1;
    std::string description;
    std::string source;
    double fitness = 0.0;  // mean total tardiness over the training set
    std::optional<Critique> critique;
    Provenance origin;
};

struct Strategy {
    Operator op = Operator::C1;
    std::size_t parents = 2;
    bool needs_critique = true;
};

/// C1 (2 parents, critique), C2 (2, none), M1 (1, critique), M2 (1, none).
std::vector<Strategy> default_strategies();

struct EvolutionConfig {
    int generations = 20;  // K
    int population = 4;    // P
    double u_low = 0.3;
    double u_up = 1.5;
    std::optional<double> evolution_temperature;  // fixed u0; chosen by init when unset
    double evaluator_temperature = 0.3;
    std::vector<Strategy> strategies = default_strategies();
    int tournament = 2;  // k
    int retries = 3;     // extra attempts per slot
    std::size_t sample_budget = 0;  // total LLM calls, 0 = unlimited
    int threads = 1;
    std::uint64_t seed = 1;
    std::optional<double> load_factor;  // reported in the scenario digest when known

    // Training set: explicit files, or `training_count` instances generated
    // from `training_scenario` (JSON scenario text).
    std::vector<std::filesystem::path> training_instances;
    std::string training_scenario;
    int training_count = 0;

    [[nodiscard]] std::vector<std::string> errors() const;
    /// Temperature of Init slot p (1-based): u_low + p (u_up - u_low) / P.
    [[nodiscard]] double init_temperature(int p) const;
};

/// Relative training paths resolve against `base_dir`.
EvolutionConfig parse_evolution_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
std::string serialize_evolution_config(const EvolutionConfig& cfg);
std::vector<Instance> load_training_set(const EvolutionConfig& cfg);

/// Mean total tardiness. Per-instance values are sorted before summation so
/// the result does not depend on instance order or thread count. Throws
/// RuleInvalid.
double evaluate_fitness(const RuleSpec& rule, std::span<const Instance> instances, int threads = 1);

/// Fixed statistical digest of a training set (text for prompts).
std::string summarize_features(std::span<const Instance> instances, std::optional<double> load_factor = {});

/// One LLM exchange as journaled.
struct JournalEntry {
    int generation = 0;
    std::string op;    // Init, C1, ..., or Eval
    std::string role;  // Generator or Evaluator
    std::string digest;
    double temperature = 0.0;
    std::optional<double> fitness;  // candidate fitness when one was obtained
    double best = 0.0;              // incumbent fitness after the call
    std::string status;             // accepted, critique, or the rejection reason
    std::string prompt;
    std::string response;
};

std::string journal_to_jsonl(std::span<const JournalEntry> journal);
std::vector<JournalEntry> journal_from_jsonl(const std::string& text);

struct TracePoint {
    std::size_t sample = 0;  // LLM calls consumed
    double best = 0.0;       // incumbent fitness
};

std::string trace_to_csv(std::span<const TracePoint> trace);

/// Parent selection: j tournaments of size k, members drawn uniformly with
/// replacement, fitness-min wins, ties to the lower index. Returns indices.
std::vector<std::size_t> tournament_select(std::span<const RuleIndividual> population, std::size_t j, int k,
                                           Rng& rng);
/// Same with an explicit draw function returning an index in [0, n).
std::vector<std::size_t> tournament_select(std::span<const RuleIndividual> population, std::size_t j, int k,
                                           const std::function<std::size_t(std::size_t)>& draw);

/// Evolution state and steps. The transport must outlive the engine.
class EvolutionEngine {
  public:
    EvolutionEngine(EvolutionConfig cfg, std::vector<Instance> training, Transport& transport);

    /// Elite (EDD expression) evaluation and critique, then P Init slots at
    /// the swept temperatures. Sets u0.
    void init_population();
    /// One generation of strategy-driven offspring; replaces the population.
    /// Returns false when the sample budget stopped it (population unchanged).
    bool evolve_generation();
    /// Critique of `candidate` against the current population extremes.
    /// Returns false (critique cleared) when the response is malformed.
    bool hybrid_evaluate(RuleIndividual& candidate);

    [[nodiscard]] const EvolutionConfig& config() const { return cfg_; }
    [[nodiscard]] const std::string& features() const { return features_; }
    [[nodiscard]] const RuleIndividual& elite() const { return elite_; }
    [[nodiscard]] const std::vector<RuleIndividual>& population() const { return population_; }
    [[nodiscard]] const RuleIndividual& incumbent() const { return incumbent_; }
    [[nodiscard]] double evolution_temperature() const { return u0_; }
    [[nodiscard]] int generation() const { return generation_; }
    [[nodiscard]] std::size_t samples() const { return samples_; }
    [[nodiscard]] bool budget_exhausted() const { return budget_exhausted_; }
    [[nodiscard]] const std::vector<JournalEntry>& journal() const { return journal_; }
    [[nodiscard]] const std::vector<TracePoint>& trace() const { return trace_; }

  private:
    struct BudgetStop {};

    std::string call(const PromptBundle& bundle, JournalEntry entry);
    std::optional<RuleIndividual> attempt(const PromptBundle& bundle, Provenance origin);
    void consider_incumbent(const RuleIndividual& ind);
    RuleSummary summary(const RuleIndividual& ind, bool with_critique) const;
    void refresh_critique(std::size_t member);

    EvolutionConfig cfg_;
    std::vector<Instance> training_;
    Transport* transport_;
    Rng rng_;
    std::string features_;

    RuleIndividual elite_;
    std::vector<RuleIndividual> population_;
    RuleIndividual incumbent_;
    double u0_ = 0.0;
    int generation_ = 0;
    int next_id_ = 0;
    std::size_t samples_ = 0;
    bool budget_exhausted_ = false;
    bool initialized_ = false;

    std::vector<JournalEntry> journal_;
    std::vector<TracePoint> trace_;
};

struct EvolutionResult {
    RuleIndividual best;
    double evolution_temperature = 0.0;
    std::vector<RuleIndividual> final_population;
    std::vector<TracePoint> trace;
    std::vector<JournalEntry> journal;
    std::size_t samples = 0;
    int generations_completed = 0;
    bool budget_exhausted = false;
};

/// init_population, then up to K generations (stopping early on budget).
EvolutionResult run_evolution(const EvolutionConfig& cfg, std::vector<Instance> training, Transport& transport);

/// Rule file text for an individual.
std::string format_individual(const RuleIndividual& ind);

} // namespace fafsp
