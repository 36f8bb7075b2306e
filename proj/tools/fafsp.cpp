// Command-line front end: gen, run, evolve, bench, validate, export.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>

#include "fafsp/bench.hpp"
#include "fafsp/dispatch.hpp"
#include "fafsp/evolution.hpp"
#include "fafsp/generator.hpp"
#include "fafsp/instance_io.hpp"
#include "fafsp/llm.hpp"
#include "fafsp/rules.hpp"
#include "fafsp/text.hpp"
#include "fafsp/validator.hpp"

namespace fs = std::filesystem;
using namespace fafsp;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kValidation = 2;
constexpr int kTransport = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<RuleSpec> parse_rule_list(const std::string& list) {
    std::vector<RuleSpec> rules;
    if (list == "all") {
        for (auto id : kBuiltinRules) {
            rules.push_back(RuleSpec::builtin(id));
        }
        return rules;
    }
    for (auto item : split(list, ',')) {
        const auto name = trim(item);
        if (!name.empty()) {
            rules.push_back(load_rule(std::string(name)));
        }
    }
    if (rules.empty()) {
        throw UsageError("no rules given");
    }
    return rules;
}

// ----------------------------------------------------------------------- gen

struct GenArgs {
    std::string scenario_file;
    ScenarioConfig cfg;
    int count = 1;
    std::string out;
};

int cmd_gen(const GenArgs& a, std::optional<std::uint64_t> seed) {
    ScenarioConfig cfg = a.cfg;
    if (!a.scenario_file.empty()) {
        cfg = parse_scenario(read_file(a.scenario_file));
    }
    if (seed) {
        cfg.seed = *seed;
    }
    if (const auto errs = cfg.errors(); !errs.empty()) {
        throw UsageError("invalid scenario: " + errs.front());
    }
    for (const auto& w : cfg.warnings()) {
        std::cerr << "warning: " << w << '\n';
    }
    if (a.count == 1 && (a.out.empty() || a.out.ends_with(".json"))) {
        const Instance inst = generate_instance(cfg);
        if (a.out.empty()) {
            std::cout << serialize_instance(inst);
        } else {
            save_instance(inst, a.out);
        }
        return kOk;
    }
    const fs::path dir = a.out.empty() ? fs::path("instances") : fs::path(a.out);
    fs::create_directories(dir);
    for (int k = 0; k < a.count; ++k) {
        ScenarioConfig c = cfg;
        c.seed = batch_seed(cfg.seed, static_cast<std::uint64_t>(k));
        char name[64];
        std::snprintf(name, sizeof name, "%s_%03d.json", scenario_label(cfg).c_str(), k);
        save_instance(generate_instance(c), dir / name);
    }
    std::cout << "wrote " << a.count << " instances to " << dir.string() << '\n';
    return kOk;
}

// ----------------------------------------------------------------------- run

int cmd_run(const std::string& rule_name, const std::string& instance_path, const std::string& schedule_out) {
    const Instance inst = load_instance(instance_path);
    const RuleSpec rule = load_rule(rule_name);
    const Schedule sched = run_dispatch(inst, rule);
    const auto violations = validate_schedule(inst, sched);
    if (!schedule_out.empty()) {
        write_file(schedule_out, format_schedule(sched));
    }
    std::cout << "rule: " << rule.name() << '\n'
              << "orders: " << inst.orders.size() << ", jobs: " << inst.jobs.size() << '\n'
              << "total tardiness: " << format_fixed(total_tardiness(sched, inst.orders.size()), 4) << '\n';
    for (const auto& v : violations) {
        std::cerr << to_string(v) << '\n';
    }
    return violations.empty() ? kOk : kValidation;
}

// -------------------------------------------------------------------- evolve

struct EvolveArgs {
    std::string config;
    std::string transport = "replay";
    std::string cassette;
    std::string out = "evolution_out";
    bool lenient = false;
};

int cmd_evolve(const EvolveArgs& a, std::optional<std::uint64_t> seed) {
    const fs::path cfg_path(a.config);
    EvolutionConfig cfg = parse_evolution_config(read_file(a.config), cfg_path.parent_path());
    if (seed) {
        cfg.seed = *seed;
    }
    if (const auto errs = cfg.errors(); !errs.empty()) {
        throw UsageError("invalid evolution config: " + errs.front());
    }
    std::unique_ptr<Transport> live;
    std::unique_ptr<Transport> transport;
    if (a.transport == "replay") {
        if (a.cassette.empty()) {
            throw UsageError("--cassette is required for replay");
        }
        transport = std::make_unique<ReplayTransport>(load_cassette(a.cassette), !a.lenient);
    } else if (a.transport == "live" || a.transport == "record") {
        auto env = LiveConfig::from_env();
        if (!env) {
            throw TransportError("FAFSP_LLM_BASE_URL, FAFSP_LLM_API_KEY and FAFSP_LLM_MODEL must be set");
        }
        live = std::make_unique<LiveTransport>(*env);
        if (a.transport == "record") {
            if (a.cassette.empty()) {
                throw UsageError("--cassette is required for record");
            }
            transport = std::make_unique<RecordTransport>(*live, a.cassette);
        } else {
            transport = std::move(live);
        }
    } else {
        throw UsageError("unknown transport '" + a.transport + "' (live, record or replay)");
    }

    const auto result = run_evolution(cfg, load_training_set(cfg), *transport);
    const fs::path out(a.out);
    fs::create_directories(out);
    write_file((out / "best_rule.txt").string(), format_individual(result.best));
    write_file((out / "convergence.csv").string(), trace_to_csv(result.trace));
    write_file((out / "journal.jsonl").string(), journal_to_jsonl(result.journal));
    std::cout << "best fitness: " << format_fixed(result.best.fitness, 4) << '\n'
              << "best rule: " << result.best.source << '\n'
              << "evolution temperature: " << format_number(result.evolution_temperature) << '\n'
              << "generations: " << result.generations_completed << ", LLM calls: " << result.samples
              << (result.budget_exhausted ? " (budget exhausted)" : "") << '\n'
              << "outputs in " << out.string() << '\n';
    return kOk;
}

// --------------------------------------------------------------------- bench

struct BenchArgs {
    std::string grid;
    std::string rules = "all";
    int replications = 0;
    int threads = 1;
    std::string out;
};

int cmd_bench(const BenchArgs& a, std::optional<std::uint64_t> seed) {
    BenchGrid grid;
    if (!a.grid.empty()) {
        grid = parse_bench_grid(read_file(a.grid));
    } else {
        grid.scenarios = scenario_grid(1);
    }
    if (seed) {
        for (std::size_t k = 0; k < grid.scenarios.size(); ++k) {
            grid.scenarios[k].seed = batch_seed(*seed, 1000 + k);
        }
    }
    if (a.replications > 0) {
        grid.replications = a.replications;
    }
    const auto rules = parse_rule_list(a.rules);
    const BenchReport report = run_benchmark(grid.scenarios, rules, grid.replications, a.threads);
    std::cout << format_report(report);
    if (!a.out.empty()) {
        fs::create_directories(a.out);
        write_file((fs::path(a.out) / "report.csv").string(), report_to_csv(report));
        write_file((fs::path(a.out) / "per_instance.csv").string(), per_instance_csv(report));
    }
    return kOk;
}

// ------------------------------------------------------------------ validate

int cmd_validate(const std::string& instance_path, const std::string& schedule_path) {
    const Instance inst = load_instance(instance_path);
    const Schedule sched = parse_schedule(read_file(schedule_path));
    const auto violations = validate_schedule(inst, sched);
    if (violations.empty()) {
        std::cout << "ok: " << sched.arcs.size() << " arcs, " << sched.orders.size() << " orders, total tardiness "
                  << format_fixed(total_tardiness(sched), 4) << '\n';
        return kOk;
    }
    for (const auto& v : violations) {
        std::cout << to_string(v) << '\n';
    }
    std::cout << violations.size() << " violation(s)\n";
    return kValidation;
}

// -------------------------------------------------------------------- export

struct ExportArgs {
    std::string journal;
    std::vector<std::string> schedules;
    std::string out = "traces";
};

int cmd_export(const ExportArgs& a) {
    std::vector<JournalEntry> journal;
    if (!a.journal.empty()) {
        journal = journal_from_jsonl(read_file(a.journal));
    }
    std::vector<NamedSchedule> schedules;
    for (const auto& path : a.schedules) {
        schedules.push_back({fs::path(path).stem().string(), parse_schedule(read_file(path))});
    }
    for (const auto& p : export_traces(journal, nullptr, schedules, a.out)) {
        std::cout << p.string() << '\n';
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dispatching rules for a dynamic flexible assembly flow shop"};
    app.require_subcommand(1);
    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed, "Seed overriding scenario/config seeds");

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate instances");
    gen_cmd->add_option("--scenario", gen.scenario_file, "Scenario JSON file");
    gen_cmd->add_option("--m1", gen.cfg.assembly_machines, "Assembly machines");
    gen_cmd->add_option("--m2", gen.cfg.processing_machines, "Processing machines");
    gen_cmd->add_option("--phi", gen.cfg.flexibility, "Flexibility");
    gen_cmd->add_option("--alpha", gen.cfg.dynamic_orders, "Dynamic orders");
    gen_cmd->add_option("--mu", gen.cfg.load_factor, "Load factor");
    gen_cmd->add_option("--tightness", gen.cfg.tightness, "Due-date tightness T");
    gen_cmd->add_option("--range", gen.cfg.due_range, "Due-date range R");
    gen_cmd->add_option("--n-init", gen.cfg.initial_orders, "Orders present at time 0");
    gen_cmd->add_option("--count", gen.count, "Number of instances")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--out", gen.out, "Output file (.json) or directory");

    std::string rule_name, instance_path, schedule_out;
    auto* run_cmd = app.add_subcommand("run", "Dispatch one instance with one rule");
    run_cmd->add_option("--rule", rule_name, "Builtin name or rule file")->required();
    run_cmd->add_option("--instance", instance_path, "Instance JSON")->required();
    run_cmd->add_option("--schedule-out", schedule_out, "Write the schedule here");

    EvolveArgs evolve;
    auto* evolve_cmd = app.add_subcommand("evolve", "Evolve a rule with an LLM");
    evolve_cmd->add_option("--config", evolve.config, "Evolution config JSON")->required();
    evolve_cmd->add_option("--transport", evolve.transport, "live, record or replay");
    evolve_cmd->add_option("--cassette", evolve.cassette, "Cassette file (record/replay)");
    evolve_cmd->add_option("--out", evolve.out, "Output directory");
    evolve_cmd->add_flag("--lenient", evolve.lenient, "Replay misses return empty responses");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark rules over scenarios");
    bench_cmd->add_option("--grid", bench.grid, "Grid JSON (default: the 24-scenario grid)");
    bench_cmd->add_option("--rules", bench.rules, "Comma-separated builtins or rule files, or 'all'");
    bench_cmd->add_option("--replications", bench.replications, "Instances per scenario");
    bench_cmd->add_option("--threads", bench.threads, "Worker threads")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--out", bench.out, "Directory for report.csv and per_instance.csv");

    std::string v_instance, v_schedule;
    auto* validate_cmd = app.add_subcommand("validate", "Check a schedule against an instance");
    validate_cmd->add_option("--instance", v_instance, "Instance JSON")->required();
    validate_cmd->add_option("--schedule", v_schedule, "Schedule file")->required();

    ExportArgs exp;
    auto* export_cmd = app.add_subcommand("export", "Export convergence and Gantt traces");
    export_cmd->add_option("--journal", exp.journal, "Evolution journal (JSONL)");
    export_cmd->add_option("--schedule", exp.schedules, "Schedule file(s)");
    export_cmd->add_option("--out", exp.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*gen_cmd) {
            return cmd_gen(gen, seed);
        }
        if (*run_cmd) {
            return cmd_run(rule_name, instance_path, schedule_out);
        }
        if (*evolve_cmd) {
            return cmd_evolve(evolve, seed);
        }
        if (*bench_cmd) {
            return cmd_bench(bench, seed);
        }
        if (*validate_cmd) {
            return cmd_validate(v_instance, v_schedule);
        }
        if (*export_cmd) {
            return cmd_export(exp);
        }
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << '\n';
        return kTransport;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
