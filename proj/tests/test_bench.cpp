#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fafsp/bench.hpp"
#include "fafsp/dispatch.hpp"
#include "fafsp/text.hpp"
#include "support.hpp"

using namespace fafsp;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::vector<RuleSpec> two_rules() {
    return {RuleSpec::builtin(BuiltinRule::Edd), RuleSpec::builtin(BuiltinRule::MwkrEet)};
}

ScenarioConfig small_scenario(std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.dynamic_orders = 8;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("ARI arithmetic") {
    CHECK(std::abs(compute_ari(7259.65, 8745.54) - 0.1699) < 2e-4);
    CHECK(compute_ari(42.0, 42.0) == 0.0);
    CHECK(compute_ari(50, 100) == 0.5);
    CHECK(compute_ari(150, 100) == -0.5);
    CHECK_THROWS_AS(compute_ari(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(compute_ari(1, -5), std::invalid_argument);
}

TEST_CASE("scenario grid and labels") {
    const auto grid = scenario_grid(3);
    REQUIRE(grid.size() == 24);
    CHECK(scenario_label(grid.front()) == "3-6-0.5-20-1");
    CHECK(scenario_label(grid.back()) == "5-12-0.7-50-4");
    std::vector<std::string> labels;
    std::vector<std::uint64_t> seeds;
    for (const auto& c : grid) {
        labels.push_back(scenario_label(c));
        seeds.push_back(c.seed);
    }
    std::sort(labels.begin(), labels.end());
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(labels.begin(), labels.end()) == labels.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());

    const BenchGrid g = parse_bench_grid(R"({"seed": 3, "replications": 2})");
    CHECK(g.replications == 2);
    CHECK(g.scenarios.size() == 24);
    const BenchGrid one = parse_bench_grid(R"({"replications": 4, "scenarios": [{"m1": 2, "m2": 3, "alpha": 6}]})");
    REQUIRE(one.scenarios.size() == 1);
    CHECK(one.scenarios[0].processing_machines == 3);
    CHECK_THROWS(parse_bench_grid(R"({"replications": 0})"));
}

TEST_CASE("report shape and aggregates") {
    const auto r = run_benchmark(std::vector<ScenarioConfig>{small_scenario(1)}, two_rules(), 2);
    REQUIRE(r.scenarios.size() == 1);
    REQUIRE(r.rules.size() == 2);
    REQUIRE(r.cells.size() == 1);
    REQUIRE(r.cells[0].size() == 2);
    CHECK(r.cells[0][0].values.size() == 2);
    CHECK(r.cells[0][1].values.size() == 2);
    std::vector<int> ranks = r.rank;
    std::sort(ranks.begin(), ranks.end());
    CHECK(ranks == std::vector<int>{1, 2});

    // Hand fold over a fixed table: scenario means (1, 3) and (4, 2), averages 2.5 and 2.5 -> tie keeps order.
    const auto f = build_report({"a", "b"}, {"x", "y"}, {{{0, 2}, {3, 3}}, {{4, 4}, {1, 3}}});
    CHECK(f.cells[0][0].mean == 1.0);
    CHECK(f.cells[0][0].sd == doctest::Approx(std::sqrt(2.0)));
    CHECK(f.cells[1][1].mean == 2.0);
    CHECK(f.ari[0][0] == doctest::Approx(2.0 / 3.0));
    CHECK(f.ari[0][1] == 0.0);
    CHECK(f.ari[1][1] == 0.5);
    CHECK(f.average == std::vector<double>{2.5, 2.5});
    CHECK(f.rank == std::vector<int>{1, 2});

    const auto zero = build_report({"s"}, {"x", "y"}, {{{0, 0}, {0, 0}}});
    CHECK(zero.ari[0] == std::vector<double>{0.0, 0.0});
    CHECK_THROWS(build_report({"s"}, {"x"}, {{{1}, {2}}}));
}

TEST_CASE("worst rule prints 0.00% and the table lists every rule") {
    std::vector<RuleSpec> rules;
    for (BuiltinRule id : kBuiltinRules) {
        rules.push_back(RuleSpec::builtin(id));
    }
    const auto r = run_benchmark(std::vector<ScenarioConfig>{small_scenario(4), small_scenario(5)}, rules, 2, 4);
    const auto worst = std::max_element(r.average.begin(), r.average.end()) - r.average.begin();
    CHECK(r.average_ari[static_cast<std::size_t>(worst)] == 0.0);
    const std::string table = format_report(r);
    CHECK(table.find("0.00%") != std::string::npos);
    for (const auto& name : r.rules) {
        CHECK(table.find(name) != std::string::npos);
    }
    CHECK(table.find("\nRank") != std::string::npos);
    CHECK(line_count(report_to_csv(r)) == 1 + 2 * 9 + 9);
    CHECK(line_count(per_instance_csv(r)) == 1 + 2 * 9 * 2);
}

TEST_CASE("thread count and instance order do not change the report") {
    std::vector<Instance> insts;
    for (std::uint64_t s = 1; s <= 6; ++s) {
        insts.push_back(generate_instance(small_scenario(s)));
    }
    const std::vector<std::string> labels = {"s"};
    const auto base = run_benchmark(labels, std::vector<std::vector<Instance>>{insts}, two_rules(), 1);
    const auto threaded = run_benchmark(labels, std::vector<std::vector<Instance>>{insts}, two_rules(), 5);
    CHECK(report_to_csv(threaded) == report_to_csv(base));
    CHECK(per_instance_csv(threaded) == per_instance_csv(base));

    std::vector<Instance> shuffled = insts;
    std::reverse(shuffled.begin(), shuffled.end());
    std::rotate(shuffled.begin(), shuffled.begin() + 2, shuffled.end());
    const auto moved = run_benchmark(labels, std::vector<std::vector<Instance>>{shuffled}, two_rules(), 3);
    for (std::size_t k = 0; k < 2; ++k) {
        auto a = base.cells[0][k].values;
        auto b = moved.cells[0][k].values;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
        CHECK(moved.cells[0][k].mean == doctest::Approx(base.cells[0][k].mean).epsilon(1e-12));
    }
    CHECK(moved.rank == base.rank);

    // Per-instance values equal direct rollouts.
    for (std::size_t i = 0; i < insts.size(); ++i) {
        CHECK(base.cells[0][0].values[i] == total_tardiness(run_dispatch(insts[i], two_rules()[0])));
    }
}

TEST_CASE("EDD tardiness rises with load on a small grid") {
    double prev = -1.0;
    for (double mu : {1.0, 2.0, 4.0}) {
        ScenarioConfig cfg = small_scenario(77);
        cfg.dynamic_orders = 20;
        cfg.load_factor = mu;
        const auto r = run_benchmark(std::vector<ScenarioConfig>{cfg}, std::vector<RuleSpec>{two_rules()[0]}, 20);
        CHECK(r.average[0] > prev);
        prev = r.average[0];
    }
}

TEST_CASE("trace export") {
    const auto dir = std::filesystem::temp_directory_path() / "fafsp_bench_export";
    std::filesystem::remove_all(dir);

    SUBCASE("empty journal gives header-only files") {
        const auto files = export_traces({}, nullptr, {}, dir);
        REQUIRE(files.size() == 2);
        CHECK(slurp(dir / "convergence.csv") == "sample,best_fitness\n");
        CHECK(slurp(dir / "per_instance.csv") == "scenario,instance,rule,tardiness\n");
        CHECK_FALSE(std::filesystem::exists(dir / "gantt"));
    }
    SUBCASE("one row per sample, idempotent re-export") {
        std::vector<JournalEntry> journal(7);
        for (std::size_t i = 0; i < journal.size(); ++i) {
            journal[i].best = 20.0 - static_cast<double>(i);
        }
        const Instance inst = generate_instance(small_scenario(9));
        const auto report = run_benchmark(std::vector<ScenarioConfig>{small_scenario(9)}, two_rules(), 2);
        const std::vector<NamedSchedule> scheds = {{"edd", run_dispatch(inst, two_rules()[0])}};
        const auto files = export_traces(journal, &report, scheds, dir);
        REQUIRE(files.size() == 3);
        const std::string conv = slurp(dir / "convergence.csv");
        CHECK(line_count(conv) == 1 + journal.size());
        CHECK(line_count(slurp(dir / "gantt" / "edd.csv")) == 1 + inst.jobs.size());

        std::vector<std::string> first;
        for (const auto& f : files) {
            first.push_back(slurp(f));
        }
        export_traces(journal, &report, scheds, dir);
        for (std::size_t i = 0; i < files.size(); ++i) {
            CHECK(slurp(files[i]) == first[i]);
        }
    }
    std::filesystem::remove_all(dir);
}
