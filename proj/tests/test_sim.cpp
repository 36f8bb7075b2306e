#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "fafsp/dispatch.hpp"
#include "fafsp/sim.hpp"
#include "fafsp/validator.hpp"
#include "support.hpp"

using namespace fafsp;
using fafsp::test::InstanceBuilder;

namespace {

// One processing job (PT 5 on machine 0) feeding one assembly job (PT 3 on machine 1).
Instance forced_sequence(double due) {
    InstanceBuilder b(1, 1);
    const int o = b.order(0, due);
    b.product(o, {{{0, 5.0}}}, {{1, 3.0}});
    return b.build();
}

} // namespace

TEST_CASE("forced sequence: completion 8, tardiness follows the due date") {
    const RuleSpec edd = RuleSpec::builtin(BuiltinRule::Edd);
    const Schedule on_time = run_dispatch(forced_sequence(10), edd);
    REQUIRE(on_time.orders.size() == 1);
    CHECK(on_time.orders[0].completion == 8.0);
    CHECK(on_time.orders[0].tardiness == 0.0);
    CHECK(total_tardiness(on_time) == 0.0);

    const Schedule late = run_dispatch(forced_sequence(6), edd);
    CHECK(late.orders[0].tardiness == 2.0);
    REQUIRE(late.arcs.size() == 2);
    CHECK(late.arcs[1] == ArcRecord{1, 1, 0.0, 5.0, 8.0});
}

TEST_CASE("init: arrivals at zero are released, later ones queued") {
    InstanceBuilder b(1, 1);
    const int o0 = b.order(0, 50);
    const int o1 = b.order(7, 50);
    const int o2 = b.order(9, 50);
    b.product(o0, {{{0, 1.0}}, {{0, 2.0}}}, {{1, 1.0}});
    b.product(o1, {{{0, 1.0}}}, {{1, 1.0}});
    b.product(o2, {{{0, 1.0}}}, {{1, 1.0}});
    const Instance inst = b.build();
    const SimState s = init_sim(inst);
    CHECK(s.clock() == 0.0);
    CHECK(s.pending_events() == 2);
    CHECK(s.status(0) == JobStatus::Ready);
    CHECK(s.status(1) == JobStatus::Ready);
    CHECK(s.status(2) == JobStatus::Blocked);
    CHECK(s.status(3) == JobStatus::NotArrived);
    CHECK(s.ready_jobs() == std::vector<int>{0, 1});
}

TEST_CASE("no orders at zero: empty epoch, first advance jumps to the first arrival") {
    InstanceBuilder b(1, 1);
    const int o = b.order(4, 20);
    b.product(o, {{{0, 1.0}}}, {{1, 1.0}});
    const Instance inst = b.build();
    SimState s(inst);
    CHECK(feasible_arcs(s).empty());
    advance_clock(s);
    CHECK(s.clock() == 4.0);
    CHECK(feasible_arcs(s) == std::vector<Arc>{{0, 0}});
}

TEST_CASE("feasible arcs: ready jobs on idle qualified machines only") {
    InstanceBuilder b(2, 1);
    const int o = b.order(0, 30);
    b.product(o, {{{0, 4.0}, {1, 6.0}}, {{1, 2.0}}}, {{2, 1.0}});
    const Instance inst = b.build();
    SimState s(inst);
    CHECK(feasible_arcs(s) == std::vector<Arc>{{0, 0}, {0, 1}, {1, 1}});

    apply_arc(s, {1, 1});
    // Job 0 keeps only machine 0; the assembly job waits for its kit.
    CHECK(feasible_arcs(s) == std::vector<Arc>{{0, 0}});
    CHECK_THROWS_AS(apply_arc(s, {1, 0}), SimulationError);
    CHECK_THROWS_AS(apply_arc(s, {0, 1}), SimulationError);
    CHECK_THROWS_AS(apply_arc(s, {2, 2}), SimulationError);
    CHECK_THROWS_AS(advance_clock(s), SimulationError);

    apply_arc(s, {0, 0});
    advance_clock(s);
    CHECK(s.clock() == 2.0);
    CHECK(s.status(2) == JobStatus::Blocked);
    CHECK(feasible_arcs(s).empty());
    advance_clock(s);
    CHECK(s.clock() == 4.0);
    CHECK(feasible_arcs(s) == std::vector<Arc>{{2, 2}});
}

TEST_CASE("features: estimated time, machine idle time, queue, utilization") {
    InstanceBuilder b(2, 1);
    const int o = b.order(0, 30);
    b.product(o, {{{0, 4.0}, {1, 6.0}}, {{1, 2.0}}}, {{2, 1.0}});
    b.setup(1, 0, 1.5);
    const Instance inst = b.build();
    SimState s(inst);
    {
        const FeatureView fv = compute_features(s);
        CHECK(fv.elapsed(0) == 5.0);
        CHECK(fv.machine_options(0) == 2);
        CHECK(fv.idle_at(0) == 0.0);
        CHECK(fv.busy(0) == 0.0);
        CHECK(fv.queue(0) == 1);
        CHECK(fv.queue(1) == 2);
        CHECK(fv.queue(2) == 0);
        CHECK(fv.ops_remaining(0) == 3);
        CHECK(fv.work_remaining(0) == doctest::Approx(5.0 + 2.0 + 1.0));
        CHECK(fv.due(2) == 30.0);
        CHECK(fv.setup(0, 1) == 0.0);
    }
    apply_arc(s, {1, 1});
    {
        const FeatureView fv = compute_features(s);
        CHECK(fv.elapsed(1) == 2.0);
        CHECK(fv.idle_at(1) == 2.0);
        CHECK(fv.busy(1) == 2.0);
        CHECK(fv.ops_remaining(0) == 2);
        CHECK(fv.setup(0, 1) == 1.5);
        // Queue counts agree with a recount over ready jobs.
        for (const auto& m : inst.machines) {
            int count = 0;
            for (int j : s.ready_jobs()) {
                count += inst.job(j).time_on(m.id) >= 0.0 ? 1 : 0;
            }
            CHECK(fv.queue(m.id) == count);
        }
    }
}

TEST_CASE("setup is charged from the true predecessor") {
    InstanceBuilder b(1, 1);
    const int o = b.order(0, 100);
    b.product(o, {{{0, 5.0}}, {{0, 3.0}}}, {{1, 1.0}});
    b.setup(0, 1, 1.0);
    const Instance inst = b.build();
    SimState s(inst);
    apply_arc(s, {0, 0});
    advance_clock(s);
    CHECK(s.clock() == 5.0);
    apply_arc(s, {1, 0});
    const auto& rec = s.schedule().arcs.back();
    CHECK(rec.setup == 1.0);
    CHECK(rec.start == 5.0);
    CHECK(rec.completion == 9.0);
}

TEST_CASE("completions are processed before arrivals at the same instant") {
    InstanceBuilder b(1, 1);
    const int o0 = b.order(0, 100);
    const int o1 = b.order(5, 100);
    b.product(o0, {{{0, 5.0}}}, {{1, 1.0}});
    b.product(o1, {{{0, 2.0}}}, {{1, 1.0}});
    const Instance inst = b.build();
    SimState s(inst);
    apply_arc(s, {0, 0});
    advance_clock(s);
    CHECK(s.clock() == 5.0);
    CHECK(s.status(0) == JobStatus::Done);
    CHECK(s.status(2) == JobStatus::Ready);
    CHECK(s.pending_events() == 0);
    CHECK(feasible_arcs(s) == std::vector<Arc>{{1, 1}, {2, 0}});
}

TEST_CASE("two orders on one machine under EDD match a hand trace") {
    InstanceBuilder b(1, 1);
    const int o0 = b.order(0, 20);
    const int o1 = b.order(0, 8);
    b.product(o0, {{{0, 4.0}}}, {{1, 2.0}});
    b.product(o1, {{{0, 3.0}}}, {{1, 2.0}});
    b.setup(2, 0, 1.0);
    const Instance inst = b.build();
    const Schedule s = run_dispatch(inst, RuleSpec::builtin(BuiltinRule::Edd));
    // t=0: job 2 (due 8) on m0 -> [0,3]. t=3: assembly 3 (due 8) on m1 -> [3,5],
    // then job 0 on m0 with setup 1 -> [3,8]. t=8: assembly 1 on m1 -> [8,10].
    const std::vector<ArcRecord> expected = {
        {2, 0, 0.0, 0.0, 3.0},
        {3, 1, 0.0, 3.0, 5.0},
        {0, 0, 1.0, 3.0, 8.0},
        {1, 1, 0.0, 8.0, 10.0},
    };
    CHECK(s.arcs == expected);
    REQUIRE(s.orders.size() == 2);
    CHECK(s.orders[0] == OrderOutcome{0, 10.0, 0.0});
    CHECK(s.orders[1] == OrderOutcome{1, 5.0, 0.0});
}

TEST_CASE("total tardiness sums late orders and rejects incomplete schedules") {
    Schedule s;
    s.orders = {{0, 10, 3}, {1, 12, 4}, {2, 5, 0}};
    CHECK(total_tardiness(s) == 7.0);
    CHECK(total_tardiness(s, 3) == 7.0);
    CHECK_THROWS_AS(static_cast<void>(total_tardiness(s, 4)), std::logic_error);
}

TEST_CASE("deadlock and advancing past the end are contract errors") {
    Instance inst = forced_sequence(10);
    SimState s(inst);
    apply_arc(s, {0, 0});
    advance_clock(s);
    apply_arc(s, {1, 1});
    advance_clock(s);
    CHECK(s.finished());
    CHECK_THROWS_AS(advance_clock(s), SimulationError);

    // A kit job detached from its product never unblocks the assembly.
    Instance broken = forced_sequence(10);
    broken.jobs[0].product_id = 99;
    SimState d(broken);
    apply_arc(d, {0, 0});
    advance_clock(d);
    CHECK(d.status(1) == JobStatus::Blocked);
    CHECK_THROWS_WITH_AS(advance_clock(d), doctest::Contains("deadlock"), SimulationError);
    broken.jobs[0].eligible = {};
    CHECK_THROWS_AS(SimState{broken}, SimulationError);
}

TEST_CASE("rollouts are deterministic, clock is monotone, lower bound never decreases") {
    ScenarioConfig cfg;
    cfg.seed = 21;
    const Instance inst = generate_instance(cfg);
    const RuleSpec rule = RuleSpec::builtin(BuiltinRule::MwkrEet);
    CHECK(run_dispatch(inst, rule) == run_dispatch(inst, rule));

    SimState s(inst);
    double last_clock = 0.0;
    double last_bound = 0.0;
    while (!s.finished()) {
        while (s.has_feasible_arc()) {
            const auto arcs = s.feasible_arcs();
            s.apply(rank_arcs(rule, s.features(), arcs));
            REQUIRE(s.tardiness_lower_bound() >= last_bound - 1e-9);
            last_bound = s.tardiness_lower_bound();
        }
        if (s.finished()) {
            break;
        }
        s.advance();
        REQUIRE(s.clock() >= last_clock);
        last_clock = s.clock();
        REQUIRE(s.tardiness_lower_bound() >= last_bound - 1e-9);
        last_bound = s.tardiness_lower_bound();
    }
    CHECK(total_tardiness(s.schedule(), inst.orders.size()) == doctest::Approx(last_bound));
}

TEST_CASE("rollout totals agree with the validator's recomputation") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        ScenarioConfig cfg;
        cfg.seed = seed;
        cfg.dynamic_orders = 8;
        const Instance inst = generate_instance(cfg);
        const auto rule = RuleSpec::builtin(kBuiltinRules[seed % kBuiltinRules.size()]);
        const Schedule s = run_dispatch(inst, rule);
        REQUIRE(validate_schedule(inst, s).empty());
        // Independent total: recompute delivery from the arc log.
        std::vector<double> ft(inst.orders.size(), 0.0);
        for (const auto& a : s.arcs) {
            if (inst.job(a.job).kind == JobKind::Assembly) {
                auto& f = ft[static_cast<std::size_t>(inst.job(a.job).order_id)];
                f = std::max(f, a.completion);
            }
        }
        double total = 0.0;
        for (std::size_t i = 0; i < ft.size(); ++i) {
            total += std::max(0.0, ft[i] - inst.orders[i].due);
        }
        REQUIRE(total_tardiness(s, inst.orders.size()) == doctest::Approx(total).epsilon(1e-12));
    }
}

TEST_CASE("schedule text round-trips exactly") {
    ScenarioConfig cfg;
    cfg.seed = 5;
    const Instance inst = generate_instance(cfg);
    const Schedule s = run_dispatch(inst, RuleSpec::builtin(BuiltinRule::Edd));
    CHECK(parse_schedule(format_schedule(s)) == s);
}

TEST_CASE("step budget stops runaway rollouts") {
    const Instance inst = forced_sequence(10);
    CHECK_THROWS_AS(run_dispatch(inst, RuleSpec::builtin(BuiltinRule::Edd), {.max_steps = 2}), StepBudgetExceeded);
    CHECK_NOTHROW(run_dispatch(inst, RuleSpec::builtin(BuiltinRule::Edd), {.max_steps = 4}));
}
