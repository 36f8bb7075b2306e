#include <doctest.h>

#include <algorithm>
#include <limits>

#include "fafsp/dispatch.hpp"
#include "fafsp/validator.hpp"
#include "support.hpp"

using namespace fafsp;
using fafsp::test::InstanceBuilder;
using Kind = Violation::Kind;

namespace {

bool has_kind(const std::vector<Violation>& vs, Kind k) {
    return std::any_of(vs.begin(), vs.end(), [k](const Violation& v) { return v.kind == k; });
}

ArcRecord& record_of(Schedule& s, int job) {
    return *std::find_if(s.arcs.begin(), s.arcs.end(), [job](const ArcRecord& r) { return r.job == job; });
}

// Two kit jobs on separate machines, assembly on machine 2.
Instance kit_instance() {
    InstanceBuilder b(2, 1);
    const int o = b.order(0, 30);
    b.product(o, {{{0, 4.0}}, {{1, 6.0}}}, {{2, 2.0}});
    return b.build();
}

} // namespace

TEST_CASE("a rollout validates clean") {
    const Instance inst = kit_instance();
    const Schedule s = run_dispatch(inst, RuleSpec::builtin(BuiltinRule::Edd));
    CHECK(validate_schedule(inst, s).empty());
}

TEST_CASE("assembly one minute before its last kit part is a precedence violation") {
    const Instance inst = kit_instance();
    Schedule s = run_dispatch(inst, RuleSpec::builtin(BuiltinRule::Edd));
    auto& asm_rec = record_of(s, 2);
    asm_rec.start -= 1.0;
    asm_rec.completion -= 1.0;
    s.orders[0].completion -= 1.0;
    const auto vs = validate_schedule(inst, s);
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].kind == Kind::Precedence);
    CHECK(vs[0].job == 2);
    CHECK(vs[0].measured == 5.0);
    CHECK(vs[0].required == 6.0);
    CHECK_FALSE(vs[0].family().empty());
    CHECK(to_string(vs[0]).find("Precedence") != std::string::npos);
}

TEST_CASE("overlapping jobs on one machine") {
    InstanceBuilder b(1, 1);
    const int o = b.order(0, 30);
    b.product(o, {{{0, 4.0}}, {{0, 3.0}}}, {{1, 1.0}});
    const Instance inst = b.build();
    Schedule s = run_dispatch(inst, RuleSpec::builtin(BuiltinRule::Edd));
    // EET puts the shorter job 1 first, so job 0 runs second.
    auto& second = record_of(s, 0);
    REQUIRE(second.start == 3.0);
    second.start -= 2.0;
    second.completion -= 2.0;
    const auto vs = validate_schedule(inst, s);
    CHECK(has_kind(vs, Kind::MachineOverlap));
    CHECK(std::all_of(vs.begin(), vs.end(), [](const Violation& v) { return v.machine < 0 || v.machine == 0; }));
}

TEST_CASE("each mutation maps to its violation kind") {
    InstanceBuilder b(2, 1);
    const int o0 = b.order(0, 10);
    const int o1 = b.order(3, 12);
    b.product(o0, {{{0, 4.0}, {1, 5.0}}}, {{2, 2.0}});
    b.product(o1, {{{0, 2.0}}}, {{2, 2.0}});
    b.setup(0, 2, 1.0);
    const Instance inst = b.build();
    const Schedule clean = run_dispatch(inst, RuleSpec::builtin(BuiltinRule::Edd));
    REQUIRE(validate_schedule(inst, clean).empty());

    SUBCASE("missing job") {
        Schedule s = clean;
        s.arcs.erase(s.arcs.begin());
        CHECK(has_kind(validate_schedule(inst, s), Kind::Unassigned));
    }
    SUBCASE("duplicate job") {
        Schedule s = clean;
        s.arcs.push_back(s.arcs.front());
        CHECK(has_kind(validate_schedule(inst, s), Kind::Unassigned));
    }
    SUBCASE("unqualified machine") {
        Schedule s = clean;
        record_of(s, 2).machine = 1;
        CHECK(has_kind(validate_schedule(inst, s), Kind::Unassigned));
    }
    SUBCASE("start before arrival") {
        Schedule s = clean;
        auto& r = record_of(s, 2);
        const double shift = r.start - 2.0;
        r.start -= shift;
        r.completion -= shift;
        CHECK(has_kind(validate_schedule(inst, s), Kind::ArrivalBreach));
    }
    SUBCASE("wrong setup") {
        Schedule s = clean;
        for (auto& r : s.arcs) {
            r.setup += 0.5;
            r.completion += 0.5;
        }
        CHECK(has_kind(validate_schedule(inst, s), Kind::SetupMismatch));
    }
    SUBCASE("delivery and tardiness bookkeeping") {
        Schedule s = clean;
        s.orders[0].completion += 1.0;
        CHECK(has_kind(validate_schedule(inst, s), Kind::DeliveryMismatch));
        s = clean;
        s.orders[1].tardiness += 1.0;
        CHECK(has_kind(validate_schedule(inst, s), Kind::TardinessMismatch));
        s = clean;
        s.orders.pop_back();
        CHECK(has_kind(validate_schedule(inst, s), Kind::DeliveryMismatch));
    }
    SUBCASE("tolerance absorbs rounding noise") {
        Schedule s = clean;
        s.arcs.back().completion += 1e-9;
        CHECK(validate_schedule(inst, s).empty());
    }
}

TEST_CASE("rollouts of every builtin validate clean across scenarios") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        ScenarioConfig cfg;
        cfg.seed = seed;
        cfg.dynamic_orders = 10;
        cfg.flexibility = seed % 2 ? 0.5 : 0.7;
        cfg.load_factor = static_cast<double>(1 << (seed % 3));
        const Instance inst = generate_instance(cfg);
        for (BuiltinRule id : kBuiltinRules) {
            const auto vs = validate_schedule(inst, run_dispatch(inst, RuleSpec::builtin(id)));
            REQUIRE_MESSAGE(vs.empty(), builtin_name(id) << " seed " << seed << ": " << to_string(vs.front()));
        }
    }
}

TEST_CASE("brute force: forced sequence equals any rule") {
    InstanceBuilder b(1, 1);
    const int o = b.order(0, 6);
    b.product(o, {{{0, 5.0}}}, {{1, 3.0}});
    const Instance inst = b.build();
    const auto r = brute_force_optimum(inst);
    CHECK(r.tardiness == 2.0);
    CHECK(r.leaves == 1);
    for (BuiltinRule id : kBuiltinRules) {
        CHECK(total_tardiness(run_dispatch(inst, RuleSpec::builtin(id))) == 2.0);
    }
}

TEST_CASE("brute force: two jobs on one machine, due-first is optimal") {
    // PT 3 (due 3) and PT 4 (due 7) on one machine, zero-time assemblies.
    InstanceBuilder b(1, 1);
    const int o0 = b.order(0, 3);
    const int o1 = b.order(0, 7);
    b.product(o0, {{{0, 3.0}}}, {{1, 0.0}});
    b.product(o1, {{{0, 4.0}}}, {{1, 0.0}});
    const Instance inst = b.build();
    const auto r = brute_force_optimum(inst);
    CHECK(r.tardiness == 0.0);
    CHECK(validate_schedule(inst, r.schedule).empty());
    // Enumerated by hand: 0 then 2 gives 0; 2 then 0 gives (7 - 3) + (4 - 7)^+ = 4.
    CHECK(r.schedule.arcs.front().job == 0);
    const Schedule reversed = run_dispatch(inst, RuleSpec::expression("-due"));
    CHECK(total_tardiness(reversed) == 4.0);
}

TEST_CASE("brute force limits") {
    ScenarioConfig cfg;
    cfg.seed = 2;
    const Instance big = generate_instance(cfg);
    CHECK_THROWS_AS(brute_force_optimum(big), LimitsExceeded);
    const Instance small = fafsp::test::tiny_static_instance(3, 2);
    CHECK_THROWS_AS(brute_force_optimum(small, {.max_jobs = 2, .max_machines = 4}), LimitsExceeded);
}

TEST_CASE("brute force dominates every builtin on tiny instances") {
    int checked = 0;
    for (std::uint64_t seed = 1; checked < 20; ++seed) {
        const Instance inst = fafsp::test::tiny_static_instance(seed, 2);
        if (inst.jobs.size() > 8) {
            continue;
        }
        ++checked;
        const auto r = brute_force_optimum(inst);
        REQUIRE(validate_schedule(inst, r.schedule).empty());
        REQUIRE(total_tardiness(r.schedule, inst.orders.size()) == doctest::Approx(r.tardiness));
        for (BuiltinRule id : kBuiltinRules) {
            REQUIRE(r.tardiness <= total_tardiness(run_dispatch(inst, RuleSpec::builtin(id))) + kScheduleTolerance);
        }
    }
}

namespace {

// Every feasible arc at every decision, no pruning, no ordering tricks.
double naive_optimum(const SimState& s) {
    if (s.finished()) {
        return total_tardiness(s.schedule(), s.instance().orders.size());
    }
    const auto arcs = s.feasible_arcs();
    if (arcs.empty()) {
        SimState next = s;
        next.advance();
        return naive_optimum(next);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const Arc& a : arcs) {
        SimState next = s;
        next.apply(a);
        best = std::min(best, naive_optimum(next));
    }
    return best;
}

} // namespace

TEST_CASE("pruned search agrees with naive enumeration") {
    int checked = 0;
    for (std::uint64_t seed = 100; checked < 15; ++seed) {
        const Instance inst = fafsp::test::tiny_static_instance(seed, 2);
        if (inst.jobs.size() > 7) {
            continue;
        }
        ++checked;
        REQUIRE(brute_force_optimum(inst).tardiness == doctest::Approx(naive_optimum(SimState(inst))));
    }
}
