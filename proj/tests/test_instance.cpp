#include <doctest.h>

#include <algorithm>
#include <string>

#include "fafsp/generator.hpp"
#include "fafsp/instance_io.hpp"
#include "fafsp/model.hpp"
#include "support.hpp"

using namespace fafsp;
using fafsp::test::InstanceBuilder;

namespace {

// One order, one product: two processing jobs and an assembly job.
const char* kSmall = R"({
  "machines": [{"id": 0, "stage": "processing"}, {"id": 1, "stage": "processing"}, {"id": 2, "stage": "assembly"}],
  "jobs": [
    {"id": 0, "kind": "processing", "eligible": {"0": 4, "1": 6}},
    {"id": 1, "kind": "processing", "eligible": {"1": 3}},
    {"id": 2, "kind": "assembly", "eligible": {"2": 2.5}}
  ],
  "orders": [{"id": 0, "arrival": 0, "due": 12,
              "products": [{"id": 0, "assembly_job": 2, "processing_jobs": [0, 1]}]}],
  "setup": {"default": 0.5, "overrides": [[0, 1, 1.25]]}
})";

bool has_message(const std::vector<std::string>& msgs, const std::string& needle) {
    return std::any_of(msgs.begin(), msgs.end(), [&](const std::string& m) { return m.find(needle) != std::string::npos; });
}

} // namespace

TEST_CASE("parse links the nesting and derives job fields") {
    const Instance inst = parse_instance(kSmall);
    CHECK(inst.jobs.size() == 3);
    CHECK(inst.job(2).predecessors == std::vector<int>{0, 1});
    CHECK(inst.job(0).order_id == 0);
    CHECK(inst.job(1).product_id == 0);
    CHECK(inst.job(0).time_on(1) == 6.0);
    CHECK(inst.job(1).time_on(0) < 0.0);
    CHECK(inst.job(0).mean_time() == 5.0);
    CHECK(inst.machine_count(Stage::Processing) == 2);
    CHECK(inst.machine_count(Stage::Assembly) == 1);
    CHECK(inst.is_assembly_of(0, 2));
    CHECK_FALSE(inst.is_assembly_of(0, 1));
    CHECK(inst.product_in_order(0, 0));
    CHECK(inst.order_jobs(0) == std::vector<int>{0, 1, 2});
}

TEST_CASE("setup defaults, overrides and the virtual start job") {
    const Instance inst = parse_instance(kSmall);
    CHECK(inst.setup(0, 1) == 1.25);
    CHECK(inst.setup(1, 0) == 0.5);
    CHECK(inst.setup(-1, 2) == 0.0);
}

TEST_CASE("canonical text round-trips exactly") {
    const Instance inst = parse_instance(kSmall);
    const std::string text = serialize_instance(inst);
    const Instance again = parse_instance(text);
    CHECK(again == inst);
    CHECK(serialize_instance(again) == text);

    ScenarioConfig cfg;
    cfg.seed = 3;
    const Instance gen = generate_instance(cfg);
    CHECK(parse_instance(serialize_instance(gen)) == gen);
}

TEST_CASE("syntax errors report line and column") {
    try {
        parse_instance("{\n  \"machines\": [\n  }");
        FAIL("expected InstanceError");
    } catch (const InstanceError& e) {
        CHECK(e.where().rfind("line 3", 0) == 0);
    }
}

TEST_CASE("structural errors name the field path") {
    std::string text = kSmall;
    text.replace(text.find("\"assembly_job\": 2"), 17, "\"assembly_job\": 9");
    try {
        parse_instance(text);
        FAIL("expected InstanceError");
    } catch (const InstanceError& e) {
        CHECK(e.where() == "orders[0].products[0].assembly_job");
    }

    std::string bad_machine = kSmall;
    bad_machine.replace(bad_machine.find("{\"1\": 3}"), 8, "{\"7\": 3}");
    try {
        parse_instance(bad_machine);
        FAIL("expected InstanceError");
    } catch (const InstanceError& e) {
        CHECK(e.where() == "jobs[1].eligible.7");
    }
}

TEST_CASE("integrity errors: stage mismatch, negative setup, missing kit") {
    std::string stage = kSmall;
    stage.replace(stage.find("{\"2\": 2.5}"), 10, "{\"0\": 2.5}");
    CHECK_THROWS_WITH_AS(parse_instance(stage), doctest::Contains("stage mismatch job 2 machine 0"), InstanceError);

    std::string setup = kSmall;
    setup.replace(setup.find("1.25"), 4, "-1.0");
    CHECK_THROWS_AS(parse_instance(setup), InstanceError);

    InstanceBuilder b(1, 1);
    const int o = b.order(0, 5);
    b.product(o, {{{0, 1.0}}}, {{1, 1.0}});
    Instance inst = b.build();
    inst.orders[0].products[0].processing_jobs.clear();
    inst.jobs[0].order_id = -1;
    link_instance(inst);
    CHECK(has_message(check_instance(inst), "assembly without kit: product 0"));
}

TEST_CASE("due before arrival and empty instances are rejected") {
    InstanceBuilder b(1, 1);
    const int o = b.order(5, 4);
    b.product(o, {{{0, 1.0}}}, {{1, 1.0}});
    CHECK_THROWS(static_cast<void>(b.build()));

    Instance empty;
    CHECK(has_message(check_instance(empty), "no orders"));
}

TEST_CASE("dense setup matrices with a leading virtual row are accepted") {
    std::string text = kSmall;
    const auto at = text.find("\"setup\"");
    text = text.substr(0, at) + "\"setup\": [[0,0,0],[0,1,2],[3,0,4],[5,6,0]]\n}";
    const Instance inst = parse_instance(text);
    CHECK(inst.setup(0, 2) == 2.0);
    CHECK(inst.setup(2, 1) == 6.0);
    CHECK(inst.setup(-1, 1) == 0.0);
}
