#include <doctest.h>

#include <stdexcept>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "wfq/error.hpp"
#include "wfq/generator.hpp"
#include "wfq/greedy.hpp"
#include "wfq/io.hpp"

using namespace wfq;

namespace {

WorkflowInstance chain3(std::vector<int> avail = {10, 10, 10}) {
  const int r[] = {1, 1, 1};
  const Edge e[] = {{0, 1}, {1, 2}};
  return make_instance(r, e, std::move(avail));
}

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "wfq_tests";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("validate_instance accepts a well-formed chain") {
  const int r[] = {2, 3};
  const Edge e[] = {{0, 1}};
  const auto inst = make_instance(r, e, {5, 5});
  CHECK(validate_instance(inst).ok());
}

TEST_CASE("validate_instance reports a two-job cycle") {
  auto inst = make_instance(std::vector<int>{1, 1}, std::vector<Edge>{}, {5, 5});
  inst.dag.add_edge(0, 1);
  inst.dag.add_edge(1, 0);
  const auto report = validate_instance(inst);
  CHECK_FALSE(report.ok());
  CHECK(report.has(Violation::Kind::kCycle));
}

TEST_CASE("validate_instance reports a job larger than any slot") {
  const int r[] = {11};
  const auto inst = make_instance(r, std::vector<Edge>{}, {10, 10});
  const auto report = validate_instance(inst);
  CHECK(report.has(Violation::Kind::kResourceExceedsMax));
}

TEST_CASE("validate_instance reports horizon mismatch and negative availability") {
  auto inst = chain3();
  inst.horizon = 5;
  CHECK(validate_instance(inst).has(Violation::Kind::kHorizonMismatch));
  auto neg = make_instance(std::vector<int>{1}, std::vector<Edge>{}, {1, -1});
  CHECK(validate_instance(neg).has(Violation::Kind::kNegativeAvailability));
}

TEST_CASE("dag keeps sorted inverse adjacency and rejects bad ids") {
  Dag d(4);
  d.add_edge(2, 3);
  d.add_edge(0, 3);
  d.add_edge(0, 3);
  CHECK(d.parents(3) == std::vector<JobId>{0, 2});
  CHECK(d.children(0) == std::vector<JobId>{3});
  CHECK(d.edge_count() == 2);
  CHECK_THROWS_AS(d.add_edge(0, 4), std::out_of_range);
  CHECK(d.topological_order() == std::vector<JobId>{0, 1, 2, 3});
}

TEST_CASE("check_schedule on a chain") {
  const auto inst = chain3();
  const int ok[] = {0, 1, 2};
  const auto report = check_schedule(inst, Schedule::from_starts(ok));
  CHECK(report.feasible());
  CHECK(report.makespan == 3);

  const int same[] = {0, 0, 1};
  const auto bad = check_schedule(inst, Schedule::from_starts(same));
  CHECK_FALSE(bad.feasible());
  REQUIRE(bad.order_violations.size() == 1);
  CHECK(bad.order_violations[0] == Edge{0, 1});
}

TEST_CASE("check_schedule reports resource overuse amount") {
  const int r[] = {2, 2};
  const auto inst = make_instance(r, std::vector<Edge>{}, {3, 3});
  const int starts[] = {0, 0};
  const auto report = check_schedule(inst, Schedule::from_starts(starts));
  REQUIRE(report.overuse.size() == 1);
  CHECK(report.overuse[0].slot == 0);
  CHECK(report.overuse[0].excess() == 1);
  CHECK(report.total_overuse() == 1);
}

TEST_CASE("check_schedule reports missing and duplicate jobs and rejects bad input") {
  const auto inst = chain3();
  Schedule s;
  s.assign(0, 0);
  s.assign(0, 1);
  const auto report = check_schedule(inst, s);
  CHECK(report.duplicates == std::vector<JobId>{0});
  CHECK(report.missing == std::vector<JobId>{1, 2});
  CHECK_FALSE(report.complete());

  Schedule unknown;
  unknown.assign(7, 0);
  CHECK_THROWS_AS(check_schedule(inst, unknown), std::out_of_range);
  Schedule negative;
  negative.assign(0, -1);
  CHECK_THROWS_AS(check_schedule(inst, negative), std::invalid_argument);
}

TEST_CASE("availability repeats past the horizon") {
  const ResourceProfile p({3, 5});
  CHECK(p.capacity(0) == 3);
  CHECK(p.capacity(3) == 5);
  CHECK(p.r_max() == 5);
  const auto longer = with_horizon(chain3({1, 2, 3}), 5);
  CHECK(longer.resources.available() == std::vector<int>{1, 2, 3, 1, 2});
  CHECK(longer.horizon == 5);
}

TEST_CASE("greedy on small examples") {
  CHECK(greedy_schedule(chain3()).starts(3) == std::vector<Slot>{0, 1, 2});
  CHECK(greedy_schedule(chain3()).makespan() == 3);

  const auto single = make_instance(std::vector<int>{4}, std::vector<Edge>{}, {5});
  CHECK(greedy_schedule(single).makespan() == 1);

  const auto pair = make_instance(std::vector<int>{5, 5}, std::vector<Edge>{}, {10, 10});
  CHECK(greedy_schedule(pair).starts(2) == std::vector<Slot>{0, 0});
}

TEST_CASE("greedy on the canonical instance") {
  const auto inst = canonical_instance();
  const Schedule s = greedy_schedule(inst);
  CHECK(s.makespan() == 7);
  CHECK(s.starts(6) == std::vector<Slot>{0, 2, 1, 3, 4, 6});
  CHECK(check_schedule(inst, s).feasible());
}

TEST_CASE("greedy closes a slot at the first root that does not fit") {
  // Roots by size: 6, 5, 1. After 6 the 5 does not fit; the 1 waits too.
  const auto inst = make_instance(std::vector<int>{6, 5, 1}, std::vector<Edge>{}, {8, 8, 8});
  CHECK(greedy_schedule(inst).starts(3) == std::vector<Slot>{0, 1, 1});
}

TEST_CASE("greedy starves when nothing ever fits") {
  auto inst = make_instance(std::vector<int>{3}, std::vector<Edge>{}, {2, 2});
  CHECK_THROWS_AS(greedy_schedule(inst), StarvationError);
}

TEST_CASE("greedy schedules are feasible on generated instances") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    GeneratorConfig cfg;
    cfg.n_jobs = 1 + static_cast<int>(seed % 20);
    cfg.seed = seed;
    const auto inst = generate_instance(cfg);
    const Schedule s = greedy_schedule(inst);
    CHECK(oracle::feasible(inst, s.starts(inst.size())));
    CHECK(s.makespan() == inst.horizon);
  }
}

TEST_CASE("instance files round-trip") {
  GeneratorConfig cfg;
  cfg.n_jobs = 12;
  cfg.seed = 99;
  const auto inst = generate_instance(cfg);
  const auto path = temp_file("roundtrip.json");
  write_instance(inst, path);
  CHECK(read_instance(path) == inst);
  CHECK(read_instance(path).seed == std::optional<std::uint64_t>(99));
}

TEST_CASE("reading an instance with a cycle raises a validation error") {
  auto j = instance_to_json(chain3());
  j["edges"].push_back({2, 0});
  CHECK_THROWS_AS(instance_from_json(j), ValidationError);
}

TEST_CASE("schema errors") {
  auto j = instance_to_json(chain3());
  SUBCASE("missing availability") {
    j.erase("availability");
    CHECK_THROWS_AS(instance_from_json(j), SchemaError);
  }
  SUBCASE("missing jobs") {
    j.erase("jobs");
    CHECK_THROWS_AS(instance_from_json(j), SchemaError);
  }
  SUBCASE("wrong version") {
    j["version"] = 99;
    CHECK_THROWS_AS(instance_from_json(j), SchemaError);
  }
  SUBCASE("non-integer resource") {
    j["jobs"][0]["resource"] = "big";
    CHECK_THROWS_AS(instance_from_json(j), SchemaError);
  }
  SUBCASE("unreadable file") {
    CHECK_THROWS_AS(read_instance(temp_file("does_not_exist.json")), Error);
  }
  SUBCASE("malformed json") {
    const auto path = temp_file("broken.json");
    std::ofstream(path) << "{\"version\": 1,";
    CHECK_THROWS_AS(read_instance(path), SchemaError);
  }
}

TEST_CASE("schedule files round-trip") {
  const auto inst = canonical_instance();
  const Schedule s = greedy_schedule(inst);
  const auto path = temp_file("schedule.json");
  write_schedule(s, path, 5);
  const Schedule back = read_schedule(path);
  CHECK(back.starts(6) == s.starts(6));

  Schedule dup;
  dup.assign(0, 0);
  dup.assign(0, 1);
  CHECK_THROWS(schedule_to_json(dup));
}
