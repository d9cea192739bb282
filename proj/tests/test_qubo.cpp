#include <doctest.h>

#include <stdexcept>

#include <random>

#include "oracles.hpp"
#include "wfq/error.hpp"
#include "wfq/export.hpp"
#include "wfq/generator.hpp"
#include "wfq/greedy.hpp"
#include "wfq/qubo.hpp"

using namespace wfq;

namespace {

QuboModel unit_model(const WorkflowInstance& inst) { return build_qubo(inst, PenaltyWeights::uniform(1)); }

WorkflowInstance small_instance(std::uint64_t seed, int n) {
  GeneratorConfig cfg;
  cfg.n_jobs = n;
  cfg.seed = seed;
  return generate_instance(cfg);
}

}  // namespace

TEST_CASE("slack width") {
  CHECK(slack_width(0) == 1);
  CHECK(slack_width(1) == 1);
  CHECK(slack_width(2) == 2);
  CHECK(slack_width(9) == 4);
  CHECK(slack_width(16) == 5);
  CHECK_THROWS_AS(slack_width(-1), std::invalid_argument);
}

TEST_CASE("quadratic form bookkeeping") {
  QuadraticForm f(3);
  f.add_quadratic(2, 0, 5);
  f.add_quadratic(0, 2, -5);
  CHECK(f.terms().empty());
  const LinearEntry e[] = {{0, 1}, {1, 2}};
  f.add_squared(e, -1, 3);  // 3 (x0 + 2 x1 - 1)^2 = 3 - 3 x0 + 12 x0 x1
  CHECK(f.offset() == 3);
  CHECK(f.evaluate(Bits{0, 0, 0}) == 3);
  CHECK(f.evaluate(Bits{1, 0, 0}) == 0);
  CHECK(f.evaluate(Bits{0, 1, 0}) == 3);
  CHECK(f.evaluate(Bits{1, 1, 0}) == 12);
  CHECK_THROWS_AS(f.evaluate(Bits{1, 1}), std::invalid_argument);
  CHECK(f.max_abs_coeff() == 12);
}

TEST_CASE("one job in one slot has two variables") {
  const auto inst = make_instance(std::vector<int>{1}, std::vector<Edge>{}, {1});
  const auto model = unit_model(inst);
  CHECK(model.n_vars() == 2);
  CHECK(model.layout.decisions.size() == 1);
  CHECK(qubo_variable_count(inst) == 2);
}

TEST_CASE("all-zero bits cost A*N + A*sum avail^2") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = small_instance(seed, 4);
    const Coeff a = 7;
    const auto model = build_qubo(inst, PenaltyWeights::uniform(a));
    const Bits zero(model.n_vars(), 0);
    Coeff expected = a * inst.size();
    for (int v : inst.resources.available()) expected += a * v * v;
    CHECK(model.combined.evaluate(zero) == expected);
    const auto parts = evaluate_parts(model, zero);
    CHECK(parts.objective == 0);
    CHECK(parts.one_start == inst.size());
  }
}

TEST_CASE("feasible schedules encode to zero penalty") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = small_instance(seed, 2 + static_cast<int>(seed % 8));
    const auto model = unit_model(inst);
    const Schedule s = greedy_schedule(inst);
    const Bits bits = encode(model, s);
    const auto parts = evaluate_parts(model, bits);
    CHECK(parts.penalty() == 0);
    CHECK(parts.objective == objective_cost({}, s));
    const auto decoded = decode(model, bits);
    CHECK(decoded.report.feasible());
    CHECK(decoded.schedule.starts(inst.size()) == s.starts(inst.size()));
  }
}

TEST_CASE("model energy matches the term-by-term reference evaluator") {
  std::mt19937_64 rng(123);
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto inst = small_instance(seed, 2 + static_cast<int>(seed % 7));
    const Coeff a = 1 + static_cast<Coeff>(seed % 5);
    const auto model = build_qubo(inst, PenaltyWeights::uniform(a));
    const oracle::Layout ref = oracle::layout(inst);
    REQUIRE(ref.total == model.n_vars());
    for (int k = 0; k < 25; ++k) {
      Bits bits(model.n_vars());
      for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
      const auto e = oracle::energy(inst, bits);
      const auto parts = evaluate_parts(model, bits);
      CHECK(parts.objective == e.objective);
      CHECK(parts.one_start == e.one_start);
      CHECK(parts.order == e.order);
      CHECK(parts.resource == e.resource);
      CHECK(model.combined.evaluate(bits) == e.combined(a));
    }
  }
}

TEST_CASE("separate weights scale their own family") {
  const auto inst = canonical_instance();
  const auto model = build_qubo(inst, {2, 3, 5});
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    Bits bits(model.n_vars());
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
    const auto p = evaluate_parts(model, bits);
    CHECK(model.combined.evaluate(bits) == p.objective + 2 * p.one_start + 3 * p.order + 5 * p.resource);
  }
  CHECK_FALSE(model.weights.is_uniform());
}

TEST_CASE("reduction keeps exactly the pairs whose job fits the slot") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = small_instance(seed, 10);
    const auto model = unit_model(inst);
    int expected = 0;
    for (int t = 0; t < inst.horizon; ++t) {
      for (const Job& j : inst.jobs) {
        const bool fits = j.resource <= inst.resources.available()[t];
        CHECK(model.layout.decision_index(j.id, t).has_value() == fits);
        expected += fits ? 1 : 0;
      }
      expected += slack_width(inst.resources.available()[t]);
    }
    CHECK(model.n_vars() == expected);
    CHECK(qubo_variable_count(inst) == expected);
    // Every start of a feasible schedule keeps its variable.
    CHECK_NOTHROW(encode(model, greedy_schedule(inst)));
  }
}

TEST_CASE("ten-job instances have about 210 variables") {
  double total = 0.0;
  const int count = 50;
  for (int k = 0; k < count; ++k) total += qubo_variable_count(small_instance(4000 + k, 10));
  const double mean = total / count;
  CHECK(mean >= 210 * 0.75);
  CHECK(mean <= 210 * 1.25);
}

TEST_CASE("decode reports duplicate starts") {
  const auto inst = canonical_instance();
  const auto model = unit_model(inst);
  Bits bits = encode(model, greedy_schedule(inst));
  bits[model.layout.decision_index(0, 6).value()] = 1;
  const auto d = decode(model, bits);
  CHECK(d.report.duplicates == std::vector<JobId>{0});
  CHECK_FALSE(d.report.feasible());
  CHECK_THROWS_AS(decode(model, Bits(3, 0)), std::invalid_argument);
}

TEST_CASE("encode rejects starts without a variable") {
  const auto inst = canonical_instance();
  const auto model = unit_model(inst);
  Schedule s;
  s.assign(2, 2);  // job 2 needs 6, slot 2 offers 4
  CHECK_THROWS_AS(encode(model, s), std::invalid_argument);
}

TEST_CASE("penalty weight bound") {
  const auto inst = canonical_instance();
  const Schedule g = greedy_schedule(inst);
  CHECK(penalty_weight_bound(inst, {}, g) == 0 + 1 + 2 + 3 + 4 + 6 + 1);

  ObjectiveConfig late;
  late.expected_runtime = 10;
  CHECK(penalty_weight_bound(inst, late, g) == 1);

  ObjectiveConfig squared;
  squared.penalty = OverrunPenalty::kQuadratic;
  CHECK(penalty_weight_bound(inst, squared, g) == 1 + 4 + 9 + 16 + 36 + 1);

  Schedule bad;
  bad.assign(0, 0);
  CHECK_THROWS_AS(penalty_weight_bound(inst, {}, bad), std::invalid_argument);
}

TEST_CASE("penalty weight stays within 2.8 N^2 + 1 on average generated instances") {
  for (int n : {5, 10, 15, 20}) {
    double total = 0.0;
    const int count = 50;
    for (int k = 0; k < count; ++k) {
      const auto inst = small_instance(9000 + 100 * n + k, n);
      total += static_cast<double>(penalty_weight_bound(inst, {}, greedy_schedule(inst)));
    }
    CHECK(total / count <= 2.8 * n * n + 1);
  }
}

TEST_CASE("build_qubo rejects invalid input") {
  auto inst = canonical_instance();
  inst.dag.add_edge(5, 0);
  CHECK_THROWS_AS(build_qubo(inst, PenaltyWeights::uniform(1)), ValidationError);
  const auto empty = make_instance(std::vector<int>{1}, std::vector<Edge>{}, {});
  CHECK_THROWS_AS(build_qubo(empty, PenaltyWeights::uniform(1)), ValidationError);
  const auto no_slot = make_instance(std::vector<int>{3, 1}, std::vector<Edge>{}, {1, 3});
  CHECK_NOTHROW(build_qubo(no_slot, PenaltyWeights::uniform(1)));
}

TEST_CASE("normalized cost") {
  CHECK(normalized_cost(2.0, 2.0, 10.0) == 0.0);
  CHECK(normalized_cost(10.0, 2.0, 10.0) == 1.0);
  CHECK(normalized_cost(6.0, 2.0, 10.0) == doctest::Approx(0.5));
  CHECK(normalized_cost(12.0, 2.0, 10.0) == 1.0);
  CHECK_THROWS_AS(normalized_cost(1.0, 3.0, 3.0), std::invalid_argument);
}

TEST_CASE("qubo json round-trip keeps the combined form") {
  const auto inst = canonical_instance();
  const auto model = build_qubo(inst, PenaltyWeights::uniform(17));
  const auto j = qubo_to_json(model);
  const QuadraticForm back = qubo_form_from_json(j);
  CHECK(back.n_vars() == model.n_vars());
  CHECK(back.offset() == model.combined.offset());
  CHECK(back.terms() == model.combined.terms());
}
