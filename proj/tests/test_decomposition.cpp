#include <doctest.h>

#include <stdexcept>

#include "oracles.hpp"
#include "wfq/branch_and_bound.hpp"
#include "wfq/decomposition.hpp"
#include "wfq/error.hpp"
#include "wfq/generator.hpp"
#include "wfq/greedy.hpp"

using namespace wfq;

namespace {

WorkflowInstance random_instance(std::uint64_t seed, int n) {
  GeneratorConfig cfg;
  cfg.n_jobs = n;
  cfg.seed = seed;
  return generate_instance(cfg);
}

// Advances a fresh state past completed jobs at the given starts.
FrontierState state_with(const WorkflowInstance& inst, const std::vector<std::pair<JobId, Slot>>& done, Slot offset) {
  FrontierState s(inst);
  for (auto [j, t] : done) s.complete(j, t, inst.resource(j));
  if (offset > 0) s.advance(offset);
  return s;
}

// Constraint check of a sub-QUBO bitstring against the window: each job at
// most once, subset parents strictly earlier, window capacity respected.
bool window_feasible(const SubProblem& sub, const WorkflowInstance& inst, const FrontierState& state,
                     const Bits& bits) {
  std::map<JobId, std::vector<Slot>> starts;
  std::vector<int> used(sub.model.layout.capacities.size(), 0);
  for (std::size_t v = 0; v < sub.model.layout.decisions.size(); ++v) {
    if (!bits[v]) continue;
    const auto& d = sub.model.layout.decisions[v];
    starts[d.job].push_back(d.slot);
    used[d.slot] += inst.resource(d.job);
  }
  for (std::size_t t = 0; t < used.size(); ++t) {
    if (used[t] > sub.model.layout.capacities[t]) return false;
  }
  for (const auto& [j, ts] : starts) {
    if (ts.size() > 1) return false;
    for (JobId p : inst.dag.parents(j)) {
      if (state.is_completed(p)) continue;
      if (!starts.count(p) || starts[p][0] >= ts[0]) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("subproblem selection on the canonical instance") {
  const auto inst = canonical_instance();
  const FrontierState start(inst);
  CHECK(select_subproblem(start, inst, 3) == std::vector<JobId>{0, 1, 2});

  const auto after = state_with(inst, {{0, 0}, {2, 1}}, 2);
  CHECK(select_subproblem(after, inst, 3) == std::vector<JobId>{1, 3, 4});

  const auto last = state_with(inst, {{0, 0}, {2, 1}, {3, 2}, {1, 3}, {4, 3}}, 4);
  CHECK(select_subproblem(last, inst, 3) == std::vector<JobId>{5});

  CHECK(select_subproblem(start, inst, 6) == std::vector<JobId>{0, 1, 2, 3, 4, 5});
  CHECK_THROWS_AS(select_subproblem(start, inst, 0), std::invalid_argument);
}

TEST_CASE("subsets are closed under parents") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = random_instance(seed, 12);
    const auto subset = select_subproblem(FrontierState(inst), inst, 1 + static_cast<int>(seed % 6));
    for (std::size_t k = 0; k < subset.size(); ++k) {
      for (JobId p : inst.dag.parents(subset[k])) {
        const auto it = std::find(subset.begin(), subset.end(), p);
        CHECK(it != subset.end());
        CHECK(it < subset.begin() + static_cast<std::ptrdiff_t>(k));
      }
    }
  }
}

TEST_CASE("the last job alone in one ample slot") {
  const auto inst = canonical_instance();
  const auto state = state_with(inst, {{0, 0}, {2, 1}, {3, 2}, {1, 3}, {4, 3}}, 4);
  DecompositionConfig cfg;
  cfg.slots_per_sub = 1;
  const JobId subset[] = {5};
  const SubProblem sub = build_sub_qubo(inst, state, subset, cfg);
  CHECK(sub.model.layout.decisions.size() == 1);
  const auto best = brute_force_minimize(sub.model.combined);
  CHECK(best.bits[0] == 1);
  CHECK(best.energy == solve_subproblem_exact(sub, inst, state).energy);
}

TEST_CASE("the first window completes jobs 0 and 2") {
  const auto inst = canonical_instance();
  const FrontierState state(inst);
  const DecompositionConfig cfg;
  const JobId subset[] = {0, 1, 2};
  const SubProblem sub = build_sub_qubo(inst, state, subset, cfg);
  CHECK(sub.model.n_vars() == 14);
  const auto best = brute_force_minimize(sub.model.combined);
  const auto exact = solve_subproblem_exact(sub, inst, state);
  CHECK(exact.energy == best.energy);
  CHECK(exact.bits == best.bits);
  std::vector<std::pair<JobId, Slot>> placed;
  for (std::size_t v = 0; v < sub.model.layout.decisions.size(); ++v) {
    if (best.bits[v]) placed.emplace_back(sub.model.layout.decisions[v].job, sub.model.layout.decisions[v].slot);
  }
  CHECK(placed == std::vector<std::pair<JobId, Slot>>{{0, 0}, {2, 1}});

  SUBCASE("only resource weighting separates job 2 from job 1") {
    auto energy_of = [&](const SubProblem& p, JobId second) {
      Schedule s;
      s.assign(0, 0);
      s.assign(second, 1);
      return p.model.combined.evaluate(encode(p.model, s));
    };
    CHECK(energy_of(sub, 2) < energy_of(sub, 1));
    DecompositionConfig unit = cfg;
    unit.reward = RewardKind::kUnit;
    const SubProblem flat = build_sub_qubo(inst, state, subset, unit);
    CHECK(energy_of(flat, 2) == energy_of(flat, 1));
  }
}

TEST_CASE("a child in the first window slot with its parent in the subset is penalised") {
  const auto inst = canonical_instance();
  const FrontierState state(inst);
  const JobId subset[] = {0, 1, 2};
  const SubProblem sub = build_sub_qubo(inst, state, subset, {});
  Bits bits(sub.model.n_vars(), 0);
  bits[*sub.model.layout.decision_index(1, 0)] = 1;
  CHECK(sub.model.order.evaluate(bits) > 0);
  bits[*sub.model.layout.decision_index(0, 0)] = 1;
  CHECK(sub.model.order.evaluate(bits) > 0);
  bits[*sub.model.layout.decision_index(1, 0)] = 0;
  bits[*sub.model.layout.decision_index(1, 1)] = 1;
  CHECK(sub.model.order.evaluate(bits) == 0);
}

TEST_CASE("build_sub_qubo rejects bad subsets") {
  const auto inst = canonical_instance();
  const FrontierState state(inst);
  CHECK_THROWS_AS(build_sub_qubo(inst, state, std::span<const JobId>{}, {}), std::invalid_argument);
  const JobId orphan[] = {1};
  CHECK_THROWS_AS(build_sub_qubo(inst, state, orphan, {}), std::invalid_argument);
}

TEST_CASE("sub-QUBO minimisers respect every window constraint and match the exact search") {
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 400 && checked < 150; ++seed) {
    const auto inst = random_instance(seed, 3 + static_cast<int>(seed % 6));
    DecompositionConfig cfg;
    cfg.jobs_per_sub = 1 + static_cast<int>(seed % 4);
    cfg.slots_per_sub = 1 + static_cast<int>((seed / 4) % 5);
    cfg.reward = seed % 2 ? RewardKind::kUnit : RewardKind::kResourceWeighted;
    cfg.earliest_start_tiebreak = seed % 3 != 0;
    // Walk a few exact steps so windows also start mid-run.
    FrontierState state(inst);
    for (int k = 0; k < static_cast<int>(seed % 3) && !state.all_completed(); ++k) {
      state = step(state, inst, cfg, k).state;
    }
    if (state.all_completed()) continue;
    const auto subset = select_subproblem(state, inst, cfg.jobs_per_sub);
    const SubProblem sub = build_sub_qubo(inst, state, subset, cfg);
    CHECK(sub.model.n_vars() <= cfg.jobs_per_sub * cfg.slots_per_sub + sub.model.layout.slack_count());
    if (sub.model.n_vars() > 20) continue;
    const auto best = brute_force_minimize(sub.model.combined);
    CHECK(window_feasible(sub, inst, state, best.bits));
    CHECK(solve_subproblem_exact(sub, inst, state).energy == best.energy);
    ++checked;
  }
  CHECK(checked >= 100);
}

TEST_CASE("canonical run: three steps, makespan 5") {
  const auto inst = canonical_instance();
  const auto r = run_decomposition(inst, {});
  CHECK(r.makespan == 5);
  REQUIRE(r.steps.size() == 3);
  CHECK(check_schedule(inst, r.schedule).feasible());
  CHECK(r.steps[0].time_offset == 2);
  CHECK(r.steps[1].time_offset == 4);
  CHECK(r.steps[2].time_offset == 5);
  CHECK(r.steps[1].subset == std::vector<JobId>{1, 3, 4});
  CHECK(r.max_sub_qubo_vars >= 14);
  CHECK(r.max_sub_qubo_vars <= 20);
  const auto line = to_json(r.steps[0]);
  CHECK(line["scheduled"] == nlohmann::json::parse("[[0,0],[2,1]]"));
  CHECK(line["sub_qubo_vars"] == 14);
  CHECK(line["time_offset"] == 2);
}

TEST_CASE("single-job instance") {
  const auto inst = make_instance(std::vector<int>{3}, std::vector<Edge>{}, {5});
  const auto r = run_decomposition(inst, {});
  CHECK(r.makespan == 1);
  CHECK(r.steps.size() == 1);
}

TEST_CASE("a single remaining job with room lands in the first window slot") {
  const auto inst = canonical_instance();
  const auto state = state_with(inst, {{0, 0}, {2, 1}, {3, 2}, {1, 3}, {4, 3}}, 4);
  const auto out = step(state, inst, {});
  REQUIRE(out.trace.scheduled.size() == 1);
  CHECK(out.trace.scheduled[0] == Assignment{5, 4});
  CHECK(out.state.all_completed());
  CHECK(out.state.time_offset() == 5);
  CHECK_THROWS_AS(step(out.state, inst, {}), std::logic_error);
}

TEST_CASE("a window without capacity advances time by one slot") {
  const auto inst = canonical_instance();
  const auto zeroed = update_resources(FrontierState(inst), {0, 0, 8, 8, 4, 9, 7, 3, 8});
  const auto out = step(zeroed, inst, {});
  CHECK(out.trace.scheduled.empty());
  CHECK(out.state.time_offset() == 1);
  CHECK(out.state.completed_count() == 0);
}

TEST_CASE("identical replacement profile changes nothing") {
  const auto inst = canonical_instance();
  const DecompositionConfig cfg;
  const auto first = step(FrontierState(inst), inst, cfg);
  std::vector<int> rest;
  for (Slot t = first.state.time_offset(); t < inst.horizon; ++t) rest.push_back(inst.resources.capacity(t));
  const auto plain = run_decomposition(inst, cfg, first.state);
  const auto updated = run_decomposition(inst, cfg, update_resources(first.state, rest));
  CHECK(plain.schedule == updated.schedule);
  CHECK(plain.makespan == 5);
}

TEST_CASE("capacity added mid-run rescues a starving instance") {
  const int r[] = {4, 4};
  const Edge e[] = {{0, 1}};
  std::vector<int> avail(40, 0);
  avail[0] = 10;
  const auto inst = make_instance(r, e, avail);
  DecompositionConfig cfg;
  cfg.jobs_per_sub = 2;
  cfg.slots_per_sub = 2;
  CHECK_THROWS_AS(run_decomposition(inst, cfg), StarvationError);

  const auto first = step(FrontierState(inst), inst, cfg);
  CHECK(first.state.completed_count() == 1);
  const auto result = run_decomposition(inst, cfg, update_resources(first.state, {5}));
  CHECK(check_schedule(make_instance(r, e, {10, 5}), result.schedule).feasible());
  CHECK(result.makespan == 2);
}

TEST_CASE("update_resources validates its input") {
  const auto inst = canonical_instance();
  CHECK_THROWS_AS(update_resources(FrontierState(inst), {1, -1}), std::invalid_argument);
  CHECK_THROWS_AS(update_resources(FrontierState(inst), {}), std::invalid_argument);
}

TEST_CASE("consumed capacity is deducted") {
  const auto inst = canonical_instance();
  const auto out = step(FrontierState(inst), inst, {});
  CHECK(out.state.capacity(0) == 4);
  CHECK(out.state.capacity(1) == 2);
  CHECK(out.state.capacity(2) == 4);
}

TEST_CASE("window size one reproduces the serial baseline") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = random_instance(300 + seed, 8);
    DecompositionConfig cfg;
    cfg.jobs_per_sub = 1;
    cfg.slots_per_sub = 1;
    const auto r = run_decomposition(inst, cfg);

    // Serial: the smallest-id ready job starts at the current slot if it fits,
    // and the clock moves one slot either way.
    std::vector<int> starts(inst.size(), -1);
    int done = 0;
    for (Slot t = 0; done < inst.size(); ++t) {
      JobId pick = -1;
      for (JobId j = 0; j < inst.size() && pick < 0; ++j) {
        if (starts[j] >= 0) continue;
        bool ready = true;
        for (JobId p : inst.dag.parents(j)) ready &= starts[p] >= 0;
        if (ready) pick = j;
      }
      if (inst.resource(pick) <= inst.resources.capacity(t)) {
        starts[pick] = t;
        ++done;
      }
    }
    CHECK(r.schedule.starts(inst.size()) == starts);
  }
}

TEST_CASE("decomposition schedules are feasible and never beat the optimum") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto inst = random_instance(500 + seed, 10);
    DecompositionConfig cfg;
    cfg.jobs_per_sub = 2 + static_cast<int>(seed % 4);
    cfg.slots_per_sub = 1 + static_cast<int>(seed % 3);
    const auto r = run_decomposition(inst, cfg);
    CHECK(check_schedule(inst, r.schedule).feasible());
    const auto opt = branch_and_bound_schedule(inst);
    REQUIRE(opt.proven);
    CHECK(r.makespan >= opt.makespan);
  }
}

TEST_CASE("other sub-solvers stay sound") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = random_instance(800 + seed, 8);
    DecompositionConfig cfg;
    cfg.jobs_per_sub = 2;
    cfg.slots_per_sub = 2;
    SUBCASE("brute force") {
      cfg.solver = SubSolverKind::kBruteForce;
      const auto r = run_decomposition(inst, cfg);
      CHECK(check_schedule(inst, r.schedule).feasible());
      const auto exact = run_decomposition(inst, [&] {
        DecompositionConfig c = cfg;
        c.solver = SubSolverKind::kExact;
        return c;
      }());
      // Both minimise each window exactly; ties may resolve differently.
      CHECK(r.steps.front().energy == exact.steps.front().energy);
    }
    SUBCASE("annealing") {
      cfg.solver = SubSolverKind::kAnnealing;
      cfg.annealing.sweeps = 50;
      cfg.annealing.attempts = 2;
      cfg.annealing.seed = seed;
      const auto r = run_decomposition(inst, cfg);
      CHECK(check_schedule(inst, r.schedule).feasible());
    }
  }
}

TEST_CASE("a window as long as the greedy schedule does no worse than greedy") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = random_instance(1200 + seed, 5);
    const int size = std::max(inst.size(), greedy_schedule(inst).makespan());
    DecompositionConfig cfg;
    cfg.jobs_per_sub = size;
    cfg.slots_per_sub = size;
    const auto r = run_decomposition(inst, cfg);
    CHECK(r.makespan <= greedy_schedule(inst).makespan());
  }
}

TEST_CASE("long windows use one slack bit per job for at-most-once") {
  const auto inst = canonical_instance();
  DecompositionConfig cfg;
  cfg.slots_per_sub = 4;
  const JobId subset[] = {0, 1, 2};
  const SubProblem sub = build_sub_qubo(inst, FrontierState(inst), subset, cfg);
  int once = 0;
  for (const auto& g : sub.model.layout.slacks) once += g.kind == SlackGroup::Kind::kOnce ? 1 : 0;
  CHECK(once == 3);
  const auto r = run_decomposition(inst, cfg);
  CHECK(check_schedule(inst, r.schedule).feasible());
}

TEST_CASE("sub-solver names") {
  CHECK(parse_sub_solver("exact") == SubSolverKind::kExact);
  CHECK(to_string(parse_sub_solver("sa")) == "sa");
  CHECK_THROWS_AS(parse_sub_solver("quantum"), std::invalid_argument);
}
