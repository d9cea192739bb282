#include "wfq/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wfq/error.hpp"
#include "wfq/greedy.hpp"
#include "wfq/rng.hpp"

namespace wfq {

double falloff_probability(Falloff kind, int order) {
  if (order < 1) throw std::invalid_argument("node order is 1-based");
  const double x = order;
  switch (kind) {
    case Falloff::kInverse:
      return 1.0 / x;
    case Falloff::kInverseSquare:
      return 1.0 / (x * x);
    case Falloff::kInverseSqrt:
      return 1.0 / std::sqrt(x);
  }
  return 0.0;
}

std::string to_string(Falloff kind) {
  switch (kind) {
    case Falloff::kInverse:
      return "inverse";
    case Falloff::kInverseSquare:
      return "inverse-square";
    case Falloff::kInverseSqrt:
      return "inverse-sqrt";
  }
  return "?";
}

Falloff parse_falloff(std::string_view name) {
  if (name == "inverse" || name == "1/x") return Falloff::kInverse;
  if (name == "inverse-square" || name == "1/x2") return Falloff::kInverseSquare;
  if (name == "inverse-sqrt" || name == "1/sqrtx") return Falloff::kInverseSqrt;
  throw std::invalid_argument("unknown fall-off '" + std::string(name) + "'");
}

int horizon_estimate(const WorkflowInstance& inst, std::optional<int> slot_guard) {
  return greedy_schedule(inst, slot_guard).makespan();
}

namespace {

constexpr int kMaxAvailabilityDraws = 1000;

void check_config(const GeneratorConfig& cfg) {
  if (cfg.n_jobs < 1) throw std::invalid_argument("n_jobs must be at least 1");
  if (cfg.resource_lo < 1 || cfg.resource_lo > cfg.resource_hi) {
    throw std::invalid_argument("resource range must satisfy 1 <= lo <= hi");
  }
  if (cfg.availability_lo < 0) throw std::invalid_argument("availability_lo must be non-negative");
  if (!(cfg.horizon_multiplier >= 1.0)) throw std::invalid_argument("horizon_multiplier must be >= 1");
}

}  // namespace

WorkflowInstance generate_instance(const GeneratorConfig& cfg) {
  check_config(cfg);
  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> resource(cfg.resource_lo, cfg.resource_hi);

  const int n = cfg.n_jobs;
  WorkflowInstance inst;
  inst.seed = cfg.seed;
  inst.dag = Dag(n);
  for (int k = 0; k < n; ++k) {
    // Node k (0-based) has order k+1; each earlier node is a parent with the
    // same probability.
    const double p = falloff_probability(cfg.falloff, k + 1);
    for (int j = 0; j < k; ++j) {
      if (coin(rng) < p) inst.dag.add_edge(j, k);
    }
  }
  int max_req = 0;
  for (int k = 0; k < n; ++k) {
    inst.jobs.push_back({k, resource(rng)});
    max_req = std::max(max_req, inst.jobs.back().resource);
  }

  const int hi = std::max(cfg.availability_hi, max_req);
  const int lo = cfg.availability == AvailabilityPolicy::kSufficient ? max_req : std::min(cfg.availability_lo, hi);
  std::uniform_int_distribution<int> avail(lo, hi);
  const int guard = 10 * n;
  for (int draw = 0; draw < kMaxAvailabilityDraws; ++draw) {
    std::vector<int> profile(static_cast<std::size_t>(guard));
    for (int& a : profile) a = avail(rng);
    inst.resources = ResourceProfile(std::move(profile));
    inst.horizon = guard;
    int makespan = 0;
    try {
      makespan = horizon_estimate(inst, guard);
    } catch (const StarvationError&) {
      continue;
    }
    const int horizon = static_cast<int>(std::ceil(cfg.horizon_multiplier * makespan - 1e-9));
    return with_horizon(std::move(inst), horizon);
  }
  throw StarvationError("generator: no availability draw lets greedy finish within " + std::to_string(guard) +
                        " slots");
}

WorkflowInstance canonical_instance() {
  // 0 -> {1, 2}, 2 -> 3, 3 -> 4, {1, 4} -> 5.
  const int resources[] = {4, 3, 6, 2, 1, 5};
  const Edge edges[] = {{0, 1}, {0, 2}, {2, 3}, {3, 4}, {1, 5}, {4, 5}};
  return make_instance(resources, edges, {8, 8, 4, 9, 7, 3, 8});
}

}  // namespace wfq
