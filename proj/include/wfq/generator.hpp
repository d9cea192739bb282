#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "wfq/instance.hpp"

namespace wfq {

// Probability that the k-th added node (1-based) takes a given earlier node
// as parent.
enum class Falloff { kInverse, kInverseSquare, kInverseSqrt };

double falloff_probability(Falloff kind, int order);
std::string to_string(Falloff kind);
Falloff parse_falloff(std::string_view name);  // "inverse" | "inverse-square" | "inverse-sqrt"

enum class AvailabilityPolicy {
  // available[t] ~ U[availability_lo, max(availability_hi, max r_i)]
  kUniform,
  // available[t] ~ U[max r_i, max(availability_hi, max r_i)]; every job fits every slot
  kSufficient,
};

struct GeneratorConfig {
  int n_jobs = 5;
  Falloff falloff = Falloff::kInverse;
  int resource_lo = 1;
  int resource_hi = 10;
  std::uint64_t seed = 0;
  AvailabilityPolicy availability = AvailabilityPolicy::kUniform;
  int availability_lo = 1;
  int availability_hi = 10;
  // Horizon = ceil(multiplier * greedy makespan).
  double horizon_multiplier = 1.0;
};

// Deterministic in cfg. The availability profile is drawn for 10*N slots, the
// greedy scheduler is run on it, and the profile is cut to the horizon. A draw
// on which greedy starves is discarded and redrawn from the same stream.
WorkflowInstance generate_instance(const GeneratorConfig& cfg);

// Greedy makespan of the instance (its availability cycles past the end).
// Throws StarvationError if greedy needs more than `slot_guard` slots
// (default 10*N).
int horizon_estimate(const WorkflowInstance& inst, std::optional<int> slot_guard = std::nullopt);

// The six-job example with greedy makespan 7 and optimum 5.
WorkflowInstance canonical_instance();

}  // namespace wfq
