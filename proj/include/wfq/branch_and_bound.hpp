#pragma once

#include <cstdint>
#include <optional>

#include "wfq/instance.hpp"

namespace wfq {

struct BranchAndBoundOptions {
  // Feasible schedule used as the starting incumbent instead of greedy when
  // it is better.
  std::optional<Schedule> incumbent;
  // Search budget; exceeding either returns the incumbent with proven=false.
  std::uint64_t node_limit = 2'000'000;
  std::optional<double> time_limit_s;
};

struct BranchAndBoundResult {
  Schedule schedule;
  int makespan = 0;
  bool proven = false;
  std::uint64_t nodes = 0;
};

// Exact minimum-makespan search.
//
// Slots are filled in increasing order. Some optimal schedule starts, in every
// slot, a maximal set of ready jobs that fits the capacity (pulling a ready job
// that still fits into an earlier slot never delays anything), so only maximal
// sets are branched on. Nodes are pruned with a bound that walks the remaining
// jobs in topological order and pushes each to the first slot that both
// follows its parents and has enough capacity, and with a dominance table
// keyed by the completed set (reaching the same set earlier is never worse).
//
// Supports up to 64 jobs; throws std::invalid_argument beyond that.
BranchAndBoundResult branch_and_bound_schedule(const WorkflowInstance& inst, const BranchAndBoundOptions& opts = {});

}  // namespace wfq
