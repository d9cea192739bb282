#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfq/qubo.hpp"
#include "wfq/qubo_solvers.hpp"

namespace wfq {

enum class SubSolverKind { kExact, kBruteForce, kAnnealing };
enum class RewardKind { kResourceWeighted, kUnit };

std::string to_string(SubSolverKind kind);
SubSolverKind parse_sub_solver(std::string_view name);  // "exact" | "brute" | "sa"

struct DecompositionConfig {
  int jobs_per_sub = 3;
  int slots_per_sub = 2;
  SubSolverKind solver = SubSolverKind::kExact;
  RewardKind reward = RewardKind::kResourceWeighted;
  // Adds t * x_{i,t} scaled below one reward unit, preferring earlier slots.
  bool earliest_start_tiebreak = true;
  // Windows up to this many slots encode "at most once" with pairwise
  // products; longer windows use one slack bit per job.
  int pairwise_once_max_slots = 3;
  // Used by kAnnealing; the seed is re-derived for every step.
  AnnealingConfig annealing;

  double ratio() const { return static_cast<double>(jobs_per_sub) / slots_per_sub; }
};

// Progress of a decomposition run: which jobs are done and where, the global
// slot where the next window opens, and the remaining capacity per slot.
// Capacity past the explicitly known entries repeats the most recently
// supplied profile (initially the instance availability).
class FrontierState {
 public:
  explicit FrontierState(const WorkflowInstance& inst);

  int size() const { return static_cast<int>(starts_.size()); }
  bool is_completed(JobId job) const { return starts_.at(job) >= 0; }
  int completed_count() const { return completed_; }
  bool all_completed() const { return completed_ == size(); }
  Slot time_offset() const { return time_offset_; }
  std::optional<Slot> start_of(JobId job) const;
  int capacity(Slot t) const;
  // Starts of the completed jobs.
  Schedule schedule() const;

  void complete(JobId job, Slot slot, int resource);
  void advance(int slots);
  // Replaces capacity from time_offset onwards; the new profile also becomes
  // the repeating pattern past its end.
  void replace_suffix(std::vector<int> profile);

 private:
  void materialize(Slot t);

  std::vector<Slot> starts_;
  int completed_ = 0;
  Slot time_offset_ = 0;
  std::vector<int> explicit_;
  std::vector<int> period_;
  Slot period_origin_ = 0;
};

// Current roots (unfinished, all parents finished) followed by descendant
// layers: layer k+1 holds unselected jobs whose parents are all finished or
// selected in earlier layers. Ids ascend within a layer; the list is cut to
// jobs_per_sub. Throws std::logic_error if jobs remain but none is a root.
std::vector<JobId> select_subproblem(const FrontierState& state, const WorkflowInstance& inst, int jobs_per_sub);

struct SubProblem {
  QuboModel model;  // layout slots are local to the window
  std::vector<JobId> subset;
  Coeff reward_scale = 1;       // one reward unit in energy units
  Coeff constraint_weight = 1;  // weight of resource and order violations
};

// Sub-QUBO over subset x window (window = slots_per_sub slots from the state's
// offset, pairs whose job does not fit the slot's remaining capacity
// dropped):
//   -reward_scale * w_i * x_{i,t}  (+ t * x_{i,t} with the tie-break)
//   at-most-once per job, weighted A * (1 + children_in_subset * slots)
//   A * x_{c,t1} * (1 - sum_{t2 < t1} x_{p,t2}) for edges inside the subset
//   A * (sum_i r_i x_{i,t} + slack_t - cap_t)^2 per window slot
// with A = reward_scale * sum_i w_i * slots + 1, so every minimiser is
// constraint-satisfying. Throws std::invalid_argument for an empty subset.
SubProblem build_sub_qubo(const WorkflowInstance& inst, const FrontierState& state, std::span<const JobId> subset,
                          const DecompositionConfig& cfg);

// Exact minimiser of a sub-QUBO by depth-first search over constraint-
// satisfying assignments (each job placed once in an admissible slot or left
// out). Ties keep the first assignment in search order (earlier slots before
// leaving a job out).
QuboSample solve_subproblem_exact(const SubProblem& sub, const WorkflowInstance& inst, const FrontierState& state);

struct StepTrace {
  int step = 0;
  std::vector<JobId> subset;
  int sub_qubo_vars = 0;
  std::vector<Assignment> scheduled;  // global slots
  Slot time_offset = 0;               // after the step
  double energy = 0.0;
  int rejected = 0;  // decoded starts dropped because they broke a constraint
  std::uint64_t evaluations = 0;
};

nlohmann::json to_json(const StepTrace& s);

struct StepOutcome {
  FrontierState state;
  StepTrace trace;
};

// Solves one window and commits the decoded starts. Starts that violate a
// constraint (possible with heuristic sub-solvers) are dropped in subset
// order. The offset advances past the last used window slot, or by one slot
// when nothing was placed. Throws StarvationError once the offset exceeds
// 10*N, std::logic_error when all jobs are already complete.
StepOutcome step(const FrontierState& state, const WorkflowInstance& inst, const DecompositionConfig& cfg,
                 int step_index = 0);

// Throws std::invalid_argument for negative or empty profiles.
FrontierState update_resources(FrontierState state, std::vector<int> profile);

struct DecompositionResult {
  Schedule schedule;
  std::vector<StepTrace> steps;
  int makespan = 0;
  int max_sub_qubo_vars = 0;
};

DecompositionResult run_decomposition(const WorkflowInstance& inst, const DecompositionConfig& cfg);
// Continues from an existing state (e.g. after update_resources).
DecompositionResult run_decomposition(const WorkflowInstance& inst, const DecompositionConfig& cfg,
                                      FrontierState state);

}  // namespace wfq
