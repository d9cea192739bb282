#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "wfq/instance.hpp"

namespace wfq {

using Coeff = std::int64_t;
using Bits = std::vector<std::uint8_t>;

struct QuboTerm {
  int i = 0;
  int j = 0;  // i <= j; i == j is a linear term
  Coeff coeff = 0;

  friend bool operator==(const QuboTerm&, const QuboTerm&) = default;
};

struct LinearEntry {
  int var = 0;
  Coeff coeff = 0;
};

// Sparse upper-triangular quadratic form over binary variables:
//   E(x) = offset + sum_{i<=j} Q_ij x_i x_j
// Integer coefficients keep energies exact.
class QuadraticForm {
 public:
  QuadraticForm() = default;
  explicit QuadraticForm(int n_vars) : n_vars_(n_vars) {}

  int n_vars() const { return n_vars_; }
  Coeff offset() const { return offset_; }

  void add_constant(Coeff c) { offset_ += c; }
  void add_linear(int i, Coeff c) { add_quadratic(i, i, c); }
  void add_quadratic(int i, int j, Coeff c);
  // weight * (sum_k a_k x_k + constant)^2, expanded with x^2 = x.
  void add_squared(std::span<const LinearEntry> expr, Coeff constant, Coeff weight);
  void add_scaled(const QuadraticForm& other, Coeff weight);

  Coeff evaluate(std::span<const std::uint8_t> bits) const;
  // Canonical term list sorted by (i, j) with zero coefficients dropped.
  std::vector<QuboTerm> terms() const;
  Coeff max_abs_coeff() const;

 private:
  int n_vars_ = 0;
  Coeff offset_ = 0;
  std::map<std::pair<int, int>, Coeff> terms_;
};

// floor(log2 D) + 1 bits for D > 0 and 1 bit for D == 0; the bits cover
// [0, 2^w - 1] which contains [0, D]. Throws std::invalid_argument for D < 0.
int slack_width(int bound);

struct DecisionVar {
  JobId job = 0;
  Slot slot = 0;  // local slot; global slot = slot_offset + slot
};

struct SlackGroup {
  enum class Kind { kResource, kOnce };
  Kind kind = Kind::kResource;
  int owner = 0;  // slot for kResource, job for kOnce
  int first = 0;  // index of the 2^0 bit
  int width = 0;
};

struct VariableLayout {
  std::vector<DecisionVar> decisions;  // indices 0..decisions.size()-1
  std::vector<SlackGroup> slacks;      // appended after the decisions
  std::map<std::pair<JobId, Slot>, int> index;
  int total_vars = 0;
  Slot slot_offset = 0;
  std::vector<int> capacities;  // per local slot, as used for reduction

  std::optional<int> decision_index(JobId job, Slot local_slot) const;
  int slack_count() const;
};

struct PenaltyWeights {
  Coeff one_start = 1;
  Coeff order = 1;
  Coeff resource = 1;

  static PenaltyWeights uniform(Coeff a) { return {a, a, a}; }
  bool is_uniform() const { return one_start == order && order == resource; }
};

enum class OverrunPenalty { kLinear, kQuadratic };

// Cost sum_{i, t > R} f(t - R) x_{i,t} with f(d) = d or d^2.
struct ObjectiveConfig {
  int expected_runtime = 0;
  OverrunPenalty penalty = OverrunPenalty::kLinear;

  Coeff cost(Slot t) const;
};

// Energy parts; the constraint families are unweighted.
struct EnergyParts {
  Coeff objective = 0;
  Coeff one_start = 0;
  Coeff order = 0;
  Coeff resource = 0;

  Coeff penalty() const { return one_start + order + resource; }
};

struct QuboModel {
  VariableLayout layout;
  QuadraticForm objective;
  QuadraticForm one_start;
  QuadraticForm order;
  QuadraticForm resource;
  QuadraticForm combined;  // what solvers minimise
  PenaltyWeights weights;
  std::shared_ptr<const WorkflowInstance> source;

  int n_vars() const { return layout.total_vars; }
};

// Full time-indexed model of the instance over its horizon: one-start
// equalities, pairwise ordering products, and per-slot resource equalities
// with binary slack. Pairs (i, t) with r_i > available[t] are dropped.
// Throws ValidationError for invalid instances and std::invalid_argument for
// horizon 0 or a job left without any admissible slot.
QuboModel build_qubo(const WorkflowInstance& inst, const PenaltyWeights& weights, const ObjectiveConfig& obj = {});

// Number of variables build_qubo would create, without building the terms.
int qubo_variable_count(const WorkflowInstance& inst);

double evaluate(const QuboModel& model, std::span<const std::uint8_t> bits);
EnergyParts evaluate_parts(const QuboModel& model, std::span<const std::uint8_t> bits);

struct DecodeResult {
  Schedule schedule;  // global slots, one entry per set decision bit
  FeasibilityReport report;
};

// Maps decision bits back to starts and checks them against the source
// instance (not against the penalty terms).
DecodeResult decode(const QuboModel& model, std::span<const std::uint8_t> bits);

// Bits for a schedule with slack bits set to the exact residuals. Throws
// std::invalid_argument if some start has no variable in the layout.
Bits encode(const QuboModel& model, const Schedule& sched);

// Objective part of the cost for a schedule.
Coeff objective_cost(const ObjectiveConfig& obj, const Schedule& sched);

// objective_cost(feasible) + 1. Throws std::invalid_argument if the schedule
// is not feasible for the instance.
Coeff penalty_weight_bound(const WorkflowInstance& inst, const ObjectiveConfig& obj, const Schedule& feasible);

// (energy - c_min) / (c_max - c_min) clamped to [0, 1], warning on stderr when
// clamping. Throws std::invalid_argument unless c_max > c_min.
double normalized_cost(double energy, double c_min, double c_max);

}  // namespace wfq
