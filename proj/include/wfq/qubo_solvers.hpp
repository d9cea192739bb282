#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfq/qubo.hpp"

namespace wfq {

// Adjacency form of a QuadraticForm for O(degree) flip updates.
class CompiledQubo {
 public:
  explicit CompiledQubo(const QuadraticForm& form);

  int n_vars() const { return static_cast<int>(linear_.size()); }
  Coeff energy(std::span<const std::uint8_t> bits) const;
  // Local field h_i + sum_j J_ij x_j for every variable.
  std::vector<Coeff> fields(std::span<const std::uint8_t> bits) const;
  // E(bits with i flipped) - E(bits), given the current fields.
  static Coeff flip_delta(std::span<const std::uint8_t> bits, std::span<const Coeff> fields, int i) {
    return bits[i] ? -fields[i] : fields[i];
  }
  // Flips bit i and updates the fields of its neighbours.
  void flip(std::span<std::uint8_t> bits, std::span<Coeff> fields, int i) const;
  Coeff max_abs_coeff() const { return max_abs_; }
  // Largest possible |flip delta| and smallest nonzero |coefficient|.
  Coeff max_flip_delta() const;
  Coeff min_abs_coeff() const;

 private:
  struct Neighbor {
    int var;
    Coeff coeff;
  };
  Coeff offset_ = 0;
  Coeff max_abs_ = 0;
  std::vector<Coeff> linear_;
  std::vector<std::vector<Neighbor>> adj_;
};

struct QuboSample {
  Bits bits;
  Coeff energy = 0;
  std::uint64_t evaluations = 0;
  Coeff max_energy_seen = 0;
};

inline constexpr int kBruteForceMaxVars = 25;

// Exhaustive minimisation in Gray-code order. Among equal minima the
// lexicographically smallest bitstring (x0 first) wins. Throws
// std::invalid_argument above kBruteForceMaxVars variables.
QuboSample brute_force_minimize(const QuadraticForm& form);

struct AnnealingConfig {
  int sweeps = 1000;
  int attempts = 20;
  std::uint64_t seed = 0;
  // Linear schedule from t_hot to t_cold over the sweeps. Defaults:
  // t_hot accepts the largest possible uphill flip with probability 1/2,
  // t_cold accepts the smallest with probability 1/100.
  std::optional<double> t_hot;
  std::optional<double> t_cold;
  int workers = 1;
};

// Single-bit-flip Metropolis annealing with a random variable order per sweep.
// Attempt k is seeded with derive_seed(seed, {k}) and starts from uniform
// random bits, so results do not depend on `workers`. The best sample over
// all attempts is returned (ties: lexicographically smaller bits).
QuboSample anneal(const QuadraticForm& form, const AnnealingConfig& cfg);

struct SolveResult {
  std::string solver;
  Bits bits;
  double energy = 0.0;
  std::optional<Schedule> schedule;
  std::optional<int> makespan;  // when the schedule is feasible
  bool feasible = false;
  bool proven = false;
  double wall_ms = 0.0;
  std::uint64_t evaluations = 0;
  std::uint64_t seed = 0;
  std::optional<double> max_energy_seen;
};

nlohmann::json to_json(const SolveResult& r);

// Model-level wrappers: minimise model.combined and decode the result.
SolveResult brute_force_qubo(const QuboModel& model);
// Unset temperatures default to penalty units for the model wrapper:
// t_hot = kModelHotPerWeight * max weight, t_cold = kModelCold.
inline constexpr double kModelHotPerWeight = 3.0;
inline constexpr double kModelCold = 0.5;
SolveResult simulated_annealing(const QuboModel& model, const AnnealingConfig& cfg);

}  // namespace wfq
