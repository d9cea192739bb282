#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "wfq/decomposition.hpp"
#include "wfq/generator.hpp"
#include "wfq/qubo_solvers.hpp"

namespace wfq {

inline constexpr int kResultsSchemaVersion = 1;

struct NamedInstance {
  std::string name;
  WorkflowInstance instance;
};

struct CorpusSpec {
  std::vector<int> sizes;
  int per_size = 50;
  Falloff falloff = Falloff::kInverse;
  std::uint64_t seed = 1;
  AvailabilityPolicy availability = AvailabilityPolicy::kUniform;
  double horizon_multiplier = 1.0;
};

// "n05_003" for the fourth 5-job instance.
std::string corpus_name(int n, int index);

// Instance (size, index) uses seed derive_seed(spec.seed, {size, index}).
// Throws std::invalid_argument for empty sizes, sizes < 1 or per_size < 1.
std::vector<NamedInstance> generate_corpus(const CorpusSpec& spec);

// Writes <name>.json per instance into dir (created if needed).
void write_corpus(std::span<const NamedInstance> corpus, const std::filesystem::path& dir);

// Loads instance files; directories contribute their *.json files (except
// *.meta.json) in name order. Names are file stems.
std::vector<NamedInstance> load_instances(std::span<const std::filesystem::path> paths);

enum class SolverKind { kGreedy, kBranchAndBound, kBruteForce, kAnnealing };
std::string to_string(SolverKind kind);
SolverKind parse_solver(std::string_view name);  // "greedy" | "bnb" | "brute" | "sa"

struct SolveSettings {
  std::uint64_t seed = 1;
  AnnealingConfig annealing;  // seed replaced per cell
  // Node budget keeps B&B results independent of machine speed.
  std::uint64_t bnb_node_limit = 2'000'000;
  int brute_max_vars = 22;
  int workers = 1;
};

struct ResultRow {
  std::string instance;
  int n = 0;
  std::string solver;
  int n_vars = 0;
  std::optional<double> energy;
  std::optional<double> normalized_cost;
  std::optional<int> makespan;
  bool feasible = false;
  bool proven = false;
  std::uint64_t seed = 0;
  std::uint64_t evaluations = 0;
  std::string status = "ok";
  double wall_ms = 0.0;
};

struct CostRange {
  std::string instance;
  double c_min = 0.0;
  double c_max = 0.0;
};

struct SolveReport {
  std::vector<ResultRow> rows;  // instance order, then solver order
  std::vector<CostRange> ranges;
};

// Runs every (instance, solver) cell; cells run on `workers` threads and each
// derives its own seed from (seed, instance index, solver). Energies of the
// greedy and B&B schedules are those of their encodings in the full model
// with A = objective of the greedy schedule + 1. Per instance, c_min is the
// lowest energy in its rows and c_max the highest of: the all-zero bitstring,
// the row energies and every energy an annealer or brute force visited.
SolveReport solve_matrix(std::span<const NamedInstance> instances, std::span<const SolverKind> solvers,
                         const SolveSettings& settings);

// CSV with a header line; wall_ms is the only timing column and comes last.
void write_results_csv(std::ostream& out, std::span<const ResultRow> rows);
std::vector<ResultRow> read_results_csv(std::istream& in);

struct ScalingFit {
  enum class Kind { kLinear, kPower };
  Kind kind = Kind::kLinear;
  // Linear: y = a*N + b. Power: y = b * N^a (fitted on log-log).
  double a = 0.0;
  double a_err = 0.0;
  double b = 0.0;
  double b_err = 0.0;
  double r2 = 0.0;
  int points = 0;
};

nlohmann::json to_json(const ScalingFit& fit);

struct SizeMean {
  int n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  int count = 0;
};

// Groups (n, value) samples by n, sorted by n.
std::vector<SizeMean> per_size_means(std::span<const std::pair<int, double>> samples);

// Least squares on per-size means. Throws std::invalid_argument with fewer
// than three distinct sizes (or non-positive values for the power law).
ScalingFit fit_linear(std::span<const SizeMean> means);
ScalingFit fit_power(std::span<const SizeMean> means);

// Greedy makespan samples from result rows, or computed from instances.
std::vector<std::pair<int, double>> makespan_samples(std::span<const ResultRow> rows);
std::vector<std::pair<int, double>> makespan_samples(std::span<const NamedInstance> instances);
std::vector<std::pair<int, double>> qubo_size_samples(std::span<const NamedInstance> instances);

void write_means_csv(std::ostream& out, std::span<const SizeMean> means);

struct SweepSettings {
  // Subproblem sizes (jobs per window); slots = round(size / ratio).
  std::vector<int> sub_sizes;
  double ratio = 1.0;
  DecompositionConfig base;  // solver, reward and annealing settings
  std::uint64_t bnb_node_limit = 2'000'000;
  int workers = 1;
};

struct SweepRow {
  std::string instance;
  int n = 0;
  int jobs_per_sub = 0;
  int slots_per_sub = 0;
  std::optional<int> makespan;  // absent when the run starved
  bool feasible = false;
  int steps = 0;
  int max_sub_qubo_vars = 0;
  std::string status = "ok";
  double wall_ms = 0.0;
};

struct SweepSummary {
  int jobs_per_sub = 0;
  int slots_per_sub = 0;
  double mean_makespan = 0.0;
  double stderr_ = 0.0;
  int count = 0;
};

struct BaselineRow {
  std::string instance;
  int greedy_makespan = 0;
  int bnb_makespan = 0;
  bool bnb_proven = false;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<SweepSummary> summary;
  std::vector<BaselineRow> baselines;
  // Largest increase of the mean makespan between adjacent sizes (<= 0 means
  // the means never increase) and Kendall's tau between size and mean.
  double max_adjacent_increase = 0.0;
  double kendall_tau = 0.0;
};

SweepReport decomposition_sweep(std::span<const NamedInstance> instances, const SweepSettings& settings);

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
void write_sweep_summary_csv(std::ostream& out, std::span<const SweepSummary> summary);

}  // namespace wfq
