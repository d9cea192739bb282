// Benchmark harness: instance generation, solver runs, scaling fits and
// decomposition sweeps.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wfq/bench.hpp"
#include "wfq/error.hpp"
#include "wfq/export.hpp"
#include "wfq/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitStarved = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw wfq::Error("cannot write " + path.string());
  return out;
}

fs::path sibling(const fs::path& path, const std::string& suffix) {
  return path.parent_path() / (path.stem().string() + suffix);
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Workflow scheduling benchmarks: generators, QUBO and classical solvers, decomposition."};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int workers = 1;
  app.add_option("--seed", seed, "Master seed")->capture_default_str();
  app.add_option("--workers", workers, "Worker threads")->envname("WFQ_WORKERS")->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "Write a random instance corpus");
  wfq::CorpusSpec corpus;
  corpus.sizes = {5, 10, 15, 20, 25, 30};
  std::string falloff = "inverse";
  std::string availability = "uniform";
  fs::path gen_out = "corpus";
  gen->add_option("--sizes", corpus.sizes, "Job counts")->delimiter(',')->capture_default_str();
  gen->add_option("--per-size", corpus.per_size, "Instances per size")->capture_default_str();
  gen->add_option("--falloff", falloff, "inverse | inverse-square | inverse-sqrt")->capture_default_str();
  gen->add_option("--availability", availability, "uniform | sufficient")->capture_default_str();
  gen->add_option("--horizon-multiplier", corpus.horizon_multiplier, "Horizon / greedy makespan")
      ->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();

  // solve
  auto* solve = app.add_subcommand("solve", "Run solvers over instances and write a results CSV");
  std::vector<fs::path> solve_inputs;
  std::vector<std::string> solver_names;
  wfq::SolveSettings settings;
  fs::path solve_out = "results.csv";
  solve->add_option("instances", solve_inputs, "Instance files or directories")->required();
  solve->add_option("--solver", solver_names, "greedy | bnb | brute | sa (repeatable)");
  solve->add_option("--sweeps", settings.annealing.sweeps, "Annealing sweeps")->capture_default_str();
  solve->add_option("--attempts", settings.annealing.attempts, "Annealing restarts")->capture_default_str();
  solve->add_option("--bnb-nodes", settings.bnb_node_limit, "Branch-and-bound node budget")->capture_default_str();
  solve->add_option("--brute-max-vars", settings.brute_max_vars, "Skip brute force above this size")
      ->capture_default_str();
  solve->add_option("--out", solve_out, "Results CSV; metadata goes to <stem>.meta.json")->capture_default_str();

  // fit-makespan
  auto* fit_ms = app.add_subcommand("fit-makespan", "Linear fit of mean greedy makespan against N");
  std::vector<fs::path> fit_ms_inputs;
  fs::path fit_ms_out;
  fit_ms->add_option("inputs", fit_ms_inputs, "Results CSV, or instance files/directories")->required();
  fit_ms->add_option("--out", fit_ms_out, "Per-size means CSV");

  // fit-qubosize
  auto* fit_q = app.add_subcommand("fit-qubosize", "Power-law fit of QUBO variable count against N");
  std::vector<fs::path> fit_q_inputs;
  fs::path fit_q_out;
  fit_q->add_option("instances", fit_q_inputs, "Instance files or directories")->required();
  fit_q->add_option("--out", fit_q_out, "Per-size means CSV");

  // decomp-sweep
  auto* sweep = app.add_subcommand("decomp-sweep", "Decomposition makespan across subproblem sizes");
  std::vector<fs::path> sweep_inputs;
  wfq::SweepSettings sweep_settings;
  std::vector<int> sub_sizes = {2, 3, 4, 5, 6, 7, 8};
  std::optional<int> jobs_per_sub;
  std::optional<int> slots_per_sub;
  std::string sub_solver = "exact";
  fs::path sweep_out = "sweep.csv";
  fs::path trace_out;
  sweep->add_option("instances", sweep_inputs, "Instance files or directories")->required();
  sweep->add_option("--sizes", sub_sizes, "Jobs per subproblem")->delimiter(',')->capture_default_str();
  sweep->add_option("--ratio", sweep_settings.ratio, "Jobs per window / slots per window")->capture_default_str();
  sweep->add_option("--jobs-per-sub", jobs_per_sub, "Single configuration: jobs per window");
  sweep->add_option("--slots-per-sub", slots_per_sub, "Single configuration: slots per window");
  sweep->add_option("--solver", sub_solver, "Sub-solver: exact | brute | sa")->capture_default_str();
  sweep->add_option("--sweeps", sweep_settings.base.annealing.sweeps, "Annealing sweeps")->capture_default_str();
  sweep->add_option("--attempts", sweep_settings.base.annealing.attempts, "Annealing restarts")->capture_default_str();
  sweep->add_option("--bnb-nodes", sweep_settings.bnb_node_limit, "Baseline node budget")->capture_default_str();
  sweep->add_option("--out", sweep_out, "Per-run CSV; summary goes to <stem>.summary.csv")->capture_default_str();
  sweep->add_option("--trace", trace_out, "Write per-step JSON lines for the first instance");

  // export-lp
  auto* lp = app.add_subcommand("export-lp", "Write the time-indexed integer program in LP format");
  fs::path lp_input;
  fs::path lp_out;
  lp->add_option("instance", lp_input, "Instance file")->required();
  lp->add_option("--out", lp_out, "LP file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (workers < 1) throw UsageError("--workers must be at least 1");

    if (*gen) {
      corpus.seed = seed;
      corpus.falloff = wfq::parse_falloff(falloff);
      if (availability == "uniform") {
        corpus.availability = wfq::AvailabilityPolicy::kUniform;
      } else if (availability == "sufficient") {
        corpus.availability = wfq::AvailabilityPolicy::kSufficient;
      } else {
        throw UsageError("unknown availability policy '" + availability + "'");
      }
      const auto instances = wfq::generate_corpus(corpus);
      wfq::write_corpus(instances, gen_out);
      json meta = {{"seed", seed},
                   {"sizes", corpus.sizes},
                   {"per_size", corpus.per_size},
                   {"falloff", wfq::to_string(corpus.falloff)},
                   {"availability", availability},
                   {"horizon_multiplier", corpus.horizon_multiplier},
                   {"files", instances.size()}};
      wfq::write_json_file(meta, gen_out / "corpus.meta.json");
      std::cout << "wrote " << instances.size() << " instances to " << gen_out.string() << '\n';
      return 0;
    }

    if (*solve) {
      if (solver_names.empty()) solver_names = {"greedy", "bnb", "sa"};
      std::vector<wfq::SolverKind> solvers;
      for (const auto& s : solver_names) solvers.push_back(wfq::parse_solver(s));
      settings.seed = seed;
      settings.workers = workers;
      auto instances = wfq::load_instances(solve_inputs);
      const wfq::SolveReport report = wfq::solve_matrix(instances, solvers, settings);
      {
        auto out = open_out(solve_out);
        wfq::write_results_csv(out, report.rows);
      }
      json ranges = json::array();
      for (const auto& r : report.ranges) ranges.push_back({{"instance", r.instance}, {"c_min", r.c_min}, {"c_max", r.c_max}});
      json meta = {{"schema_version", wfq::kResultsSchemaVersion},
                   {"seed", seed},
                   {"solvers", solver_names},
                   {"sweeps", settings.annealing.sweeps},
                   {"attempts", settings.annealing.attempts},
                   {"bnb_node_limit", settings.bnb_node_limit},
                   {"brute_max_vars", settings.brute_max_vars},
                   {"penalty_weight", "objective of the greedy schedule + 1"},
                   {"cost_range",
                    "c_min: lowest energy among the rows of an instance (greedy and bnb schedules encoded); "
                    "c_max: highest of the all-zero bitstring, the row energies and all energies visited by "
                    "sa or brute"},
                   {"ranges", ranges}};
      wfq::write_json_file(meta, sibling(solve_out, ".meta.json"));
      std::cout << "wrote " << report.rows.size() << " rows to " << solve_out.string() << '\n';
      return 0;
    }

    if (*fit_ms) {
      std::vector<std::pair<int, double>> samples;
      std::vector<fs::path> instance_inputs;
      for (const auto& p : fit_ms_inputs) {
        if (p.extension() == ".csv") {
          std::ifstream in(p);
          if (!in) throw wfq::Error("cannot read " + p.string());
          const auto rows = wfq::read_results_csv(in);
          const auto s = wfq::makespan_samples(rows);
          samples.insert(samples.end(), s.begin(), s.end());
        } else {
          instance_inputs.push_back(p);
        }
      }
      if (!instance_inputs.empty()) {
        auto instances = wfq::load_instances(instance_inputs);
        const auto s = wfq::makespan_samples(instances);
        samples.insert(samples.end(), s.begin(), s.end());
      }
      const auto means = wfq::per_size_means(samples);
      if (!fit_ms_out.empty()) {
        auto out = open_out(fit_ms_out);
        wfq::write_means_csv(out, means);
      }
      print_json(wfq::to_json(wfq::fit_linear(means)));
      return 0;
    }

    if (*fit_q) {
      auto instances = wfq::load_instances(fit_q_inputs);
      const auto means = wfq::per_size_means(wfq::qubo_size_samples(instances));
      if (!fit_q_out.empty()) {
        auto out = open_out(fit_q_out);
        wfq::write_means_csv(out, means);
      }
      json j = wfq::to_json(wfq::fit_power(means));
      json per_size = json::array();
      for (const auto& m : means) per_size.push_back({{"n", m.n}, {"mean", m.mean}, {"count", m.count}});
      j["per_size"] = per_size;
      print_json(j);
      return 0;
    }

    if (*sweep) {
      if (jobs_per_sub.has_value() != slots_per_sub.has_value()) {
        throw UsageError("--jobs-per-sub and --slots-per-sub go together");
      }
      if (jobs_per_sub) {
        if (*jobs_per_sub < 1 || *slots_per_sub < 1) throw UsageError("window sizes must be at least 1");
        sub_sizes = {*jobs_per_sub};
        sweep_settings.ratio = static_cast<double>(*jobs_per_sub) / *slots_per_sub;
      }
      sweep_settings.sub_sizes = sub_sizes;
      sweep_settings.base.solver = wfq::parse_sub_solver(sub_solver);
      sweep_settings.base.annealing.seed = seed;
      sweep_settings.workers = workers;
      auto instances = wfq::load_instances(sweep_inputs);
      const wfq::SweepReport report = wfq::decomposition_sweep(instances, sweep_settings);
      {
        auto out = open_out(sweep_out);
        wfq::write_sweep_csv(out, report.rows);
      }
      {
        auto out = open_out(sibling(sweep_out, ".summary.csv"));
        wfq::write_sweep_summary_csv(out, report.summary);
      }
      if (!trace_out.empty() && !instances.empty()) {
        wfq::DecompositionConfig cfg = sweep_settings.base;
        cfg.jobs_per_sub = sweep_settings.sub_sizes.front();
        cfg.slots_per_sub = report.summary.front().slots_per_sub;
        const auto r = wfq::run_decomposition(instances.front().instance, cfg);
        auto out = open_out(trace_out);
        for (const auto& s : r.steps) out << wfq::to_json(s).dump() << '\n';
      }
      json j = {{"max_adjacent_increase", report.max_adjacent_increase}, {"kendall_tau", report.kendall_tau}};
      json rows = json::array();
      for (const auto& s : report.summary) {
        rows.push_back({{"jobs_per_sub", s.jobs_per_sub},
                        {"slots_per_sub", s.slots_per_sub},
                        {"mean_makespan", s.mean_makespan},
                        {"stderr", s.stderr_},
                        {"count", s.count}});
      }
      j["summary"] = rows;
      print_json(j);
      bool starved = false;
      for (const auto& r : report.rows) starved |= !r.makespan;
      return starved ? kExitStarved : 0;
    }

    if (*lp) {
      const wfq::WorkflowInstance inst = wfq::read_instance(lp_input);
      if (lp_out.empty()) {
        wfq::write_lp(std::cout, inst, {});
      } else {
        wfq::export_lp(inst, {}, lp_out);
      }
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const wfq::StarvationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitStarved;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
