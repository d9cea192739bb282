#include "wfq/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wfq/branch_and_bound.hpp"
#include "wfq/error.hpp"
#include "wfq/greedy.hpp"
#include "wfq/io.hpp"
#include "wfq/rng.hpp"

namespace wfq {

namespace {

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < count; k = next++) fn(k);
  };
  const int w = std::clamp<int>(workers, 1, static_cast<int>(std::max<std::size_t>(count, 1)));
  if (w == 1) {
    work();
    return;
  }
  std::vector<std::jthread> pool;
  for (int i = 0; i < w; ++i) pool.emplace_back(work);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string number(double v) {
  std::ostringstream os;
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    os << static_cast<long long>(v);
  } else {
    os << std::setprecision(10) << v;
  }
  return os.str();
}

std::string field(const std::string& s) {
  std::string out = s;
  std::replace(out.begin(), out.end(), ',', ';');
  std::replace(out.begin(), out.end(), '\n', ' ');
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string corpus_name(int n, int index) {
  std::ostringstream os;
  os << 'n' << std::setw(2) << std::setfill('0') << n << '_' << std::setw(3) << index;
  return os.str();
}

std::vector<NamedInstance> generate_corpus(const CorpusSpec& spec) {
  if (spec.sizes.empty()) throw std::invalid_argument("corpus: no sizes given");
  if (spec.per_size < 1) throw std::invalid_argument("corpus: per_size must be at least 1");
  for (int n : spec.sizes) {
    if (n < 1) throw std::invalid_argument("corpus: sizes must be at least 1");
  }
  std::vector<NamedInstance> out;
  for (int n : spec.sizes) {
    for (int k = 0; k < spec.per_size; ++k) {
      GeneratorConfig cfg;
      cfg.n_jobs = n;
      cfg.falloff = spec.falloff;
      cfg.availability = spec.availability;
      cfg.horizon_multiplier = spec.horizon_multiplier;
      cfg.seed = derive_seed(spec.seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k)});
      out.push_back({corpus_name(n, k), generate_instance(cfg)});
    }
  }
  return out;
}

void write_corpus(std::span<const NamedInstance> corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& entry : corpus) write_instance(entry.instance, dir / (entry.name + ".json"));
}

std::vector<NamedInstance> load_instances(std::span<const std::filesystem::path> paths) {
  std::vector<NamedInstance> out;
  for (const auto& p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> files;
      for (const auto& e : std::filesystem::directory_iterator(p)) {
        const std::string name = e.path().filename().string();
        if (e.is_regular_file() && name.ends_with(".json") && !name.ends_with(".meta.json")) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out.push_back({f.stem().string(), read_instance(f)});
    } else {
      out.push_back({p.stem().string(), read_instance(p)});
    }
  }
  return out;
}

std::string to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::kGreedy:
      return "greedy";
    case SolverKind::kBranchAndBound:
      return "bnb";
    case SolverKind::kBruteForce:
      return "brute";
    case SolverKind::kAnnealing:
      return "sa";
  }
  return "?";
}

SolverKind parse_solver(std::string_view name) {
  if (name == "greedy") return SolverKind::kGreedy;
  if (name == "bnb") return SolverKind::kBranchAndBound;
  if (name == "brute") return SolverKind::kBruteForce;
  if (name == "sa") return SolverKind::kAnnealing;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "' (expected greedy, bnb, brute or sa)");
}

namespace {

struct PreparedInstance {
  std::optional<Schedule> greedy;
  std::optional<QuboModel> model;
  std::string error;
};

PreparedInstance prepare(const WorkflowInstance& inst) {
  PreparedInstance p;
  try {
    p.greedy = greedy_schedule(inst);
    const ObjectiveConfig obj;
    const Coeff a = penalty_weight_bound(inst, obj, *p.greedy);
    p.model = build_qubo(inst, PenaltyWeights::uniform(a), obj);
  } catch (const StarvationError& e) {
    p.error = std::string("starved: ") + e.what();
  } catch (const std::exception& e) {
    p.error = std::string("error: ") + e.what();
  }
  return p;
}

// Energy of a schedule's encoding, when every start has a variable.
std::optional<double> encoded_energy(const QuboModel& model, const Schedule& s) {
  try {
    return static_cast<double>(model.combined.evaluate(encode(model, s)));
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

}  // namespace

SolveReport solve_matrix(std::span<const NamedInstance> instances, std::span<const SolverKind> solvers,
                         const SolveSettings& settings) {
  std::vector<PreparedInstance> prepared(instances.size());
  parallel_for(instances.size(), settings.workers, [&](std::size_t i) { prepared[i] = prepare(instances[i].instance); });

  const std::size_t cells = instances.size() * solvers.size();
  std::vector<ResultRow> rows(cells);
  std::vector<double> visited_max(cells, -std::numeric_limits<double>::infinity());

  parallel_for(cells, settings.workers, [&](std::size_t c) {
    const std::size_t i = c / solvers.size();
    const SolverKind kind = solvers[c % solvers.size()];
    const WorkflowInstance& inst = instances[i].instance;
    const PreparedInstance& prep = prepared[i];
    ResultRow& row = rows[c];
    row.instance = instances[i].name;
    row.n = inst.size();
    row.solver = to_string(kind);
    row.seed = derive_seed(settings.seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(kind)});
    if (prep.model) row.n_vars = prep.model->n_vars();
    if (!prep.error.empty()) {
      row.status = prep.error;
      return;
    }
    const QuboModel& model = *prep.model;
    const auto start = std::chrono::steady_clock::now();
    try {
      switch (kind) {
        case SolverKind::kGreedy: {
          row.makespan = prep.greedy->makespan();
          row.feasible = true;
          row.energy = encoded_energy(model, *prep.greedy);
          break;
        }
        case SolverKind::kBranchAndBound: {
          BranchAndBoundOptions opts;
          opts.node_limit = settings.bnb_node_limit;
          const BranchAndBoundResult r = branch_and_bound_schedule(inst, opts);
          row.makespan = r.makespan;
          row.feasible = true;
          row.proven = r.proven;
          row.evaluations = r.nodes;
          row.energy = encoded_energy(model, r.schedule);
          break;
        }
        case SolverKind::kBruteForce: {
          if (model.n_vars() > settings.brute_max_vars) {
            row.status = "skipped: " + std::to_string(model.n_vars()) + " variables";
            break;
          }
          const SolveResult r = brute_force_qubo(model);
          row.energy = r.energy;
          row.makespan = r.makespan;
          row.feasible = r.feasible;
          row.proven = true;
          row.evaluations = r.evaluations;
          if (r.max_energy_seen) visited_max[c] = *r.max_energy_seen;
          break;
        }
        case SolverKind::kAnnealing: {
          AnnealingConfig cfg = settings.annealing;
          cfg.seed = row.seed;
          cfg.workers = 1;
          const SolveResult r = simulated_annealing(model, cfg);
          row.energy = r.energy;
          row.makespan = r.makespan;
          row.feasible = r.feasible;
          row.evaluations = r.evaluations;
          if (r.max_energy_seen) visited_max[c] = *r.max_energy_seen;
          break;
        }
      }
    } catch (const StarvationError& e) {
      row.status = std::string("starved: ") + e.what();
    } catch (const std::exception& e) {
      row.status = std::string("error: ") + e.what();
    }
    row.wall_ms = elapsed_ms(start);
  });

  SolveReport report;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    if (!prepared[i].model || solvers.empty()) continue;
    const QuboModel& model = *prepared[i].model;
    CostRange range{instances[i].name, std::numeric_limits<double>::infinity(), 0.0};
    const Bits zero(static_cast<std::size_t>(model.n_vars()), 0);
    range.c_max = static_cast<double>(model.combined.evaluate(zero));
    for (std::size_t s = 0; s < solvers.size(); ++s) {
      const std::size_t c = i * solvers.size() + s;
      if (rows[c].energy) {
        range.c_min = std::min(range.c_min, *rows[c].energy);
        range.c_max = std::max(range.c_max, *rows[c].energy);
      }
      range.c_max = std::max(range.c_max, visited_max[c]);
    }
    if (!std::isfinite(range.c_min)) continue;
    for (std::size_t s = 0; s < solvers.size(); ++s) {
      ResultRow& row = rows[i * solvers.size() + s];
      if (!row.energy) continue;
      row.normalized_cost = range.c_max > range.c_min ? normalized_cost(*row.energy, range.c_min, range.c_max) : 0.0;
    }
    report.ranges.push_back(range);
  }
  report.rows = std::move(rows);
  return report;
}

void write_results_csv(std::ostream& out, std::span<const ResultRow> rows) {
  out << "schema_version,instance,n,solver,n_vars,energy,normalized_cost,makespan,feasible,proven,seed,"
         "evaluations,status,wall_ms\n";
  for (const ResultRow& r : rows) {
    out << kResultsSchemaVersion << ',' << field(r.instance) << ',' << r.n << ',' << r.solver << ',' << r.n_vars
        << ',' << (r.energy ? number(*r.energy) : "") << ','
        << (r.normalized_cost ? number(*r.normalized_cost) : "") << ','
        << (r.makespan ? std::to_string(*r.makespan) : "") << ',' << (r.feasible ? 1 : 0) << ','
        << (r.proven ? 1 : 0) << ',' << r.seed << ',' << r.evaluations << ',' << field(r.status) << ','
        << std::fixed << std::setprecision(3) << r.wall_ms << std::defaultfloat << '\n';
  }
}

std::vector<ResultRow> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("results CSV is empty");
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t k = 0; k < header.size(); ++k) col[header[k]] = k;
  for (const char* name : {"schema_version", "instance", "n", "solver", "makespan"}) {
    if (!col.count(name)) throw SchemaError(std::string("results CSV lacks column '") + name + "'");
  }
  std::vector<ResultRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw SchemaError("results CSV line " + std::to_string(line_no) + ": wrong field count");
    auto get = [&](const char* name) -> std::string { return col.count(name) ? f[col[name]] : std::string(); };
    try {
      if (std::stoi(get("schema_version")) != kResultsSchemaVersion) {
        throw SchemaError("results CSV line " + std::to_string(line_no) + ": unsupported schema version");
      }
      ResultRow r;
      r.instance = get("instance");
      r.n = std::stoi(get("n"));
      r.solver = get("solver");
      if (auto v = get("n_vars"); !v.empty()) r.n_vars = std::stoi(v);
      if (auto v = get("energy"); !v.empty()) r.energy = std::stod(v);
      if (auto v = get("normalized_cost"); !v.empty()) r.normalized_cost = std::stod(v);
      if (auto v = get("makespan"); !v.empty()) r.makespan = std::stoi(v);
      r.feasible = get("feasible") == "1";
      r.proven = get("proven") == "1";
      if (auto v = get("seed"); !v.empty()) r.seed = std::stoull(v);
      if (auto v = get("evaluations"); !v.empty()) r.evaluations = std::stoull(v);
      r.status = get("status");
      if (auto v = get("wall_ms"); !v.empty()) r.wall_ms = std::stod(v);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw SchemaError("results CSV line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return rows;
}

nlohmann::json to_json(const ScalingFit& fit) {
  nlohmann::json j;
  if (fit.kind == ScalingFit::Kind::kLinear) {
    j = {{"model", "linear"}, {"slope", fit.a}, {"slope_err", fit.a_err}, {"intercept", fit.b},
         {"intercept_err", fit.b_err}};
  } else {
    j = {{"model", "power"}, {"exponent", fit.a}, {"exponent_err", fit.a_err}, {"prefactor", fit.b},
         {"prefactor_err", fit.b_err}};
  }
  j["r2"] = fit.r2;
  j["points"] = fit.points;
  return j;
}

std::vector<SizeMean> per_size_means(std::span<const std::pair<int, double>> samples) {
  std::map<int, std::vector<double>> groups;
  for (const auto& [n, v] : samples) groups[n].push_back(v);
  std::vector<SizeMean> out;
  for (const auto& [n, vs] : groups) {
    SizeMean m;
    m.n = n;
    m.count = static_cast<int>(vs.size());
    for (double v : vs) m.mean += v;
    m.mean /= m.count;
    if (m.count > 1) {
      double ss = 0.0;
      for (double v : vs) ss += (v - m.mean) * (v - m.mean);
      m.stderr_ = std::sqrt(ss / (m.count - 1) / m.count);
    }
    out.push_back(m);
  }
  return out;
}

namespace {

// Ordinary least squares y = a*x + b.
ScalingFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto k = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  ScalingFit fit;
  fit.points = static_cast<int>(x.size());
  fit.a = sxy / sxx;
  fit.b = my - fit.a * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.a * x[i] + fit.b);
    sse += r * r;
  }
  const double s2 = sse / (k - 2.0);
  fit.a_err = std::sqrt(s2 / sxx);
  double sum_x2 = 0.0;
  for (double v : x) sum_x2 += v * v;
  fit.b_err = std::sqrt(s2 * sum_x2 / (k * sxx));
  fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

void require_sizes(std::span<const SizeMean> means) {
  if (means.size() < 3) {
    throw std::invalid_argument("scaling fit needs at least three distinct sizes, got " +
                                std::to_string(means.size()));
  }
}

}  // namespace

ScalingFit fit_linear(std::span<const SizeMean> means) {
  require_sizes(means);
  std::vector<double> x, y;
  for (const auto& m : means) {
    x.push_back(m.n);
    y.push_back(m.mean);
  }
  ScalingFit fit = least_squares(x, y);
  fit.kind = ScalingFit::Kind::kLinear;
  return fit;
}

ScalingFit fit_power(std::span<const SizeMean> means) {
  require_sizes(means);
  std::vector<double> x, y;
  for (const auto& m : means) {
    if (m.n <= 0 || m.mean <= 0.0) throw std::invalid_argument("power-law fit needs positive sizes and values");
    x.push_back(std::log(m.n));
    y.push_back(std::log(m.mean));
  }
  ScalingFit fit = least_squares(x, y);
  fit.kind = ScalingFit::Kind::kPower;
  const double log_b = fit.b;
  fit.b = std::exp(log_b);
  fit.b_err = fit.b * fit.b_err;
  return fit;
}

std::vector<std::pair<int, double>> makespan_samples(std::span<const ResultRow> rows) {
  std::vector<std::pair<int, double>> out;
  for (const ResultRow& r : rows) {
    if (r.solver == "greedy" && r.makespan) out.emplace_back(r.n, *r.makespan);
  }
  return out;
}

std::vector<std::pair<int, double>> makespan_samples(std::span<const NamedInstance> instances) {
  std::vector<std::pair<int, double>> out;
  for (const auto& e : instances) out.emplace_back(e.instance.size(), greedy_schedule(e.instance).makespan());
  return out;
}

std::vector<std::pair<int, double>> qubo_size_samples(std::span<const NamedInstance> instances) {
  std::vector<std::pair<int, double>> out;
  for (const auto& e : instances) out.emplace_back(e.instance.size(), qubo_variable_count(e.instance));
  return out;
}

void write_means_csv(std::ostream& out, std::span<const SizeMean> means) {
  out << "n,mean,stderr,count\n";
  for (const auto& m : means) out << m.n << ',' << number(m.mean) << ',' << number(m.stderr_) << ',' << m.count << '\n';
}

SweepReport decomposition_sweep(std::span<const NamedInstance> instances, const SweepSettings& settings) {
  if (settings.sub_sizes.empty()) throw std::invalid_argument("sweep: no subproblem sizes given");
  if (!(settings.ratio > 0.0)) throw std::invalid_argument("sweep: ratio must be positive");
  std::vector<std::pair<int, int>> configs;
  for (int s : settings.sub_sizes) {
    if (s < 1) throw std::invalid_argument("sweep: subproblem sizes must be at least 1");
    configs.emplace_back(s, std::max(1, static_cast<int>(std::lround(s / settings.ratio))));
  }

  SweepReport report;
  report.baselines.resize(instances.size());
  parallel_for(instances.size(), settings.workers, [&](std::size_t i) {
    BaselineRow& b = report.baselines[i];
    b.instance = instances[i].name;
    BranchAndBoundOptions opts;
    opts.node_limit = settings.bnb_node_limit;
    const BranchAndBoundResult r = branch_and_bound_schedule(instances[i].instance, opts);
    b.greedy_makespan = greedy_schedule(instances[i].instance).makespan();
    b.bnb_makespan = r.makespan;
    b.bnb_proven = r.proven;
  });

  const std::size_t cells = instances.size() * configs.size();
  report.rows.resize(cells);
  parallel_for(cells, settings.workers, [&](std::size_t c) {
    const std::size_t i = c % instances.size();
    const auto [jobs, slots] = configs[c / instances.size()];
    const WorkflowInstance& inst = instances[i].instance;
    SweepRow& row = report.rows[c];
    row.instance = instances[i].name;
    row.n = inst.size();
    row.jobs_per_sub = jobs;
    row.slots_per_sub = slots;
    DecompositionConfig cfg = settings.base;
    cfg.jobs_per_sub = jobs;
    cfg.slots_per_sub = slots;
    cfg.annealing.seed = derive_seed(settings.base.annealing.seed, {static_cast<std::uint64_t>(i),
                                                                    static_cast<std::uint64_t>(jobs),
                                                                    static_cast<std::uint64_t>(slots)});
    const auto start = std::chrono::steady_clock::now();
    try {
      const DecompositionResult r = run_decomposition(inst, cfg);
      row.makespan = r.makespan;
      row.feasible = check_schedule(inst, r.schedule).feasible();
      row.steps = static_cast<int>(r.steps.size());
      row.max_sub_qubo_vars = r.max_sub_qubo_vars;
    } catch (const StarvationError& e) {
      row.status = std::string("starved: ") + e.what();
    }
    row.wall_ms = elapsed_ms(start);
  });

  std::vector<double> means;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    SweepSummary s;
    s.jobs_per_sub = configs[k].first;
    s.slots_per_sub = configs[k].second;
    std::vector<std::pair<int, double>> samples;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const SweepRow& row = report.rows[k * instances.size() + i];
      if (row.makespan) samples.emplace_back(0, *row.makespan);
    }
    if (!samples.empty()) {
      const SizeMean m = per_size_means(samples).front();
      s.mean_makespan = m.mean;
      s.stderr_ = m.stderr_;
      s.count = m.count;
    }
    means.push_back(s.mean_makespan);
    report.summary.push_back(s);
  }

  report.max_adjacent_increase = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < means.size(); ++k) {
    report.max_adjacent_increase = std::max(report.max_adjacent_increase, means[k] - means[k - 1]);
  }
  if (means.size() < 2) report.max_adjacent_increase = 0.0;
  int concordant = 0, discordant = 0, pairs = 0;
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      const int ds = (configs[b].first > configs[a].first) - (configs[b].first < configs[a].first);
      const int dm = (means[b] > means[a]) - (means[b] < means[a]);
      concordant += ds * dm > 0;
      discordant += ds * dm < 0;
      ++pairs;
    }
  }
  report.kendall_tau = pairs > 0 ? static_cast<double>(concordant - discordant) / pairs : 0.0;
  return report;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "schema_version,instance,n,jobs_per_sub,slots_per_sub,makespan,feasible,steps,max_sub_qubo_vars,status,"
         "wall_ms\n";
  for (const SweepRow& r : rows) {
    out << kResultsSchemaVersion << ',' << field(r.instance) << ',' << r.n << ',' << r.jobs_per_sub << ','
        << r.slots_per_sub << ',' << (r.makespan ? std::to_string(*r.makespan) : "") << ',' << (r.feasible ? 1 : 0)
        << ',' << r.steps << ',' << r.max_sub_qubo_vars << ',' << field(r.status) << ',' << std::fixed
        << std::setprecision(3) << r.wall_ms << std::defaultfloat << '\n';
  }
}

void write_sweep_summary_csv(std::ostream& out, std::span<const SweepSummary> summary) {
  out << "jobs_per_sub,slots_per_sub,mean_makespan,stderr,count\n";
  for (const SweepSummary& s : summary) {
    out << s.jobs_per_sub << ',' << s.slots_per_sub << ',' << number(s.mean_makespan) << ',' << number(s.stderr_)
        << ',' << s.count << '\n';
  }
}

}  // namespace wfq
