#include "wfq/decomposition.hpp"

#include <algorithm>
#include <stdexcept>

#include "wfq/error.hpp"
#include "wfq/rng.hpp"

namespace wfq {

std::string to_string(SubSolverKind kind) {
  switch (kind) {
    case SubSolverKind::kExact:
      return "exact";
    case SubSolverKind::kBruteForce:
      return "brute";
    case SubSolverKind::kAnnealing:
      return "sa";
  }
  return "?";
}

SubSolverKind parse_sub_solver(std::string_view name) {
  if (name == "exact") return SubSolverKind::kExact;
  if (name == "brute") return SubSolverKind::kBruteForce;
  if (name == "sa") return SubSolverKind::kAnnealing;
  throw std::invalid_argument("unknown sub-solver '" + std::string(name) + "'");
}

FrontierState::FrontierState(const WorkflowInstance& inst)
    : starts_(static_cast<std::size_t>(inst.size()), -1), period_(inst.resources.available()) {}

std::optional<Slot> FrontierState::start_of(JobId job) const {
  if (starts_.at(job) < 0) return std::nullopt;
  return starts_[job];
}

int FrontierState::capacity(Slot t) const {
  if (t < 0) throw std::invalid_argument("negative slot");
  if (t < static_cast<Slot>(explicit_.size())) return explicit_[t];
  if (period_.empty()) return 0;
  return period_[static_cast<std::size_t>(t - period_origin_) % period_.size()];
}

void FrontierState::materialize(Slot t) {
  while (static_cast<Slot>(explicit_.size()) <= t) {
    explicit_.push_back(capacity(static_cast<Slot>(explicit_.size())));
  }
}

Schedule FrontierState::schedule() const {
  Schedule s;
  for (JobId j = 0; j < size(); ++j) {
    if (starts_[j] >= 0) s.assign(j, starts_[j]);
  }
  return s;
}

void FrontierState::complete(JobId job, Slot slot, int resource) {
  if (starts_.at(job) >= 0) throw std::logic_error("job " + std::to_string(job) + " already completed");
  materialize(slot);
  explicit_[slot] -= resource;
  starts_[job] = slot;
  ++completed_;
}

void FrontierState::advance(int slots) {
  if (slots < 1) throw std::invalid_argument("time offset must strictly increase");
  time_offset_ += slots;
}

void FrontierState::replace_suffix(std::vector<int> profile) {
  if (profile.empty()) throw std::invalid_argument("replacement profile is empty");
  if (std::any_of(profile.begin(), profile.end(), [](int a) { return a < 0; })) {
    throw std::invalid_argument("replacement profile has negative entries");
  }
  materialize(time_offset_ - 1);
  explicit_.resize(static_cast<std::size_t>(time_offset_));
  explicit_.insert(explicit_.end(), profile.begin(), profile.end());
  period_origin_ = time_offset_;
  period_ = std::move(profile);
}

std::vector<JobId> select_subproblem(const FrontierState& state, const WorkflowInstance& inst, int jobs_per_sub) {
  if (jobs_per_sub < 1) throw std::invalid_argument("jobs_per_sub must be at least 1");
  if (state.all_completed()) return {};
  const int n = inst.size();
  std::vector<char> selected(static_cast<std::size_t>(n), 0);
  std::vector<JobId> out;
  auto settled = [&](JobId p) { return state.is_completed(p) || selected[p]; };

  bool first_layer = true;
  while (static_cast<int>(out.size()) < jobs_per_sub) {
    std::vector<JobId> layer;
    for (JobId j = 0; j < n; ++j) {
      if (state.is_completed(j) || selected[j]) continue;
      const auto& ps = inst.dag.parents(j);
      if (std::all_of(ps.begin(), ps.end(), settled)) layer.push_back(j);
    }
    if (layer.empty()) {
      if (first_layer) throw std::logic_error("no root among the remaining jobs; dependency graph is corrupt");
      break;
    }
    for (JobId j : layer) {
      if (static_cast<int>(out.size()) == jobs_per_sub) break;
      out.push_back(j);
    }
    // Mark only after the whole layer is collected so that a job's children
    // land in the next layer.
    for (JobId j : layer) selected[j] = 1;
    first_layer = false;
  }
  return out;
}

SubProblem build_sub_qubo(const WorkflowInstance& inst, const FrontierState& state, std::span<const JobId> subset,
                          const DecompositionConfig& cfg) {
  if (subset.empty()) throw std::invalid_argument("build_sub_qubo: empty subset");
  if (cfg.jobs_per_sub < 1 || cfg.slots_per_sub < 1) {
    throw std::invalid_argument("build_sub_qubo: jobs_per_sub and slots_per_sub must be at least 1");
  }
  const int slots = cfg.slots_per_sub;
  const int m = static_cast<int>(subset.size());
  const Slot offset = state.time_offset();

  SubProblem sub;
  sub.subset.assign(subset.begin(), subset.end());
  QuboModel& model = sub.model;
  model.source = std::make_shared<const WorkflowInstance>(inst);
  VariableLayout& layout = model.layout;
  layout.slot_offset = offset;
  for (int tau = 0; tau < slots; ++tau) layout.capacities.push_back(state.capacity(offset + tau));

  std::vector<int> position(static_cast<std::size_t>(inst.size()), -1);
  for (int k = 0; k < m; ++k) position[subset[k]] = k;

  std::vector<std::vector<int>> job_vars(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const JobId j = subset[k];
    if (state.is_completed(j)) throw std::invalid_argument("build_sub_qubo: job " + std::to_string(j) + " is done");
    for (const JobId p : inst.dag.parents(j)) {
      if (!state.is_completed(p) && (position[p] < 0 || position[p] >= k)) {
        throw std::invalid_argument("build_sub_qubo: parent " + std::to_string(p) + " of job " + std::to_string(j) +
                                    " is neither completed nor earlier in the subset");
      }
    }
    for (int tau = 0; tau < slots; ++tau) {
      if (inst.resource(j) > layout.capacities[tau]) continue;
      const int idx = static_cast<int>(layout.decisions.size());
      layout.decisions.push_back({j, tau});
      layout.index[{j, tau}] = idx;
      job_vars[k].push_back(idx);
    }
  }

  const bool pairwise_once = slots <= cfg.pairwise_once_max_slots;
  int next = static_cast<int>(layout.decisions.size());
  if (!pairwise_once) {
    for (int k = 0; k < m; ++k) {
      if (job_vars[k].size() < 2) continue;
      layout.slacks.push_back({SlackGroup::Kind::kOnce, subset[k], next, 1});
      next += 1;
    }
  }
  for (int tau = 0; tau < slots; ++tau) {
    const int w = slack_width(layout.capacities[tau]);
    layout.slacks.push_back({SlackGroup::Kind::kResource, tau, next, w});
    next += w;
  }
  layout.total_vars = next;

  // Reward units and constraint weight.
  auto weight_of = [&](JobId j) -> Coeff { return cfg.reward == RewardKind::kUnit ? 1 : inst.resource(j); };
  sub.reward_scale = cfg.earliest_start_tiebreak ? Coeff{m} * (slots - 1) + 1 : 1;
  Coeff total_weight = 0;
  for (JobId j : subset) total_weight += weight_of(j);
  sub.constraint_weight = sub.reward_scale * total_weight * slots + 1;
  const Coeff a = sub.constraint_weight;
  model.weights = PenaltyWeights::uniform(a);

  model.objective = QuadraticForm(next);
  model.one_start = QuadraticForm(next);
  model.order = QuadraticForm(next);
  model.resource = QuadraticForm(next);
  model.combined = QuadraticForm(next);

  for (int k = 0; k < m; ++k) {
    for (int v : job_vars[k]) {
      Coeff c = -sub.reward_scale * weight_of(subset[k]);
      if (cfg.earliest_start_tiebreak) c += layout.decisions[v].slot;
      model.objective.add_linear(v, c);
    }
  }

  // At most once. A parent started twice could cancel its children's order
  // penalties, so its weight grows with the children it has in the window.
  std::vector<Coeff> once_weight(static_cast<std::size_t>(m), a);
  for (int k = 0; k < m; ++k) {
    Coeff children = 0;
    for (JobId c : inst.dag.children(subset[k])) children += position[c] >= 0 ? 1 : 0;
    once_weight[k] = a * (1 + children * slots);
  }
  QuadraticForm once_weighted(next);
  for (int k = 0; k < m; ++k) {
    const auto& vars = job_vars[k];
    if (vars.size() < 2) continue;
    if (pairwise_once) {
      for (std::size_t x = 0; x < vars.size(); ++x) {
        for (std::size_t y = x + 1; y < vars.size(); ++y) model.one_start.add_quadratic(vars[x], vars[y], 1);
      }
    }
  }
  if (!pairwise_once) {
    for (const SlackGroup& g : layout.slacks) {
      if (g.kind != SlackGroup::Kind::kOnce) continue;
      const int k = position[g.owner];
      std::vector<LinearEntry> expr;
      for (int v : job_vars[k]) expr.push_back({v, 1});
      expr.push_back({g.first, 1});
      model.one_start.add_squared(expr, -1, 1);
    }
  }
  for (int k = 0; k < m; ++k) {
    // Per-job weights: rebuild the job's share of the once family.
    const auto& vars = job_vars[k];
    if (vars.size() < 2) continue;
    if (pairwise_once) {
      for (std::size_t x = 0; x < vars.size(); ++x) {
        for (std::size_t y = x + 1; y < vars.size(); ++y) once_weighted.add_quadratic(vars[x], vars[y], once_weight[k]);
      }
    } else {
      std::vector<LinearEntry> expr;
      for (int v : vars) expr.push_back({v, 1});
      for (const SlackGroup& g : layout.slacks) {
        if (g.kind == SlackGroup::Kind::kOnce && g.owner == subset[k]) expr.push_back({g.first, 1});
      }
      once_weighted.add_squared(expr, -1, once_weight[k]);
    }
  }

  // x_{c,t1} (1 - sum_{t2 < t1} x_{p,t2}) for parents inside the subset;
  // completed parents are satisfied already.
  for (int k = 0; k < m; ++k) {
    const JobId c = subset[k];
    for (JobId p : inst.dag.parents(c)) {
      if (position[p] < 0) continue;
      for (int vc : job_vars[k]) {
        const Slot t1 = layout.decisions[vc].slot;
        model.order.add_linear(vc, 1);
        for (int vp : job_vars[position[p]]) {
          if (layout.decisions[vp].slot < t1) model.order.add_quadratic(vc, vp, -1);
        }
      }
    }
  }

  std::vector<std::vector<LinearEntry>> per_slot(static_cast<std::size_t>(slots));
  for (std::size_t v = 0; v < layout.decisions.size(); ++v) {
    const auto& d = layout.decisions[v];
    per_slot[d.slot].push_back({static_cast<int>(v), inst.resource(d.job)});
  }
  for (const SlackGroup& g : layout.slacks) {
    if (g.kind != SlackGroup::Kind::kResource) continue;
    auto expr = per_slot[g.owner];
    for (int b = 0; b < g.width; ++b) expr.push_back({g.first + b, Coeff{1} << b});
    model.resource.add_squared(expr, -layout.capacities[g.owner], 1);
  }

  model.combined.add_scaled(model.objective, 1);
  model.combined.add_scaled(once_weighted, 1);
  model.combined.add_scaled(model.order, a);
  model.combined.add_scaled(model.resource, a);
  return sub;
}

namespace {

class ExactSubSearch {
 public:
  ExactSubSearch(const SubProblem& sub, const WorkflowInstance& inst, const FrontierState& state)
      : sub_(sub), inst_(inst), m_(static_cast<int>(sub.subset.size())) {
    const auto& layout = sub.model.layout;
    room_ = layout.capacities;
    options_.resize(static_cast<std::size_t>(m_));
    gain_.resize(static_cast<std::size_t>(m_));
    local_.assign(static_cast<std::size_t>(m_), -1);
    for (int k = 0; k < m_; ++k) {
      const JobId j = sub.subset[k];
      for (int tau = 0; tau < static_cast<int>(room_.size()); ++tau) {
        if (auto v = layout.decision_index(j, tau)) {
          options_[k].push_back({tau, sub.model.objective.evaluate(single(*v))});
        }
      }
      Coeff best = 0;
      for (const auto& o : options_[k]) best = std::min(best, o.cost);
      gain_[k] = best;
      std::vector<int> in_subset;
      for (JobId p : inst.dag.parents(j)) {
        if (state.is_completed(p)) continue;
        const auto it = std::find(sub.subset.begin(), sub.subset.end(), p);
        in_subset.push_back(static_cast<int>(it - sub.subset.begin()));
      }
      parents_.push_back(std::move(in_subset));
    }
    // Best possible remaining objective from position k onwards.
    suffix_.assign(static_cast<std::size_t>(m_ + 1), 0);
    for (int k = m_ - 1; k >= 0; --k) suffix_[k] = suffix_[k + 1] + gain_[k];
    best_local_ = local_;
  }

  Schedule solve() {
    dfs(0, 0);
    Schedule s;
    for (int k = 0; k < m_; ++k) {
      if (best_local_[k] >= 0) s.assign(sub_.subset[k], sub_.model.layout.slot_offset + best_local_[k]);
    }
    return s;
  }

  std::uint64_t nodes() const { return nodes_; }

 private:
  struct Option {
    int tau;
    Coeff cost;
  };

  Bits single(int v) const {
    Bits b(static_cast<std::size_t>(sub_.model.n_vars()), 0);
    b[v] = 1;
    return b;
  }

  void dfs(int k, Coeff value) {
    ++nodes_;
    if (value + suffix_[k] >= best_) return;
    if (k == m_) {
      best_ = value;
      best_local_ = local_;
      return;
    }
    const int r = inst_.resource(sub_.subset[k]);
    for (const Option& o : options_[k]) {
      if (room_[o.tau] < r) continue;
      bool ordered = true;
      for (int p : parents_[k]) ordered &= local_[p] >= 0 && local_[p] < o.tau;
      if (!ordered) continue;
      room_[o.tau] -= r;
      local_[k] = o.tau;
      dfs(k + 1, value + o.cost);
      local_[k] = -1;
      room_[o.tau] += r;
    }
    dfs(k + 1, value);
  }

  const SubProblem& sub_;
  const WorkflowInstance& inst_;
  int m_;
  std::vector<int> room_;
  std::vector<std::vector<Option>> options_;
  std::vector<Coeff> gain_;
  std::vector<std::vector<int>> parents_;
  std::vector<Coeff> suffix_;
  std::vector<int> local_;
  std::vector<int> best_local_;
  // Leaving everything out has objective 0; the first strictly better
  // assignment replaces it.
  Coeff best_ = 1;
  std::uint64_t nodes_ = 0;
};

}  // namespace

QuboSample solve_subproblem_exact(const SubProblem& sub, const WorkflowInstance& inst, const FrontierState& state) {
  ExactSubSearch search(sub, inst, state);
  const Schedule s = search.solve();
  QuboSample out;
  out.bits = encode(sub.model, s);
  out.energy = sub.model.combined.evaluate(out.bits);
  out.evaluations = search.nodes();
  out.max_energy_seen = out.energy;
  return out;
}

nlohmann::json to_json(const StepTrace& s) {
  nlohmann::json scheduled = nlohmann::json::array();
  for (const auto& a : s.scheduled) scheduled.push_back({a.job, a.slot});
  return {{"step", s.step},
          {"subset", s.subset},
          {"sub_qubo_vars", s.sub_qubo_vars},
          {"scheduled", std::move(scheduled)},
          {"time_offset", s.time_offset}};
}

StepOutcome step(const FrontierState& state, const WorkflowInstance& inst, const DecompositionConfig& cfg,
                 int step_index) {
  if (state.all_completed()) throw std::logic_error("step: all jobs already completed");
  const std::vector<JobId> subset = select_subproblem(state, inst, cfg.jobs_per_sub);
  const SubProblem sub = build_sub_qubo(inst, state, subset, cfg);

  QuboSample sample;
  switch (cfg.solver) {
    case SubSolverKind::kExact:
      sample = solve_subproblem_exact(sub, inst, state);
      break;
    case SubSolverKind::kBruteForce:
      sample = brute_force_minimize(sub.model.combined);
      break;
    case SubSolverKind::kAnnealing: {
      AnnealingConfig ac = cfg.annealing;
      ac.seed = derive_seed(cfg.annealing.seed, {static_cast<std::uint64_t>(step_index)});
      sample = anneal(sub.model.combined, ac);
      break;
    }
  }

  StepOutcome out{state, {}};
  StepTrace& trace = out.trace;
  trace.step = step_index;
  trace.subset = subset;
  trace.sub_qubo_vars = sub.model.n_vars();
  trace.energy = static_cast<double>(sample.energy);
  trace.evaluations = sample.evaluations;

  // Decoded local starts per subset position; -1 when absent, -2 when repeated.
  const int m = static_cast<int>(subset.size());
  std::vector<int> local(static_cast<std::size_t>(m), -1);
  for (std::size_t v = 0; v < sub.model.layout.decisions.size(); ++v) {
    if (!sample.bits[v]) continue;
    const auto& d = sub.model.layout.decisions[v];
    const int k = static_cast<int>(std::find(subset.begin(), subset.end(), d.job) - subset.begin());
    local[k] = local[k] == -1 ? d.slot : -2;
  }

  std::vector<int> room = sub.model.layout.capacities;
  std::vector<int> accepted(static_cast<std::size_t>(m), -1);
  int last_used = -1;
  for (int k = 0; k < m; ++k) {
    if (local[k] == -1) continue;
    const JobId j = subset[k];
    bool ok = local[k] >= 0 && room[local[k]] >= inst.resource(j);
    for (JobId p : inst.dag.parents(j)) {
      if (!ok || state.is_completed(p)) continue;
      const int kp = static_cast<int>(std::find(subset.begin(), subset.end(), p) - subset.begin());
      ok = accepted[kp] >= 0 && accepted[kp] < local[k];
    }
    if (!ok) {
      ++trace.rejected;
      continue;
    }
    accepted[k] = local[k];
    room[local[k]] -= inst.resource(j);
    last_used = std::max(last_used, local[k]);
    const Slot global = state.time_offset() + local[k];
    out.state.complete(j, global, inst.resource(j));
    trace.scheduled.push_back({j, global});
  }
  out.state.advance(last_used >= 0 ? last_used + 1 : 1);
  trace.time_offset = out.state.time_offset();
  if (out.state.time_offset() > 10 * inst.size()) {
    throw StarvationError("decomposition: time offset " + std::to_string(out.state.time_offset()) + " exceeds " +
                          std::to_string(10 * inst.size()) + " slots with " +
                          std::to_string(inst.size() - out.state.completed_count()) + " job(s) left");
  }
  return out;
}

FrontierState update_resources(FrontierState state, std::vector<int> profile) {
  state.replace_suffix(std::move(profile));
  return state;
}

DecompositionResult run_decomposition(const WorkflowInstance& inst, const DecompositionConfig& cfg) {
  if (auto report = validate_instance(inst); !report.ok()) throw ValidationError(report.summary());
  return run_decomposition(inst, cfg, FrontierState(inst));
}

DecompositionResult run_decomposition(const WorkflowInstance& inst, const DecompositionConfig& cfg,
                                      FrontierState state) {
  DecompositionResult result;
  int index = 0;
  while (!state.all_completed()) {
    StepOutcome o = step(state, inst, cfg, index++);
    result.max_sub_qubo_vars = std::max(result.max_sub_qubo_vars, o.trace.sub_qubo_vars);
    result.steps.push_back(std::move(o.trace));
    state = std::move(o.state);
  }
  result.schedule = state.schedule();
  result.makespan = result.schedule.makespan();
  return result;
}

}  // namespace wfq
