#include "wfq/qubo.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <iostream>
#include <stdexcept>
#include <string>

#include "wfq/error.hpp"

namespace wfq {

void QuadraticForm::add_quadratic(int i, int j, Coeff c) {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= n_vars_) throw std::out_of_range("variable index outside the form");
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace({i, j}, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

void QuadraticForm::add_squared(std::span<const LinearEntry> expr, Coeff constant, Coeff weight) {
  if (weight == 0) return;
  offset_ += weight * constant * constant;
  for (std::size_t a = 0; a < expr.size(); ++a) {
    // x^2 = x folds the square into the linear term.
    add_linear(expr[a].var, weight * (expr[a].coeff * expr[a].coeff + 2 * constant * expr[a].coeff));
    for (std::size_t b = a + 1; b < expr.size(); ++b) {
      add_quadratic(expr[a].var, expr[b].var, weight * 2 * expr[a].coeff * expr[b].coeff);
    }
  }
}

void QuadraticForm::add_scaled(const QuadraticForm& other, Coeff weight) {
  if (other.n_vars_ > n_vars_) throw std::invalid_argument("added form has more variables");
  offset_ += weight * other.offset_;
  for (const auto& [key, c] : other.terms_) add_quadratic(key.first, key.second, weight * c);
}

Coeff QuadraticForm::evaluate(std::span<const std::uint8_t> bits) const {
  if (static_cast<int>(bits.size()) != n_vars_) {
    throw std::invalid_argument("bitstring has " + std::to_string(bits.size()) + " entries, model has " +
                                std::to_string(n_vars_) + " variables");
  }
  Coeff e = offset_;
  for (const auto& [key, c] : terms_) {
    if (bits[key.first] && bits[key.second]) e += c;
  }
  return e;
}

std::vector<QuboTerm> QuadraticForm::terms() const {
  std::vector<QuboTerm> out;
  out.reserve(terms_.size());
  for (const auto& [key, c] : terms_) out.push_back({key.first, key.second, c});
  return out;
}

Coeff QuadraticForm::max_abs_coeff() const {
  Coeff m = 0;
  for (const auto& [key, c] : terms_) m = std::max(m, c < 0 ? -c : c);
  return m;
}

int slack_width(int bound) {
  if (bound < 0) throw std::invalid_argument("negative slack bound: the inequality has no solution");
  if (bound == 0) return 1;
  return std::bit_width(static_cast<unsigned>(bound));
}

std::optional<int> VariableLayout::decision_index(JobId job, Slot local_slot) const {
  auto it = index.find({job, local_slot});
  if (it == index.end()) return std::nullopt;
  return it->second;
}

int VariableLayout::slack_count() const { return total_vars - static_cast<int>(decisions.size()); }

Coeff ObjectiveConfig::cost(Slot t) const {
  const Coeff over = static_cast<Coeff>(t) - expected_runtime;
  if (over <= 0) return 0;
  return penalty == OverrunPenalty::kLinear ? over : over * over;
}

QuboModel build_qubo(const WorkflowInstance& inst, const PenaltyWeights& weights, const ObjectiveConfig& obj) {
  if (auto report = validate_instance(inst); !report.ok()) throw ValidationError(report.summary());
  if (inst.horizon < 1) throw std::invalid_argument("build_qubo: horizon must be at least one slot");
  if (weights.one_start < 0 || weights.order < 0 || weights.resource < 0) {
    throw std::invalid_argument("build_qubo: penalty weights must be non-negative");
  }
  const int n = inst.size();
  const int m = inst.horizon;
  const auto& avail = inst.resources.available();

  QuboModel model;
  model.weights = weights;
  model.source = std::make_shared<const WorkflowInstance>(inst);
  VariableLayout& layout = model.layout;
  layout.capacities = avail;

  std::vector<std::vector<int>> job_vars(static_cast<std::size_t>(n));
  for (JobId i = 0; i < n; ++i) {
    for (Slot t = 0; t < m; ++t) {
      if (inst.resource(i) > avail[t]) continue;
      const int idx = static_cast<int>(layout.decisions.size());
      layout.decisions.push_back({i, t});
      layout.index[{i, t}] = idx;
      job_vars[i].push_back(idx);
    }
    if (job_vars[i].empty()) {
      throw std::invalid_argument("build_qubo: job " + std::to_string(i) + " fits no slot of the horizon");
    }
  }
  int next = static_cast<int>(layout.decisions.size());
  for (Slot t = 0; t < m; ++t) {
    const int w = slack_width(avail[t]);
    layout.slacks.push_back({SlackGroup::Kind::kResource, t, next, w});
    next += w;
  }
  layout.total_vars = next;

  model.objective = QuadraticForm(next);
  model.one_start = QuadraticForm(next);
  model.order = QuadraticForm(next);
  model.resource = QuadraticForm(next);

  for (std::size_t k = 0; k < layout.decisions.size(); ++k) {
    model.objective.add_linear(static_cast<int>(k), obj.cost(layout.decisions[k].slot));
  }

  for (JobId i = 0; i < n; ++i) {
    std::vector<LinearEntry> expr;
    for (int v : job_vars[i]) expr.push_back({v, 1});
    model.one_start.add_squared(expr, -1, 1);
  }

  // x_{p,t1} x_{c,t2} for t2 <= t1.
  for (const Edge& e : inst.dag.edges()) {
    for (int vp : job_vars[e.parent]) {
      for (int vc : job_vars[e.child]) {
        if (layout.decisions[vc].slot <= layout.decisions[vp].slot) model.order.add_quadratic(vp, vc, 1);
      }
    }
  }

  std::vector<std::vector<LinearEntry>> per_slot(static_cast<std::size_t>(m));
  for (std::size_t k = 0; k < layout.decisions.size(); ++k) {
    const auto& d = layout.decisions[k];
    per_slot[d.slot].push_back({static_cast<int>(k), inst.resource(d.job)});
  }
  for (const SlackGroup& g : layout.slacks) {
    auto expr = per_slot[g.owner];
    for (int b = 0; b < g.width; ++b) expr.push_back({g.first + b, Coeff{1} << b});
    model.resource.add_squared(expr, -avail[g.owner], 1);
  }

  model.combined = QuadraticForm(next);
  model.combined.add_scaled(model.objective, 1);
  model.combined.add_scaled(model.one_start, weights.one_start);
  model.combined.add_scaled(model.order, weights.order);
  model.combined.add_scaled(model.resource, weights.resource);
  return model;
}

int qubo_variable_count(const WorkflowInstance& inst) {
  const auto& avail = inst.resources.available();
  int count = 0;
  for (Slot t = 0; t < inst.horizon && t < static_cast<Slot>(avail.size()); ++t) {
    for (const Job& job : inst.jobs) count += job.resource <= avail[t] ? 1 : 0;
    count += slack_width(avail[t]);
  }
  return count;
}

double evaluate(const QuboModel& model, std::span<const std::uint8_t> bits) {
  return static_cast<double>(model.combined.evaluate(bits));
}

EnergyParts evaluate_parts(const QuboModel& model, std::span<const std::uint8_t> bits) {
  return {model.objective.evaluate(bits), model.one_start.evaluate(bits), model.order.evaluate(bits),
          model.resource.evaluate(bits)};
}

DecodeResult decode(const QuboModel& model, std::span<const std::uint8_t> bits) {
  if (static_cast<int>(bits.size()) != model.n_vars()) throw std::invalid_argument("decode: bitstring length mismatch");
  if (!model.source) throw std::logic_error("decode: model has no source instance");
  DecodeResult out;
  for (std::size_t k = 0; k < model.layout.decisions.size(); ++k) {
    if (!bits[k]) continue;
    const auto& d = model.layout.decisions[k];
    out.schedule.assign(d.job, model.layout.slot_offset + d.slot);
  }
  out.report = check_schedule(*model.source, out.schedule);
  return out;
}

Bits encode(const QuboModel& model, const Schedule& sched) {
  const VariableLayout& layout = model.layout;
  Bits bits(static_cast<std::size_t>(layout.total_vars), 0);
  std::map<Slot, Coeff> used;
  std::map<JobId, int> count;
  for (const auto& a : sched.assignments()) {
    const Slot local = a.slot - layout.slot_offset;
    auto idx = layout.decision_index(a.job, local);
    if (!idx) {
      throw std::invalid_argument("encode: no variable for job " + std::to_string(a.job) + " at slot " +
                                  std::to_string(a.slot));
    }
    bits[*idx] = 1;
    used[local] += model.source ? model.source->resource(a.job) : 0;
    ++count[a.job];
  }
  for (const SlackGroup& g : layout.slacks) {
    Coeff residual = 0;
    if (g.kind == SlackGroup::Kind::kResource) {
      residual = layout.capacities.at(g.owner) - used[g.owner];
    } else {
      residual = 1 - count[g.owner];
    }
    // Out-of-range residuals leave the slack at its nearest value.
    residual = std::clamp<Coeff>(residual, 0, (Coeff{1} << g.width) - 1);
    for (int b = 0; b < g.width; ++b) bits[g.first + b] = static_cast<std::uint8_t>((residual >> b) & 1);
  }
  return bits;
}

Coeff objective_cost(const ObjectiveConfig& obj, const Schedule& sched) {
  Coeff c = 0;
  for (const auto& a : sched.assignments()) c += obj.cost(a.slot);
  return c;
}

Coeff penalty_weight_bound(const WorkflowInstance& inst, const ObjectiveConfig& obj, const Schedule& feasible) {
  if (auto report = check_schedule(inst, feasible); !report.feasible()) {
    throw std::invalid_argument("penalty_weight_bound: schedule is not feasible (" + report.summary() + ")");
  }
  return objective_cost(obj, feasible) + 1;
}

double normalized_cost(double energy, double c_min, double c_max) {
  if (!(c_max > c_min)) throw std::invalid_argument("normalized_cost: need c_max > c_min");
  const double v = (energy - c_min) / (c_max - c_min);
  if (v < 0.0 || v > 1.0) {
    std::cerr << "warning: normalized cost " << v << " outside [0, 1], clamped\n";
    return std::clamp(v, 0.0, 1.0);
  }
  return v;
}

}  // namespace wfq
