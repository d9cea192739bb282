#include "wfq/qubo_solvers.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "wfq/rng.hpp"

namespace wfq {

CompiledQubo::CompiledQubo(const QuadraticForm& form)
    : offset_(form.offset()),
      max_abs_(form.max_abs_coeff()),
      linear_(static_cast<std::size_t>(form.n_vars()), 0),
      adj_(linear_.size()) {
  for (const QuboTerm& t : form.terms()) {
    if (t.i == t.j) {
      linear_[t.i] += t.coeff;
    } else {
      adj_[t.i].push_back({t.j, t.coeff});
      adj_[t.j].push_back({t.i, t.coeff});
    }
  }
}

Coeff CompiledQubo::energy(std::span<const std::uint8_t> bits) const {
  Coeff e = offset_;
  for (int i = 0; i < n_vars(); ++i) {
    if (!bits[i]) continue;
    e += linear_[i];
    for (const Neighbor& nb : adj_[i]) {
      if (nb.var > i && bits[nb.var]) e += nb.coeff;
    }
  }
  return e;
}

std::vector<Coeff> CompiledQubo::fields(std::span<const std::uint8_t> bits) const {
  std::vector<Coeff> f(linear_);
  for (int i = 0; i < n_vars(); ++i) {
    for (const Neighbor& nb : adj_[i]) {
      if (bits[nb.var]) f[i] += nb.coeff;
    }
  }
  return f;
}

void CompiledQubo::flip(std::span<std::uint8_t> bits, std::span<Coeff> fields, int i) const {
  bits[i] ^= 1;
  const Coeff sign = bits[i] ? 1 : -1;
  for (const Neighbor& nb : adj_[i]) fields[nb.var] += sign * nb.coeff;
}

Coeff CompiledQubo::max_flip_delta() const {
  Coeff best = 0;
  for (int i = 0; i < n_vars(); ++i) {
    Coeff d = std::abs(linear_[i]);
    for (const Neighbor& nb : adj_[i]) d += std::abs(nb.coeff);
    best = std::max(best, d);
  }
  return best;
}

Coeff CompiledQubo::min_abs_coeff() const {
  Coeff best = 0;
  auto consider = [&](Coeff c) {
    if (c != 0 && (best == 0 || std::abs(c) < best)) best = std::abs(c);
  };
  for (int i = 0; i < n_vars(); ++i) {
    consider(linear_[i]);
    for (const Neighbor& nb : adj_[i]) consider(nb.coeff);
  }
  return best;
}

QuboSample brute_force_minimize(const QuadraticForm& form) {
  const int n = form.n_vars();
  if (n > kBruteForceMaxVars) {
    throw std::invalid_argument("brute force limited to " + std::to_string(kBruteForceMaxVars) + " variables, got " +
                                std::to_string(n));
  }
  const CompiledQubo q(form);
  Bits bits(static_cast<std::size_t>(n), 0);
  std::vector<Coeff> fields = q.fields(bits);
  Coeff e = q.energy(bits);
  QuboSample best{bits, e, 1, e};
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t k = 1; k < total; ++k) {
    const int i = std::countr_zero(k);
    e += CompiledQubo::flip_delta(bits, fields, i);
    q.flip(bits, fields, i);
    best.max_energy_seen = std::max(best.max_energy_seen, e);
    if (e < best.energy || (e == best.energy && bits < best.bits)) {
      best.energy = e;
      best.bits = bits;
    }
  }
  best.evaluations = total;
  return best;
}

namespace {

QuboSample anneal_once(const CompiledQubo& q, const AnnealingConfig& cfg, double t_hot, double t_cold,
                       std::uint64_t seed) {
  const int n = q.n_vars();
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Bits bits(static_cast<std::size_t>(n));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
  std::vector<Coeff> fields = q.fields(bits);
  Coeff e = q.energy(bits);
  QuboSample best{bits, e, 0, e};
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  for (int s = 0; s < cfg.sweeps; ++s) {
    const double frac = cfg.sweeps > 1 ? static_cast<double>(s) / (cfg.sweeps - 1) : 1.0;
    const double temp = t_hot + (t_cold - t_hot) * frac;
    std::shuffle(order.begin(), order.end(), rng);
    for (int i : order) {
      const Coeff delta = CompiledQubo::flip_delta(bits, fields, i);
      ++best.evaluations;
      if (delta > 0 && unit(rng) >= std::exp(-static_cast<double>(delta) / temp)) continue;
      q.flip(bits, fields, i);
      e += delta;
      best.max_energy_seen = std::max(best.max_energy_seen, e);
      if (e < best.energy) {
        best.energy = e;
        best.bits = bits;
      }
    }
  }
  return best;
}

bool better(const QuboSample& a, const QuboSample& b) {
  return a.energy < b.energy || (a.energy == b.energy && a.bits < b.bits);
}

}  // namespace

QuboSample anneal(const QuadraticForm& form, const AnnealingConfig& cfg) {
  if (cfg.sweeps < 1 || cfg.attempts < 1) throw std::invalid_argument("annealing needs sweeps >= 1 and attempts >= 1");
  const CompiledQubo q(form);
  const double t_hot = cfg.t_hot.value_or(std::max<double>(1.0, static_cast<double>(q.max_flip_delta())) / std::log(2.0));
  const double t_cold = cfg.t_cold.value_or(std::max<double>(1.0, static_cast<double>(q.min_abs_coeff())) / std::log(100.0));
  if (!(t_hot > t_cold && t_cold > 0.0)) throw std::invalid_argument("annealing needs t_hot > t_cold > 0");

  std::vector<QuboSample> results(static_cast<std::size_t>(cfg.attempts));
  std::atomic<int> next{0};
  auto work = [&] {
    for (int k = next++; k < cfg.attempts; k = next++) {
      results[k] = anneal_once(q, cfg, t_hot, t_cold, derive_seed(cfg.seed, {static_cast<std::uint64_t>(k)}));
    }
  };
  const int workers = std::clamp(cfg.workers, 1, cfg.attempts);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  QuboSample best = results.front();
  std::uint64_t evaluations = 0;
  Coeff max_seen = best.max_energy_seen;
  for (const QuboSample& r : results) {
    evaluations += r.evaluations;
    max_seen = std::max(max_seen, r.max_energy_seen);
    if (better(r, best)) best = r;
  }
  best.evaluations = evaluations;
  best.max_energy_seen = max_seen;
  return best;
}

nlohmann::json to_json(const SolveResult& r) {
  nlohmann::json j;
  j["solver"] = r.solver;
  j["energy"] = r.energy;
  j["feasible"] = r.feasible;
  j["proven"] = r.proven;
  j["makespan"] = r.makespan ? nlohmann::json(*r.makespan) : nlohmann::json(nullptr);
  j["wall_ms"] = r.wall_ms;
  j["evaluations"] = r.evaluations;
  j["seed"] = r.seed;
  if (r.max_energy_seen) j["max_energy_seen"] = *r.max_energy_seen;
  std::string bits;
  for (auto b : r.bits) bits += b ? '1' : '0';
  j["bits"] = bits;
  if (r.schedule) {
    nlohmann::json starts = nlohmann::json::array();
    for (const auto& a : r.schedule->assignments()) starts.push_back({a.job, a.slot});
    j["starts"] = std::move(starts);
  }
  return j;
}

namespace {

SolveResult from_sample(const QuboModel& model, QuboSample sample, std::string name) {
  SolveResult r;
  r.solver = std::move(name);
  r.energy = static_cast<double>(sample.energy);
  r.evaluations = sample.evaluations;
  r.max_energy_seen = static_cast<double>(sample.max_energy_seen);
  if (model.source) {
    DecodeResult d = decode(model, sample.bits);
    r.feasible = d.report.feasible();
    if (r.feasible) r.makespan = d.report.makespan;
    r.schedule = std::move(d.schedule);
  }
  r.bits = std::move(sample.bits);
  return r;
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

SolveResult brute_force_qubo(const QuboModel& model) {
  const auto start = std::chrono::steady_clock::now();
  SolveResult r = from_sample(model, brute_force_minimize(model.combined), "brute");
  r.proven = true;
  r.wall_ms = elapsed_ms(start);
  return r;
}

SolveResult simulated_annealing(const QuboModel& model, const AnnealingConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  AnnealingConfig tuned = cfg;
  const Coeff w = std::max({Coeff{1}, model.weights.one_start, model.weights.order, model.weights.resource});
  if (!tuned.t_hot) tuned.t_hot = kModelHotPerWeight * static_cast<double>(w);
  if (!tuned.t_cold) tuned.t_cold = kModelCold;
  SolveResult r = from_sample(model, anneal(model.combined, tuned), "sa");
  r.seed = cfg.seed;
  r.wall_ms = elapsed_ms(start);
  return r;
}

}  // namespace wfq
