#include "wfq/branch_and_bound.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "wfq/error.hpp"
#include "wfq/greedy.hpp"

namespace wfq {

namespace {

using Mask = std::uint64_t;
constexpr int kNever = std::numeric_limits<int>::max() / 4;
constexpr std::size_t kMemoLimit = 1u << 22;

class Search {
 public:
  Search(const WorkflowInstance& inst, const BranchAndBoundOptions& opts, int incumbent_makespan)
      : inst_(inst), opts_(opts), n_(inst.size()), best_(incumbent_makespan) {
    order_ = *inst.dag.topological_order();
    parent_mask_.assign(static_cast<std::size_t>(n_), 0);
    for (JobId j = 0; j < n_; ++j) {
      for (JobId p : inst.dag.parents(j)) parent_mask_[j] |= Mask{1} << p;
    }
    // Longest chain (in jobs) starting at each job; used for branching order.
    tail_.assign(static_cast<std::size_t>(n_), 1);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      for (JobId c : inst.dag.children(*it)) tail_[*it] = std::max(tail_[*it], tail_[c] + 1);
    }
    // next_fit_[r][t]: first slot >= t whose capacity is at least r.
    int r_max = 0;
    for (const Job& job : inst.jobs) r_max = std::max(r_max, job.resource);
    limit_ = best_;
    next_fit_.assign(static_cast<std::size_t>(r_max + 1), std::vector<int>(static_cast<std::size_t>(limit_ + 1), kNever));
    for (int r = 1; r <= r_max; ++r) {
      for (int t = limit_ - 1; t >= 0; --t) {
        next_fit_[r][t] = inst.resources.capacity(t) >= r ? t : next_fit_[r][t + 1];
      }
    }
    starts_.assign(static_cast<std::size_t>(n_), -1);
    est_.assign(static_cast<std::size_t>(n_), 0);
    if (opts.time_limit_s) {
      deadline_ = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(*opts.time_limit_s));
    }
  }

  void run() { visit(0, 0); }

  bool aborted() const { return aborted_; }
  std::uint64_t nodes() const { return nodes_; }
  int best() const { return best_; }
  const std::vector<Slot>& best_starts() const { return best_starts_; }

 private:
  // Earliest makespan reachable from (t, done) ignoring interactions between
  // the remaining jobs' resource use.
  int lower_bound(Slot t, Mask done) {
    int lb = t;
    for (JobId j : order_) {
      if (done >> j & 1) continue;
      int e = t;
      for (JobId p : inst_.dag.parents(j)) {
        if (!(done >> p & 1)) e = std::max(e, est_[p] + 1);
      }
      e = e < limit_ ? next_fit_[inst_.resource(j)][e] : kNever;
      est_[j] = e;
      if (e >= kNever) return kNever;
      lb = std::max(lb, e + 1);
    }
    return lb;
  }

  bool out_of_budget() {
    if (nodes_ >= opts_.node_limit) return true;
    if (deadline_ && (nodes_ & 1023) == 0 && std::chrono::steady_clock::now() > *deadline_) return true;
    return false;
  }

  void visit(Slot t, Mask done) {
    if (aborted_) return;
    if (out_of_budget()) {
      aborted_ = true;
      return;
    }
    ++nodes_;
    std::vector<JobId> ready;
    int min_ready = kNever;
    for (JobId j = 0; j < n_; ++j) {
      if (!(done >> j & 1) && (parent_mask_[j] & ~done) == 0) {
        ready.push_back(j);
        min_ready = std::min(min_ready, inst_.resource(j));
      }
    }
    // Slots where no ready job fits are skipped here rather than visited, so
    // the memo below never sees the same set at an idle slot.
    while (t + 1 < best_ && inst_.resources.capacity(t) < min_ready) ++t;
    if (lower_bound(t, done) >= best_) return;
    auto [it, inserted] = seen_.try_emplace(done, t);
    if (!inserted) {
      if (it->second <= t) return;
      it->second = t;
    } else if (seen_.size() > kMemoLimit) {
      seen_.erase(it);
    }

    std::sort(ready.begin(), ready.end(), [&](JobId a, JobId b) {
      if (tail_[a] != tail_[b]) return tail_[a] > tail_[b];
      if (inst_.resource(a) != inst_.resource(b)) return inst_.resource(a) > inst_.resource(b);
      return a < b;
    });
    std::vector<JobId> chosen;
    enumerate(t, done, ready, 0, inst_.resources.capacity(t), kNever, chosen);
  }

  // Include/exclude over ready jobs; leaves are maximal sets only.
  void enumerate(Slot t, Mask done, const std::vector<JobId>& ready, std::size_t k, int room, int min_excluded,
                 std::vector<JobId>& chosen) {
    if (aborted_) return;
    if (k == ready.size()) {
      if (min_excluded <= room) return;
      Mask next = done;
      for (JobId j : chosen) {
        next |= Mask{1} << j;
        starts_[j] = t;
      }
      if (next == full()) {
        if (t + 1 < best_) {
          best_ = t + 1;
          best_starts_ = starts_;
        }
      } else {
        visit(t + 1, next);
      }
      for (JobId j : chosen) starts_[j] = -1;
      return;
    }
    const JobId j = ready[k];
    const int r = inst_.resource(j);
    if (r <= room) {
      chosen.push_back(j);
      enumerate(t, done, ready, k + 1, room - r, min_excluded, chosen);
      chosen.pop_back();
    }
    // Excluding j only leads to a maximal set if later picks can use up the
    // room j would need.
    const int excluded = std::min(min_excluded, r);
    int rest = 0;
    for (std::size_t q = k + 1; q < ready.size(); ++q) rest += inst_.resource(ready[q]);
    if (room - rest < excluded) enumerate(t, done, ready, k + 1, room, excluded, chosen);
  }

  Mask full() const { return n_ == 64 ? ~Mask{0} : (Mask{1} << n_) - 1; }

  const WorkflowInstance& inst_;
  const BranchAndBoundOptions& opts_;
  int n_;
  int best_;
  int limit_ = 0;
  std::vector<JobId> order_;
  std::vector<Mask> parent_mask_;
  std::vector<int> tail_;
  std::vector<std::vector<int>> next_fit_;
  std::vector<Slot> starts_;
  std::vector<int> est_;
  std::vector<Slot> best_starts_;
  std::unordered_map<Mask, Slot> seen_;
  std::uint64_t nodes_ = 0;
  bool aborted_ = false;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
};

}  // namespace

BranchAndBoundResult branch_and_bound_schedule(const WorkflowInstance& inst, const BranchAndBoundOptions& opts) {
  const int n = inst.size();
  if (n > 64) throw std::invalid_argument("branch and bound supports at most 64 jobs");
  if (!inst.dag.topological_order()) throw ValidationError("branch and bound: dependency graph contains a cycle");

  BranchAndBoundResult result;
  result.schedule = greedy_schedule(inst);
  if (opts.incumbent) {
    if (!check_schedule(inst, *opts.incumbent).feasible()) {
      throw std::invalid_argument("branch and bound: supplied incumbent is not feasible");
    }
    if (opts.incumbent->makespan() < result.schedule.makespan()) result.schedule = *opts.incumbent;
  }
  result.makespan = result.schedule.makespan();
  if (n == 0) {
    result.proven = true;
    return result;
  }

  Search search(inst, opts, result.makespan);
  search.run();
  result.nodes = search.nodes();
  result.proven = !search.aborted();
  if (search.best() < result.makespan) {
    result.schedule = Schedule::from_starts(search.best_starts());
    result.makespan = search.best();
  }
  return result;
}

}  // namespace wfq
