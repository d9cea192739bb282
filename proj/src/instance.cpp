#include "wfq/instance.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace wfq {

Dag::Dag(int n) : parents_(static_cast<std::size_t>(std::max(n, 0))), children_(parents_.size()) {}

Dag::Dag(int n, std::span<const Edge> edges) : Dag(n) {
  for (const Edge& e : edges) add_edge(e.parent, e.child);
}

void Dag::add_edge(JobId parent, JobId child) {
  if (parent < 0 || parent >= size() || child < 0 || child >= size()) {
    throw std::out_of_range("edge " + std::to_string(parent) + "->" + std::to_string(child) +
                            " outside job range");
  }
  auto& ps = parents_[child];
  auto it = std::lower_bound(ps.begin(), ps.end(), parent);
  if (it != ps.end() && *it == parent) return;
  ps.insert(it, parent);
  auto& cs = children_[parent];
  cs.insert(std::lower_bound(cs.begin(), cs.end(), child), child);
}

std::vector<Edge> Dag::edges() const {
  std::vector<Edge> out;
  for (JobId p = 0; p < size(); ++p) {
    for (JobId c : children_[p]) out.push_back({p, c});
  }
  return out;
}

std::size_t Dag::edge_count() const {
  std::size_t n = 0;
  for (const auto& cs : children_) n += cs.size();
  return n;
}

std::optional<std::vector<JobId>> Dag::topological_order() const {
  std::vector<int> indegree(parents_.size());
  std::priority_queue<JobId, std::vector<JobId>, std::greater<>> ready;
  for (JobId j = 0; j < size(); ++j) {
    indegree[j] = static_cast<int>(parents_[j].size());
    if (indegree[j] == 0) ready.push(j);
  }
  std::vector<JobId> order;
  order.reserve(parents_.size());
  while (!ready.empty()) {
    JobId j = ready.top();
    ready.pop();
    order.push_back(j);
    for (JobId c : children_[j]) {
      if (--indegree[c] == 0) ready.push(c);
    }
  }
  if (order.size() != parents_.size()) return std::nullopt;
  return order;
}

ResourceProfile::ResourceProfile(std::vector<int> available) : available_(std::move(available)) {
  for (int a : available_) r_max_ = std::max(r_max_, a);
}

int ResourceProfile::capacity(Slot t) const {
  if (t < 0) throw std::invalid_argument("negative slot");
  if (available_.empty()) return 0;
  return available_[static_cast<std::size_t>(t) % available_.size()];
}

Schedule::Schedule(std::vector<Assignment> assignments) : assignments_(std::move(assignments)) {}

Schedule Schedule::from_starts(std::span<const Slot> starts) {
  Schedule s;
  for (std::size_t j = 0; j < starts.size(); ++j) s.assign(static_cast<JobId>(j), starts[j]);
  return s;
}

void Schedule::assign(JobId job, Slot slot) { assignments_.push_back({job, slot}); }

std::optional<Slot> Schedule::start_of(JobId job) const {
  for (const auto& a : assignments_) {
    if (a.job == job) return a.slot;
  }
  return std::nullopt;
}

int Schedule::makespan() const {
  int m = 0;
  for (const auto& a : assignments_) m = std::max(m, a.slot + 1);
  return m;
}

std::vector<Slot> Schedule::starts(int n) const {
  std::vector<Slot> out(static_cast<std::size_t>(n), -1);
  for (const auto& a : assignments_) {
    if (a.job < 0 || a.job >= n) throw std::out_of_range("job id " + std::to_string(a.job));
    if (out[a.job] != -1) throw std::invalid_argument("job " + std::to_string(a.job) + " started twice");
    out[a.job] = a.slot;
  }
  for (int j = 0; j < n; ++j) {
    if (out[j] == -1) throw std::invalid_argument("job " + std::to_string(j) + " not started");
  }
  return out;
}

bool ValidationReport::has(Violation::Kind kind) const {
  return std::any_of(violations.begin(), violations.end(),
                     [kind](const Violation& v) { return v.kind == kind; });
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.message;
  }
  return out;
}

ValidationReport validate_instance(const WorkflowInstance& inst) {
  ValidationReport report;
  auto add = [&](Violation::Kind k, std::string msg) { report.violations.push_back({k, std::move(msg)}); };

  for (std::size_t j = 0; j < inst.jobs.size(); ++j) {
    const Job& job = inst.jobs[j];
    if (job.id != static_cast<JobId>(j)) {
      add(Violation::Kind::kBadJob, "job at position " + std::to_string(j) + " has id " + std::to_string(job.id));
    }
    if (job.resource < 1) {
      add(Violation::Kind::kBadJob, "job " + std::to_string(job.id) + " requires fewer than one worker");
    }
  }
  if (inst.dag.size() != inst.size()) {
    add(Violation::Kind::kBadJob, "graph has " + std::to_string(inst.dag.size()) + " nodes for " +
                                      std::to_string(inst.size()) + " jobs");
  } else if (!inst.dag.topological_order()) {
    add(Violation::Kind::kCycle, "dependency graph contains a cycle");
  }
  const auto& avail = inst.resources.available();
  if (inst.horizon != static_cast<int>(avail.size())) {
    add(Violation::Kind::kHorizonMismatch, "horizon " + std::to_string(inst.horizon) + " but " +
                                               std::to_string(avail.size()) + " availability entries");
  }
  for (std::size_t t = 0; t < avail.size(); ++t) {
    if (avail[t] < 0) {
      add(Violation::Kind::kNegativeAvailability, "negative availability at slot " + std::to_string(t));
    }
  }
  for (const Job& job : inst.jobs) {
    if (job.resource > inst.resources.r_max()) {
      add(Violation::Kind::kResourceExceedsMax, "job " + std::to_string(job.id) + " requires " +
                                                    std::to_string(job.resource) + " > r_max " +
                                                    std::to_string(inst.resources.r_max()));
    }
  }
  return report;
}

int FeasibilityReport::total_overuse() const {
  int total = 0;
  for (const auto& o : overuse) total += o.excess();
  return total;
}

std::string FeasibilityReport::summary() const {
  std::ostringstream os;
  os << "missing=" << missing.size() << " duplicates=" << duplicates.size()
     << " order=" << order_violations.size() << " overuse=" << total_overuse();
  if (makespan) os << " makespan=" << *makespan;
  return os.str();
}

FeasibilityReport check_schedule(const WorkflowInstance& inst, const Schedule& sched) {
  const int n = inst.size();
  FeasibilityReport report;
  std::vector<std::vector<Slot>> starts(static_cast<std::size_t>(n));
  std::map<Slot, int> used;
  for (const auto& a : sched.assignments()) {
    if (a.job < 0 || a.job >= n) throw std::out_of_range("unknown job id " + std::to_string(a.job));
    if (a.slot < 0) throw std::invalid_argument("negative start slot for job " + std::to_string(a.job));
    starts[a.job].push_back(a.slot);
    used[a.slot] += inst.resource(a.job);
  }
  for (JobId j = 0; j < n; ++j) {
    if (starts[j].empty()) report.missing.push_back(j);
    for (std::size_t k = 1; k < starts[j].size(); ++k) report.duplicates.push_back(j);
  }
  // Every (parent start, child start) pair must be strictly increasing.
  for (const Edge& e : inst.dag.edges()) {
    bool violated = false;
    for (Slot tp : starts[e.parent]) {
      for (Slot tc : starts[e.child]) violated |= tc <= tp;
    }
    if (violated) report.order_violations.push_back(e);
  }
  for (const auto& [slot, amount] : used) {
    const int cap = inst.resources.capacity(slot);
    if (amount > cap) report.overuse.push_back({slot, amount, cap});
  }
  if (report.complete()) report.makespan = sched.makespan();
  return report;
}

WorkflowInstance make_instance(std::span<const int> resources, std::span<const Edge> edges,
                               std::vector<int> availability) {
  WorkflowInstance inst;
  const int n = static_cast<int>(resources.size());
  for (int j = 0; j < n; ++j) inst.jobs.push_back({j, resources[j]});
  inst.dag = Dag(n, edges);
  inst.horizon = static_cast<int>(availability.size());
  inst.resources = ResourceProfile(std::move(availability));
  return inst;
}

WorkflowInstance with_horizon(WorkflowInstance inst, int horizon) {
  if (horizon < 0) throw std::invalid_argument("negative horizon");
  std::vector<int> avail(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) avail[t] = inst.resources.capacity(t);
  inst.resources = ResourceProfile(std::move(avail));
  inst.horizon = horizon;
  return inst;
}

}  // namespace wfq
