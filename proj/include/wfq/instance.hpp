#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wfq {

using JobId = int;
using Slot = int;

struct Job {
  JobId id = 0;
  int resource = 1;  // workers required to start the job

  friend bool operator==(const Job&, const Job&) = default;
};

struct Edge {
  JobId parent = 0;
  JobId child = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Dependency graph over jobs 0..n-1. Parent and child lists are kept sorted
// and are exact inverses of each other. Cycles are representable so that
// validation can report them.
class Dag {
 public:
  Dag() = default;
  explicit Dag(int n);
  Dag(int n, std::span<const Edge> edges);

  // Throws std::out_of_range for ids outside [0, size). Duplicate edges are
  // ignored.
  void add_edge(JobId parent, JobId child);

  int size() const { return static_cast<int>(parents_.size()); }
  const std::vector<JobId>& parents(JobId job) const { return parents_.at(job); }
  const std::vector<JobId>& children(JobId job) const { return children_.at(job); }
  std::vector<Edge> edges() const;
  std::size_t edge_count() const;

  // Kahn order with smallest ready id first; nullopt when a cycle exists.
  std::optional<std::vector<JobId>> topological_order() const;

  friend bool operator==(const Dag&, const Dag&) = default;

 private:
  std::vector<std::vector<JobId>> parents_;
  std::vector<std::vector<JobId>> children_;
};

// Workers available per time slot. Past the last entry the profile repeats
// cyclically, so capacity(t) is defined for every t >= 0.
class ResourceProfile {
 public:
  ResourceProfile() = default;
  explicit ResourceProfile(std::vector<int> available);

  const std::vector<int>& available() const { return available_; }
  int size() const { return static_cast<int>(available_.size()); }
  int r_max() const { return r_max_; }
  int capacity(Slot t) const;

  friend bool operator==(const ResourceProfile&, const ResourceProfile&) = default;

 private:
  std::vector<int> available_;
  int r_max_ = 0;
};

struct WorkflowInstance {
  std::vector<Job> jobs;
  Dag dag;
  ResourceProfile resources;
  int horizon = 0;
  std::optional<std::uint64_t> seed;  // set for generated instances

  int size() const { return static_cast<int>(jobs.size()); }
  int resource(JobId job) const { return jobs.at(job).resource; }

  friend bool operator==(const WorkflowInstance&, const WorkflowInstance&) = default;
};

struct Assignment {
  JobId job = 0;
  Slot slot = 0;

  friend auto operator<=>(const Assignment&, const Assignment&) = default;
};

// A list of job starts. Complete feasible schedules hold each job exactly
// once; decoded bitstrings may hold duplicates or omit jobs, which is what
// check_schedule reports on.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(std::vector<Assignment> assignments);
  static Schedule from_starts(std::span<const Slot> starts);

  void assign(JobId job, Slot slot);
  std::span<const Assignment> assignments() const { return assignments_; }
  std::size_t size() const { return assignments_.size(); }
  bool empty() const { return assignments_.empty(); }

  // First recorded start of the job.
  std::optional<Slot> start_of(JobId job) const;
  // 1 + latest start; 0 for an empty schedule.
  int makespan() const;
  // Per-job start slots; throws if any job in [0, n) is missing or repeated.
  std::vector<Slot> starts(int n) const;

  friend bool operator==(const Schedule&, const Schedule&) = default;

 private:
  std::vector<Assignment> assignments_;
};

struct Violation {
  enum class Kind { kCycle, kResourceExceedsMax, kHorizonMismatch, kBadJob, kNegativeAvailability };
  Kind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(Violation::Kind kind) const;
  std::string summary() const;
};

ValidationReport validate_instance(const WorkflowInstance& inst);

struct ResourceOveruse {
  Slot slot = 0;
  int used = 0;
  int available = 0;

  int excess() const { return used - available; }
  friend bool operator==(const ResourceOveruse&, const ResourceOveruse&) = default;
};

struct FeasibilityReport {
  std::vector<JobId> missing;
  std::vector<JobId> duplicates;  // one entry per extra start
  std::vector<Edge> order_violations;
  std::vector<ResourceOveruse> overuse;
  std::optional<int> makespan;  // set when every job started exactly once

  bool complete() const { return missing.empty() && duplicates.empty(); }
  bool feasible() const { return complete() && order_violations.empty() && overuse.empty(); }
  int total_overuse() const;
  std::string summary() const;
};

// Throws std::out_of_range for job ids outside the instance and
// std::invalid_argument for negative slots.
FeasibilityReport check_schedule(const WorkflowInstance& inst, const Schedule& sched);

// Makes a well-formed instance with horizon equal to the availability length.
WorkflowInstance make_instance(std::span<const int> resources, std::span<const Edge> edges,
                               std::vector<int> availability);

// Copy whose availability is truncated or cyclically extended to `horizon`.
WorkflowInstance with_horizon(WorkflowInstance inst, int horizon);

}  // namespace wfq
