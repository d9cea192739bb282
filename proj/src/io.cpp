#include "wfq/io.hpp"

#include <fstream>
#include <map>
#include <string>

#include "wfq/error.hpp"

namespace wfq {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  return j.at(key);
}

void check_version(const json& j, int expected) {
  const json& v = require(j, "version");
  if (!v.is_number_integer() || v.get<int>() != expected) {
    throw SchemaError("unsupported schema version " + v.dump() + " (expected " + std::to_string(expected) + ")");
  }
}

int as_int(const json& j, const char* what) {
  if (!j.is_number_integer()) throw SchemaError(std::string(what) + " must be an integer");
  return j.get<int>();
}

}  // namespace

json instance_to_json(const WorkflowInstance& inst) {
  json j;
  j["version"] = kInstanceSchemaVersion;
  if (inst.seed) j["seed"] = *inst.seed;
  j["jobs"] = json::array();
  for (const Job& job : inst.jobs) j["jobs"].push_back({{"id", job.id}, {"resource", job.resource}});
  j["edges"] = json::array();
  for (const Edge& e : inst.dag.edges()) j["edges"].push_back({e.parent, e.child});
  j["availability"] = inst.resources.available();
  j["horizon"] = inst.horizon;
  return j;
}

WorkflowInstance instance_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("instance file must hold a JSON object");
  check_version(j, kInstanceSchemaVersion);
  WorkflowInstance inst;
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) throw SchemaError("seed must be an integer");
    inst.seed = j["seed"].get<std::uint64_t>();
  }

  const json& jobs = require(j, "jobs");
  if (!jobs.is_array()) throw SchemaError("jobs must be an array");
  for (const json& job : jobs) {
    inst.jobs.push_back({as_int(require(job, "id"), "job id"), as_int(require(job, "resource"), "job resource")});
  }

  const json& edges = require(j, "edges");
  if (!edges.is_array()) throw SchemaError("edges must be an array");
  inst.dag = Dag(inst.size());
  for (const json& e : edges) {
    if (!e.is_array() || e.size() != 2) throw SchemaError("edge must be a [parent, child] pair");
    const int parent = as_int(e[0], "edge parent");
    const int child = as_int(e[1], "edge child");
    if (parent < 0 || parent >= inst.size() || child < 0 || child >= inst.size()) {
      throw SchemaError("edge " + e.dump() + " references an unknown job");
    }
    inst.dag.add_edge(parent, child);
  }

  const json& avail = require(j, "availability");
  if (!avail.is_array()) throw SchemaError("availability must be an array");
  std::vector<int> profile;
  for (const json& a : avail) profile.push_back(as_int(a, "availability entry"));
  inst.resources = ResourceProfile(std::move(profile));
  inst.horizon = as_int(require(j, "horizon"), "horizon");

  if (auto report = validate_instance(inst); !report.ok()) throw ValidationError(report.summary());
  return inst;
}

json schedule_to_json(const Schedule& sched, std::optional<std::uint64_t> seed) {
  json starts = json::object();
  std::map<JobId, Slot> ordered;
  for (const auto& a : sched.assignments()) {
    if (!ordered.emplace(a.job, a.slot).second) {
      throw std::invalid_argument("cannot serialise a schedule that starts job " + std::to_string(a.job) + " twice");
    }
  }
  for (const auto& [job, slot] : ordered) starts[std::to_string(job)] = slot;
  json j;
  j["version"] = kScheduleSchemaVersion;
  if (seed) j["seed"] = *seed;
  j["starts"] = std::move(starts);
  return j;
}

Schedule schedule_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("schedule file must hold a JSON object");
  check_version(j, kScheduleSchemaVersion);
  const json& starts = require(j, "starts");
  if (!starts.is_object()) throw SchemaError("starts must be an object");
  std::map<JobId, Slot> ordered;
  for (const auto& [key, value] : starts.items()) {
    std::size_t used = 0;
    int job = 0;
    try {
      job = std::stoi(key, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != key.size() || job < 0) throw SchemaError("bad job key '" + key + "'");
    ordered[job] = as_int(value, "start slot");
  }
  Schedule sched;
  for (const auto& [job, slot] : ordered) sched.assign(job, slot);
  return sched;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(1) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

WorkflowInstance read_instance(const std::filesystem::path& path) { return instance_from_json(read_json_file(path)); }

void write_instance(const WorkflowInstance& inst, const std::filesystem::path& path) {
  write_json_file(instance_to_json(inst), path);
}

Schedule read_schedule(const std::filesystem::path& path) { return schedule_from_json(read_json_file(path)); }

void write_schedule(const Schedule& sched, const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  write_json_file(schedule_to_json(sched, seed), path);
}

}  // namespace wfq
