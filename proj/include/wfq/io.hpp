#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include <json.hpp>

#include "wfq/instance.hpp"

namespace wfq {

inline constexpr int kInstanceSchemaVersion = 1;
inline constexpr int kScheduleSchemaVersion = 1;

// Instance file:
//   {"version":1, "seed":u64?, "jobs":[{"id":0,"resource":3},...],
//    "edges":[[parent,child],...], "availability":[...], "horizon":M}
nlohmann::json instance_to_json(const WorkflowInstance& inst);
// Throws SchemaError for structural problems and ValidationError when the
// decoded instance fails validate_instance.
WorkflowInstance instance_from_json(const nlohmann::json& j);

WorkflowInstance read_instance(const std::filesystem::path& path);
void write_instance(const WorkflowInstance& inst, const std::filesystem::path& path);

// Schedule file: {"version":1, "seed":u64?, "starts":{"<job>":slot,...}}.
// Schedules with repeated jobs cannot be written.
nlohmann::json schedule_to_json(const Schedule& sched, std::optional<std::uint64_t> seed = std::nullopt);
Schedule schedule_from_json(const nlohmann::json& j);

Schedule read_schedule(const std::filesystem::path& path);
void write_schedule(const Schedule& sched, const std::filesystem::path& path,
                    std::optional<std::uint64_t> seed = std::nullopt);

// Shared helpers for the JSON files written by this library.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& j, const std::filesystem::path& path);

}  // namespace wfq
