#pragma once

#include <filesystem>
#include <ostream>

#include <json.hpp>

#include "wfq/qubo.hpp"

namespace wfq {

inline constexpr int kQuboSchemaVersion = 1;

// CPLEX LP text for the time-indexed model: binaries x_<job>_<slot> for the
// admissible (job, slot) pairs, one-start equalities, one precedence row per
// edge in start-time form (sum t x_c - sum t x_p >= 1), one capacity row per
// slot, and the overrun objective. Output is byte-identical for identical
// input.
void write_lp(std::ostream& out, const WorkflowInstance& inst, const ObjectiveConfig& obj = {});
void export_lp(const WorkflowInstance& inst, const ObjectiveConfig& obj, const std::filesystem::path& path);

// {"version":1, "n_vars":n, "offset":c, "terms":[[i,j,coeff],...],
//  "layout":{"slot_offset":s, "decisions":[[job,slot],...],
//            "slacks":[{"kind":"resource","owner":t,"first":k,"width":w},...]},
//  "weights":{"one_start":a,"order":b,"resource":c}}
nlohmann::json qubo_to_json(const QuboModel& model);

// Reads the combined form back; the per-family forms are not stored.
QuadraticForm qubo_form_from_json(const nlohmann::json& j);

}  // namespace wfq
