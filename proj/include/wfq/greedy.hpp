#pragma once

#include <optional>

#include "wfq/instance.hpp"

namespace wfq {

// Slot-by-slot list scheduler. At each slot the current roots (unfinished
// jobs whose parents all finished in earlier slots) are taken in descending
// resource order, ties by lower id, and placed while the next one still fits;
// the first root that does not fit closes the slot. Capacity past the
// instance horizon follows ResourceProfile::capacity.
//
// Throws StarvationError when some job is still unplaced after `slot_guard`
// slots (default 10*N), and ValidationError for cyclic graphs.
Schedule greedy_schedule(const WorkflowInstance& inst, std::optional<int> slot_guard = std::nullopt);

}  // namespace wfq
