#include "wfq/greedy.hpp"

#include <algorithm>
#include <string>

#include "wfq/error.hpp"

namespace wfq {

Schedule greedy_schedule(const WorkflowInstance& inst, std::optional<int> slot_guard) {
  const int n = inst.size();
  if (!inst.dag.topological_order()) throw ValidationError("greedy: dependency graph contains a cycle");
  const int guard = slot_guard.value_or(10 * n);

  std::vector<int> pending_parents(static_cast<std::size_t>(n));
  std::vector<JobId> roots;
  for (JobId j = 0; j < n; ++j) {
    pending_parents[j] = static_cast<int>(inst.dag.parents(j).size());
    if (pending_parents[j] == 0) roots.push_back(j);
  }

  Schedule sched;
  int done = 0;
  for (Slot t = 0; done < n; ++t) {
    if (t >= guard) {
      throw StarvationError("greedy: " + std::to_string(n - done) + " job(s) unplaced after " +
                            std::to_string(guard) + " slots");
    }
    std::sort(roots.begin(), roots.end(), [&](JobId a, JobId b) {
      if (inst.resource(a) != inst.resource(b)) return inst.resource(a) > inst.resource(b);
      return a < b;
    });
    int remaining = inst.resources.capacity(t);
    std::size_t placed = 0;
    while (placed < roots.size() && inst.resource(roots[placed]) <= remaining) {
      remaining -= inst.resource(roots[placed]);
      sched.assign(roots[placed], t);
      ++placed;
    }
    // Children of jobs finished in this slot become roots for the next one.
    std::vector<JobId> next(roots.begin() + static_cast<std::ptrdiff_t>(placed), roots.end());
    for (std::size_t k = 0; k < placed; ++k) {
      for (JobId c : inst.dag.children(roots[k])) {
        if (--pending_parents[c] == 0) next.push_back(c);
      }
    }
    done += static_cast<int>(placed);
    roots = std::move(next);
  }
  return sched;
}

}  // namespace wfq
