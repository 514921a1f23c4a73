#pragma once

// Exhaustive-enumeration oracle for the crosstalk scheduler: every ordered
// set-partition of the layer into resource-disjoint groups, scored with the
// library's own objective and tie-break rules. Test-only; independent of the
// branch-and-bound search path.

#include <cmath>
#include <limits>
#include <vector>

#include "xpqc/device.hpp"
#include "xpqc/scheduler.hpp"

namespace xpqc_test {

struct OracleResult {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> sublayers;
  std::vector<int> assignment;
  long long partitions_seen = 0;
  int min_feasible_r = 0;
};

inline bool edges_share(const xpqc::Edge& a, const xpqc::Edge& b) {
  return a.first == b.first || a.first == b.second || a.second == b.first ||
         a.second == b.second;
}

inline void oracle_recurse(const std::vector<xpqc::Edge>& gates,
                           const xpqc::DeviceModel& device, double omega,
                           double threshold, std::vector<bool>& placed,
                           std::vector<std::vector<int>>& subs,
                           OracleResult& best) {
  const int n = static_cast<int>(gates.size());
  bool done = true;
  std::vector<int> remaining;
  for (int i = 0; i < n; ++i)
    if (!placed[i]) {
      done = false;
      remaining.push_back(i);
    }
  if (done) {
    ++best.partitions_seen;
    double obj =
        xpqc::schedule_objective(gates, subs, device, omega, threshold);
    std::vector<int> assign(n, -1);
    for (std::size_t r = 0; r < subs.size(); ++r)
      for (int gi : subs[r]) assign[gi] = static_cast<int>(r);
    bool better = false;
    if (obj < best.objective) better = true;
    else if (obj == best.objective) {
      if (subs.size() < best.sublayers.size()) better = true;
      else if (subs.size() == best.sublayers.size() &&
               assign < best.assignment)
        better = true;
    }
    if (best.assignment.empty() || better) {
      best.objective = obj;
      best.sublayers = subs;
      best.assignment = assign;
    }
    if (best.min_feasible_r == 0 ||
        static_cast<int>(subs.size()) < best.min_feasible_r)
      best.min_feasible_r = static_cast<int>(subs.size());
    return;
  }
  const int k = static_cast<int>(remaining.size());
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    std::vector<int> group;
    bool ok = true;
    for (int a = 0; a < k && ok; ++a) {
      if (!(mask & (1u << a))) continue;
      for (int b = a + 1; b < k && ok; ++b) {
        if (!(mask & (1u << b))) continue;
        if (edges_share(gates[remaining[a]], gates[remaining[b]])) ok = false;
      }
    }
    if (!ok) continue;
    for (int a = 0; a < k; ++a)
      if (mask & (1u << a)) group.push_back(remaining[a]);
    for (int gi : group) placed[gi] = true;
    subs.push_back(group);
    oracle_recurse(gates, device, omega, threshold, placed, subs, best);
    subs.pop_back();
    for (int gi : group) placed[gi] = false;
  }
}

inline OracleResult oracle_schedule(const std::vector<xpqc::Edge>& gates,
                                    const xpqc::DeviceModel& device,
                                    double omega, double threshold = 1.0) {
  OracleResult best;
  std::vector<bool> placed(gates.size(), false);
  std::vector<std::vector<int>> subs;
  oracle_recurse(gates, device, omega, threshold, placed, subs, best);
  return best;
}

}  // namespace xpqc_test
