#pragma once

#include <map>
#include <string>
#include <vector>

#include "xpqc/circuit.hpp"
#include "xpqc/device.hpp"

namespace xpqc {

/// Per-gate sets of potentially concurrent gates, admitted when the
/// conditional/independent ratio of either direction exceeds the threshold.
/// Admission is symmetric; the overlap indicator of a pair is realized by
/// sub-layer co-membership in a schedule.
struct OverlapModel {
  double threshold = 1.0;
  std::vector<std::vector<int>> olap;  // per gate index: admitted partners

  bool admitted(int i, int j) const;
};

OverlapModel build_overlap_model(const std::vector<Edge>& layer,
                                 const DeviceModel& device, double threshold);

/// Error rate of g given the olap-admissible gates scheduled alongside it:
/// independent when the set is empty, otherwise the maximum conditional rate
/// (missing table entries fall back to the independent rate).
double gate_error(const Edge& g, const std::vector<Edge>& concurrent_set,
                  const DeviceModel& device);

/// 1 - exp(-t/T) with T = min(T1, T2).
double decoherence_error(double lifetime_ns, double t1_us, double t2_us);

struct Schedule {
  std::vector<Edge> gates;                  // program order
  std::vector<std::vector<int>> sublayers;  // gate indices per sub-layer
  std::vector<double> start_ns;             // per gate
  double objective_value = 0;
  double omega = 0;
  double threshold = 1.0;
  bool paper_literal_sign = false;
};

struct SubLayerSet {
  int r = 0;
  std::vector<std::vector<Edge>> layers;
};

struct SchedulerOptions {
  double threshold = 1.0;
  /// Keep the printed sign of the cost function (minus on the decoherence
  /// term) instead of the both-terms-minimized reading.
  bool paper_literal_sign = false;
  /// Exact-search bound; larger layers need the greedy fallback.
  int max_exact_gates = 12;
  bool greedy_fallback = false;
};

/// omega * sum_g ln(eps_g) + (1-omega) * sum_q (t_q / T_q), to be minimized.
/// eps_g is gate_error under the realized overlaps of `sublayers`; t_q is
/// the span from the qubit's first start to its last finish.
double schedule_objective(const std::vector<Edge>& gates,
                          const std::vector<std::vector<int>>& sublayers,
                          const DeviceModel& device, double omega,
                          double threshold, bool paper_literal_sign = false);

double objective(const Schedule& s, const DeviceModel& device, double omega);

/// Globally optimal assignment of the layer's gates to ordered sub-layers
/// (branch-and-bound over ordered set-partitions into resource-disjoint
/// groups). Ties: fewer sub-layers, then lexicographic assignment in gate
/// order.
Schedule xtalk_schedule(const std::vector<Edge>& layer,
                        const DeviceModel& device, double omega,
                        const SchedulerOptions& opts = {});

SubLayerSet extract_sublayers(const Schedule& s);

/// Greedy first-fit grouping of gates into maximal disjoint parallel groups.
std::vector<std::vector<Edge>> ala_groups(const std::vector<Edge>& gates);

/// Re-emits the first entangling layer (first contiguous cx run) as greedy
/// maximal disjoint parallel groups separated by full-width barriers;
/// everything else is untouched.
Circuit approximate_to_ala(const Circuit& c, const DeviceModel& device);

std::string schedule_to_json_string(const Schedule& s);

}  // namespace xpqc
