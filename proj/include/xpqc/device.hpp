#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace xpqc {

/// Undirected coupling edge, stored with a <= b.
using Edge = std::pair<int, int>;

Edge make_edge(int a, int b);
std::string edge_str(const Edge& e);

struct CouplingMap {
  int num_qubits = 0;
  std::vector<Edge> edges;  // canonical, sorted, unique

  bool has_edge(const Edge& e) const;
  std::vector<int> neighbors(int q) const;
  /// All-pairs shortest-path distances (BFS); -1 when disconnected.
  std::vector<std::vector<int>> distances() const;
};

struct QubitCal {
  double t1_us = 0;
  double t2_us = 0;
};

struct GateCal {
  std::string gate;        // rx|ry|rz|cx
  std::vector<int> qubits; // single or pair (pair canonical)
  double duration_ns = 0;
  double epc = 0;          // independent error rate
};

/// Conditional error-rate table keyed by ordered edge pairs (g1 | g2).
/// Asymmetric on purpose: E(g1|g2) and E(g2|g1) are separate measurements.
struct XtalkEntry {
  Edge g1;
  Edge g2;
  double conditional_epc = 0;
  double independent_epc = 0;  // of g1; attached from calibration or measured
};

struct CrosstalkTable {
  std::map<std::pair<Edge, Edge>, XtalkEntry> entries;

  const XtalkEntry* find(const Edge& g1, const Edge& g2) const;
  void insert(const XtalkEntry& e);
};

/// conditional/independent ratio for (g1 | g2); 1.0 when the pair is absent.
double multiplier(const CrosstalkTable& x, const Edge& g1_edge,
                  const Edge& g2_edge);

struct DeviceModel {
  CouplingMap coupling;
  std::vector<QubitCal> qubit_cal;
  std::vector<GateCal> gate_cal;
  CrosstalkTable xtalk;

  const GateCal* find_gate_cal(const std::string& gate,
                               const std::vector<int>& qubits) const;
  const GateCal& cx_cal(const Edge& e) const;
  double cx_epc(const Edge& e) const;

  /// Checks schema-level invariants; throws std::invalid_argument naming the
  /// offending element.
  void validate() const;

  /// View of a subset of qubits under logical renumbering: logical i maps to
  /// qubits[i]. Keeps the edges, calibration and crosstalk entries that fall
  /// entirely inside the subset.
  DeviceModel restrict_to(const std::vector<int>& qubits) const;
};

/// Ordered pairs of coupling edges with disjoint endpoints at graph distance
/// exactly 1 (both orders present).
std::vector<std::pair<Edge, Edge>> one_hop_pairs(const CouplingMap& cmap);

DeviceModel load_device(const std::string& path);
DeviceModel device_from_json_string(const std::string& text);
void save_device(const DeviceModel& d, const std::string& path);
std::string device_to_json_string(const DeviceModel& d);

/// The shipped 16-qubit default: heavy-hex-like topology with synthetic
/// calibration (T1=T2=100us, cx 300ns at EPC 1e-2, single-qubit 35ns
/// noiseless) and a representative conditional-EPC table whose worst
/// conditional/independent ratio is 3.14.
DeviceModel default_guadalupe();

/// Copy of d whose crosstalk table has one entry per one-hop ordered pair,
/// all at the given multiplier. Handy for closed-loop experiments.
DeviceModel with_uniform_crosstalk(const DeviceModel& d, double mult);

}  // namespace xpqc
