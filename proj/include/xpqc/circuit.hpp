#pragma once

#include <optional>
#include <string>
#include <vector>

namespace xpqc {

enum class GateKind { Rx, Ry, Rz, Cx, Barrier };

bool is_rotation(GateKind k);
const char* gate_name(GateKind k);

/// One instruction. Rotations carry either a bound angle or a symbolic
/// parameter slot (index into the circuit's parameter vector), never both.
struct GateInstance {
  GateKind kind;
  std::vector<int> qubits;
  std::optional<double> angle;
  std::optional<int> slot;

  bool is_symbolic() const { return slot.has_value(); }

  static GateInstance rotation(GateKind k, int qubit, double angle);
  static GateInstance rotation_slot(GateKind k, int qubit, int slot);
  static GateInstance cx(int control, int target);
  static GateInstance barrier(std::vector<int> qubits);
};

/// Immutable-by-convention gate list. All mutations return new circuits.
struct Circuit {
  int num_qubits = 0;
  std::vector<GateInstance> ops;
  int num_params = 0;

  /// Throws std::invalid_argument if any structural invariant is broken
  /// (qubit range, gate arity, duplicate qubits, unreferenced slots).
  void validate() const;
};

/// ASAP partition of op indices into layers of pairwise qubit-disjoint ops.
/// Barriers are not members of any layer but force every later op on a
/// covered qubit into a strictly later layer than every earlier one.
struct DagLayering {
  std::vector<std::vector<int>> layers;

  /// Layer index per op; barriers get -1.
  std::vector<int> op_layer;
};

DagLayering build_dag_layers(const Circuit& c);

/// Replaces every symbolic slot with theta[slot]. theta.size() must equal
/// c.num_params.
Circuit bind(const Circuit& c, const std::vector<double>& theta);

/// Text form: one instruction per line, `#` comments.
///   rx 0 1.5707963267948966
///   ry 2 p0
///   cx 0 1
///   barrier 0 1 2 3
Circuit read_circuit(const std::string& text);
std::string write_circuit(const Circuit& c);

Circuit read_circuit_file(const std::string& path);
void write_circuit_file(const Circuit& c, const std::string& path);

/// JSON mirror: {num_qubits, ops:[{name,qubits,angle|slot}...], num_params}.
Circuit circuit_from_json_string(const std::string& json_text);
std::string circuit_to_json_string(const Circuit& c);

}  // namespace xpqc
