#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "xpqc/circuit.hpp"
#include "xpqc/device.hpp"

namespace xpqc {

/// Dense amplitude vector over N <= 16 qubits. Bit convention, fixed
/// project-wide: qubit 0 is the leftmost character of a bitstring and the
/// most significant bit of an amplitude index.
struct StateVector {
  int num_qubits = 0;
  std::vector<std::complex<double>> amps;

  static StateVector zero_state(int num_qubits);

  double norm() const;
  std::vector<double> probabilities() const;

  void apply_rx(int q, double theta);
  void apply_ry(int q, double theta);
  void apply_rz(int q, double theta);
  void apply_cx(int control, int target);
  /// p in {0,1,2,3} = I,X,Y,Z
  void apply_pauli(int q, int p);
  void apply_gate(const GateInstance& g);
};

int bit_of(std::uint64_t index, int qubit, int num_qubits);
std::string bitstring_of(std::uint64_t index, int num_qubits);

double fidelity(const StateVector& a, const StateVector& b);

enum class SimMode { Ideal, Standard, XtalkEnabled };

struct NoiseSpec {
  SimMode mode = SimMode::Ideal;
  const DeviceModel* device = nullptr;  // required for Standard/XtalkEnabled
  std::uint64_t seed = 0;
};

struct ShotResult {
  std::map<std::string, std::uint64_t> counts;
  std::uint64_t shots = 0;

  /// Fraction of shots whose bits at `qubits` are all 0; all qubits when empty.
  double prob_all_zero(const std::vector<int>& qubits = {}) const;
  std::string to_json_string() const;
};

/// Exact evolution from |0...0>. theta binds the circuit's symbolic slots.
StateVector run_ideal(const Circuit& c, const std::vector<double>& theta = {});

/// Effective EPC of every gate in a set of concurrently running cx gates:
/// independent EPC times the product of conditional/independent multipliers
/// against every other member (absent pairs contribute 1).
std::vector<double> effective_layer_epc(const std::vector<Edge>& layer,
                                        const DeviceModel& device);

/// Monte-Carlo trajectory sampling. After every cx, with probability
/// p = min(EPC, 0.75) * 4/3, a uniformly random two-qubit Pauli (identity
/// included) hits its qubits. Standard mode uses the independent EPC;
/// XtalkEnabled scales it by the multipliers of the other cx gates sharing
/// the gate's DAG layer. One measurement per trajectory; reproducible per
/// seed regardless of thread count.
ShotResult run_noisy(const Circuit& c, const std::vector<double>& theta,
                     const NoiseSpec& spec, std::uint64_t shots);

}  // namespace xpqc
