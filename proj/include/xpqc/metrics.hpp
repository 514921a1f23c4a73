#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xpqc/circuit.hpp"
#include "xpqc/device.hpp"
#include "xpqc/simulator.hpp"

namespace xpqc {

struct ExprEstimate {
  double kl = 0;
  int samples = 0;  // fidelity pairs
  int bins = 0;
  bool low_sample_warning = false;
};

/// Haar fidelity mass of one histogram bin on [0,1] for an N-qubit space:
/// integral of (2^N - 1)(1 - F)^(2^N - 2).
double haar_bin_mass(int bin, int bins, int num_qubits);

/// KL divergence between the fidelity histogram of uniformly sampled
/// parameter pairs and the Haar distribution (Eq.-4-style estimate, additive
/// smoothing 1e-9).
ExprEstimate expressibility(const Circuit& c, int n_pairs, int bins,
                            std::uint64_t seed);

/// Same estimator on externally supplied fidelities (test oracle hook).
ExprEstimate expressibility_from_fidelities(const std::vector<double>& fids,
                                            int bins, int num_qubits);

enum class CostKind { Global, Local };

struct GradVarEstimate {
  int param_index = 0;
  double variance = 0;
  int n_samples = 0;
  CostKind cost_kind = CostKind::Global;
  int n_c = 0;
  std::vector<double> gradients;  // per-sample, for interval analysis
};

/// Var over uniformly sampled theta of the parameter-shift derivative of the
/// ground-state cost (global or first-n_c-qubit local). shots = 0 evaluates
/// exact probabilities (Ideal mode only); both shifted evaluations of one
/// sample share a seed stream.
GradVarEstimate grad_variance(const Circuit& c, CostKind kind, int n_c, int i,
                              int n_samples, const NoiseSpec& sim_spec,
                              std::uint64_t shots, std::uint64_t seed);

struct EntropyEstimate {
  double mean_s = 0;  // bits
  double std_s = 0;
  std::vector<int> partition;
  int n_samples = 0;
};

/// Von Neumann entropy (base 2) of the reduced state of `partition`,
/// averaged over uniformly sampled parameters.
EntropyEstimate entanglement_entropy(const Circuit& c,
                                     const std::vector<int>& partition,
                                     int n_samples, std::uint64_t seed);

double state_entropy_bits(const StateVector& s,
                          const std::vector<int>& partition);

/// floor((n-1)/2)-qubit connected subset of the coupling graph holding as
/// many cost-function qubits (0..n_c-1) as possible; ties to lowest indices.
std::vector<int> default_partition(const CouplingMap& cmap, int n, int n_c);

struct CircuitStats {
  int total_gates = 0;      // barriers excluded
  int two_qubit_gates = 0;
  double duration_ns = 0;   // ASAP critical path under device durations
  int depth = 0;            // DAG layers
};

CircuitStats circuit_stats(const Circuit& c, const DeviceModel& device);

/// duration(a) / duration(b).
double speedup(const CircuitStats& a, const CircuitStats& b);

}  // namespace xpqc
