#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "xpqc/circuit.hpp"
#include "xpqc/clifford.hpp"
#include "xpqc/device.hpp"
#include "xpqc/simulator.hpp"

namespace xpqc {

struct RbCircuit {
  int m = 0;        // number of random Cliffords
  int k_index = 0;  // sequence index within the length
  Circuit circuit;
  int inverse_start = 0;  // op index where the inverting Clifford begins
};

/// IRB sequence family for one edge: k random sequences per length, each
/// ending in the computed inverse so ideal execution returns |00>.
struct RbSequenceSet {
  Edge edge;
  std::vector<int> lengths;
  int k = 0;
  bool interleaved = false;
  std::vector<RbCircuit> circuits;
};

/// Simultaneous RB on two disjoint edges: independent sequences, aligned
/// lengths, Clifford blocks and (optionally) interleaved cx pairs separated
/// by full barriers so the interleaved gates always share a DAG layer.
/// Circuits act on 4 logical qubits: edge1 -> (0,1), edge2 -> (2,3).
struct SrbPairSet {
  Edge edge1;
  Edge edge2;
  std::vector<int> lengths;
  int k = 0;
  bool interleaved = false;
  std::vector<RbCircuit> circuits;
};

struct FitQuality {
  bool ok = true;
  bool alpha_at_bound = false;
  double rms = 0;
  std::string message;
};

struct DecayCurve {
  std::vector<std::pair<int, double>> points;  // (m, mean survival)
  double a0 = 0;
  double alpha = 1;
  double b0 = 0;
  double epc = 0;
  int num_qubits = 2;
  FitQuality quality;
};

/// 2-qubit RB circuits for one edge (circuits use logical qubits 0,1).
RbSequenceSet build_irb(const Edge& edge, const std::vector<int>& lengths,
                        int k, bool interleave, std::uint64_t seed);

SrbPairSet build_srb_pair(const Edge& edge1, const Edge& edge2,
                          const std::vector<int>& lengths, int k,
                          bool interleave, std::uint64_t seed);

/// Least-squares fit of A0*alpha^m + B0 with alpha in (0,1], A0,B0 in [0,1];
/// EPC = (1 - alpha) * (1 - 1/2^n). By default B0 is held at the structural
/// asymptote 1/2^n (the free three-parameter problem is ill-determined at
/// realistic sampling budgets); pass fix_b0=false for the literal bounded
/// three-parameter refinement.
DecayCurve fit_decay(const std::vector<std::pair<int, double>>& points,
                     int num_qubits = 2, bool fix_b0 = true);

double epc_from_alpha(double alpha, int num_qubits);

/// Interleaved-RB gate error from the reference and interleaved decays.
double interleaved_epc(double alpha_ref, double alpha_int, int num_qubits);

/// One row of the characterization decay table.
struct DecayRow {
  Edge edge;
  std::optional<Edge> paired_edge;
  bool interleaved = false;
  int m = 0;
  double mean_survival = 0;
};

struct PairFailure {
  Edge edge;
  std::optional<Edge> paired_edge;
  std::string message;
};

struct CrosstalkResult {
  CrosstalkTable table;                      // measured conditional rates
  std::map<Edge, double> independent_epc;    // per-edge IRB result
  std::map<Edge, DecayCurve> reference_fits; // solo reference decays
  std::vector<DecayRow> rows;
  std::vector<PairFailure> failures;
};

struct CharacterizeOptions {
  std::vector<int> lengths{1, 5, 10, 20, 40};
  int k = 10;
  std::uint64_t shots = 10000;
  /// Restrict to these edges (and one-hop pairs among them); empty = all.
  std::vector<Edge> edges;
};

/// Full SRB crosstalk characterization executed against the simulator:
/// per-edge independent EPC via IRB alone, then conditional EPC for every
/// one-hop pair via simultaneous IRB on both edges.
CrosstalkResult characterize_crosstalk(const DeviceModel& device,
                                       const NoiseSpec& sim_spec,
                                       const CharacterizeOptions& opts);

std::string decay_rows_csv(const std::vector<DecayRow>& rows);
std::string crosstalk_table_json(const CrosstalkTable& table);

}  // namespace xpqc
