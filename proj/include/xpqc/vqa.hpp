#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xpqc/ansatz.hpp"
#include "xpqc/circuit.hpp"
#include "xpqc/device.hpp"
#include "xpqc/simulator.hpp"

namespace xpqc {

struct PauliTerm {
  double coeff = 0;
  std::string pauli;  // length-n string over I,X,Y,Z; qubit 0 first
};

struct PauliHamiltonian {
  int n = 0;
  std::vector<PauliTerm> terms;

  void validate() const;
};

PauliHamiltonian hamiltonian_from_json_string(const std::string& text);
std::string hamiltonian_to_json_string(const PauliHamiltonian& h);
PauliHamiltonian load_hamiltonian(const std::string& path);
void save_hamiltonian(const PauliHamiltonian& h, const std::string& path);

/// C = 1 - p(first n_c measured bits all zero). n_c = N is the global
/// ground-state cost.
double ground_cost(const ShotResult& result, int n_c);

/// H|psi> done term by term (matrix-free); the test oracle for expectation.
StateVector apply_hamiltonian(const PauliHamiltonian& h, const StateVector& s);

/// <psi|H|psi> evaluated exactly on a statevector.
double exact_expectation(const PauliHamiltonian& h, const StateVector& s);

/// Smallest eigenvalue by dense diagonalization (N <= 12).
double ground_energy_dense(const PauliHamiltonian& h);

/// Measurement-based estimate: qubit-wise-commuting terms share a setting;
/// X/Y bases reached via ry(-pi/2)/rx(pi/2); identity terms added exactly.
/// shots = 0 evaluates exact probabilities (Ideal mode only).
double expectation(const PauliHamiltonian& h, const Circuit& c,
                   const std::vector<double>& theta, const NoiseSpec& spec,
                   std::uint64_t shots);

struct SpsaConfig {
  int max_iter = 100;
  double a = 0.2;
  double c = 0.1;
  double big_a = 10.0;
  double alpha_gain = 0.602;
  double gamma_gain = 0.101;
  /// One unperturbed evaluation of the final point, counted in evaluations.
  /// The perturbed iteration estimates are biased upward at sharp minima,
  /// so best_energy needs this to reflect the solution actually returned.
  bool final_eval = false;
  std::uint64_t seed = 0;
};

struct VqeIteration {
  std::vector<double> theta;
  double energy = 0;  // mean of the two perturbed evaluations
};

struct VqeTrace {
  std::vector<VqeIteration> iterations;
  std::vector<double> final_theta;
  std::optional<double> final_energy;
  double best_energy = 0;
  int evaluations = 0;
  std::optional<double> reference_energy;  // dense-diagonalization ground
  bool aborted = false;
};

/// Standard two-evaluation SPSA descent with Rademacher perturbations and
/// gain sequences a_k = a/(A+k+1)^alpha, c_k = c/(k+1)^gamma.
VqeTrace spsa_minimize(const std::function<double(const std::vector<double>&)>& f,
                       int p, const SpsaConfig& cfg,
                       const std::vector<double>& theta0 = {});

enum class VqeInit {
  /// Zeros plus ry(pi) in the first rotation layer on the 1-bits of the
  /// basis state minimizing the diagonal part of H (Hartree-Fock-like),
  /// with a small seeded jitter.
  Diagonal,
  /// Uniform angles in [0, 2pi).
  Random,
};

/// Basis state (qubit-0-leftmost bits) minimizing <z|H|z>.
std::uint64_t min_diagonal_state(const PauliHamiltonian& h);

struct VqeOptions {
  PqcConfig ansatz;
  SimMode mode = SimMode::Ideal;
  std::uint64_t shots = 4096;
  SpsaConfig spsa;
  VqeInit init = VqeInit::Diagonal;
  double init_jitter = 0.05;
  std::uint64_t seed = 0;
};

/// Builds the ansatz on the device line, minimizes the Hamiltonian
/// expectation with SPSA (final point evaluated once, unperturbed), and
/// attaches the dense-diagonalization reference.
VqeTrace run_vqe(const PauliHamiltonian& h, const DeviceModel& device,
                 const VqeOptions& opts);

std::string vqe_trace_csv(const VqeTrace& t);

}  // namespace xpqc
