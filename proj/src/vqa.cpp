#include "xpqc/vqa.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "xpqc/common.hpp"

namespace xpqc {

void PauliHamiltonian::validate() const {
  if (n < 1) throw std::invalid_argument("hamiltonian: need n >= 1");
  for (const auto& t : terms) {
    if (static_cast<int>(t.pauli.size()) != n)
      throw std::invalid_argument("hamiltonian: term '" + t.pauli +
                                  "' length != n");
    for (char ch : t.pauli)
      if (ch != 'I' && ch != 'X' && ch != 'Y' && ch != 'Z')
        throw std::invalid_argument("hamiltonian: bad pauli char in '" +
                                    t.pauli + "'");
    if (!std::isfinite(t.coeff))
      throw std::invalid_argument("hamiltonian: non-finite coefficient");
  }
}

PauliHamiltonian hamiltonian_from_json_string(const std::string& text) {
  PauliHamiltonian h;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    h.n = j.at("n").get<int>();
    for (const auto& jt : j.at("terms"))
      h.terms.push_back(
          {jt.at("coeff").get<double>(), jt.at("pauli").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("hamiltonian json: ") + e.what());
  }
  h.validate();
  return h;
}

std::string hamiltonian_to_json_string(const PauliHamiltonian& h) {
  nlohmann::json j;
  j["n"] = h.n;
  j["terms"] = nlohmann::json::array();
  for (const auto& t : h.terms)
    j["terms"].push_back({{"coeff", t.coeff}, {"pauli", t.pauli}});
  return j.dump(2);
}

PauliHamiltonian load_hamiltonian(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open hamiltonian file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return hamiltonian_from_json_string(ss.str());
}

void save_hamiltonian(const PauliHamiltonian& h, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write hamiltonian file: " + path);
  out << hamiltonian_to_json_string(h) << "\n";
}

double ground_cost(const ShotResult& result, int n_c) {
  if (n_c < 1) throw std::invalid_argument("ground_cost: need n_c >= 1");
  if (result.shots == 0) return 1.0;
  std::uint64_t hit = 0;
  for (const auto& [bits, cnt] : result.counts) {
    if (n_c > static_cast<int>(bits.size()))
      throw std::invalid_argument("ground_cost: n_c exceeds qubit count");
    bool zero = true;
    for (int q = 0; q < n_c; ++q)
      if (bits[q] == '1') {
        zero = false;
        break;
      }
    if (zero) hit += cnt;
  }
  return 1.0 - static_cast<double>(hit) / static_cast<double>(result.shots);
}

StateVector apply_hamiltonian(const PauliHamiltonian& h, const StateVector& s) {
  if (h.n != s.num_qubits)
    throw std::invalid_argument("apply_hamiltonian: dimension mismatch");
  StateVector out = s;
  for (auto& a : out.amps) a = 0;
  const std::uint64_t dim = s.amps.size();
  for (const auto& term : h.terms) {
    for (std::uint64_t idx = 0; idx < dim; ++idx) {
      // P|idx> = phase |jdx>
      std::uint64_t jdx = idx;
      std::complex<double> phase{1, 0};
      for (int q = 0; q < h.n; ++q) {
        char p = term.pauli[q];
        if (p == 'I') continue;
        std::uint64_t mask = 1ULL << (h.n - 1 - q);
        int bit = (idx & mask) ? 1 : 0;
        if (p == 'X') {
          jdx ^= mask;
        } else if (p == 'Y') {
          jdx ^= mask;
          phase *= bit ? std::complex<double>{0, -1}
                       : std::complex<double>{0, 1};
        } else {  // Z
          if (bit) phase = -phase;
        }
      }
      out.amps[jdx] += term.coeff * phase * s.amps[idx];
    }
  }
  return out;
}

double exact_expectation(const PauliHamiltonian& h, const StateVector& s) {
  StateVector hs = apply_hamiltonian(h, s);
  std::complex<double> e{0, 0};
  for (std::size_t i = 0; i < s.amps.size(); ++i)
    e += std::conj(s.amps[i]) * hs.amps[i];
  return e.real();
}

double ground_energy_dense(const PauliHamiltonian& h) {
  if (h.n > 12)
    throw std::runtime_error("ground_energy_dense: limited to 12 qubits");
  const std::uint64_t dim = 1ULL << h.n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  StateVector basis;
  basis.num_qubits = h.n;
  basis.amps.assign(dim, {0, 0});
  for (std::uint64_t col = 0; col < dim; ++col) {
    basis.amps[col] = 1;
    StateVector out = apply_hamiltonian(h, basis);
    for (std::uint64_t row = 0; row < dim; ++row) m(row, col) = out.amps[row];
    basis.amps[col] = 0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

namespace {

struct MeasGroup {
  std::string basis;              // per-qubit I/X/Y/Z (I = don't care)
  std::vector<std::size_t> term_indices;
};

bool term_fits(const std::string& pauli, std::string& basis) {
  for (std::size_t q = 0; q < pauli.size(); ++q) {
    if (pauli[q] == 'I') continue;
    if (basis[q] != 'I' && basis[q] != pauli[q]) return false;
  }
  for (std::size_t q = 0; q < pauli.size(); ++q)
    if (pauli[q] != 'I') basis[q] = pauli[q];
  return true;
}

// Greedy qubit-wise-commuting grouping in term order.
std::vector<MeasGroup> group_terms(const PauliHamiltonian& h) {
  std::vector<MeasGroup> groups;
  for (std::size_t t = 0; t < h.terms.size(); ++t) {
    const std::string& pauli = h.terms[t].pauli;
    if (pauli.find_first_not_of('I') == std::string::npos) continue;
    bool placed = false;
    for (auto& g : groups) {
      std::string candidate = g.basis;
      if (term_fits(pauli, candidate)) {
        g.basis = candidate;
        g.term_indices.push_back(t);
        placed = true;
        break;
      }
    }
    if (!placed) {
      MeasGroup g;
      g.basis.assign(h.n, 'I');
      std::string candidate = g.basis;
      term_fits(pauli, candidate);
      g.basis = candidate;
      g.term_indices.push_back(t);
      groups.push_back(std::move(g));
    }
  }
  return groups;
}

Circuit with_basis_change(const Circuit& bound, const std::string& basis) {
  Circuit out = bound;
  for (std::size_t q = 0; q < basis.size(); ++q) {
    if (basis[q] == 'X')
      out.ops.push_back(GateInstance::rotation(GateKind::Ry,
                                               static_cast<int>(q), -M_PI / 2));
    else if (basis[q] == 'Y')
      out.ops.push_back(
          GateInstance::rotation(GateKind::Rx, static_cast<int>(q), M_PI / 2));
  }
  return out;
}

double parity_expectation_counts(const ShotResult& r,
                                 const std::string& pauli) {
  double acc = 0;
  for (const auto& [bits, cnt] : r.counts) {
    int parity = 0;
    for (std::size_t q = 0; q < pauli.size(); ++q)
      if (pauli[q] != 'I' && bits[q] == '1') parity ^= 1;
    acc += (parity ? -1.0 : 1.0) * static_cast<double>(cnt);
  }
  return acc / static_cast<double>(r.shots);
}

double parity_expectation_exact(const StateVector& s,
                                const std::string& pauli) {
  double acc = 0;
  const std::uint64_t dim = s.amps.size();
  for (std::uint64_t idx = 0; idx < dim; ++idx) {
    double p = std::norm(s.amps[idx]);
    if (p == 0) continue;
    int parity = 0;
    for (std::size_t q = 0; q < pauli.size(); ++q)
      if (pauli[q] != 'I' && bit_of(idx, static_cast<int>(q), s.num_qubits))
        parity ^= 1;
    acc += (parity ? -1.0 : 1.0) * p;
  }
  return acc;
}

}  // namespace

double expectation(const PauliHamiltonian& h, const Circuit& c,
                   const std::vector<double>& theta, const NoiseSpec& spec,
                   std::uint64_t shots) {
  h.validate();
  if (h.n != c.num_qubits)
    throw std::invalid_argument("expectation: hamiltonian/circuit mismatch");
  if (shots == 0 && spec.mode != SimMode::Ideal)
    throw std::invalid_argument("expectation: exact mode requires ideal sim");

  double energy = 0;
  for (const auto& t : h.terms)
    if (t.pauli.find_first_not_of('I') == std::string::npos) energy += t.coeff;

  Circuit bound = c.num_params > 0 ? bind(c, theta) : c;
  auto groups = group_terms(h);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    Circuit meas = with_basis_change(bound, g.basis);
    if (shots == 0) {
      StateVector s = run_ideal(meas);
      for (std::size_t t : g.term_indices)
        energy += h.terms[t].coeff *
                  parity_expectation_exact(s, h.terms[t].pauli);
    } else {
      NoiseSpec gspec = spec;
      gspec.seed = derive_seed(spec.seed, 0x6d65, gi);
      ShotResult r = run_noisy(meas, {}, gspec, shots);
      for (std::size_t t : g.term_indices)
        energy += h.terms[t].coeff *
                  parity_expectation_counts(r, h.terms[t].pauli);
    }
  }
  return energy;
}

VqeTrace spsa_minimize(
    const std::function<double(const std::vector<double>&)>& f, int p,
    const SpsaConfig& cfg, const std::vector<double>& theta0) {
  if (p < 1) throw std::invalid_argument("spsa: need p >= 1");
  if (cfg.max_iter < 1 || cfg.c <= 0)
    throw std::invalid_argument("spsa: need max_iter >= 1 and c > 0");
  auto rng = make_rng(cfg.seed, 0x5053);
  std::vector<double> theta = theta0;
  if (theta.empty()) {
    std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
    theta.resize(p);
    for (auto& t : theta) t = uni(rng);
  }
  if (static_cast<int>(theta.size()) != p)
    throw std::invalid_argument("spsa: theta0 size mismatch");

  VqeTrace trace;
  trace.best_energy = std::numeric_limits<double>::infinity();
  std::vector<double> delta(p), tp(p), tm(p);
  for (int k = 0; k < cfg.max_iter; ++k) {
    double ak = cfg.a / std::pow(cfg.big_a + k + 1, cfg.alpha_gain);
    double ck = cfg.c / std::pow(k + 1, cfg.gamma_gain);
    for (int j = 0; j < p; ++j) delta[j] = (rng() & 1) ? 1.0 : -1.0;
    for (int j = 0; j < p; ++j) {
      tp[j] = theta[j] + ck * delta[j];
      tm[j] = theta[j] - ck * delta[j];
    }
    double fp = f(tp);
    double fm = f(tm);
    trace.evaluations += 2;
    double est = 0.5 * (fp + fm);
    trace.iterations.push_back({theta, est});
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      trace.aborted = true;
      break;
    }
    trace.best_energy = std::min(trace.best_energy, est);
    double gscale = (fp - fm) / (2.0 * ck);
    for (int j = 0; j < p; ++j) theta[j] -= ak * gscale * delta[j];
  }
  trace.final_theta = theta;
  if (cfg.final_eval && !trace.aborted) {
    double fe = f(theta);
    trace.evaluations += 1;
    if (std::isfinite(fe)) {
      trace.final_energy = fe;
      trace.best_energy = std::min(trace.best_energy, fe);
    }
  }
  return trace;
}

std::uint64_t min_diagonal_state(const PauliHamiltonian& h) {
  const std::uint64_t dim = 1ULL << h.n;
  std::uint64_t best_z = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t z = 0; z < dim; ++z) {
    double e = 0;
    for (const auto& t : h.terms) {
      double sign = 1;
      bool diagonal = true;
      for (int q = 0; q < h.n && diagonal; ++q) {
        char p = t.pauli[q];
        if (p == 'X' || p == 'Y') diagonal = false;
        else if (p == 'Z' && ((z >> (h.n - 1 - q)) & 1ULL)) sign = -sign;
      }
      if (diagonal) e += sign * t.coeff;
    }
    if (e < best) {
      best = e;
      best_z = z;
    }
  }
  return best_z;
}

VqeTrace run_vqe(const PauliHamiltonian& h, const DeviceModel& device,
                 const VqeOptions& opts) {
  h.validate();
  PqcConfig cfg = opts.ansatz;
  cfg.n = h.n;
  BuiltAnsatz built = build_pqc(cfg, device);

  int eval_counter = 0;
  auto f = [&](const std::vector<double>& theta) -> double {
    NoiseSpec spec;
    spec.mode = opts.mode;
    spec.device = &built.line_device;
    spec.seed = derive_seed(opts.seed, 0xe7a1, eval_counter++);
    return expectation(h, built.circuit, theta, spec, opts.shots);
  };

  std::vector<double> theta0(built.circuit.num_params, 0.0);
  auto rng = make_rng(opts.seed, 0x1217);
  if (opts.init == VqeInit::Random) {
    std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
    for (auto& t : theta0) t = uni(rng);
  } else {
    // |0..0> rides through every zero-angle entangler untouched, so ry(pi)
    // slots in the final rotation layer prepare the min-diagonal basis state
    // exactly; slot of qubit q there is 2nL + 2q
    std::uint64_t z = min_diagonal_state(h);
    for (int q = 0; q < h.n; ++q)
      if ((z >> (h.n - 1 - q)) & 1ULL)
        theta0[2 * h.n * cfg.L + 2 * q] = M_PI;
    std::uniform_real_distribution<double> jit(-opts.init_jitter,
                                               opts.init_jitter);
    for (auto& t : theta0) t += jit(rng);
  }

  SpsaConfig spsa = opts.spsa;
  spsa.seed = opts.seed;
  spsa.final_eval = true;
  VqeTrace trace = spsa_minimize(f, built.circuit.num_params, spsa, theta0);
  if (h.n <= 12) trace.reference_energy = ground_energy_dense(h);
  return trace;
}

std::string vqe_trace_csv(const VqeTrace& t) {
  std::ostringstream out;
  out << "iteration,energy\n";
  for (std::size_t i = 0; i < t.iterations.size(); ++i)
    out << i << "," << format_double(t.iterations[i].energy) << "\n";
  return out.str();
}

}  // namespace xpqc
