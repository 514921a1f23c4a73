#include "xpqc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <stdexcept>

#include <json.hpp>

#include "xpqc/common.hpp"

namespace xpqc {

namespace {
constexpr int kMaxQubits = 16;
constexpr double kMaxTwoQubitEpc = 0.75;  // maximal two-qubit depolarizing
using cplx = std::complex<double>;
}  // namespace

StateVector StateVector::zero_state(int num_qubits) {
  if (num_qubits < 1 || num_qubits > kMaxQubits)
    throw std::runtime_error("statevector limited to 1.." +
                             std::to_string(kMaxQubits) + " qubits, got " +
                             std::to_string(num_qubits));
  StateVector s;
  s.num_qubits = num_qubits;
  s.amps.assign(std::size_t{1} << num_qubits, cplx{0.0, 0.0});
  s.amps[0] = 1.0;
  return s;
}

double StateVector::norm() const {
  double n = 0;
  for (const auto& a : amps) n += std::norm(a);
  return std::sqrt(n);
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amps.size());
  for (std::size_t i = 0; i < amps.size(); ++i) p[i] = std::norm(amps[i]);
  return p;
}

int bit_of(std::uint64_t index, int qubit, int num_qubits) {
  return static_cast<int>((index >> (num_qubits - 1 - qubit)) & 1ULL);
}

std::string bitstring_of(std::uint64_t index, int num_qubits) {
  std::string s(num_qubits, '0');
  for (int q = 0; q < num_qubits; ++q)
    if (bit_of(index, q, num_qubits)) s[q] = '1';
  return s;
}

namespace {

// Applies a generic 1-qubit unitary [[u00,u01],[u10,u11]].
void apply_1q(StateVector& s, int q, cplx u00, cplx u01, cplx u10, cplx u11) {
  const int shift = s.num_qubits - 1 - q;
  const std::uint64_t mask = 1ULL << shift;
  const std::uint64_t n = s.amps.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    if (i & mask) continue;
    cplx a0 = s.amps[i];
    cplx a1 = s.amps[i | mask];
    s.amps[i] = u00 * a0 + u01 * a1;
    s.amps[i | mask] = u10 * a0 + u11 * a1;
  }
}

}  // namespace

void StateVector::apply_rx(int q, double theta) {
  double c = std::cos(theta / 2), s = std::sin(theta / 2);
  apply_1q(*this, q, {c, 0}, {0, -s}, {0, -s}, {c, 0});
}

void StateVector::apply_ry(int q, double theta) {
  double c = std::cos(theta / 2), s = std::sin(theta / 2);
  apply_1q(*this, q, {c, 0}, {-s, 0}, {s, 0}, {c, 0});
}

void StateVector::apply_rz(int q, double theta) {
  cplx e0 = std::polar(1.0, -theta / 2), e1 = std::polar(1.0, theta / 2);
  apply_1q(*this, q, e0, {0, 0}, {0, 0}, e1);
}

void StateVector::apply_cx(int control, int target) {
  const std::uint64_t cmask = 1ULL << (num_qubits - 1 - control);
  const std::uint64_t tmask = 1ULL << (num_qubits - 1 - target);
  const std::uint64_t n = amps.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    if ((i & cmask) && !(i & tmask)) std::swap(amps[i], amps[i | tmask]);
  }
}

void StateVector::apply_pauli(int q, int p) {
  if (p == 0) return;
  const std::uint64_t mask = 1ULL << (num_qubits - 1 - q);
  const std::uint64_t n = amps.size();
  if (p == 1) {  // X
    for (std::uint64_t i = 0; i < n; ++i)
      if (!(i & mask)) std::swap(amps[i], amps[i | mask]);
  } else if (p == 2) {  // Y
    const cplx im{0, 1};
    for (std::uint64_t i = 0; i < n; ++i) {
      if (i & mask) continue;
      cplx a0 = amps[i], a1 = amps[i | mask];
      amps[i] = -im * a1;
      amps[i | mask] = im * a0;
    }
  } else {  // Z
    for (std::uint64_t i = 0; i < n; ++i)
      if (i & mask) amps[i] = -amps[i];
  }
}

void StateVector::apply_gate(const GateInstance& g) {
  switch (g.kind) {
    case GateKind::Rx: apply_rx(g.qubits[0], *g.angle); break;
    case GateKind::Ry: apply_ry(g.qubits[0], *g.angle); break;
    case GateKind::Rz: apply_rz(g.qubits[0], *g.angle); break;
    case GateKind::Cx: apply_cx(g.qubits[0], g.qubits[1]); break;
    case GateKind::Barrier: break;
  }
}

double fidelity(const StateVector& a, const StateVector& b) {
  if (a.num_qubits != b.num_qubits)
    throw std::invalid_argument("fidelity: qubit count mismatch");
  cplx ov{0, 0};
  for (std::size_t i = 0; i < a.amps.size(); ++i)
    ov += std::conj(a.amps[i]) * b.amps[i];
  return std::norm(ov);
}

double ShotResult::prob_all_zero(const std::vector<int>& qubits) const {
  if (shots == 0) return 0.0;
  std::uint64_t hit = 0;
  for (const auto& [bits, cnt] : counts) {
    bool zero = true;
    if (qubits.empty()) {
      zero = bits.find('1') == std::string::npos;
    } else {
      for (int q : qubits)
        if (bits.at(q) == '1') {
          zero = false;
          break;
        }
    }
    if (zero) hit += cnt;
  }
  return static_cast<double>(hit) / static_cast<double>(shots);
}

std::string ShotResult::to_json_string() const {
  nlohmann::json j;
  j["shots"] = shots;
  j["counts"] = nlohmann::json::object();
  for (const auto& [bits, cnt] : counts) j["counts"][bits] = cnt;
  return j.dump(2);
}

StateVector run_ideal(const Circuit& c, const std::vector<double>& theta) {
  Circuit bound = c.num_params > 0 ? bind(c, theta) : c;
  if (c.num_params == 0 && !theta.empty())
    throw std::invalid_argument("run_ideal: circuit takes no parameters");
  StateVector s = StateVector::zero_state(std::max(1, bound.num_qubits));
  for (const auto& g : bound.ops) s.apply_gate(g);
  return s;
}

std::vector<double> effective_layer_epc(const std::vector<Edge>& layer,
                                        const DeviceModel& device) {
  std::vector<double> out(layer.size());
  for (std::size_t i = 0; i < layer.size(); ++i) {
    double epc = device.cx_epc(layer[i]);
    for (std::size_t j = 0; j < layer.size(); ++j) {
      if (i == j) continue;
      epc *= multiplier(device.xtalk, layer[i], layer[j]);
    }
    out[i] = epc;
  }
  return out;
}

namespace {

// Sample one basis index from |psi|^2 via inverse CDF walk.
std::uint64_t sample_index(const StateVector& s, SmallRng& rng) {
  double u = rng.uniform();
  double acc = 0;
  const std::uint64_t n = s.amps.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    acc += std::norm(s.amps[i]);
    if (u < acc) return i;
  }
  return n - 1;
}

struct NoisySite {
  std::size_t op_index;  // position in bound.ops
  double p;              // pauli-injection probability
};

void warn_epc_capped(const Edge& e, double epc) {
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  std::cerr << "warning: effective EPC " << epc << " on cx" << edge_str(e)
            << " capped at " << kMaxTwoQubitEpc << "\n";
}

}  // namespace

ShotResult run_noisy(const Circuit& c, const std::vector<double>& theta,
                     const NoiseSpec& spec, std::uint64_t shots) {
  if (shots < 1) throw std::invalid_argument("run_noisy: shots must be >= 1");
  if (spec.mode != SimMode::Ideal && spec.device == nullptr)
    throw std::invalid_argument("run_noisy: noise mode requires a device");
  Circuit bound = c.num_params > 0 ? bind(c, theta) : c;

  // Precompute the pauli-injection probability of every cx. The layer
  // context for multipliers is the DAG layer of the bound circuit, so
  // barriers decide which gates count as overlapping.
  std::vector<NoisySite> sites;
  if (spec.mode != SimMode::Ideal) {
    DagLayering lay = build_dag_layers(bound);
    std::vector<std::vector<std::size_t>> cx_by_layer(lay.layers.size());
    for (std::size_t i = 0; i < bound.ops.size(); ++i)
      if (bound.ops[i].kind == GateKind::Cx)
        cx_by_layer[lay.op_layer[i]].push_back(i);
    std::vector<double> epc_of(bound.ops.size(), 0.0);
    for (const auto& layer_ops : cx_by_layer) {
      if (layer_ops.empty()) continue;
      std::vector<Edge> edges;
      for (std::size_t i : layer_ops)
        edges.push_back(
            make_edge(bound.ops[i].qubits[0], bound.ops[i].qubits[1]));
      if (spec.mode == SimMode::XtalkEnabled) {
        auto effs = effective_layer_epc(edges, *spec.device);
        for (std::size_t k = 0; k < layer_ops.size(); ++k)
          epc_of[layer_ops[k]] = effs[k];
      } else {
        for (std::size_t k = 0; k < layer_ops.size(); ++k)
          epc_of[layer_ops[k]] = spec.device->cx_epc(edges[k]);
      }
    }
    for (std::size_t i = 0; i < bound.ops.size(); ++i) {
      if (bound.ops[i].kind != GateKind::Cx) continue;
      double epc = epc_of[i];
      if (epc > kMaxTwoQubitEpc) {
        warn_epc_capped(
            make_edge(bound.ops[i].qubits[0], bound.ops[i].qubits[1]), epc);
        epc = kMaxTwoQubitEpc;
      }
      // depolarizing parameter: p = EPC * 2^n/(2^n - 1), n = 2
      double p = epc * 4.0 / 3.0;
      if (p > 0) sites.push_back({i, p});
    }
  }

  // Ideal path (and the zero-noise limit): one evolution, `shots` samples
  // against a precomputed CDF. Per-trajectory measurement streams stay
  // derived from (seed, trajectory, salt), so results are thread-count
  // independent and an all-zero-EPC noisy run equals the ideal run.
  const bool pure = sites.empty();
  std::vector<std::uint64_t> outcome(shots);
  if (pure) {
    StateVector final_state = run_ideal(bound);
    std::vector<double> cdf(final_state.amps.size());
    double acc = 0;
    for (std::size_t i = 0; i < final_state.amps.size(); ++i) {
      acc += std::norm(final_state.amps[i]);
      cdf[i] = acc;
    }
    parallel_for(shots, [&](std::size_t t) {
      SmallRng meas_rng(derive_seed(spec.seed, t, 1));
      double u = meas_rng.uniform();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      outcome[t] = static_cast<std::uint64_t>(
          std::min<std::ptrdiff_t>(it - cdf.begin(),
                                   static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    });
  } else {
    parallel_for(shots, [&](std::size_t t) {
      SmallRng err_rng(derive_seed(spec.seed, t, 0));
      SmallRng meas_rng(derive_seed(spec.seed, t, 1));
      StateVector s = StateVector::zero_state(bound.num_qubits);
      std::size_t next_site = 0;
      for (std::size_t i = 0; i < bound.ops.size(); ++i) {
        s.apply_gate(bound.ops[i]);
        if (next_site < sites.size() && sites[next_site].op_index == i) {
          const NoisySite& site = sites[next_site++];
          if (err_rng.uniform() < site.p) {
            int pp = static_cast<int>(err_rng.next() % 16);
            s.apply_pauli(bound.ops[i].qubits[0], pp & 3);
            s.apply_pauli(bound.ops[i].qubits[1], (pp >> 2) & 3);
          }
        }
      }
      outcome[t] = sample_index(s, meas_rng);
    });
  }

  ShotResult r;
  r.shots = shots;
  for (std::uint64_t t = 0; t < shots; ++t)
    r.counts[bitstring_of(outcome[t], bound.num_qubits)]++;
  return r;
}

}  // namespace xpqc
