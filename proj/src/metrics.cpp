#include "xpqc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

#include "xpqc/common.hpp"
#include "xpqc/vqa.hpp"

namespace xpqc {

namespace {

constexpr double kSmoothing = 1e-9;
constexpr int kMaxMetricQubits = 12;

std::vector<double> sample_theta(int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 2.0 * M_PI);
  std::vector<double> theta(count);
  for (auto& t : theta) t = uni(rng);
  return theta;
}

void check_metric_size(const Circuit& c) {
  if (c.num_qubits > kMaxMetricQubits)
    throw std::runtime_error("metrics limited to " +
                             std::to_string(kMaxMetricQubits) + " qubits");
}

}  // namespace

double haar_bin_mass(int bin, int bins, int num_qubits) {
  double dim = std::pow(2.0, num_qubits);
  double lo = static_cast<double>(bin) / bins;
  double hi = static_cast<double>(bin + 1) / bins;
  return std::pow(1.0 - lo, dim - 1.0) - std::pow(1.0 - hi, dim - 1.0);
}

ExprEstimate expressibility_from_fidelities(const std::vector<double>& fids,
                                            int bins, int num_qubits) {
  if (bins < 1) throw std::invalid_argument("expressibility: bins >= 1");
  std::vector<double> counts(bins, 0.0);
  for (double f : fids) {
    int b = std::min(static_cast<int>(f * bins), bins - 1);
    b = std::max(b, 0);
    counts[b] += 1.0;
  }
  const double n = static_cast<double>(fids.size());
  double kl = 0;
  double norm = 1.0 + kSmoothing * bins;
  for (int b = 0; b < bins; ++b) {
    double p = (counts[b] / n + kSmoothing) / norm;
    double h = haar_bin_mass(b, bins, num_qubits);
    kl += p * std::log(p / h);
  }
  ExprEstimate out;
  out.kl = kl;
  out.samples = static_cast<int>(fids.size());
  out.bins = bins;
  return out;
}

ExprEstimate expressibility(const Circuit& c, int n_pairs, int bins,
                            std::uint64_t seed) {
  check_metric_size(c);
  if (n_pairs < 1) throw std::invalid_argument("expressibility: n_pairs >= 1");
  bool warn = n_pairs < 10 * bins;
  if (warn)
    std::cerr << "warning: " << n_pairs << " pairs is low for " << bins
              << " bins\n";
  std::vector<double> fids(n_pairs);
  parallel_for(n_pairs, [&](std::size_t i) {
    auto rng_a = make_rng(seed, i, 0);
    auto rng_b = make_rng(seed, i, 1);
    auto ta = sample_theta(c.num_params, rng_a);
    auto tb = sample_theta(c.num_params, rng_b);
    StateVector sa = run_ideal(c, ta);
    StateVector sb = run_ideal(c, tb);
    fids[i] = fidelity(sa, sb);
  });
  ExprEstimate out = expressibility_from_fidelities(fids, bins, c.num_qubits);
  out.low_sample_warning = warn;
  return out;
}

GradVarEstimate grad_variance(const Circuit& c, CostKind kind, int n_c, int i,
                              int n_samples, const NoiseSpec& sim_spec,
                              std::uint64_t shots, std::uint64_t seed) {
  if (i < 0 || i >= c.num_params)
    throw std::invalid_argument("grad_variance: parameter index out of range");
  if (n_samples < 2)
    throw std::invalid_argument("grad_variance: need >= 2 samples");
  int cost_qubits = (kind == CostKind::Global) ? c.num_qubits : n_c;
  if (cost_qubits < 1 || cost_qubits > c.num_qubits)
    throw std::invalid_argument("grad_variance: bad cost-qubit count");
  if (shots == 0 && sim_spec.mode != SimMode::Ideal)
    throw std::invalid_argument(
        "grad_variance: exact costs need the ideal mode");

  auto cost_at = [&](const std::vector<double>& theta,
                     std::uint64_t eval_seed) -> double {
    if (shots == 0) {
      StateVector s = run_ideal(c, theta);
      double p0 = 0;
      const std::uint64_t dim = s.amps.size();
      for (std::uint64_t idx = 0; idx < dim; ++idx) {
        bool zero = true;
        for (int q = 0; q < cost_qubits && zero; ++q)
          if (bit_of(idx, q, c.num_qubits)) zero = false;
        if (zero) p0 += std::norm(s.amps[idx]);
      }
      return 1.0 - p0;
    }
    NoiseSpec spec = sim_spec;
    spec.seed = eval_seed;
    ShotResult r = run_noisy(c, theta, spec, shots);
    return ground_cost(r, cost_qubits);
  };

  std::vector<double> grads(n_samples);
  parallel_for(n_samples, [&](std::size_t s) {
    auto rng = make_rng(seed, s, 2);
    auto theta = sample_theta(c.num_params, rng);
    // common random numbers across the two shifts
    std::uint64_t eval_seed = derive_seed(seed, s, 3);
    auto tp = theta, tm = theta;
    tp[i] += M_PI / 2;
    tm[i] -= M_PI / 2;
    grads[s] = 0.5 * (cost_at(tp, eval_seed) - cost_at(tm, eval_seed));
  });

  double mean = 0;
  for (double g : grads) mean += g;
  mean /= n_samples;
  double var = 0;
  for (double g : grads) var += (g - mean) * (g - mean);
  var /= (n_samples - 1);

  GradVarEstimate out;
  out.param_index = i;
  out.variance = var;
  out.n_samples = n_samples;
  out.cost_kind = kind;
  out.n_c = cost_qubits;
  out.gradients = std::move(grads);
  return out;
}

double state_entropy_bits(const StateVector& s,
                          const std::vector<int>& partition) {
  const int n = s.num_qubits;
  const int k = static_cast<int>(partition.size());
  if (k < 1 || k >= n)
    throw std::invalid_argument("entropy: partition must be a proper subset");
  std::vector<bool> in(n, false);
  for (int q : partition) {
    if (q < 0 || q >= n) throw std::invalid_argument("entropy: bad qubit");
    if (in[q]) throw std::invalid_argument("entropy: duplicate qubit");
    in[q] = true;
  }
  std::vector<int> a_qubits = partition;
  std::sort(a_qubits.begin(), a_qubits.end());
  std::vector<int> e_qubits;
  for (int q = 0; q < n; ++q)
    if (!in[q]) e_qubits.push_back(q);

  const std::uint64_t da = 1ULL << k;
  const std::uint64_t de = 1ULL << (n - k);
  auto index_of = [&](std::uint64_t abits, std::uint64_t ebits) {
    std::uint64_t idx = 0;
    for (int j = 0; j < k; ++j)
      if ((abits >> j) & 1ULL) idx |= 1ULL << (n - 1 - a_qubits[j]);
    for (int j = 0; j < n - k; ++j)
      if ((ebits >> j) & 1ULL) idx |= 1ULL << (n - 1 - e_qubits[j]);
    return idx;
  };

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(da, da);
  for (std::uint64_t e = 0; e < de; ++e) {
    for (std::uint64_t x = 0; x < da; ++x) {
      std::complex<double> ax = s.amps[index_of(x, e)];
      if (ax == std::complex<double>{0, 0}) continue;
      for (std::uint64_t y = 0; y < da; ++y) {
        rho(x, y) += ax * std::conj(s.amps[index_of(y, e)]);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      rho, Eigen::EigenvaluesOnly);
  double bits = 0;
  for (int j = 0; j < solver.eigenvalues().size(); ++j) {
    double lam = solver.eigenvalues()[j];
    if (lam > 1e-12) bits -= lam * std::log2(lam);
  }
  return bits;
}

EntropyEstimate entanglement_entropy(const Circuit& c,
                                     const std::vector<int>& partition,
                                     int n_samples, std::uint64_t seed) {
  check_metric_size(c);
  if (n_samples < 1)
    throw std::invalid_argument("entropy: need >= 1 sample");
  std::vector<double> vals(n_samples);
  parallel_for(n_samples, [&](std::size_t s) {
    auto rng = make_rng(seed, s, 4);
    auto theta = sample_theta(c.num_params, rng);
    vals[s] = state_entropy_bits(run_ideal(c, theta), partition);
  });
  double mean = 0;
  for (double v : vals) mean += v;
  mean /= n_samples;
  double var = 0;
  for (double v : vals) var += (v - mean) * (v - mean);
  var = n_samples > 1 ? var / (n_samples - 1) : 0.0;

  EntropyEstimate out;
  out.mean_s = mean;
  out.std_s = std::sqrt(var);
  out.partition = partition;
  out.n_samples = n_samples;
  return out;
}

std::vector<int> default_partition(const CouplingMap& cmap, int n, int n_c) {
  int k = (n - 1) / 2;
  if (k < 1) k = 1;
  // enumerate size-k subsets, keep connected ones, score by cost overlap
  std::vector<int> best;
  int best_overlap = -1;
  std::vector<int> subset;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(subset.size()) == k) {
      // connectivity check on the induced subgraph
      std::vector<int> stack{subset[0]};
      std::set<int> seen{subset[0]};
      std::set<int> target(subset.begin(), subset.end());
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v : cmap.neighbors(u)) {
          if (target.count(v) && !seen.count(v)) {
            seen.insert(v);
            stack.push_back(v);
          }
        }
      }
      if (static_cast<int>(seen.size()) != k) return;
      int overlap = 0;
      for (int q : subset)
        if (q < n_c) ++overlap;
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = subset;
      }
      return;
    }
    for (int q = start; q < n; ++q) {
      subset.push_back(q);
      rec(q + 1);
      subset.pop_back();
    }
  };
  rec(0);
  if (best.empty())
    throw std::runtime_error("default_partition: no connected subset found");
  return best;
}

CircuitStats circuit_stats(const Circuit& c, const DeviceModel& device) {
  CircuitStats out;
  std::vector<double> t(c.num_qubits, 0.0);
  for (const auto& g : c.ops) {
    if (g.kind == GateKind::Barrier) {
      double sync = 0;
      for (int q : g.qubits) sync = std::max(sync, t[q]);
      for (int q : g.qubits) t[q] = sync;
      continue;
    }
    const GateCal* cal = device.find_gate_cal(gate_name(g.kind), g.qubits);
    if (!cal)
      throw std::invalid_argument(std::string("circuit_stats: gate ") +
                                  gate_name(g.kind) + " uncalibrated");
    double start = 0;
    for (int q : g.qubits) start = std::max(start, t[q]);
    for (int q : g.qubits) t[q] = start + cal->duration_ns;
    ++out.total_gates;
    if (g.kind == GateKind::Cx) ++out.two_qubit_gates;
  }
  for (double f : t) out.duration_ns = std::max(out.duration_ns, f);
  out.depth = static_cast<int>(build_dag_layers(c).layers.size());
  return out;
}

double speedup(const CircuitStats& a, const CircuitStats& b) {
  if (b.duration_ns <= 0)
    throw std::invalid_argument("speedup: zero-duration divisor");
  return a.duration_ns / b.duration_ns;
}

}  // namespace xpqc
