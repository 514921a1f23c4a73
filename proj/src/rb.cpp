#include "xpqc/rb.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "xpqc/common.hpp"

namespace xpqc {

namespace {

std::uint64_t edge_id(const Edge& e) {
  return (static_cast<std::uint64_t>(e.first) << 32) |
         static_cast<std::uint64_t>(e.second);
}

// Deterministic per-sequence stream: (seed, edge, m, k-index) fixes the draw.
std::mt19937_64 sequence_rng(std::uint64_t seed, const Edge& edge, int m,
                             int k_index) {
  return make_rng(seed, edge_id(edge), static_cast<std::uint64_t>(m),
                  static_cast<std::uint64_t>(k_index));
}

void append_gates(Circuit& c, const std::vector<GateInstance>& gates) {
  c.ops.insert(c.ops.end(), gates.begin(), gates.end());
}

}  // namespace

RbSequenceSet build_irb(const Edge& edge, const std::vector<int>& lengths,
                        int k, bool interleave, std::uint64_t seed) {
  if (lengths.empty() || k < 1)
    throw std::invalid_argument("build_irb: need lengths and k >= 1");
  RbSequenceSet set;
  set.edge = edge;
  set.lengths = lengths;
  set.k = k;
  set.interleaved = interleave;
  const std::vector<int> qmap{0, 1};
  CliffordTableau cx_t = CliffordTableau::identity(2);
  cx_t.append_cx(0, 1);
  for (int m : lengths) {
    for (int ki = 0; ki < k; ++ki) {
      auto rng = sequence_rng(seed, edge, m, ki);
      Circuit c;
      c.num_qubits = 2;
      CliffordTableau total = CliffordTableau::identity(2);
      for (int j = 0; j < m; ++j) {
        CliffordElement e = random_clifford(2, rng);
        append_gates(c, e.gates);
        total = compose(total, e.tableau);
        if (interleave) {
          c.ops.push_back(GateInstance::cx(0, 1));
          total = compose(total, cx_t);
        }
      }
      int inverse_start = static_cast<int>(c.ops.size());
      append_gates(c, realize(inverse(total), qmap));
      set.circuits.push_back({m, ki, std::move(c), inverse_start});
    }
  }
  return set;
}

SrbPairSet build_srb_pair(const Edge& edge1, const Edge& edge2,
                          const std::vector<int>& lengths, int k,
                          bool interleave, std::uint64_t seed) {
  if (lengths.empty() || k < 1)
    throw std::invalid_argument("build_srb_pair: need lengths and k >= 1");
  SrbPairSet set;
  set.edge1 = edge1;
  set.edge2 = edge2;
  set.lengths = lengths;
  set.k = k;
  set.interleaved = interleave;
  const std::vector<int> map1{0, 1};
  const std::vector<int> map2{2, 3};
  CliffordTableau cx_t = CliffordTableau::identity(2);
  cx_t.append_cx(0, 1);
  for (int m : lengths) {
    for (int ki = 0; ki < k; ++ki) {
      auto rng1 = sequence_rng(seed, edge1, m, ki);
      auto rng2 = sequence_rng(seed, edge2, m, ki);
      Circuit c;
      c.num_qubits = 4;
      CliffordTableau total1 = CliffordTableau::identity(2);
      CliffordTableau total2 = CliffordTableau::identity(2);
      for (int j = 0; j < m; ++j) {
        CliffordElement e1 = random_clifford(2, rng1);
        CliffordElement e2 = random_clifford(2, rng2);
        append_gates(c, e1.gates);
        append_gates(c, realize(e2.tableau, map2));
        total1 = compose(total1, e1.tableau);
        total2 = compose(total2, e2.tableau);
        c.ops.push_back(GateInstance::barrier({0, 1, 2, 3}));
        if (interleave) {
          c.ops.push_back(GateInstance::cx(0, 1));
          c.ops.push_back(GateInstance::cx(2, 3));
          total1 = compose(total1, cx_t);
          total2 = compose(total2, cx_t);
          c.ops.push_back(GateInstance::barrier({0, 1, 2, 3}));
        }
      }
      int inverse_start = static_cast<int>(c.ops.size());
      append_gates(c, realize(inverse(total1), map1));
      append_gates(c, realize(inverse(total2), map2));
      set.circuits.push_back({m, ki, std::move(c), inverse_start});
    }
  }
  return set;
}

double epc_from_alpha(double alpha, int num_qubits) {
  double dim = std::pow(2.0, num_qubits);
  return (1.0 - alpha) * (1.0 - 1.0 / dim);
}

double interleaved_epc(double alpha_ref, double alpha_int, int num_qubits) {
  if (alpha_ref <= 0)
    throw std::runtime_error("interleaved_epc: reference alpha must be > 0");
  return epc_from_alpha(alpha_int / alpha_ref, num_qubits);
}

namespace {

double model_rss(const std::vector<std::pair<int, double>>& pts, double a0,
                 double alpha, double b0) {
  double rss = 0;
  for (const auto& [m, y] : pts) {
    double r = y - (a0 * std::pow(alpha, m) + b0);
    rss += r * r;
  }
  return rss;
}

// Clamped linear LS for (A0, B0) at fixed alpha.
void solve_linear(const std::vector<std::pair<int, double>>& pts, double alpha,
                  double* a0, double* b0) {
  double suu = 0, su = 0, suy = 0, sy = 0;
  const double n = static_cast<double>(pts.size());
  for (const auto& [m, y] : pts) {
    double u = std::pow(alpha, m);
    suu += u * u;
    su += u;
    suy += u * y;
    sy += y;
  }
  double det = suu * n - su * su;
  if (std::abs(det) < 1e-15) {
    *a0 = 0;
    *b0 = sy / n;
  } else {
    *a0 = (suy * n - su * sy) / det;
    *b0 = (suu * sy - su * suy) / det;
  }
  *a0 = std::clamp(*a0, 0.0, 1.0);
  *b0 = std::clamp(*b0, 0.0, 1.0);
}

// One damped Gauss-Newton (Levenberg) step on (A0, alpha, B0); returns false
// when no damping level yields an improvement.
bool lm_step(const std::vector<std::pair<int, double>>& pts, double* a0,
             double* alpha, double* b0, double* rss, double* lambda) {
  double jtj[3][3] = {};
  double jtr[3] = {};
  for (const auto& [m, y] : pts) {
    double am = std::pow(*alpha, m);
    double r = y - (*a0 * am + *b0);
    double j[3] = {-am, -*a0 * m * std::pow(*alpha, m - 1), -1.0};
    for (int u = 0; u < 3; ++u) {
      jtr[u] += j[u] * r;
      for (int v = 0; v < 3; ++v) jtj[u][v] += j[u] * j[v];
    }
  }
  for (int attempt = 0; attempt < 12; ++attempt) {
    double a[3][3];
    for (int u = 0; u < 3; ++u)
      for (int v = 0; v < 3; ++v)
        a[u][v] = jtj[u][v] + (u == v ? *lambda * (jtj[u][u] + 1e-12) : 0.0);
    double rhs[3] = {-jtr[0], -jtr[1], -jtr[2]};
    // 3x3 gaussian elimination
    double x[3] = {};
    {
      double mat[3][4];
      for (int u = 0; u < 3; ++u) {
        for (int v = 0; v < 3; ++v) mat[u][v] = a[u][v];
        mat[u][3] = rhs[u];
      }
      bool singular = false;
      for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int row = col + 1; row < 3; ++row)
          if (std::abs(mat[row][col]) > std::abs(mat[piv][col])) piv = row;
        if (std::abs(mat[piv][col]) < 1e-18) {
          singular = true;
          break;
        }
        std::swap(mat[col], mat[piv]);
        for (int row = col + 1; row < 3; ++row) {
          double f = mat[row][col] / mat[col][col];
          for (int v = col; v < 4; ++v) mat[row][v] -= f * mat[col][v];
        }
      }
      if (singular) {
        *lambda *= 10;
        continue;
      }
      for (int row = 2; row >= 0; --row) {
        double s = mat[row][3];
        for (int v = row + 1; v < 3; ++v) s -= mat[row][v] * x[v];
        x[row] = s / mat[row][row];
      }
    }
    double na = std::clamp(*a0 + x[0], 0.0, 1.0);
    double nal = std::clamp(*alpha + x[1], 1e-9, 1.0);
    double nb = std::clamp(*b0 + x[2], 0.0, 1.0);
    double nrss = model_rss(pts, na, nal, nb);
    if (nrss < *rss) {
      *a0 = na;
      *alpha = nal;
      *b0 = nb;
      *rss = nrss;
      *lambda = std::max(1e-12, *lambda * 0.5);
      return true;
    }
    *lambda *= 10;
  }
  return false;
}

}  // namespace

namespace {

// Residual with B0 held at the structural asymptote and A0 profiled out.
double pinned_rss(const std::vector<std::pair<int, double>>& pts, double alpha,
                  double b0, double* a0_out) {
  double su = 0, suu = 0, suy = 0;
  for (const auto& [m, y] : pts) {
    double u = std::pow(alpha, m);
    su += u;
    suu += u * u;
    suy += u * (y - b0);
  }
  (void)su;
  double a = suu > 0 ? std::clamp(suy / suu, 0.0, 1.0) : 0.0;
  if (a0_out) *a0_out = a;
  double rss = 0;
  for (const auto& [m, y] : pts) {
    double r = y - (a * std::pow(alpha, m) + b0);
    rss += r * r;
  }
  return rss;
}

}  // namespace

DecayCurve fit_decay(const std::vector<std::pair<int, double>>& points,
                     int num_qubits, bool fix_b0) {
  DecayCurve out;
  out.num_qubits = num_qubits;
  out.points = points;
  std::set<int> distinct;
  for (const auto& [m, y] : points) {
    distinct.insert(m);
    if (y < 0 || y > 1)
      throw std::invalid_argument("fit_decay: survival outside [0,1]");
  }
  if (distinct.size() < 3)
    throw std::invalid_argument("fit_decay: need >= 3 distinct lengths");

  // canonical ordering makes the fit independent of input point order
  std::vector<std::pair<int, double>> pts = points;
  std::sort(pts.begin(), pts.end());

  const double b0_init = 1.0 / std::pow(2.0, num_qubits);
  double a0 = std::clamp(pts.front().second - b0_init, 0.0, 1.0);
  double b0 = b0_init;
  double alpha;
  {
    // log-linear regression of y - B0 against m
    double sm = 0, sl = 0, smm = 0, sml = 0;
    int used = 0;
    for (const auto& [m, y] : pts) {
      double resid = y - b0_init;
      if (resid < 1e-4) continue;
      double l = std::log(resid);
      sm += m;
      sl += l;
      smm += static_cast<double>(m) * m;
      sml += m * l;
      ++used;
    }
    double det = used * smm - sm * sm;
    alpha = (used >= 2 && std::abs(det) > 1e-12)
                ? std::exp((used * sml - sm * sl) / det)
                : 0.9;
    alpha = std::clamp(alpha, 1e-9, 1.0);
  }

  double rss;
  bool converged = true;
  if (fix_b0) {
    // A0 and alpha only; B0 stays at 1/2^n. The three-parameter problem is
    // ill-determined at realistic sampling budgets (B0 trades off against
    // alpha), and the depolarizing model fixes the asymptote exactly.
    double best_alpha = alpha, best_rss = pinned_rss(pts, alpha, b0, nullptr);
    const int grid = 800;
    for (int i = 0; i <= grid; ++i) {
      double one_minus = std::pow(10.0, -9.0 + 9.0 * i / grid);
      double cand = std::clamp(1.0 - one_minus, 1e-9, 1.0);
      double r = pinned_rss(pts, cand, b0, nullptr);
      if (r < best_rss) {
        best_rss = r;
        best_alpha = cand;
      }
    }
    double lo = std::max(1e-9, best_alpha - 0.02);
    double hi = std::min(1.0, best_alpha + 0.02);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = pinned_rss(pts, x1, b0, nullptr);
    double f2 = pinned_rss(pts, x2, b0, nullptr);
    for (int it = 0; it < 200 && (hi - lo) > 1e-13; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - gr * (hi - lo);
        f1 = pinned_rss(pts, x1, b0, nullptr);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + gr * (hi - lo);
        f2 = pinned_rss(pts, x2, b0, nullptr);
      }
    }
    double mid = 0.5 * (lo + hi);
    alpha = pinned_rss(pts, mid, b0, nullptr) <= best_rss ? mid : best_alpha;
    rss = pinned_rss(pts, alpha, b0, &a0);
  } else {
    // literal three-parameter refinement from the prescribed initialization
    solve_linear(pts, alpha, &a0, &b0);
    rss = model_rss(pts, a0, alpha, b0);
    converged = false;
    double lambda = 1e-3;
    for (int it = 0; it < 200; ++it) {
      double before = rss;
      if (!lm_step(pts, &a0, &alpha, &b0, &rss, &lambda)) {
        converged = true;
        break;
      }
      if (before - rss <= 1e-14 * (1.0 + before)) {
        converged = true;
        break;
      }
    }
  }

  out.alpha = alpha;
  out.a0 = a0;
  out.b0 = b0;
  out.quality.rms = std::sqrt(rss / pts.size());
  out.epc = epc_from_alpha(alpha, num_qubits);
  if (alpha <= 2e-9) {
    out.quality.ok = false;
    out.quality.alpha_at_bound = true;
    out.quality.message = "alpha at lower bound";
  } else if (!converged) {
    out.quality.ok = false;
    out.quality.message = "refinement did not converge";
  }
  return out;
}

namespace {

struct EdgeRunFits {
  DecayCurve ref;
  DecayCurve irb;
};

std::vector<std::pair<int, double>> mean_points(
    const std::vector<int>& lengths,
    const std::map<int, std::vector<double>>& survivals) {
  std::vector<std::pair<int, double>> pts;
  for (int m : lengths) {
    const auto& v = survivals.at(m);
    double mean = 0;
    for (double s : v) mean += s;
    pts.emplace_back(m, mean / v.size());
  }
  return pts;
}

}  // namespace

CrosstalkResult characterize_crosstalk(const DeviceModel& device,
                                       const NoiseSpec& sim_spec,
                                       const CharacterizeOptions& opts) {
  CrosstalkResult result;
  std::vector<Edge> edges =
      opts.edges.empty() ? device.coupling.edges : opts.edges;
  for (const auto& e : edges)
    if (!device.coupling.has_edge(e))
      throw std::invalid_argument("characterize: " + edge_str(e) +
                                  " is not a coupling edge");

  auto run_set = [&](const std::vector<RbCircuit>& circuits,
                     const DeviceModel& subdev, std::uint64_t tag,
                     const std::vector<int>& survival_qubits)
      -> std::map<int, std::vector<double>> {
    std::map<int, std::vector<double>> survivals;
    for (const auto& rc : circuits) {
      NoiseSpec spec;
      spec.mode = sim_spec.mode;
      spec.device = &subdev;
      spec.seed = derive_seed(sim_spec.seed, tag, rc.m,
                              static_cast<std::uint64_t>(rc.k_index));
      ShotResult r = run_noisy(rc.circuit, {}, spec, opts.shots);
      survivals[rc.m].push_back(r.prob_all_zero(survival_qubits));
    }
    return survivals;
  };

  // Independent rates: IRB per edge, nothing in parallel.
  for (const auto& e : edges) {
    DeviceModel subdev = device.restrict_to({e.first, e.second});
    RbSequenceSet ref = build_irb(e, opts.lengths, opts.k, false, sim_spec.seed);
    RbSequenceSet irb = build_irb(e, opts.lengths, opts.k, true, sim_spec.seed);
    auto sref = run_set(ref.circuits, subdev, edge_id(e) * 2, {});
    auto sirb = run_set(irb.circuits, subdev, edge_id(e) * 2 + 1, {});
    auto pref = mean_points(opts.lengths, sref);
    auto pirb = mean_points(opts.lengths, sirb);
    for (const auto& [m, y] : pref)
      result.rows.push_back({e, std::nullopt, false, m, y});
    for (const auto& [m, y] : pirb)
      result.rows.push_back({e, std::nullopt, true, m, y});
    try {
      DecayCurve fr = fit_decay(pref, 2);
      DecayCurve fi = fit_decay(pirb, 2);
      if (!fr.quality.ok || !fi.quality.ok)
        throw std::runtime_error(!fr.quality.ok ? fr.quality.message
                                                : fi.quality.message);
      result.independent_epc[e] = interleaved_epc(fr.alpha, fi.alpha, 2);
      result.reference_fits[e] = fr;
    } catch (const std::exception& ex) {
      result.failures.push_back({e, std::nullopt, ex.what()});
    }
  }

  // Conditional rates: simultaneous IRB on every one-hop pair.
  std::set<Edge> edge_set(edges.begin(), edges.end());
  std::set<std::pair<Edge, Edge>> seen;
  for (const auto& [e1, e2] : one_hop_pairs(device.coupling)) {
    if (!edge_set.count(e1) || !edge_set.count(e2)) continue;
    Edge a = std::min(e1, e2), b = std::max(e1, e2);
    if (!seen.insert({a, b}).second) continue;
    if (!result.independent_epc.count(a) || !result.independent_epc.count(b))
      continue;  // independent fit failed; already recorded
    std::vector<int> qubits{a.first, a.second, b.first, b.second};
    DeviceModel subdev = device.restrict_to(qubits);
    SrbPairSet ref =
        build_srb_pair(a, b, opts.lengths, opts.k, false, sim_spec.seed);
    SrbPairSet irb =
        build_srb_pair(a, b, opts.lengths, opts.k, true, sim_spec.seed);
    std::uint64_t tag = derive_seed(edge_id(a), edge_id(b));
    // one execution per circuit, marginalized on both edges
    std::map<int, std::vector<double>> sref1, sref2, sirb1, sirb2;
    auto run_pair = [&](const std::vector<RbCircuit>& circuits,
                        std::uint64_t t,
                        std::map<int, std::vector<double>>& s1,
                        std::map<int, std::vector<double>>& s2) {
      for (const auto& rc : circuits) {
        NoiseSpec spec;
        spec.mode = sim_spec.mode;
        spec.device = &subdev;
        spec.seed = derive_seed(sim_spec.seed, t, rc.m,
                                static_cast<std::uint64_t>(rc.k_index));
        ShotResult r = run_noisy(rc.circuit, {}, spec, opts.shots);
        s1[rc.m].push_back(r.prob_all_zero({0, 1}));
        s2[rc.m].push_back(r.prob_all_zero({2, 3}));
      }
    };
    run_pair(ref.circuits, tag * 4, sref1, sref2);
    run_pair(irb.circuits, tag * 4 + 1, sirb1, sirb2);
    auto record = [&](const Edge& eg, const Edge& other,
                      const std::map<int, std::vector<double>>& sr,
                      const std::map<int, std::vector<double>>& si) {
      auto pr = mean_points(opts.lengths, sr);
      auto pi = mean_points(opts.lengths, si);
      for (const auto& [m, y] : pr)
        result.rows.push_back({eg, other, false, m, y});
      for (const auto& [m, y] : pi)
        result.rows.push_back({eg, other, true, m, y});
      try {
        DecayCurve fr = fit_decay(pr, 2);
        DecayCurve fi = fit_decay(pi, 2);
        if (!fr.quality.ok || !fi.quality.ok)
          throw std::runtime_error(!fr.quality.ok ? fr.quality.message
                                                  : fi.quality.message);
        XtalkEntry ent;
        ent.g1 = eg;
        ent.g2 = other;
        ent.conditional_epc =
            std::max(1e-9, interleaved_epc(fr.alpha, fi.alpha, 2));
        ent.independent_epc = result.independent_epc.at(eg);
        result.table.insert(ent);
      } catch (const std::exception& ex) {
        result.failures.push_back({eg, other, ex.what()});
      }
    };
    record(a, b, sref1, sirb1);
    record(b, a, sref2, sirb2);
  }
  return result;
}

std::string decay_rows_csv(const std::vector<DecayRow>& rows) {
  std::ostringstream out;
  out << "edge,paired_edge,sequence,m,mean_survival\n";
  for (const auto& r : rows) {
    out << r.edge.first << "-" << r.edge.second << ",";
    if (r.paired_edge)
      out << r.paired_edge->first << "-" << r.paired_edge->second;
    else
      out << "none";
    out << "," << (r.interleaved ? "interleaved" : "reference") << "," << r.m
        << "," << format_double(r.mean_survival) << "\n";
  }
  return out.str();
}

std::string crosstalk_table_json(const CrosstalkTable& table) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [key, ent] : table.entries) {
    (void)key;
    j.push_back({{"g1", {ent.g1.first, ent.g1.second}},
                 {"g2", {ent.g2.first, ent.g2.second}},
                 {"conditional_epc", ent.conditional_epc}});
  }
  return j.dump(2);
}

}  // namespace xpqc
