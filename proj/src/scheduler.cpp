#include "xpqc/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "xpqc/common.hpp"

namespace xpqc {

namespace {

constexpr double kMinGateError = 1e-12;

bool edges_share_qubit(const Edge& a, const Edge& b) {
  return a.first == b.first || a.first == b.second || a.second == b.first ||
         a.second == b.second;
}

double qubit_t_ns(const DeviceModel& d, int q) {
  const auto& cal = d.qubit_cal.at(q);
  return std::min(cal.t1_us, cal.t2_us) * 1000.0;
}

double clamped_log_error(double eps) {
  if (eps < kMinGateError) {
    std::cerr << "warning: gate error " << eps << " clamped to "
              << kMinGateError << " before log\n";
    eps = kMinGateError;
  }
  return std::log(eps);
}

}  // namespace

bool OverlapModel::admitted(int i, int j) const {
  const auto& v = olap[i];
  return std::find(v.begin(), v.end(), j) != v.end();
}

OverlapModel build_overlap_model(const std::vector<Edge>& layer,
                                 const DeviceModel& device, double threshold) {
  OverlapModel m;
  m.threshold = threshold;
  m.olap.assign(layer.size(), {});
  for (std::size_t i = 0; i < layer.size(); ++i) {
    for (std::size_t j = i + 1; j < layer.size(); ++j) {
      if (edges_share_qubit(layer[i], layer[j])) continue;
      double rij = multiplier(device.xtalk, layer[i], layer[j]);
      double rji = multiplier(device.xtalk, layer[j], layer[i]);
      if (rij > threshold || rji > threshold) {
        m.olap[i].push_back(static_cast<int>(j));
        m.olap[j].push_back(static_cast<int>(i));
      }
    }
  }
  return m;
}

double gate_error(const Edge& g, const std::vector<Edge>& concurrent_set,
                  const DeviceModel& device) {
  double indep = device.cx_epc(g);
  if (concurrent_set.empty()) return indep;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& other : concurrent_set) {
    const XtalkEntry* e = device.xtalk.find(g, other);
    worst = std::max(worst, e ? e->conditional_epc : indep);
  }
  return worst;
}

double decoherence_error(double lifetime_ns, double t1_us, double t2_us) {
  if (lifetime_ns < 0)
    throw std::invalid_argument("decoherence_error: negative lifetime");
  double t_s = lifetime_ns * 1e-9;
  double cap_s = std::min(t1_us, t2_us) * 1e-6;
  return 1.0 - std::exp(-t_s / cap_s);
}

double schedule_objective(const std::vector<Edge>& gates,
                          const std::vector<std::vector<int>>& sublayers,
                          const DeviceModel& device, double omega,
                          double threshold, bool paper_literal_sign) {
  OverlapModel model = build_overlap_model(gates, device, threshold);

  // sub-layer start times: barrier-aligned, width = slowest member
  std::vector<double> start(sublayers.size(), 0.0);
  double t = 0;
  for (std::size_t r = 0; r < sublayers.size(); ++r) {
    start[r] = t;
    double width = 0;
    for (int gi : sublayers[r])
      width = std::max(width, device.cx_cal(gates[gi]).duration_ns);
    t += width;
  }

  double gate_term = 0;
  std::vector<int> sub_of(gates.size(), -1);
  for (std::size_t r = 0; r < sublayers.size(); ++r)
    for (int gi : sublayers[r]) sub_of[gi] = static_cast<int>(r);
  for (std::size_t i = 0; i < gates.size(); ++i) {
    std::vector<Edge> concurrent;
    for (int j : model.olap[i])
      if (sub_of[j] == sub_of[i]) concurrent.push_back(gates[j]);
    gate_term += clamped_log_error(gate_error(gates[i], concurrent, device));
  }

  // qubit lifetimes within the scheduled layer
  std::map<int, std::pair<double, double>> span;  // qubit -> (first, last)
  for (std::size_t i = 0; i < gates.size(); ++i) {
    double s = start[sub_of[i]];
    double f = s + device.cx_cal(gates[i]).duration_ns;
    for (int q : {gates[i].first, gates[i].second}) {
      auto it = span.find(q);
      if (it == span.end()) span[q] = {s, f};
      else {
        it->second.first = std::min(it->second.first, s);
        it->second.second = std::max(it->second.second, f);
      }
    }
  }
  double deco_term = 0;
  for (const auto& [q, fs] : span)
    deco_term += (fs.second - fs.first) / qubit_t_ns(device, q);

  double sign = paper_literal_sign ? -1.0 : 1.0;
  return omega * gate_term + sign * (1.0 - omega) * deco_term;
}

double objective(const Schedule& s, const DeviceModel& device, double omega) {
  return schedule_objective(s.gates, s.sublayers, device, omega, s.threshold,
                            s.paper_literal_sign);
}

namespace {

struct SearchContext {
  const std::vector<Edge>* gates;
  const DeviceModel* device;
  double omega;
  double threshold;
  bool literal_sign;
  OverlapModel model;
  std::vector<std::uint32_t> conflict_mask;  // per gate: shares-a-qubit mask
  std::vector<std::uint32_t> same_edge_before;  // earlier duplicates
  std::vector<double> min_log_eps;  // admissible per-gate error bound
  std::vector<double> duration;

  // incumbent
  double best_obj = std::numeric_limits<double>::infinity();
  std::vector<std::vector<int>> best_subs;
  std::vector<int> best_assign;
  bool have_best = false;
};

std::vector<int> assignment_of(const std::vector<std::vector<int>>& subs,
                               std::size_t n) {
  std::vector<int> a(n, -1);
  for (std::size_t r = 0; r < subs.size(); ++r)
    for (int gi : subs[r]) a[gi] = static_cast<int>(r);
  return a;
}

bool better_candidate(double obj, const std::vector<std::vector<int>>& subs,
                      const std::vector<int>& assign, const SearchContext& ctx) {
  if (!ctx.have_best) return true;
  if (obj != ctx.best_obj) return obj < ctx.best_obj;
  if (subs.size() != ctx.best_subs.size())
    return subs.size() < ctx.best_subs.size();
  return assign < ctx.best_assign;
}

void consider_candidate(SearchContext& ctx,
                        const std::vector<std::vector<int>>& subs) {
  double obj = schedule_objective(*ctx.gates, subs, *ctx.device, ctx.omega,
                                  ctx.threshold, ctx.literal_sign);
  auto assign = assignment_of(subs, ctx.gates->size());
  if (better_candidate(obj, subs, assign, ctx)) {
    ctx.best_obj = obj;
    ctx.best_subs = subs;
    ctx.best_assign = assign;
    ctx.have_best = true;
  }
}

// Admissible lower bound on the objective of any completion: finished
// sub-layers keep their exact gate-error terms; every unplaced gate takes
// its smallest possible error; qubit spans assume gap-free stacking of the
// remaining gates after the current end time.
double completion_bound(const SearchContext& ctx, std::uint32_t placed,
                        const std::vector<std::vector<int>>& subs,
                        double t_end, double placed_gate_term) {
  const auto& gates = *ctx.gates;
  double gate_term = placed_gate_term;
  double deco = 0;
  const std::uint32_t all = (1u << gates.size()) - 1;
  std::uint32_t remaining = all & ~placed;

  for (std::size_t i = 0; i < gates.size(); ++i)
    if (remaining & (1u << i)) gate_term += ctx.min_log_eps[i];

  if (ctx.literal_sign) {
    // minus on the decoherence term: lower-bound it by the loose upper
    // bound of every involved qubit idling for the full serial duration
    double serial = 0;
    for (double d : ctx.duration) serial += d;
    std::set<int> qs;
    for (const auto& g : gates) {
      qs.insert(g.first);
      qs.insert(g.second);
    }
    double deco_max = 0;
    for (int q : qs) deco_max += serial / qubit_t_ns(*ctx.device, q);
    return ctx.omega * gate_term - (1.0 - ctx.omega) * deco_max;
  }

  std::map<int, std::pair<double, double>> span;  // placed spans
  {
    double t = 0;
    for (const auto& sub : subs) {
      double width = 0;
      for (int gi : sub) width = std::max(width, ctx.duration[gi]);
      for (int gi : sub) {
        double s = t, f = t + ctx.duration[gi];
        for (int q : {gates[gi].first, gates[gi].second}) {
          auto it = span.find(q);
          if (it == span.end()) span[q] = {s, f};
          else {
            it->second.first = std::min(it->second.first, s);
            it->second.second = std::max(it->second.second, f);
          }
        }
      }
      t += width;
    }
  }
  std::map<int, double> future;  // qubit -> sum of unplaced durations
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (!(remaining & (1u << i))) continue;
    future[gates[i].first] += ctx.duration[i];
    future[gates[i].second] += ctx.duration[i];
  }
  std::set<int> qubits;
  for (const auto& [q, fs] : span) {
    (void)fs;
    qubits.insert(q);
  }
  for (const auto& [q, d] : future) {
    (void)d;
    qubits.insert(q);
  }
  for (int q : qubits) {
    double lo = 0;
    auto sp = span.find(q);
    auto fu = future.find(q);
    if (sp != span.end() && fu != future.end()) {
      lo = (t_end + fu->second) - sp->second.first;
    } else if (sp != span.end()) {
      lo = sp->second.second - sp->second.first;
    } else {
      lo = fu->second;
    }
    deco += lo / qubit_t_ns(*ctx.device, q);
  }
  return ctx.omega * gate_term + (1.0 - ctx.omega) * deco;
}

// Exact gate-error sum of one finished sub-layer.
double sublayer_gate_term(const SearchContext& ctx,
                          const std::vector<int>& sub) {
  const auto& gates = *ctx.gates;
  double term = 0;
  for (int gi : sub) {
    std::vector<Edge> concurrent;
    for (int gj : sub)
      if (gj != gi && ctx.model.admitted(gi, gj))
        concurrent.push_back(gates[gj]);
    term += clamped_log_error(gate_error(gates[gi], concurrent, *ctx.device));
  }
  return term;
}

void search(SearchContext& ctx, std::uint32_t placed,
            std::vector<std::vector<int>>& subs, double t_end,
            double placed_gate_term) {
  const auto& gates = *ctx.gates;
  const std::uint32_t all = (1u << gates.size()) - 1;
  if (placed == all) {
    consider_candidate(ctx, subs);
    return;
  }
  if (ctx.have_best) {
    double lb = completion_bound(ctx, placed, subs, t_end, placed_gate_term);
    double slack = 1e-9 * (1.0 + std::abs(ctx.best_obj));
    if (lb > ctx.best_obj + slack) return;
  }

  // gates whose same-edge predecessors are already placed
  std::uint32_t ready = 0;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    if (placed & (1u << i)) continue;
    if ((ctx.same_edge_before[i] & ~placed) == 0) ready |= (1u << i);
  }

  // all internally disjoint nonempty subsets of the ready set, larger first
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t s = ready;; s = (s - 1) & ready) {
    if (s == 0) break;
    bool ok = true;
    for (std::size_t i = 0; i < gates.size() && ok; ++i)
      if ((s & (1u << i)) && (ctx.conflict_mask[i] & s)) ok = false;
    if (ok) candidates.push_back(s);
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](std::uint32_t a, std::uint32_t b) {
                     return __builtin_popcount(a) > __builtin_popcount(b);
                   });

  for (std::uint32_t s : candidates) {
    std::vector<int> sub;
    double width = 0;
    for (std::size_t i = 0; i < gates.size(); ++i)
      if (s & (1u << i)) {
        sub.push_back(static_cast<int>(i));
        width = std::max(width, ctx.duration[i]);
      }
    subs.push_back(sub);
    search(ctx, placed | s, subs, t_end + width,
           placed_gate_term + sublayer_gate_term(ctx, sub));
    subs.pop_back();
  }
}

std::vector<std::vector<int>> greedy_partition(const SearchContext& ctx) {
  const auto& gates = *ctx.gates;
  std::vector<std::vector<int>> subs;
  for (std::size_t i = 0; i < gates.size(); ++i) {
    bool placed = false;
    for (auto& sub : subs) {
      bool fits = true;
      for (int gj : sub) {
        if (edges_share_qubit(gates[i], gates[gj])) fits = false;
        else if (ctx.omega > 0 && ctx.model.admitted(static_cast<int>(i), gj))
          fits = false;
      }
      if (fits) {
        sub.push_back(static_cast<int>(i));
        placed = true;
        break;
      }
    }
    if (!placed) subs.push_back({static_cast<int>(i)});
  }
  return subs;
}

}  // namespace

Schedule xtalk_schedule(const std::vector<Edge>& layer,
                        const DeviceModel& device, double omega,
                        const SchedulerOptions& opts) {
  if (omega < 0 || omega > 1)
    throw std::invalid_argument("xtalk_schedule: omega must be in [0,1]");
  for (const auto& g : layer)
    if (!device.coupling.has_edge(g))
      throw std::invalid_argument("xtalk_schedule: cx on non-edge " +
                                  edge_str(g));

  Schedule out;
  out.gates = layer;
  out.omega = omega;
  out.threshold = opts.threshold;
  out.paper_literal_sign = opts.paper_literal_sign;
  if (layer.empty()) return out;

  SearchContext ctx;
  ctx.gates = &layer;
  ctx.device = &device;
  ctx.omega = omega;
  ctx.threshold = opts.threshold;
  ctx.literal_sign = opts.paper_literal_sign;
  ctx.model = build_overlap_model(layer, device, opts.threshold);
  ctx.conflict_mask.assign(layer.size(), 0);
  ctx.same_edge_before.assign(layer.size(), 0);
  ctx.duration.resize(layer.size());
  ctx.min_log_eps.resize(layer.size());
  for (std::size_t i = 0; i < layer.size(); ++i) {
    ctx.duration[i] = device.cx_cal(layer[i]).duration_ns;
    double eps_min = device.cx_epc(layer[i]);
    for (int j : ctx.model.olap[i]) {
      const XtalkEntry* e = device.xtalk.find(layer[i], layer[j]);
      if (e) eps_min = std::min(eps_min, e->conditional_epc);
    }
    ctx.min_log_eps[i] = clamped_log_error(eps_min);
    for (std::size_t j = 0; j < layer.size(); ++j) {
      if (i == j) continue;
      if (edges_share_qubit(layer[i], layer[j]))
        ctx.conflict_mask[i] |= (1u << j);
      if (j < i && layer[j] == layer[i])
        ctx.same_edge_before[i] |= (1u << j);
    }
  }

  if (static_cast<int>(layer.size()) > opts.max_exact_gates) {
    if (!opts.greedy_fallback)
      throw std::runtime_error(
          "xtalk_schedule: layer of " + std::to_string(layer.size()) +
          " gates exceeds the exact-search bound of " +
          std::to_string(opts.max_exact_gates) +
          "; enable the greedy fallback to schedule heuristically");
    out.sublayers = greedy_partition(ctx);
  } else {
    // seed the incumbent with the greedy solution, then search exactly
    consider_candidate(ctx, greedy_partition(ctx));
    std::vector<std::vector<int>> subs;
    search(ctx, 0, subs, 0.0, 0.0);
    out.sublayers = ctx.best_subs;
  }

  out.objective_value =
      schedule_objective(layer, out.sublayers, device, omega, opts.threshold,
                         opts.paper_literal_sign);
  out.start_ns.assign(layer.size(), 0.0);
  double t = 0;
  for (const auto& sub : out.sublayers) {
    double width = 0;
    for (int gi : sub) {
      out.start_ns[gi] = t;
      width = std::max(width, ctx.duration[gi]);
    }
    t += width;
  }
  return out;
}

SubLayerSet extract_sublayers(const Schedule& s) {
  SubLayerSet out;
  out.r = static_cast<int>(s.sublayers.size());
  for (const auto& sub : s.sublayers) {
    std::vector<Edge> layer;
    for (int gi : sub) layer.push_back(s.gates[gi]);
    out.layers.push_back(std::move(layer));
  }
  return out;
}

std::vector<std::vector<Edge>> ala_groups(const std::vector<Edge>& gates) {
  std::vector<std::vector<Edge>> groups;
  for (const auto& g : gates) {
    bool placed = false;
    for (auto& grp : groups) {
      bool fits = true;
      for (const auto& other : grp)
        if (edges_share_qubit(g, other)) {
          fits = false;
          break;
        }
      if (fits) {
        grp.push_back(g);
        placed = true;
        break;
      }
    }
    if (!placed) groups.push_back({g});
  }
  return groups;
}

Circuit approximate_to_ala(const Circuit& c, const DeviceModel& device) {
  // first contiguous run of cx ops
  std::size_t begin = c.ops.size(), end = c.ops.size();
  for (std::size_t i = 0; i < c.ops.size(); ++i) {
    if (c.ops[i].kind == GateKind::Cx) {
      begin = i;
      end = i;
      while (end < c.ops.size() && c.ops[end].kind == GateKind::Cx) ++end;
      break;
    }
  }
  if (begin == c.ops.size()) return c;  // no entangling layer

  std::vector<Edge> gates;
  for (std::size_t i = begin; i < end; ++i) {
    Edge e = make_edge(c.ops[i].qubits[0], c.ops[i].qubits[1]);
    if (!device.coupling.has_edge(e))
      throw std::invalid_argument("approximate_to_ala: cx on non-edge " +
                                  edge_str(e));
    gates.push_back(e);
  }

  std::vector<int> all_qubits(c.num_qubits);
  for (int q = 0; q < c.num_qubits; ++q) all_qubits[q] = q;

  Circuit out;
  out.num_qubits = c.num_qubits;
  out.num_params = c.num_params;
  out.ops.assign(c.ops.begin(), c.ops.begin() + begin);
  auto groups = ala_groups(gates);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    if (gi > 0) out.ops.push_back(GateInstance::barrier(all_qubits));
    for (const auto& e : groups[gi])
      out.ops.push_back(GateInstance::cx(e.first, e.second));
  }
  out.ops.insert(out.ops.end(), c.ops.begin() + end, c.ops.end());
  return out;
}

std::string schedule_to_json_string(const Schedule& s) {
  nlohmann::json j;
  j["omega"] = s.omega;
  j["threshold"] = s.threshold;
  j["paper_literal_sign"] = s.paper_literal_sign;
  j["objective"] = s.objective_value;
  j["num_sublayers"] = s.sublayers.size();
  j["sublayers"] = nlohmann::json::array();
  for (const auto& sub : s.sublayers) {
    nlohmann::json js;
    js["gates"] = nlohmann::json::array();
    double start = 0;
    for (int gi : sub) {
      js["gates"].push_back({s.gates[gi].first, s.gates[gi].second});
      start = s.start_ns[gi];
    }
    js["start_ns"] = start;
    j["sublayers"].push_back(std::move(js));
  }
  return j.dump(2);
}

}  // namespace xpqc
