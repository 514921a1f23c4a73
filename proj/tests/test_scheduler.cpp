#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include "oracle_scheduler.hpp"
#include "xpqc/common.hpp"
#include "xpqc/scheduler.hpp"

using namespace xpqc;

namespace {

DeviceModel line_device(int n, double epc = 1e-2) {
  DeviceModel d;
  d.coupling.num_qubits = n;
  for (int q = 0; q + 1 < n; ++q) d.coupling.edges.push_back(make_edge(q, q + 1));
  d.qubit_cal.assign(n, QubitCal{100, 100});
  for (int q = 0; q < n; ++q)
    for (const char* g : {"rx", "ry", "rz"})
      d.gate_cal.push_back(GateCal{g, {q}, 35, 0});
  for (const auto& e : d.coupling.edges)
    d.gate_cal.push_back(GateCal{"cx", {e.first, e.second}, 300, epc});
  return d;
}

void set_all_one_hop(DeviceModel& d, double mult) {
  d.xtalk.entries.clear();
  for (const auto& [e1, e2] : one_hop_pairs(d.coupling)) {
    double epc = d.cx_epc(e1);
    d.xtalk.insert({e1, e2, epc * mult, epc});
  }
}

// Conditional entries for every disjoint pair of the layer, both directions.
void set_all_disjoint_pairs(DeviceModel& d, const std::vector<Edge>& layer,
                            double mult) {
  d.xtalk.entries.clear();
  for (const auto& a : layer) {
    for (const auto& b : layer) {
      if (a == b) continue;
      if (a.first == b.first || a.first == b.second || a.second == b.first ||
          a.second == b.second)
        continue;
      double epc = d.cx_epc(a);
      d.xtalk.insert({a, b, epc * mult, epc});
    }
  }
}

std::vector<Edge> chain(int n) {
  std::vector<Edge> out;
  for (int q = 0; q + 1 < n; ++q) out.push_back(make_edge(q, q + 1));
  return out;
}

// Random layers on random connected subgraphs with random multiplier tables.
struct RandomInstance {
  DeviceModel device;
  std::vector<Edge> layer;
};

RandomInstance random_instance(std::mt19937_64& rng, int max_gates,
                               double mult_lo, double mult_hi) {
  std::uniform_int_distribution<int> nd(4, 8);
  int n = nd(rng);
  DeviceModel d;
  d.coupling.num_qubits = n;
  std::set<Edge> edges;
  for (int q = 0; q + 1 < n; ++q) edges.insert(make_edge(q, q + 1));  // spine
  std::uniform_int_distribution<int> qd(0, n - 1);
  int extra = static_cast<int>(rng() % 3);
  for (int i = 0; i < extra; ++i) {
    int a = qd(rng), b = qd(rng);
    if (a != b) edges.insert(make_edge(a, b));
  }
  d.coupling.edges.assign(edges.begin(), edges.end());
  d.qubit_cal.assign(n, QubitCal{100, 100});
  for (int q = 0; q < n; ++q)
    for (const char* g : {"rx", "ry", "rz"})
      d.gate_cal.push_back(GateCal{g, {q}, 35, 0});
  std::uniform_real_distribution<double> epc_d(5e-3, 3e-2);
  for (const auto& e : d.coupling.edges)
    d.gate_cal.push_back(GateCal{"cx", {e.first, e.second}, 300, epc_d(rng)});
  std::uniform_real_distribution<double> mult_d(mult_lo, mult_hi);
  for (const auto& [e1, e2] : one_hop_pairs(d.coupling)) {
    if (rng() % 2) continue;  // partial tables
    double epc = d.cx_epc(e1);
    d.xtalk.insert({e1, e2, epc * mult_d(rng), epc});
  }
  RandomInstance inst;
  std::vector<Edge> pool = d.coupling.edges;
  std::shuffle(pool.begin(), pool.end(), rng);
  std::uniform_int_distribution<int> gd(2, max_gates);
  int g = std::min<int>(gd(rng), static_cast<int>(pool.size()));
  inst.layer.assign(pool.begin(), pool.begin() + g);
  inst.device = std::move(d);
  return inst;
}

}  // namespace

TEST_CASE("decoherence error unit checks") {
  CHECK(decoherence_error(0, 100, 100) == 0.0);
  // t = T: lifetime 100us against T = 100us
  CHECK(decoherence_error(100000.0, 100, 100) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
  // first-order regime
  for (double ratio : {1e-3, 5e-3, 1e-2}) {
    double t_ns = ratio * 100000.0;
    double got = decoherence_error(t_ns, 100, 100);
    CHECK(std::abs(got - ratio) / ratio < 0.01);
  }
  // T = min(T1, T2)
  CHECK(decoherence_error(50000.0, 50, 100) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("gate_error picks the max conditional") {
  auto d = line_device(6);
  d.xtalk.insert({make_edge(0, 1), make_edge(2, 3), 0.012, 0.01});
  d.xtalk.insert({make_edge(0, 1), make_edge(4, 5), 0.03, 0.01});
  CHECK(gate_error(make_edge(0, 1), {}, d) == doctest::Approx(0.01));
  CHECK(gate_error(make_edge(0, 1), {make_edge(2, 3)}, d) ==
        doctest::Approx(0.012));
  CHECK(gate_error(make_edge(0, 1), {make_edge(2, 3), make_edge(4, 5)}, d) ==
        doctest::Approx(0.03));
  // missing conditional falls back to independent
  CHECK(gate_error(make_edge(2, 3), {make_edge(0, 1)}, d) ==
        doctest::Approx(0.01));
}

TEST_CASE("objective hand evaluation") {
  // one gate, eps 0.01, t/T = 0.0016, omega 0.5
  auto d = line_device(2);
  // duration 300ns -> t/T = 300ns / 100us = 3e-6; rescale T to hit 0.0016
  for (auto& q : d.qubit_cal) q = QubitCal{0.1875, 0.1875};  // 187.5us? no:
  // t/T = 300e-9 / (0.1875e-6) = 1.6 -- wrong; pick T so 300ns/T = 0.0016/2
  // two qubits each contribute t/T; want the SUM = 0.0016
  // 2 * 300e-9 / T = 0.0016 -> T = 375e-6 s = 375 us
  for (auto& q : d.qubit_cal) q = QubitCal{375, 375};
  double obj = schedule_objective(chain(2), {{0}}, d, 0.5, 1.0);
  CHECK(obj == doctest::Approx(0.5 * std::log(0.01) + 0.5 * 0.0016)
                   .epsilon(1e-9));
  CHECK(obj == doctest::Approx(-2.30179).epsilon(1e-4));
}

TEST_CASE("omega 0 on a 4-gate path chain gives R=2") {
  auto d = line_device(5);
  set_all_one_hop(d, 1.5);
  Schedule s = xtalk_schedule(chain(5), d, 0.0);
  CHECK(s.sublayers.size() == 2);
  auto oracle = xpqc_test::oracle_schedule(chain(5), d, 0.0);
  CHECK(s.objective_value == oracle.objective);
  CHECK(static_cast<int>(s.sublayers.size()) == oracle.min_feasible_r);
}

TEST_CASE("omega 1 with all pairwise multipliers above 1 serializes") {
  // every disjoint pair penalized: serialization is strictly optimal
  for (int n : {4, 5, 6}) {
    auto d = line_device(n);
    auto layer = chain(n);
    set_all_disjoint_pairs(d, layer, 1.3);
    Schedule s = xtalk_schedule(layer, d, 1.0);
    CHECK(s.sublayers.size() == layer.size());
    for (const auto& sub : s.sublayers) CHECK(sub.size() == 1);
  }
}

TEST_CASE("sub-unity conditional below threshold is ignored") {
  auto d = line_device(5);
  d.xtalk.insert({make_edge(0, 1), make_edge(2, 3), 0.009, 0.01});  // 0.9x
  Schedule s = xtalk_schedule(chain(5), d, 1.0);
  // nothing admitted: gate errors are schedule-independent, ties pick min R
  CHECK(s.sublayers.size() == 2);
  OverlapModel m = build_overlap_model(chain(5), d, 1.0);
  for (const auto& olap : m.olap) CHECK(olap.empty());
}

TEST_CASE("schedule invariants: disjoint sublayers, program order, starts") {
  auto d = line_device(7);
  set_all_one_hop(d, 2.0);
  auto layer = chain(7);
  for (double omega : {0.0, 0.3, 0.5, 0.8, 1.0}) {
    Schedule s = xtalk_schedule(layer, d, omega);
    std::set<int> seen;
    double prev_start = -1;
    for (const auto& sub : s.sublayers) {
      std::set<int> qubits;
      double start = -1;
      for (int gi : sub) {
        CHECK(!seen.count(gi));
        seen.insert(gi);
        CHECK(!qubits.count(s.gates[gi].first));
        CHECK(!qubits.count(s.gates[gi].second));
        qubits.insert(s.gates[gi].first);
        qubits.insert(s.gates[gi].second);
        if (start < 0) start = s.start_ns[gi];
        CHECK(s.start_ns[gi] == start);  // barrier-aligned
      }
      CHECK(start > prev_start);
      prev_start = start;
    }
    CHECK(seen.size() == layer.size());
  }
}

TEST_CASE("oracle equivalence on random instances") {
  std::mt19937_64 rng(8888);
  for (int trial = 0; trial < 40; ++trial) {
    auto inst = random_instance(rng, 6, 0.8, 3.2);
    std::uniform_real_distribution<double> wd(0.0, 1.0);
    double omega = wd(rng);
    Schedule s = xtalk_schedule(inst.layer, inst.device, omega);
    auto oracle = xpqc_test::oracle_schedule(inst.layer, inst.device, omega);
    CHECK(s.objective_value == oracle.objective);
    CHECK(s.sublayers.size() == oracle.sublayers.size());
    // identical canonical argmin under the shared tie-break rules
    std::vector<int> assign(inst.layer.size(), -1);
    for (std::size_t r = 0; r < s.sublayers.size(); ++r)
      for (int gi : s.sublayers[r]) assign[gi] = static_cast<int>(r);
    CHECK(assign == oracle.assignment);
  }
}

// R(0) <= R(w) <= R(1) holds when every disjoint pair carries a multiplier
// above 1, the fully crosstalk-sensitive setting. With partially covered
// tables the endpoint tie-break (fewest sub-layers at omega=1, where the
// decoherence weight is zero) can undercut a mid-omega serialization that
// is decoherence-optimal, so the property is scoped to full coverage.
TEST_CASE("monotonicity of R in omega under full pairwise coverage") {
  std::mt19937_64 rng(4321);
  std::uniform_real_distribution<double> mult_d(1.1, 3.0);
  for (int trial = 0; trial < 12; ++trial) {
    auto inst = random_instance(rng, 6, 1.0, 1.0);
    set_all_disjoint_pairs(inst.device, inst.layer, mult_d(rng));
    int r0 = static_cast<int>(
        xtalk_schedule(inst.layer, inst.device, 0.0).sublayers.size());
    int r1 = static_cast<int>(
        xtalk_schedule(inst.layer, inst.device, 1.0).sublayers.size());
    CHECK(r1 == static_cast<int>(inst.layer.size()));
    for (double omega : {0.25, 0.5, 0.75}) {
      int r = static_cast<int>(
          xtalk_schedule(inst.layer, inst.device, omega).sublayers.size());
      CHECK(r0 <= r);
      CHECK(r <= r1);
    }
  }
}

TEST_CASE("multipliers at 1 make every omega objective-equivalent to omega 0") {
  std::mt19937_64 rng(999);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = random_instance(rng, 6, 1.0, 1.0);  // all ratios exactly 1
    Schedule s0 = xtalk_schedule(inst.layer, inst.device, 0.0);
    // omega = 1 is excluded: the decoherence weight vanishes there, so the
    // tie-break (not the objective) picks among the all-tied partitions
    for (double omega : {0.3, 0.7}) {
      Schedule s = xtalk_schedule(inst.layer, inst.device, omega);
      // the gate term is schedule-independent, so the chosen partition must
      // be deco-optimal: re-scoring it at omega 0 hits the omega-0 optimum
      double obj_of_s_at_0 = schedule_objective(inst.layer, s.sublayers,
                                                inst.device, 0.0, 1.0);
      CHECK(obj_of_s_at_0 == doctest::Approx(s0.objective_value).epsilon(1e-12));
    }
  }
}

TEST_CASE("scaling all T values preserves the omega-0 argmin") {
  auto d = line_device(6);
  set_all_one_hop(d, 1.7);
  Schedule a = xtalk_schedule(chain(6), d, 0.0);
  for (auto& q : d.qubit_cal) {
    q.t1_us *= 7.5;
    q.t2_us *= 7.5;
  }
  Schedule b = xtalk_schedule(chain(6), d, 0.0);
  CHECK(a.sublayers == b.sublayers);
}

TEST_CASE("extract_sublayers round trip is idempotent") {
  auto d = line_device(6);
  set_all_one_hop(d, 2.5);
  Schedule s = xtalk_schedule(chain(6), d, 0.5);
  SubLayerSet subs = extract_sublayers(s);
  CHECK(subs.r == static_cast<int>(s.sublayers.size()));
  std::set<Edge> all;
  for (const auto& layer : subs.layers)
    for (const auto& e : layer) all.insert(e);
  CHECK(all.size() == chain(6).size());
  // rescheduling the same gates reproduces R and the objective
  Schedule s2 = xtalk_schedule(chain(6), d, 0.5);
  CHECK(s2.sublayers == s.sublayers);
  CHECK(s2.objective_value == s.objective_value);
}

TEST_CASE("serialized and parallel extraction shapes") {
  auto d = line_device(4);
  set_all_one_hop(d, 2.0);
  Schedule serial = xtalk_schedule(chain(4), d, 1.0);
  CHECK(extract_sublayers(serial).r == 3);
  Schedule par = xtalk_schedule(chain(4), d, 0.0);
  CHECK(extract_sublayers(par).r == 2);
}

TEST_CASE("ala groups: chain becomes even/odd bricks") {
  auto groups = ala_groups(chain(5));
  REQUIRE(groups.size() == 2);
  CHECK(groups[0] ==
        std::vector<Edge>{make_edge(0, 1), make_edge(2, 3)});
  CHECK(groups[1] == std::vector<Edge>{make_edge(1, 2), make_edge(3, 4)});
}

TEST_CASE("ala: already-disjoint set stays one group") {
  std::vector<Edge> gates{make_edge(0, 1), make_edge(2, 3)};
  auto groups = ala_groups(gates);
  CHECK(groups.size() == 1);
}

TEST_CASE("approximate_to_ala rewrites only the first entangling layer") {
  auto d = line_device(5);
  Circuit c;
  c.num_qubits = 5;
  c.num_params = 1;
  c.ops.push_back(GateInstance::rotation_slot(GateKind::Ry, 0, 0));
  for (const auto& e : chain(5))
    c.ops.push_back(GateInstance::cx(e.first, e.second));
  c.ops.push_back(GateInstance::rotation(GateKind::Rz, 4, 0.5));
  Circuit out = approximate_to_ala(c, d);
  // rotation, 2 gates, barrier, 2 gates, rotation
  REQUIRE(out.ops.size() == c.ops.size() + 1);
  CHECK(out.ops[0].kind == GateKind::Ry);
  CHECK(out.ops[1].kind == GateKind::Cx);
  CHECK(out.ops[2].kind == GateKind::Cx);
  CHECK(out.ops[3].kind == GateKind::Barrier);
  CHECK(out.ops[4].kind == GateKind::Cx);
  CHECK(out.ops[5].kind == GateKind::Cx);
  CHECK(out.ops[6].kind == GateKind::Rz);
  // gate multiset preserved
  std::multiset<Edge> before, after;
  for (const auto& g : c.ops)
    if (g.kind == GateKind::Cx) before.insert(make_edge(g.qubits[0], g.qubits[1]));
  for (const auto& g : out.ops)
    if (g.kind == GateKind::Cx) after.insert(make_edge(g.qubits[0], g.qubits[1]));
  CHECK(before == after);
}

TEST_CASE("approximate_to_ala rejects non-edges") {
  auto d = line_device(4);
  Circuit c;
  c.num_qubits = 4;
  c.ops.push_back(GateInstance::cx(0, 3));
  CHECK_THROWS_AS(approximate_to_ala(c, d), std::invalid_argument);
}

TEST_CASE("scale bound raises unless the greedy fallback is enabled") {
  auto d = line_device(16);
  auto layer = chain(14);
  CHECK_THROWS_AS(xtalk_schedule(layer, d, 0.5), std::runtime_error);
  SchedulerOptions opts;
  opts.greedy_fallback = true;
  Schedule s = xtalk_schedule(layer, d, 0.5, opts);
  CHECK(!s.sublayers.empty());
}

TEST_CASE("paper literal sign flips the serialization preference") {
  auto d = line_device(4);
  // no crosstalk: omega 0 with the literal minus REWARDS long lifetimes
  SchedulerOptions opts;
  opts.paper_literal_sign = true;
  Schedule lit = xtalk_schedule(chain(4), d, 0.0, opts);
  Schedule normal = xtalk_schedule(chain(4), d, 0.0);
  CHECK(normal.sublayers.size() == 2);
  CHECK(lit.sublayers.size() >= normal.sublayers.size());
}
