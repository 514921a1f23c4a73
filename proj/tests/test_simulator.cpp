#include <doctest.h>

#include <cmath>
#include <random>

#include "xpqc/common.hpp"
#include "xpqc/device.hpp"
#include "xpqc/simulator.hpp"

using namespace xpqc;

namespace {

DeviceModel two_edge_device(double epc01, double epc23, double mult_01_23,
                            double mult_23_01) {
  DeviceModel d;
  d.coupling.num_qubits = 4;
  d.coupling.edges = {make_edge(0, 1), make_edge(1, 2), make_edge(2, 3)};
  d.qubit_cal.assign(4, QubitCal{100, 100});
  for (int q = 0; q < 4; ++q)
    for (const char* g : {"rx", "ry", "rz"})
      d.gate_cal.push_back(GateCal{g, {q}, 35, 0});
  d.gate_cal.push_back(GateCal{"cx", {0, 1}, 300, epc01});
  d.gate_cal.push_back(GateCal{"cx", {1, 2}, 300, 1e-2});
  d.gate_cal.push_back(GateCal{"cx", {2, 3}, 300, epc23});
  if (mult_01_23 != 1.0) {
    XtalkEntry e{make_edge(0, 1), make_edge(2, 3), epc01 * mult_01_23, epc01};
    d.xtalk.insert(e);
  }
  if (mult_23_01 != 1.0) {
    XtalkEntry e{make_edge(2, 3), make_edge(0, 1), epc23 * mult_23_01, epc23};
    d.xtalk.insert(e);
  }
  return d;
}

}  // namespace

TEST_CASE("empty circuit stays in the ground state") {
  Circuit c;
  c.num_qubits = 3;
  StateVector s = run_ideal(c);
  CHECK(std::abs(s.amps[0] - std::complex<double>{1, 0}) < 1e-12);
}

TEST_CASE("rx(pi) maps |0> to -i|1>") {
  Circuit c;
  c.num_qubits = 1;
  c.ops = {GateInstance::rotation(GateKind::Rx, 0, M_PI)};
  StateVector s = run_ideal(c);
  CHECK(std::abs(s.amps[0]) < 1e-12);
  CHECK(std::abs(s.amps[1] - std::complex<double>{0, -1}) < 1e-12);
}

TEST_CASE("ry(pi/2); cx prepares a Bell state") {
  Circuit c;
  c.num_qubits = 2;
  c.ops = {GateInstance::rotation(GateKind::Ry, 0, M_PI / 2),
           GateInstance::cx(0, 1)};
  StateVector s = run_ideal(c);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(s.amps[0] - std::complex<double>{r, 0}) < 1e-12);
  CHECK(std::abs(s.amps[3] - std::complex<double>{r, 0}) < 1e-12);
  CHECK(std::abs(s.amps[1]) < 1e-12);
  CHECK(std::abs(s.amps[2]) < 1e-12);
}

TEST_CASE("norm drift stays below 1e-10 per thousand gates") {
  std::mt19937_64 rng(3);
  Circuit c;
  c.num_qubits = 4;
  std::uniform_int_distribution<int> qd(0, 3), kd(0, 3);
  std::uniform_real_distribution<double> ang(0, 2 * M_PI);
  for (int i = 0; i < 1000; ++i) {
    int k = kd(rng);
    if (k == 3) {
      int a = qd(rng), b = qd(rng);
      if (a == b) b = (b + 1) % 4;
      c.ops.push_back(GateInstance::cx(a, b));
    } else {
      c.ops.push_back(GateInstance::rotation(
          k == 0 ? GateKind::Rx : (k == 1 ? GateKind::Ry : GateKind::Rz),
          qd(rng), ang(rng)));
    }
  }
  StateVector s = run_ideal(c);
  CHECK(std::abs(s.norm() - 1.0) < 1e-10);
}

TEST_CASE("statevector size limit is a resource error") {
  Circuit c;
  c.num_qubits = 17;
  CHECK_THROWS_AS(run_ideal(c), std::runtime_error);
}

TEST_CASE("effective_layer_epc: empty product and the worked example") {
  auto d = default_guadalupe();
  {
    auto eff = effective_layer_epc({make_edge(0, 1)}, d);
    CHECK(eff[0] == doctest::Approx(0.01));
  }
  {
    // cx(0,1) || cx(2,3) || cx(4,7): multipliers 1.217 and 1.006
    auto eff = effective_layer_epc(
        {make_edge(0, 1), make_edge(2, 3), make_edge(4, 7)}, d);
    CHECK(eff[0] == doctest::Approx(0.01224302).epsilon(1e-9));
  }
  {
    DeviceModel d2 = two_edge_device(0.01, 0.01, 3.14, 3.14);
    auto eff = effective_layer_epc({make_edge(0, 1), make_edge(2, 3)}, d2);
    CHECK(eff[0] == doctest::Approx(0.0314));
    CHECK(eff[1] == doctest::Approx(0.0314));
  }
}

TEST_CASE("effective_layer_epc is permutation invariant") {
  auto d = default_guadalupe();
  std::vector<Edge> layer{make_edge(0, 1), make_edge(2, 3), make_edge(4, 7)};
  auto base = effective_layer_epc(layer, d);
  std::vector<Edge> perm{layer[2], layer[0], layer[1]};
  auto eff = effective_layer_epc(perm, d);
  CHECK(eff[1] == doctest::Approx(base[0]));
  CHECK(eff[2] == doctest::Approx(base[1]));
  CHECK(eff[0] == doctest::Approx(base[2]));
}

TEST_CASE("ideal-mode sampling only sees Bell outcomes") {
  Circuit c;
  c.num_qubits = 2;
  c.ops = {GateInstance::rotation(GateKind::Ry, 0, M_PI / 2),
           GateInstance::cx(0, 1)};
  NoiseSpec spec;
  spec.seed = 11;
  ShotResult r = run_noisy(c, {}, spec, 10000);
  CHECK(r.shots == 10000);
  std::uint64_t total = 0;
  for (const auto& [bits, cnt] : r.counts) {
    CHECK((bits == "00" || bits == "11"));
    total += cnt;
  }
  CHECK(total == 10000);
  CHECK(r.prob_all_zero() == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("zero EPC reproduces the ideal sampling stream exactly") {
  Circuit c;
  c.num_qubits = 2;
  c.ops = {GateInstance::rotation(GateKind::Ry, 0, 1.1),
           GateInstance::cx(0, 1),
           GateInstance::rotation(GateKind::Rz, 1, 0.3)};
  DeviceModel d = two_edge_device(0.0, 0.0, 1.0, 1.0);
  NoiseSpec ideal{SimMode::Ideal, nullptr, 99};
  NoiseSpec noisy{SimMode::Standard, &d, 99};
  ShotResult a = run_noisy(c, {}, ideal, 5000);
  ShotResult b = run_noisy(c, {}, noisy, 5000);
  CHECK(a.counts == b.counts);
}

TEST_CASE("error probability grows monotonically with EPC") {
  // single cx on |00>: expected outcome stays 00 unless a pauli fires
  std::vector<double> epcs{0.0, 0.05, 0.2};
  std::vector<double> wrong;
  for (double e : epcs) {
    DeviceModel d = two_edge_device(e, e, 1.0, 1.0);
    Circuit c;
    c.num_qubits = 2;
    c.ops = {GateInstance::cx(0, 1)};
    NoiseSpec spec{SimMode::Standard, &d, 5};
    ShotResult r = run_noisy(c, {}, spec, 100000);
    wrong.push_back(1.0 - r.prob_all_zero());
  }
  CHECK(wrong[0] == 0.0);
  CHECK(wrong[0] < wrong[1]);
  CHECK(wrong[1] < wrong[2]);
}

TEST_CASE("xtalk mode with all-ones table equals standard mode") {
  DeviceModel d = two_edge_device(0.03, 0.03, 1.0, 1.0);
  XtalkEntry e{make_edge(0, 1), make_edge(2, 3), 0.03, 0.03};  // ratio 1.0
  d.xtalk.insert(e);
  Circuit c;
  c.num_qubits = 4;
  c.ops = {GateInstance::rotation(GateKind::Ry, 0, 0.7),
           GateInstance::cx(0, 1), GateInstance::cx(2, 3),
           GateInstance::cx(0, 1)};
  NoiseSpec std_spec{SimMode::Standard, &d, 123};
  NoiseSpec xt_spec{SimMode::XtalkEnabled, &d, 123};
  ShotResult a = run_noisy(c, {}, std_spec, 100000);
  ShotResult b = run_noisy(c, {}, xt_spec, 100000);
  // identical probabilities and identical derived streams: exact equality
  CHECK(a.counts == b.counts);

  // and statistically with different seeds (3-sigma per outcome)
  xt_spec.seed = 321;
  ShotResult c2 = run_noisy(c, {}, xt_spec, 100000);
  for (const auto& [bits, cnt] : a.counts) {
    double p = static_cast<double>(cnt) / a.shots;
    double other = c2.counts.count(bits)
                       ? static_cast<double>(c2.counts.at(bits)) / c2.shots
                       : 0.0;
    double sigma = std::sqrt(std::max(p * (1 - p), 1e-9) / a.shots) * 2;
    CHECK(std::abs(p - other) < 3.5 * sigma + 1e-3);
  }
}

TEST_CASE("xtalk layer context respects barriers") {
  DeviceModel d = two_edge_device(0.0, 0.0, 1.0, 1.0);
  // epc 0 on both edges; multiplier alone cannot create noise
  Circuit c;
  c.num_qubits = 4;
  c.ops = {GateInstance::cx(0, 1), GateInstance::barrier({0, 1, 2, 3}),
           GateInstance::cx(2, 3)};
  NoiseSpec spec{SimMode::XtalkEnabled, &d, 1};
  ShotResult r = run_noisy(c, {}, spec, 100);
  CHECK(r.prob_all_zero() == 1.0);
}

TEST_CASE("run_noisy is reproducible and thread-count independent") {
  DeviceModel d = two_edge_device(0.05, 0.05, 1.5, 1.5);
  Circuit c;
  c.num_qubits = 4;
  c.ops = {GateInstance::rotation(GateKind::Ry, 0, 0.4),
           GateInstance::cx(0, 1), GateInstance::cx(2, 3)};
  NoiseSpec spec{SimMode::XtalkEnabled, &d, 777};
  set_max_threads(1);
  ShotResult a = run_noisy(c, {}, spec, 20000);
  set_max_threads(4);
  ShotResult b = run_noisy(c, {}, spec, 20000);
  set_max_threads(0);
  CHECK(a.counts == b.counts);
}
