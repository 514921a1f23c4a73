#include <doctest.h>

#include <complex>
#include <map>
#include <random>
#include <vector>

#include "xpqc/clifford.hpp"
#include "xpqc/common.hpp"
#include "xpqc/simulator.hpp"

using namespace xpqc;

namespace {

using Matrix = std::vector<std::vector<std::complex<double>>>;

// Unitary of a gate list by driving basis states through the simulator.
Matrix unitary_of(const std::vector<GateInstance>& gates, int n) {
  const std::uint64_t dim = 1ULL << n;
  Matrix u(dim, std::vector<std::complex<double>>(dim));
  for (std::uint64_t col = 0; col < dim; ++col) {
    StateVector s;
    s.num_qubits = n;
    s.amps.assign(dim, {0, 0});
    s.amps[col] = 1;
    for (const auto& g : gates) s.apply_gate(g);
    for (std::uint64_t row = 0; row < dim; ++row) u[row][col] = s.amps[row];
  }
  return u;
}

bool equal_up_to_phase(const Matrix& a, const Matrix& b) {
  std::complex<double> phase{0, 0};
  const std::size_t dim = a.size();
  for (std::size_t i = 0; i < dim && phase == std::complex<double>{0, 0}; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      if (std::abs(a[i][j]) > 1e-9) {
        phase = b[i][j] / a[i][j];
        break;
      }
  if (std::abs(std::abs(phase) - 1.0) > 1e-9) return false;
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      if (std::abs(a[i][j] * phase - b[i][j]) > 1e-9) return false;
  return true;
}

Matrix pauli_matrix(int n, std::uint8_t x, std::uint8_t z, int sign) {
  const std::uint64_t dim = 1ULL << n;
  Matrix p(dim, std::vector<std::complex<double>>(dim, {0, 0}));
  for (std::uint64_t col = 0; col < dim; ++col) {
    std::uint64_t row = col;
    std::complex<double> val = sign ? -1.0 : 1.0;
    for (int q = 0; q < n; ++q) {
      int xb = (x >> q) & 1, zb = (z >> q) & 1;
      // qubit q lives at bit position (n-1-q)
      std::uint64_t mask = 1ULL << (n - 1 - q);
      int bit = (col & mask) ? 1 : 0;
      if (xb && zb) {  // Y
        row ^= mask;
        val *= bit ? std::complex<double>{0, -1} : std::complex<double>{0, 1};
      } else if (xb) {
        row ^= mask;
      } else if (zb) {
        if (bit) val = -val;
      }
    }
    p[row][col] = val;
  }
  return p;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  const std::size_t dim = a.size();
  Matrix c(dim, std::vector<std::complex<double>>(dim, {0, 0}));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t k = 0; k < dim; ++k)
      for (std::size_t j = 0; j < dim; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

Matrix dagger(const Matrix& a) {
  const std::size_t dim = a.size();
  Matrix c(dim, std::vector<std::complex<double>>(dim));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) c[i][j] = std::conj(a[j][i]);
  return c;
}

// The tableau row claims U P U+ = row; verify against the realized unitary.
void check_tableau_against_unitary(const CliffordTableau& t) {
  std::vector<int> qmap(t.n);
  for (int i = 0; i < t.n; ++i) qmap[i] = i;
  Matrix u = unitary_of(realize(t, qmap), t.n);
  Matrix ud = dagger(u);
  for (int i = 0; i < 2 * t.n; ++i) {
    std::uint8_t in_x = 0, in_z = 0;
    if (i < t.n) in_x = static_cast<std::uint8_t>(1u << i);
    else in_z = static_cast<std::uint8_t>(1u << (i - t.n));
    Matrix lhs = matmul(matmul(u, pauli_matrix(t.n, in_x, in_z, 0)), ud);
    const PauliRow& row = t.rows[i];
    Matrix rhs = pauli_matrix(t.n, row.x, row.z, row.sign);
    // conjugated paulis must match exactly (no phase freedom)
    const std::size_t dim = lhs.size();
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c)
        CHECK(std::abs(lhs[r][c] - rhs[r][c]) < 1e-9);
  }
}

}  // namespace

TEST_CASE("group sizes: 24 and 11520") {
  CHECK(clifford_group_size(1) == 24);
  CHECK(clifford_group_size(2) == 11520);
}

TEST_CASE("generator realizations match H, S, CX up to global phase") {
  const double r = 1.0 / std::sqrt(2.0);
  CliffordTableau h = CliffordTableau::identity(1);
  h.append_h(0);
  Matrix uh = unitary_of(realize(h, {0}), 1);
  Matrix href{{{r, 0}, {r, 0}}, {{r, 0}, {-r, 0}}};
  CHECK(equal_up_to_phase(href, uh));

  CliffordTableau s = CliffordTableau::identity(1);
  s.append_s(0);
  Matrix us = unitary_of(realize(s, {0}), 1);
  Matrix sref{{{1, 0}, {0, 0}}, {{0, 0}, {0, 1}}};
  CHECK(equal_up_to_phase(sref, us));

  CliffordTableau cx = CliffordTableau::identity(2);
  cx.append_cx(0, 1);
  Matrix ucx = unitary_of(realize(cx, {0, 1}), 2);
  Matrix cxref(4, std::vector<std::complex<double>>(4, {0, 0}));
  cxref[0][0] = cxref[1][1] = cxref[3][2] = cxref[2][3] = 1;
  CHECK(equal_up_to_phase(cxref, ucx));
}

TEST_CASE("tableau-circuit consistency on random elements") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 12; ++trial) {
    check_tableau_against_unitary(random_clifford(2, rng).tableau);
  }
  for (int trial = 0; trial < 8; ++trial) {
    check_tableau_against_unitary(random_clifford(1, rng).tableau);
  }
}

TEST_CASE("inverse composes to the identity tableau") {
  std::mt19937_64 rng(23);
  for (int n : {1, 2}) {
    for (int trial = 0; trial < 200; ++trial) {
      CliffordTableau t = random_clifford(n, rng).tableau;
      CHECK(compose(t, inverse(t)).is_identity());
      CHECK(compose(inverse(t), t).is_identity());
    }
  }
}

TEST_CASE("group closure under compose") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 300; ++trial) {
    CliffordTableau a = random_clifford(2, rng).tableau;
    CliffordTableau b = random_clifford(2, rng).tableau;
    CliffordTableau c = compose(a, b);
    const auto& keys = clifford_group_keys(2);
    CHECK(std::binary_search(keys.begin(), keys.end(), c.key()));
  }
}

TEST_CASE("compose matches appending the realized circuits") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    CliffordElement a = random_clifford(2, rng);
    CliffordElement b = random_clifford(2, rng);
    CliffordTableau ab = compose(a.tableau, b.tableau);
    std::vector<GateInstance> gates = a.gates;
    gates.insert(gates.end(), b.gates.begin(), b.gates.end());
    Matrix u1 = unitary_of(gates, 2);
    Matrix u2 = unitary_of(realize(ab, {0, 1}), 2);
    CHECK(equal_up_to_phase(u1, u2));
  }
}

TEST_CASE("single-qubit sampling is uniform over the 24 classes") {
  auto rng = make_rng(4242);
  const int draws = 100000;
  std::map<std::uint32_t, int> hist;
  for (int i = 0; i < draws; ++i) hist[random_clifford(1, rng).tableau.key()]++;
  REQUIRE(hist.size() == 24);
  double expected = draws / 24.0;
  double chi2 = 0;
  for (const auto& [k, cnt] : hist) {
    (void)k;
    double d = cnt - expected;
    chi2 += d * d / expected;
  }
  // chi-square with 23 dof: 99.9th percentile ~ 49.7
  CHECK(chi2 < 49.7);
}

TEST_CASE("two-qubit sampling hits the whole group") {
  auto rng = make_rng(11);
  std::map<std::uint32_t, int> hist;
  for (int i = 0; i < 40000; ++i)
    hist[random_clifford(2, rng).tableau.key()]++;
  // coverage should be near-complete at 40k draws over 11520 classes
  CHECK(hist.size() > 11000);
}
