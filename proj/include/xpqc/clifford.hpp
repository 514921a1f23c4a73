#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "xpqc/circuit.hpp"

namespace xpqc {

/// Signed Pauli over n qubits: (-1)^sign * prod_q sigma(x_q, z_q) with
/// sigma(0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z.
struct PauliRow {
  std::uint8_t x = 0;  // bit q = x part of qubit q
  std::uint8_t z = 0;
  std::uint8_t sign = 0;
};

/// Stabilizer tableau of a 1- or 2-qubit Clifford: rows are the conjugation
/// images of X_0..X_{n-1}, Z_0..Z_{n-1}. Group size 24 (n=1) / 11520 (n=2).
struct CliffordTableau {
  int n = 1;
  std::vector<PauliRow> rows;  // 2n rows: X images then Z images

  static CliffordTableau identity(int n);
  bool is_identity() const;

  /// Conjugates every row in place (tableau of "this circuit, then gate").
  void append_h(int q);
  void append_s(int q);
  void append_cx(int c, int t);

  /// Compact encoding; unique per group element.
  std::uint32_t key() const;

  bool operator==(const CliffordTableau& o) const {
    return n == o.n && key() == o.key();
  }
};

/// a then b, as a single tableau (phase-exact).
CliffordTableau compose(const CliffordTableau& a, const CliffordTableau& b);

CliffordTableau inverse(const CliffordTableau& t);

/// Generator-level step used by the realization tables: h q | s q | cx a b.
struct CliffordGen {
  enum Kind { H, S, CX } kind;
  int a = 0;
  int b = 0;
};

/// Minimal generator word for the element (BFS over {h, s, cx} from the
/// identity; the whole group is tabulated once per n).
std::vector<CliffordGen> generator_word(const CliffordTableau& t);

std::size_t clifford_group_size(int n);

/// All element keys in sorted order (tests; also the sampling domain).
const std::vector<std::uint32_t>& clifford_group_keys(int n);

CliffordTableau tableau_from_key(int n, std::uint32_t key);

struct CliffordElement {
  CliffordTableau tableau;
  /// Realization over {rx(+-pi/2), rz(k*pi/2), cx} on logical qubits 0..n-1.
  std::vector<GateInstance> gates;
};

/// Realizes a tableau into the rotation gate set. `qubit_map[i]` gives the
/// circuit qubit carrying logical qubit i.
std::vector<GateInstance> realize(const CliffordTableau& t,
                                  const std::vector<int>& qubit_map);

/// Uniform draw over the full n-qubit Clifford group (n in {1,2}).
CliffordElement random_clifford(int n, std::mt19937_64& rng);

}  // namespace xpqc
