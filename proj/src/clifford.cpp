#include "xpqc/clifford.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <unordered_map>

namespace xpqc {

namespace {

constexpr double kHalfPi = 1.5707963267948966;

void check_n(int n) {
  if (n != 1 && n != 2)
    throw std::invalid_argument("clifford: only 1 or 2 qubits supported");
}

// i-exponent of sigma(a) * sigma(b) for single-qubit sigmas indexed
// I=0, X=1, Y=2, Z=3: product = i^g * sigma(a^b footprint).
constexpr int kPhase[4][4] = {
    {0, 0, 0, 0},
    {0, 0, 1, 3},
    {0, 3, 0, 1},
    {0, 1, 3, 0},
};

int sigma_index(int x, int z) {
  if (x && z) return 2;
  if (x) return 1;
  if (z) return 3;
  return 0;
}

}  // namespace

CliffordTableau CliffordTableau::identity(int n) {
  check_n(n);
  CliffordTableau t;
  t.n = n;
  t.rows.assign(2 * n, PauliRow{});
  for (int i = 0; i < n; ++i) {
    t.rows[i].x = static_cast<std::uint8_t>(1u << i);
    t.rows[n + i].z = static_cast<std::uint8_t>(1u << i);
  }
  return t;
}

bool CliffordTableau::is_identity() const {
  return key() == identity(n).key();
}

void CliffordTableau::append_h(int q) {
  const std::uint8_t m = static_cast<std::uint8_t>(1u << q);
  for (auto& r : rows) {
    if ((r.x & m) && (r.z & m)) r.sign ^= 1;
    std::uint8_t xq = r.x & m, zq = r.z & m;
    r.x = (r.x & ~m) | zq;
    r.z = (r.z & ~m) | xq;
  }
}

void CliffordTableau::append_s(int q) {
  const std::uint8_t m = static_cast<std::uint8_t>(1u << q);
  for (auto& r : rows) {
    if ((r.x & m) && (r.z & m)) r.sign ^= 1;
    if (r.x & m) r.z ^= m;
  }
}

void CliffordTableau::append_cx(int c, int t) {
  const std::uint8_t mc = static_cast<std::uint8_t>(1u << c);
  const std::uint8_t mt = static_cast<std::uint8_t>(1u << t);
  for (auto& r : rows) {
    int xc = (r.x & mc) ? 1 : 0, zc = (r.z & mc) ? 1 : 0;
    int xt = (r.x & mt) ? 1 : 0, zt = (r.z & mt) ? 1 : 0;
    if (xc && zt && (xt ^ zc ^ 1)) r.sign ^= 1;
    if (xc) r.x ^= mt;
    if (zt) r.z ^= mc;
  }
}

std::uint32_t CliffordTableau::key() const {
  std::uint32_t k = 0;
  int shift = 0;
  for (const auto& r : rows) {
    std::uint32_t packed =
        (static_cast<std::uint32_t>(r.x) & ((1u << n) - 1)) |
        ((static_cast<std::uint32_t>(r.z) & ((1u << n) - 1)) << n) |
        (static_cast<std::uint32_t>(r.sign) << (2 * n));
    k |= packed << shift;
    shift += 2 * n + 1;
  }
  return k;
}

CliffordTableau tableau_from_key(int n, std::uint32_t key) {
  check_n(n);
  CliffordTableau t;
  t.n = n;
  t.rows.assign(2 * n, PauliRow{});
  int shift = 0;
  for (auto& r : t.rows) {
    std::uint32_t packed = (key >> shift) & ((1u << (2 * n + 1)) - 1);
    r.x = static_cast<std::uint8_t>(packed & ((1u << n) - 1));
    r.z = static_cast<std::uint8_t>((packed >> n) & ((1u << n) - 1));
    r.sign = static_cast<std::uint8_t>((packed >> (2 * n)) & 1u);
    shift += 2 * n + 1;
  }
  return t;
}

namespace {

// Multiplies the running product (exponent-of-i phase, footprint) by a
// signed Pauli row.
struct Accum {
  std::uint8_t x = 0, z = 0;
  int phase = 0;  // mod 4
};

void accum_mul(Accum& acc, const PauliRow& r, int n) {
  acc.phase = (acc.phase + 2 * r.sign) & 3;
  for (int q = 0; q < n; ++q) {
    int sa = sigma_index((acc.x >> q) & 1, (acc.z >> q) & 1);
    int sb = sigma_index((r.x >> q) & 1, (r.z >> q) & 1);
    acc.phase = (acc.phase + kPhase[sa][sb]) & 3;
  }
  acc.x ^= r.x;
  acc.z ^= r.z;
}

// Image of a signed Pauli row under conjugation by tableau b.
PauliRow conjugate_row(const PauliRow& p, const CliffordTableau& b) {
  Accum acc;
  int y_count = 0;
  for (int q = 0; q < b.n; ++q) {
    int xq = (p.x >> q) & 1, zq = (p.z >> q) & 1;
    if (xq && zq) ++y_count;
    if (xq) accum_mul(acc, b.rows[q], b.n);
    if (zq) accum_mul(acc, b.rows[b.n + q], b.n);
  }
  // P = (-1)^sign i^{y_count} prod X^x Z^z; acc already carries the image
  // in sigma form, so only the Y-unfolding phase of the input remains.
  int total = (acc.phase + y_count + 2 * p.sign) & 3;
  if (total & 1)
    throw std::logic_error("clifford: non-hermitian conjugation image");
  PauliRow out;
  out.x = acc.x;
  out.z = acc.z;
  out.sign = static_cast<std::uint8_t>(total >> 1);
  return out;
}

}  // namespace

CliffordTableau compose(const CliffordTableau& a, const CliffordTableau& b) {
  if (a.n != b.n) throw std::invalid_argument("compose: size mismatch");
  CliffordTableau out;
  out.n = a.n;
  out.rows.reserve(a.rows.size());
  for (const auto& r : a.rows) out.rows.push_back(conjugate_row(r, b));
  return out;
}

namespace {

struct GroupTable {
  // key -> (parent key, generator index); identity maps to itself with -1.
  std::unordered_map<std::uint32_t, std::pair<std::uint32_t, int>> parent;
  std::vector<std::uint32_t> sorted_keys;
  std::vector<CliffordGen> gens;
};

GroupTable build_table(int n) {
  GroupTable g;
  if (n == 1) {
    g.gens = {{CliffordGen::H, 0, 0}, {CliffordGen::S, 0, 0}};
  } else {
    g.gens = {{CliffordGen::H, 0, 0},  {CliffordGen::H, 1, 0},
              {CliffordGen::S, 0, 0},  {CliffordGen::S, 1, 0},
              {CliffordGen::CX, 0, 1}, {CliffordGen::CX, 1, 0}};
  }
  CliffordTableau id = CliffordTableau::identity(n);
  std::vector<std::uint32_t> frontier{id.key()};
  g.parent[id.key()] = {id.key(), -1};
  while (!frontier.empty()) {
    std::vector<std::uint32_t> next;
    for (std::uint32_t k : frontier) {
      for (std::size_t gi = 0; gi < g.gens.size(); ++gi) {
        CliffordTableau t = tableau_from_key(n, k);
        const CliffordGen& gen = g.gens[gi];
        switch (gen.kind) {
          case CliffordGen::H: t.append_h(gen.a); break;
          case CliffordGen::S: t.append_s(gen.a); break;
          case CliffordGen::CX: t.append_cx(gen.a, gen.b); break;
        }
        std::uint32_t nk = t.key();
        if (g.parent.emplace(nk, std::make_pair(k, static_cast<int>(gi)))
                .second)
          next.push_back(nk);
      }
    }
    frontier = std::move(next);
  }
  g.sorted_keys.reserve(g.parent.size());
  for (const auto& [k, v] : g.parent) {
    (void)v;
    g.sorted_keys.push_back(k);
  }
  std::sort(g.sorted_keys.begin(), g.sorted_keys.end());
  return g;
}

const GroupTable& group_table(int n) {
  check_n(n);
  static const GroupTable t1 = build_table(1);
  static const GroupTable t2 = build_table(2);
  return n == 1 ? t1 : t2;
}

}  // namespace

std::vector<CliffordGen> generator_word(const CliffordTableau& t) {
  const GroupTable& g = group_table(t.n);
  std::vector<CliffordGen> word;
  std::uint32_t k = t.key();
  auto it = g.parent.find(k);
  if (it == g.parent.end())
    throw std::logic_error("clifford: tableau not in group table");
  while (it->second.second >= 0) {
    word.push_back(g.gens[it->second.second]);
    k = it->second.first;
    it = g.parent.find(k);
  }
  std::reverse(word.begin(), word.end());
  return word;
}

std::size_t clifford_group_size(int n) {
  return group_table(n).sorted_keys.size();
}

const std::vector<std::uint32_t>& clifford_group_keys(int n) {
  return group_table(n).sorted_keys;
}

CliffordTableau inverse(const CliffordTableau& t) {
  // Reverse the generator word with each step inverted (h^-1=h, s^-1=sss,
  // cx^-1=cx); exact including phases.
  CliffordTableau inv = CliffordTableau::identity(t.n);
  auto word = generator_word(t);
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    switch (it->kind) {
      case CliffordGen::H: inv.append_h(it->a); break;
      case CliffordGen::S:
        inv.append_s(it->a);
        inv.append_s(it->a);
        inv.append_s(it->a);
        break;
      case CliffordGen::CX: inv.append_cx(it->a, it->b); break;
    }
  }
  return inv;
}

std::vector<GateInstance> realize(const CliffordTableau& t,
                                  const std::vector<int>& qubit_map) {
  if (static_cast<int>(qubit_map.size()) != t.n)
    throw std::invalid_argument("realize: qubit map size mismatch");
  std::vector<GateInstance> out;
  for (const auto& gen : generator_word(t)) {
    switch (gen.kind) {
      case CliffordGen::H:
        // H = Rz(pi/2) Rx(pi/2) Rz(pi/2) up to global phase
        out.push_back(
            GateInstance::rotation(GateKind::Rz, qubit_map[gen.a], kHalfPi));
        out.push_back(
            GateInstance::rotation(GateKind::Rx, qubit_map[gen.a], kHalfPi));
        out.push_back(
            GateInstance::rotation(GateKind::Rz, qubit_map[gen.a], kHalfPi));
        break;
      case CliffordGen::S:
        out.push_back(
            GateInstance::rotation(GateKind::Rz, qubit_map[gen.a], kHalfPi));
        break;
      case CliffordGen::CX:
        out.push_back(GateInstance::cx(qubit_map[gen.a], qubit_map[gen.b]));
        break;
    }
  }
  return out;
}

CliffordElement random_clifford(int n, std::mt19937_64& rng) {
  check_n(n);
  const auto& keys = clifford_group_keys(n);
  std::uniform_int_distribution<std::size_t> pick(0, keys.size() - 1);
  CliffordElement e;
  e.tableau = tableau_from_key(n, keys[pick(rng)]);
  std::vector<int> ident_map(n);
  for (int i = 0; i < n; ++i) ident_map[i] = i;
  e.gates = realize(e.tableau, ident_map);
  return e;
}

}  // namespace xpqc
