#include "xpqc/device.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace xpqc {

Edge make_edge(int a, int b) {
  if (a == b) throw std::invalid_argument("edge with identical endpoints");
  return a < b ? Edge{a, b} : Edge{b, a};
}

std::string edge_str(const Edge& e) {
  return "(" + std::to_string(e.first) + "," + std::to_string(e.second) + ")";
}

bool CouplingMap::has_edge(const Edge& e) const {
  return std::binary_search(edges.begin(), edges.end(), e);
}

std::vector<int> CouplingMap::neighbors(int q) const {
  std::vector<int> out;
  for (const auto& e : edges) {
    if (e.first == q) out.push_back(e.second);
    else if (e.second == q) out.push_back(e.first);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::vector<int>> CouplingMap::distances() const {
  std::vector<std::vector<int>> d(num_qubits,
                                  std::vector<int>(num_qubits, -1));
  for (int s = 0; s < num_qubits; ++s) {
    std::queue<int> q;
    q.push(s);
    d[s][s] = 0;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : neighbors(u)) {
        if (d[s][v] < 0) {
          d[s][v] = d[s][u] + 1;
          q.push(v);
        }
      }
    }
  }
  return d;
}

const XtalkEntry* CrosstalkTable::find(const Edge& g1, const Edge& g2) const {
  auto it = entries.find({g1, g2});
  return it == entries.end() ? nullptr : &it->second;
}

void CrosstalkTable::insert(const XtalkEntry& e) {
  entries[{e.g1, e.g2}] = e;
}

double multiplier(const CrosstalkTable& x, const Edge& g1_edge,
                  const Edge& g2_edge) {
  const XtalkEntry* e = x.find(g1_edge, g2_edge);
  if (!e || e->independent_epc <= 0) return 1.0;
  return e->conditional_epc / e->independent_epc;
}

const GateCal* DeviceModel::find_gate_cal(const std::string& gate,
                                          const std::vector<int>& qubits) const {
  std::vector<int> canon = qubits;
  if (canon.size() == 2 && canon[0] > canon[1]) std::swap(canon[0], canon[1]);
  for (const auto& g : gate_cal)
    if (g.gate == gate && g.qubits == canon) return &g;
  return nullptr;
}

const GateCal& DeviceModel::cx_cal(const Edge& e) const {
  const GateCal* g = find_gate_cal("cx", {e.first, e.second});
  if (!g)
    throw std::invalid_argument("edge " + edge_str(e) + " uncalibrated");
  return *g;
}

double DeviceModel::cx_epc(const Edge& e) const { return cx_cal(e).epc; }

void DeviceModel::validate() const {
  const int n = coupling.num_qubits;
  if (n <= 0) throw std::invalid_argument("device: num_qubits must be > 0");
  for (const auto& e : coupling.edges) {
    if (e.first == e.second)
      throw std::invalid_argument("device: self-loop edge " + edge_str(e));
    if (e.first < 0 || e.second >= n)
      throw std::invalid_argument("device: edge " + edge_str(e) +
                                  " out of range");
  }
  if (static_cast<int>(qubit_cal.size()) != n)
    throw std::invalid_argument("device: qubit " +
                                std::to_string(qubit_cal.size()) +
                                " uncalibrated");
  for (int q = 0; q < n; ++q)
    if (qubit_cal[q].t1_us <= 0 || qubit_cal[q].t2_us <= 0)
      throw std::invalid_argument("device: qubit " + std::to_string(q) +
                                  " needs positive T1/T2");
  for (const auto& g : gate_cal) {
    if (g.duration_ns <= 0)
      throw std::invalid_argument("device: gate " + g.gate +
                                  " needs positive duration");
    if (g.epc < 0 || g.epc >= 1)
      throw std::invalid_argument("device: gate " + g.gate +
                                  " epc out of [0,1)");
    if (g.gate == "cx") {
      if (g.qubits.size() != 2 ||
          !coupling.has_edge(make_edge(g.qubits[0], g.qubits[1])))
        throw std::invalid_argument("device: cx cal on non-edge");
    }
  }
  for (const auto& e : coupling.edges) {
    if (!find_gate_cal("cx", {e.first, e.second}))
      throw std::invalid_argument("edge " + edge_str(e) + " uncalibrated");
  }
  for (const auto& [key, ent] : xtalk.entries) {
    (void)key;
    if (ent.g1 == ent.g2 || ent.g1.first == ent.g2.first ||
        ent.g1.first == ent.g2.second || ent.g1.second == ent.g2.first ||
        ent.g1.second == ent.g2.second)
      throw std::invalid_argument("device: crosstalk pair " +
                                  edge_str(ent.g1) + "|" + edge_str(ent.g2) +
                                  " shares a qubit");
    if (ent.conditional_epc <= 0)
      throw std::invalid_argument("device: crosstalk pair " +
                                  edge_str(ent.g1) + "|" + edge_str(ent.g2) +
                                  " needs positive conditional epc");
  }
}

DeviceModel DeviceModel::restrict_to(const std::vector<int>& qubits) const {
  std::map<int, int> to_logical;
  for (std::size_t i = 0; i < qubits.size(); ++i)
    to_logical[qubits[i]] = static_cast<int>(i);
  if (to_logical.size() != qubits.size())
    throw std::invalid_argument("restrict_to: duplicate qubit");

  DeviceModel out;
  out.coupling.num_qubits = static_cast<int>(qubits.size());
  auto remap_edge = [&](const Edge& e) -> std::optional<Edge> {
    auto a = to_logical.find(e.first);
    auto b = to_logical.find(e.second);
    if (a == to_logical.end() || b == to_logical.end()) return std::nullopt;
    return make_edge(a->second, b->second);
  };
  for (const auto& e : coupling.edges)
    if (auto r = remap_edge(e)) out.coupling.edges.push_back(*r);
  std::sort(out.coupling.edges.begin(), out.coupling.edges.end());

  out.qubit_cal.resize(qubits.size());
  for (std::size_t i = 0; i < qubits.size(); ++i) {
    int dq = qubits[i];
    if (dq < 0 || dq >= coupling.num_qubits)
      throw std::invalid_argument("restrict_to: qubit out of range");
    out.qubit_cal[i] = qubit_cal[dq];
  }
  for (const auto& g : gate_cal) {
    bool keep = true;
    std::vector<int> mapped;
    for (int q : g.qubits) {
      auto it = to_logical.find(q);
      if (it == to_logical.end()) {
        keep = false;
        break;
      }
      mapped.push_back(it->second);
    }
    if (!keep) continue;
    GateCal ng = g;
    if (mapped.size() == 2 && mapped[0] > mapped[1])
      std::swap(mapped[0], mapped[1]);
    ng.qubits = mapped;
    out.gate_cal.push_back(std::move(ng));
  }
  for (const auto& [key, ent] : xtalk.entries) {
    (void)key;
    auto r1 = remap_edge(ent.g1);
    auto r2 = remap_edge(ent.g2);
    if (r1 && r2) {
      XtalkEntry ne = ent;
      ne.g1 = *r1;
      ne.g2 = *r2;
      out.xtalk.insert(ne);
    }
  }
  return out;
}

std::vector<std::pair<Edge, Edge>> one_hop_pairs(const CouplingMap& cmap) {
  std::vector<std::pair<Edge, Edge>> out;
  auto dist = cmap.distances();
  for (const auto& e1 : cmap.edges) {
    for (const auto& e2 : cmap.edges) {
      if (e1 == e2) continue;
      if (e1.first == e2.first || e1.first == e2.second ||
          e1.second == e2.first || e1.second == e2.second)
        continue;
      int best = -1;
      for (int a : {e1.first, e1.second}) {
        for (int b : {e2.first, e2.second}) {
          int d = dist[a][b];
          if (d >= 0 && (best < 0 || d < best)) best = d;
        }
      }
      if (best == 1) out.emplace_back(e1, e2);
    }
  }
  return out;
}

namespace {

nlohmann::json device_to_json(const DeviceModel& d) {
  nlohmann::json j;
  j["num_qubits"] = d.coupling.num_qubits;
  j["edges"] = nlohmann::json::array();
  for (const auto& e : d.coupling.edges)
    j["edges"].push_back({e.first, e.second});
  j["qubits"] = nlohmann::json::array();
  for (const auto& q : d.qubit_cal)
    j["qubits"].push_back({{"t1_us", q.t1_us}, {"t2_us", q.t2_us}});
  j["gates"] = nlohmann::json::array();
  for (const auto& g : d.gate_cal)
    j["gates"].push_back({{"name", g.gate},
                          {"qubits", g.qubits},
                          {"duration_ns", g.duration_ns},
                          {"epc", g.epc}});
  j["xtalk"] = nlohmann::json::array();
  for (const auto& [key, ent] : d.xtalk.entries) {
    (void)key;
    j["xtalk"].push_back({{"g1", {ent.g1.first, ent.g1.second}},
                          {"g2", {ent.g2.first, ent.g2.second}},
                          {"conditional_epc", ent.conditional_epc}});
  }
  return j;
}

DeviceModel device_from_json(const nlohmann::json& j) {
  DeviceModel d;
  try {
    d.coupling.num_qubits = j.at("num_qubits").get<int>();
    for (const auto& je : j.at("edges")) {
      if (!je.is_array() || je.size() != 2)
        throw std::invalid_argument("edge entries must be [a,b]");
      d.coupling.edges.push_back(make_edge(je[0].get<int>(), je[1].get<int>()));
    }
    std::sort(d.coupling.edges.begin(), d.coupling.edges.end());
    d.coupling.edges.erase(
        std::unique(d.coupling.edges.begin(), d.coupling.edges.end()),
        d.coupling.edges.end());
    for (const auto& jq : j.at("qubits"))
      d.qubit_cal.push_back(
          {jq.at("t1_us").get<double>(), jq.at("t2_us").get<double>()});
    for (const auto& jg : j.at("gates")) {
      GateCal g;
      g.gate = jg.at("name").get<std::string>();
      g.qubits = jg.at("qubits").get<std::vector<int>>();
      if (g.qubits.size() == 2 && g.qubits[0] > g.qubits[1])
        std::swap(g.qubits[0], g.qubits[1]);
      g.duration_ns = jg.at("duration_ns").get<double>();
      g.epc = jg.at("epc").get<double>();
      d.gate_cal.push_back(std::move(g));
    }
    if (j.contains("xtalk")) {
      for (const auto& jx : j.at("xtalk")) {
        XtalkEntry e;
        e.g1 = make_edge(jx.at("g1")[0].get<int>(), jx.at("g1")[1].get<int>());
        e.g2 = make_edge(jx.at("g2")[0].get<int>(), jx.at("g2")[1].get<int>());
        e.conditional_epc = jx.at("conditional_epc").get<double>();
        d.xtalk.insert(e);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("device json: ") + e.what());
  }
  d.validate();
  // attach the independent rate of g1 to each crosstalk entry
  for (auto& [key, ent] : d.xtalk.entries) {
    (void)key;
    ent.independent_epc = d.cx_epc(ent.g1);
  }
  return d;
}

}  // namespace

DeviceModel device_from_json_string(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("device json: ") + e.what());
  }
  return device_from_json(j);
}

DeviceModel load_device(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open device file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return device_from_json_string(ss.str());
}

std::string device_to_json_string(const DeviceModel& d) {
  return device_to_json(d).dump(2);
}

void save_device(const DeviceModel& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write device file: " + path);
  out << device_to_json_string(d) << "\n";
}

DeviceModel default_guadalupe() {
  DeviceModel d;
  d.coupling.num_qubits = 16;
  const int raw[16][2] = {{0, 1}, {1, 2},  {1, 4},   {2, 3},   {3, 5},  {4, 7},
                          {5, 8}, {6, 7},  {7, 10},  {8, 9},   {8, 11}, {10, 12},
                          {11, 14}, {12, 13}, {12, 15}, {13, 14}};
  for (const auto& e : raw) d.coupling.edges.push_back(make_edge(e[0], e[1]));
  std::sort(d.coupling.edges.begin(), d.coupling.edges.end());

  d.qubit_cal.assign(16, QubitCal{100.0, 100.0});
  for (int q = 0; q < 16; ++q)
    for (const char* g : {"rx", "ry", "rz"})
      d.gate_cal.push_back(GateCal{g, {q}, 35.0, 0.0});
  for (const auto& e : d.coupling.edges)
    d.gate_cal.push_back(GateCal{"cx", {e.first, e.second}, 300.0, 1e-2});

  // Representative conditional rates on a handful of one-hop pairs.
  // Values are synthetic; the worst ratio is 3.14 and sub-unity entries
  // are kept as measured.
  const double indep = 1e-2;
  auto add = [&](int a1, int b1, int a2, int b2, double mult) {
    XtalkEntry e;
    e.g1 = make_edge(a1, b1);
    e.g2 = make_edge(a2, b2);
    e.independent_epc = indep;
    e.conditional_epc = indep * mult;
    d.xtalk.insert(e);
  };
  add(0, 1, 2, 3, 1.217);
  add(2, 3, 0, 1, 1.15);
  add(0, 1, 4, 7, 1.006);
  add(4, 7, 0, 1, 1.01);
  add(10, 12, 13, 14, 3.14);
  add(13, 14, 10, 12, 2.61);
  add(2, 3, 5, 8, 1.45);
  add(5, 8, 2, 3, 1.38);
  add(8, 11, 13, 14, 1.32);
  add(13, 14, 8, 11, 1.29);
  add(1, 2, 4, 7, 0.97);
  add(4, 7, 1, 2, 0.99);
  add(5, 8, 11, 14, 1.9);
  add(11, 14, 5, 8, 1.75);
  add(12, 15, 13, 14, 1.12);
  add(13, 14, 12, 15, 1.08);
  add(3, 5, 8, 9, 1.05);
  add(8, 9, 3, 5, 1.02);
  add(6, 7, 10, 12, 1.25);
  add(10, 12, 6, 7, 1.2);
  d.validate();
  return d;
}

DeviceModel with_uniform_crosstalk(const DeviceModel& d, double mult) {
  DeviceModel out = d;
  out.xtalk.entries.clear();
  for (const auto& [e1, e2] : one_hop_pairs(d.coupling)) {
    XtalkEntry e;
    e.g1 = e1;
    e.g2 = e2;
    e.independent_epc = d.cx_epc(e1);
    e.conditional_epc = e.independent_epc * mult;
    out.xtalk.insert(e);
  }
  return out;
}

}  // namespace xpqc
