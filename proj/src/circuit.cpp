#include "xpqc/circuit.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "xpqc/common.hpp"

namespace xpqc {

bool is_rotation(GateKind k) {
  return k == GateKind::Rx || k == GateKind::Ry || k == GateKind::Rz;
}

const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::Rx: return "rx";
    case GateKind::Ry: return "ry";
    case GateKind::Rz: return "rz";
    case GateKind::Cx: return "cx";
    case GateKind::Barrier: return "barrier";
  }
  return "?";
}

namespace {

std::optional<GateKind> parse_gate_name(const std::string& s) {
  if (s == "rx") return GateKind::Rx;
  if (s == "ry") return GateKind::Ry;
  if (s == "rz") return GateKind::Rz;
  if (s == "cx") return GateKind::Cx;
  if (s == "barrier") return GateKind::Barrier;
  return std::nullopt;
}

void check_op(const GateInstance& g, int num_qubits, int num_params,
              const std::string& where) {
  for (int q : g.qubits) {
    if (q < 0 || q >= num_qubits)
      throw std::invalid_argument(where + ": qubit " + std::to_string(q) +
                                  " out of range [0, " +
                                  std::to_string(num_qubits) + ")");
  }
  std::set<int> uniq(g.qubits.begin(), g.qubits.end());
  if (uniq.size() != g.qubits.size())
    throw std::invalid_argument(where + ": duplicate qubit operand");
  switch (g.kind) {
    case GateKind::Cx:
      if (g.qubits.size() != 2)
        throw std::invalid_argument(where + ": cx takes exactly 2 qubits");
      if (g.angle || g.slot)
        throw std::invalid_argument(where + ": cx takes no parameter");
      break;
    case GateKind::Barrier:
      if (g.qubits.empty())
        throw std::invalid_argument(where + ": barrier needs >= 1 qubit");
      if (g.angle || g.slot)
        throw std::invalid_argument(where + ": barrier takes no parameter");
      break;
    default:
      if (g.qubits.size() != 1)
        throw std::invalid_argument(where + ": rotation takes exactly 1 qubit");
      if (g.angle.has_value() == g.slot.has_value())
        throw std::invalid_argument(where +
                                    ": rotation needs exactly one of angle/slot");
      if (g.slot && (*g.slot < 0 || *g.slot >= num_params))
        throw std::invalid_argument(where + ": parameter slot " +
                                    std::to_string(*g.slot) + " out of range");
      break;
  }
}

}  // namespace

GateInstance GateInstance::rotation(GateKind k, int qubit, double angle) {
  return GateInstance{k, {qubit}, angle, std::nullopt};
}

GateInstance GateInstance::rotation_slot(GateKind k, int qubit, int slot) {
  return GateInstance{k, {qubit}, std::nullopt, slot};
}

GateInstance GateInstance::cx(int control, int target) {
  return GateInstance{GateKind::Cx, {control, target}, std::nullopt, std::nullopt};
}

GateInstance GateInstance::barrier(std::vector<int> qubits) {
  return GateInstance{GateKind::Barrier, std::move(qubits), std::nullopt,
                      std::nullopt};
}

void Circuit::validate() const {
  if (num_qubits < 0 || num_params < 0)
    throw std::invalid_argument("circuit: negative size");
  std::vector<bool> seen(num_params, false);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    check_op(ops[i], num_qubits, num_params, "op " + std::to_string(i));
    if (ops[i].slot) seen[*ops[i].slot] = true;
  }
  for (int p = 0; p < num_params; ++p)
    if (!seen[p])
      throw std::invalid_argument("circuit: parameter slot " +
                                  std::to_string(p) + " never referenced");
}

DagLayering build_dag_layers(const Circuit& c) {
  DagLayering out;
  out.op_layer.assign(c.ops.size(), -1);
  std::vector<int> avail(c.num_qubits, 0);  // first layer open per qubit
  for (std::size_t i = 0; i < c.ops.size(); ++i) {
    const GateInstance& g = c.ops[i];
    if (g.kind == GateKind::Barrier) {
      int sync = 0;
      for (int q : g.qubits) sync = std::max(sync, avail[q]);
      for (int q : g.qubits) avail[q] = sync;
      continue;
    }
    int layer = 0;
    for (int q : g.qubits) layer = std::max(layer, avail[q]);
    if (layer >= static_cast<int>(out.layers.size()))
      out.layers.resize(layer + 1);
    out.layers[layer].push_back(static_cast<int>(i));
    out.op_layer[i] = layer;
    for (int q : g.qubits) avail[q] = layer + 1;
  }
  return out;
}

Circuit bind(const Circuit& c, const std::vector<double>& theta) {
  if (static_cast<int>(theta.size()) != c.num_params)
    throw std::invalid_argument(
        "bind: expected " + std::to_string(c.num_params) + " parameters, got " +
        std::to_string(theta.size()));
  Circuit out = c;
  out.num_params = 0;
  for (auto& g : out.ops) {
    if (g.slot) {
      g.angle = theta[*g.slot];
      g.slot.reset();
    }
  }
  return out;
}

Circuit read_circuit(const std::string& text) {
  Circuit c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  int max_qubit = -1;
  int max_slot = -1;
  bool have_header = false;
  auto fail = [&](const std::string& msg) -> void {
    throw std::invalid_argument("line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "qubits") {
      int n;
      if (!(ls >> n) || n <= 0) fail("bad qubits directive");
      c.num_qubits = n;
      have_header = true;
      continue;
    }
    auto kind = parse_gate_name(tok);
    if (!kind) fail("unknown gate '" + tok + "'");
    GateInstance g;
    g.kind = *kind;
    std::vector<std::string> rest;
    while (ls >> tok) rest.push_back(tok);
    std::size_t nq = 0;
    if (*kind == GateKind::Cx) nq = 2;
    else if (*kind == GateKind::Barrier) nq = rest.size();
    else nq = 1;
    if (is_rotation(*kind)) {
      if (rest.size() != 2) fail("rotation needs 1 qubit and a parameter");
    } else if (rest.size() != nq || nq == 0) {
      fail("bad operand count for '" + std::string(gate_name(*kind)) + "'");
    }
    for (std::size_t j = 0; j < nq; ++j) {
      try {
        std::size_t pos = 0;
        int q = std::stoi(rest[j], &pos);
        if (pos != rest[j].size() || q < 0) throw std::invalid_argument("");
        g.qubits.push_back(q);
        max_qubit = std::max(max_qubit, q);
      } catch (...) {
        fail("bad qubit index '" + rest[j] + "'");
      }
    }
    if (is_rotation(*kind)) {
      const std::string& p = rest[1];
      if (!p.empty() && p[0] == 'p') {
        try {
          std::size_t pos = 0;
          int s = std::stoi(p.substr(1), &pos);
          if (pos != p.size() - 1 || s < 0) throw std::invalid_argument("");
          g.slot = s;
          max_slot = std::max(max_slot, s);
        } catch (...) {
          fail("bad parameter slot '" + p + "'");
        }
      } else {
        try {
          std::size_t pos = 0;
          double a = std::stod(p, &pos);
          if (pos != p.size()) throw std::invalid_argument("");
          g.angle = a;
        } catch (...) {
          fail("bad angle '" + p + "'");
        }
      }
    }
    std::set<int> uniq(g.qubits.begin(), g.qubits.end());
    if (uniq.size() != g.qubits.size()) fail("duplicate qubit operand");
    c.ops.push_back(std::move(g));
  }
  if (!have_header) c.num_qubits = max_qubit + 1;
  c.num_params = max_slot + 1;
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw std::invalid_argument(std::string("circuit text: ") + e.what());
  }
  return c;
}

std::string write_circuit(const Circuit& c) {
  std::ostringstream out;
  out << "qubits " << c.num_qubits << "\n";
  for (const auto& g : c.ops) {
    out << gate_name(g.kind);
    for (int q : g.qubits) out << ' ' << q;
    if (g.slot) out << " p" << *g.slot;
    else if (g.angle) out << ' ' << format_double(*g.angle);
    out << "\n";
  }
  return out.str();
}

Circuit read_circuit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open circuit file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return read_circuit(ss.str());
}

void write_circuit_file(const Circuit& c, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write circuit file: " + path);
  out << write_circuit(c);
}

Circuit circuit_from_json_string(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  Circuit c;
  c.num_qubits = j.at("num_qubits").get<int>();
  c.num_params = j.at("num_params").get<int>();
  for (const auto& jo : j.at("ops")) {
    GateInstance g;
    auto kind = parse_gate_name(jo.at("name").get<std::string>());
    if (!kind)
      throw std::invalid_argument("circuit json: unknown gate '" +
                                  jo.at("name").get<std::string>() + "'");
    g.kind = *kind;
    g.qubits = jo.at("qubits").get<std::vector<int>>();
    if (jo.contains("angle")) g.angle = jo.at("angle").get<double>();
    if (jo.contains("slot")) g.slot = jo.at("slot").get<int>();
    c.ops.push_back(std::move(g));
  }
  c.validate();
  return c;
}

std::string circuit_to_json_string(const Circuit& c) {
  nlohmann::json j;
  j["num_qubits"] = c.num_qubits;
  j["num_params"] = c.num_params;
  j["ops"] = nlohmann::json::array();
  for (const auto& g : c.ops) {
    nlohmann::json jo;
    jo["name"] = gate_name(g.kind);
    jo["qubits"] = g.qubits;
    if (g.angle) jo["angle"] = *g.angle;
    if (g.slot) jo["slot"] = *g.slot;
    j["ops"].push_back(std::move(jo));
  }
  return j.dump(2);
}

}  // namespace xpqc
