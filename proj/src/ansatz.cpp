#include "xpqc/ansatz.hpp"

#include <algorithm>
#include <stdexcept>

namespace xpqc {

PqcFamily parse_family(const std::string& s) {
  if (s == "base1") return PqcFamily::Base1;
  if (s == "base2") return PqcFamily::Base2;
  if (s == "xtalk") return PqcFamily::Xtalk;
  throw std::invalid_argument("unknown family '" + s +
                              "' (base1|base2|xtalk)");
}

XtalkLevel parse_level(const std::string& s) {
  if (s == "high") return XtalkLevel::High;
  if (s == "medium") return XtalkLevel::Medium;
  if (s == "low") return XtalkLevel::Low;
  throw std::invalid_argument("unknown level '" + s + "' (high|medium|low)");
}

const char* family_name(PqcFamily f) {
  switch (f) {
    case PqcFamily::Base1: return "base1";
    case PqcFamily::Base2: return "base2";
    case PqcFamily::Xtalk: return "xtalk";
  }
  return "?";
}

const char* level_name(XtalkLevel l) {
  switch (l) {
    case XtalkLevel::High: return "high";
    case XtalkLevel::Medium: return "medium";
    case XtalkLevel::Low: return "low";
  }
  return "?";
}

double omega_for_level(XtalkLevel level) {
  switch (level) {
    case XtalkLevel::High: return 0.0;
    case XtalkLevel::Medium: return 0.5;
    case XtalkLevel::Low: return 1.0;
  }
  return 0.5;
}

void PqcConfig::validate() const {
  if (n < 2) throw std::invalid_argument("pqc: need n >= 2");
  if (L < 0) throw std::invalid_argument("pqc: need L >= 0");
  if (family == PqcFamily::Xtalk) {
    if (m < 0 || m > L)
      throw std::invalid_argument("pqc: need 0 <= m <= L");
    if (m > 5) throw std::invalid_argument("pqc: base-layer count capped at 5");
  }
}

namespace {

bool dfs_line(const DeviceModel& device, std::vector<int>& path,
              std::vector<bool>& used, int n) {
  if (static_cast<int>(path.size()) == n) return true;
  for (int next : device.coupling.neighbors(path.back())) {
    if (used[next]) continue;
    used[next] = true;
    path.push_back(next);
    if (dfs_line(device, path, used, n)) return true;
    path.pop_back();
    used[next] = false;
  }
  return false;
}

void append_rotation_layer(Circuit& c, int n, int& slot) {
  for (int q = 0; q < n; ++q) {
    c.ops.push_back(GateInstance::rotation_slot(GateKind::Ry, q, slot++));
    c.ops.push_back(GateInstance::rotation_slot(GateKind::Rz, q, slot++));
  }
}

std::vector<Edge> chain_edges(int n) {
  std::vector<Edge> out;
  for (int q = 0; q + 1 < n; ++q) out.push_back(make_edge(q, q + 1));
  return out;
}

std::vector<int> all_qubits(int n) {
  std::vector<int> v(n);
  for (int q = 0; q < n; ++q) v[q] = q;
  return v;
}

void append_grouped_entangler(Circuit& c,
                              const std::vector<std::vector<Edge>>& groups,
                              int n) {
  // barriers between groups only; the rotation layer that follows every
  // block already keeps repetitions from sharing DAG layers
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    if (gi > 0) c.ops.push_back(GateInstance::barrier(all_qubits(n)));
    for (const auto& e : groups[gi])
      c.ops.push_back(GateInstance::cx(e.first, e.second));
  }
}

BuiltAnsatz make_base(int n, int L, const DeviceModel& device, bool grouped) {
  BuiltAnsatz out;
  out.device_path = find_line(device, n);
  out.line_device = device.restrict_to(out.device_path);
  Circuit c;
  c.num_qubits = n;
  int slot = 0;
  auto chain = chain_edges(n);
  for (int layer = 0; layer < L; ++layer) {
    // layer repetitions are barrier-delimited so every family keeps its
    // advertised per-layer timing instead of pipelining across repetitions
    if (layer > 0) c.ops.push_back(GateInstance::barrier(all_qubits(n)));
    append_rotation_layer(c, n, slot);
    if (grouped) {
      append_grouped_entangler(c, ala_groups(chain), n);
    } else {
      for (const auto& e : chain)
        c.ops.push_back(GateInstance::cx(e.first, e.second));
    }
  }
  append_rotation_layer(c, n, slot);
  c.num_params = slot;
  c.validate();
  out.circuit = std::move(c);
  return out;
}

}  // namespace

std::vector<int> find_line(const DeviceModel& device, int n) {
  if (n < 1 || n > device.coupling.num_qubits)
    throw std::invalid_argument("find_line: no " + std::to_string(n) +
                                "-qubit line on this device");
  for (int start = 0; start < device.coupling.num_qubits; ++start) {
    std::vector<int> path{start};
    std::vector<bool> used(device.coupling.num_qubits, false);
    used[start] = true;
    if (dfs_line(device, path, used, n)) return path;
  }
  throw std::invalid_argument("find_line: no " + std::to_string(n) +
                              "-qubit line on this device");
}

BuiltAnsatz build_base1(int n, int L, const DeviceModel& device) {
  return make_base(n, L, device, false);
}

BuiltAnsatz build_base2(int n, int L, const DeviceModel& device) {
  return make_base(n, L, device, true);
}

BuiltAnsatz build_xtalk(const PqcConfig& cfg, const DeviceModel& device) {
  cfg.validate();
  BuiltAnsatz out;
  out.device_path = find_line(device, cfg.n);
  out.line_device = device.restrict_to(out.device_path);

  auto chain = chain_edges(cfg.n);
  std::vector<std::vector<Edge>> sublayers;
  if (cfg.L - cfg.m > 0) {
    SchedulerOptions sopts;
    sopts.threshold = cfg.threshold;
    Schedule s = xtalk_schedule(chain, out.line_device,
                                omega_for_level(cfg.level), sopts);
    sublayers = extract_sublayers(s).layers;
    out.sublayer_count = static_cast<int>(sublayers.size());
  }

  Circuit c;
  c.num_qubits = cfg.n;
  int slot = 0;
  for (int layer = 0; layer < cfg.L; ++layer) {
    if (layer > 0) c.ops.push_back(GateInstance::barrier(all_qubits(cfg.n)));
    append_rotation_layer(c, cfg.n, slot);
    if (layer < cfg.m) {
      for (const auto& e : chain)
        c.ops.push_back(GateInstance::cx(e.first, e.second));
    } else {
      append_grouped_entangler(c, sublayers, cfg.n);
    }
  }
  append_rotation_layer(c, cfg.n, slot);
  c.num_params = slot;
  c.validate();
  out.circuit = std::move(c);
  return out;
}

BuiltAnsatz build_pqc(const PqcConfig& cfg, const DeviceModel& device) {
  cfg.validate();
  switch (cfg.family) {
    case PqcFamily::Base1: return build_base1(cfg.n, cfg.L, device);
    case PqcFamily::Base2: return build_base2(cfg.n, cfg.L, device);
    case PqcFamily::Xtalk: return build_xtalk(cfg, device);
  }
  throw std::logic_error("unreachable");
}

}  // namespace xpqc
