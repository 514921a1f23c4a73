#pragma once

#include <string>
#include <vector>

#include "xpqc/circuit.hpp"
#include "xpqc/device.hpp"
#include "xpqc/scheduler.hpp"

namespace xpqc {

enum class PqcFamily { Base1, Base2, Xtalk };
enum class XtalkLevel { High, Medium, Low };

PqcFamily parse_family(const std::string& s);
XtalkLevel parse_level(const std::string& s);
const char* family_name(PqcFamily f);
const char* level_name(XtalkLevel l);

/// high -> 0 (max parallelism), medium -> 0.5, low -> 1 (full serialization).
double omega_for_level(XtalkLevel level);

struct PqcConfig {
  PqcFamily family = PqcFamily::Base1;
  XtalkLevel level = XtalkLevel::Medium;  // xtalk only
  int n = 0;   // qubit count
  int L = 0;   // total layers
  int m = 2;   // leading base layers (xtalk only, capped at 5)
  double threshold = 1.0;

  void validate() const;
};

/// A built PQC plus the device mapping it was constructed against.
/// The circuit acts on logical qubits 0..n-1; device_path[i] is the backing
/// device qubit, and line_device is the device restricted to that path so
/// calibration and crosstalk lookups work in logical coordinates.
struct BuiltAnsatz {
  Circuit circuit;
  std::vector<int> device_path;
  DeviceModel line_device;
  int sublayer_count = 0;  // R; 0 for base families
};

/// Lexicographically-first simple path of n qubits (DFS); mapping error if
/// none exists.
std::vector<int> find_line(const DeviceModel& device, int n);

/// Rotation layers (ry, rz per qubit) around a sequential nearest-neighbor
/// cx chain; L entangling layers, final rotation layer, 2n(L+1) parameters.
BuiltAnsatz build_base1(int n, int L, const DeviceModel& device);

/// Same rotations; each entangling layer is the chain approximated into
/// maximal disjoint parallel groups (alternating-layered structure).
BuiltAnsatz build_base2(int n, int L, const DeviceModel& device);

/// First m layers from base1, then L-m repetitions of a rotation layer plus
/// the R crosstalk-scheduled sub-layers at omega(level).
BuiltAnsatz build_xtalk(const PqcConfig& cfg, const DeviceModel& device);

BuiltAnsatz build_pqc(const PqcConfig& cfg, const DeviceModel& device);

}  // namespace xpqc
