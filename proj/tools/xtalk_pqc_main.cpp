#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xpqc/ansatz.hpp"
#include "xpqc/common.hpp"
#include "xpqc/metrics.hpp"
#include "xpqc/rb.hpp"
#include "xpqc/scheduler.hpp"
#include "xpqc/simulator.hpp"
#include "xpqc/vqa.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNumerical = 1;
constexpr int kExitInput = 2;

struct GlobalOpts {
  std::uint64_t seed = 12345;
  std::string out = "out";
  std::string device_path;
  unsigned threads = 0;
};

xpqc::DeviceModel load_device_or_default(const GlobalOpts& g) {
  if (g.device_path.empty()) return xpqc::default_guadalupe();
  return xpqc::load_device(g.device_path);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

// Every run records its exact argv so `rerun --manifest` reproduces it.
void write_manifest(const GlobalOpts& g, const std::string& command,
                    const std::vector<std::string>& argv, const json& params,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool"] = "xtalk_pqc";
  m["version"] = xpqc::kVersion;
  m["command"] = command;
  m["seed"] = g.seed;
  m["argv"] = argv;
  m["params"] = params;
  m["outputs"] = outputs;
  write_file(fs::path(g.out) / "manifest.json", m.dump(2) + "\n");
}

std::vector<int> parse_int_list(const std::string& csv) {
  std::vector<int> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoi(item));
  }
  return out;
}

xpqc::Edge parse_edge(const std::string& s) {
  auto v = parse_int_list(s);
  if (v.size() != 2)
    throw std::invalid_argument("edge must be 'a,b', got '" + s + "'");
  return xpqc::make_edge(v[0], v[1]);
}

xpqc::SimMode parse_mode(const std::string& s) {
  if (s == "ideal") return xpqc::SimMode::Ideal;
  if (s == "standard") return xpqc::SimMode::Standard;
  if (s == "xtalk") return xpqc::SimMode::XtalkEnabled;
  throw std::invalid_argument("unknown mode '" + s +
                              "' (ideal|standard|xtalk)");
}

int run_characterize(const GlobalOpts& g, const std::vector<std::string>& argv,
                     const std::string& lengths_csv, int k,
                     std::uint64_t shots, const std::string& mode,
                     const std::vector<std::string>& edge_args,
                     bool allow_partial) {
  auto device = load_device_or_default(g);
  xpqc::CharacterizeOptions opts;
  opts.lengths = parse_int_list(lengths_csv);
  opts.k = k;
  opts.shots = shots;
  for (const auto& e : edge_args) opts.edges.push_back(parse_edge(e));
  xpqc::NoiseSpec spec;
  spec.mode = parse_mode(mode);
  spec.seed = g.seed;

  auto result = xpqc::characterize_crosstalk(device, spec, opts);

  write_file(fs::path(g.out) / "decays.csv", xpqc::decay_rows_csv(result.rows));
  write_file(fs::path(g.out) / "xtalk.json",
             xpqc::crosstalk_table_json(result.table) + "\n");
  json independent = json::array();
  for (const auto& [e, epc] : result.independent_epc)
    independent.push_back(
        {{"edge", {e.first, e.second}}, {"epc", epc}});
  write_file(fs::path(g.out) / "independent.json", independent.dump(2) + "\n");

  json params{{"lengths", opts.lengths}, {"k", k},      {"shots", shots},
              {"mode", mode},            {"edges", edge_args},
              {"allow_partial", allow_partial}};
  write_manifest(g, "characterize", argv, params,
                 {"decays.csv", "xtalk.json", "independent.json"});

  for (const auto& f : result.failures) {
    std::cerr << "fit failure on " << xpqc::edge_str(f.edge);
    if (f.paired_edge) std::cerr << " | " << xpqc::edge_str(*f.paired_edge);
    std::cerr << ": " << f.message << "\n";
  }
  if (!result.failures.empty() && !allow_partial) return kExitNumerical;
  return kExitOk;
}

int run_schedule(const GlobalOpts& g, const std::vector<std::string>& argv,
                 const std::string& circuit_path, double omega,
                 double threshold, bool literal_sign, bool greedy) {
  auto device = load_device_or_default(g);
  xpqc::Circuit c = xpqc::read_circuit_file(circuit_path);
  // schedule the first entangling layer of the circuit
  std::vector<xpqc::Edge> layer;
  for (const auto& op : c.ops) {
    if (op.kind == xpqc::GateKind::Cx)
      layer.push_back(xpqc::make_edge(op.qubits[0], op.qubits[1]));
    else if (!layer.empty())
      break;
  }
  if (layer.empty())
    throw std::invalid_argument("circuit has no entangling layer");
  xpqc::SchedulerOptions sopts;
  sopts.threshold = threshold;
  sopts.paper_literal_sign = literal_sign;
  sopts.greedy_fallback = greedy;
  xpqc::Schedule s = xpqc::xtalk_schedule(layer, device, omega, sopts);
  write_file(fs::path(g.out) / "schedule.json",
             xpqc::schedule_to_json_string(s) + "\n");
  json params{{"circuit", circuit_path},
              {"omega", omega},
              {"threshold", threshold},
              {"paper_literal_sign", literal_sign},
              {"greedy", greedy}};
  write_manifest(g, "schedule", argv, params, {"schedule.json"});
  return kExitOk;
}

int run_build_ansatz(const GlobalOpts& g, const std::vector<std::string>& argv,
                     const std::string& family, const std::string& level,
                     int n, int layers, int m, double threshold) {
  auto device = load_device_or_default(g);
  xpqc::PqcConfig cfg;
  cfg.family = xpqc::parse_family(family);
  cfg.level = xpqc::parse_level(level);
  cfg.n = n;
  cfg.L = layers;
  cfg.m = m;
  cfg.threshold = threshold;
  xpqc::BuiltAnsatz built = xpqc::build_pqc(cfg, device);
  write_file(fs::path(g.out) / "ansatz.txt", xpqc::write_circuit(built.circuit));
  json params{{"family", family}, {"level", level},       {"n", n},
              {"layers", layers}, {"m", m},               {"threshold", threshold},
              {"path", built.device_path},
              {"sublayers", built.sublayer_count},
              {"num_params", built.circuit.num_params}};
  write_manifest(g, "build-ansatz", argv, params, {"ansatz.txt"});
  return kExitOk;
}

struct SweepSpec {
  int n = 5;
  std::vector<int> layers{1, 2, 3, 4};
  int m = 2;
  std::vector<std::string> families;
  std::vector<std::string> metrics;
  int pairs = 5000;
  int bins = 75;
  int samples = 200;
  std::uint64_t shots = 4096;
  std::string mode = "ideal";
  int grad_param = 0;
  int n_c = 2;
};

int run_sweep(const GlobalOpts& g, const std::vector<std::string>& argv,
              const SweepSpec& sw) {
  auto device = load_device_or_default(g);
  std::vector<std::pair<std::string, xpqc::PqcConfig>> configs;
  auto add_config = [&](const std::string& name) {
    xpqc::PqcConfig cfg;
    cfg.n = sw.n;
    cfg.m = sw.m;
    if (name == "base1") cfg.family = xpqc::PqcFamily::Base1;
    else if (name == "base2") cfg.family = xpqc::PqcFamily::Base2;
    else {
      cfg.family = xpqc::PqcFamily::Xtalk;
      cfg.level = xpqc::parse_level(name.substr(name.find('_') + 1));
    }
    configs.emplace_back(name, cfg);
  };
  if (sw.families.empty() ||
      (sw.families.size() == 1 && sw.families[0] == "all")) {
    for (const char* f :
         {"base1", "base2", "xtalk_high", "xtalk_medium", "xtalk_low"})
      add_config(f);
  } else {
    for (const auto& f : sw.families) add_config(f);
  }

  std::ostringstream csv;
  csv << "family,n,L,m,metric,value,stderr\n";
  auto fmt_cell = [](double v) -> std::string {
    if (v == std::floor(v) && std::abs(v) < 1e15)
      return std::to_string(static_cast<long long>(v));
    return xpqc::format_double(v);
  };
  auto emit = [&](const std::string& fam, int L, int m, const std::string& met,
                  double value, double se) {
    csv << fam << "," << sw.n << "," << L << "," << m << "," << met << ","
        << fmt_cell(value) << "," << fmt_cell(se) << "\n";
  };

  std::optional<std::string> first_error;
  for (int L : sw.layers) {
    xpqc::CircuitStats base1_stats;
    bool have_base1 = false;
    {
      auto b1 = xpqc::build_base1(sw.n, L, device);
      base1_stats = xpqc::circuit_stats(b1.circuit, b1.line_device);
      have_base1 = true;
    }
    for (auto& [name, cfg0] : configs) {
      xpqc::PqcConfig cfg = cfg0;
      cfg.L = L;
      if (cfg.family != xpqc::PqcFamily::Xtalk) cfg.m = 0;
      cfg.m = std::min(cfg.m, L);  // shallow grids keep the family usable
      try {
        xpqc::BuiltAnsatz built = xpqc::build_pqc(cfg, device);
        int m_used = cfg.family == xpqc::PqcFamily::Xtalk ? cfg.m : 0;
        for (const auto& met : sw.metrics) {
          if (met == "expressibility") {
            auto e = xpqc::expressibility(built.circuit, sw.pairs, sw.bins,
                                          g.seed);
            emit(name, L, m_used, "expressibility", e.kl, 0.0);
          } else if (met == "entropy") {
            auto part = xpqc::default_partition(built.line_device.coupling,
                                                sw.n, sw.n_c);
            auto e = xpqc::entanglement_entropy(built.circuit, part,
                                                sw.samples, g.seed);
            emit(name, L, m_used, "entropy_bits", e.mean_s,
                 e.std_s / std::sqrt(static_cast<double>(e.n_samples)));
          } else if (met == "gradvar") {
            xpqc::NoiseSpec spec;
            spec.mode = parse_mode(sw.mode);
            spec.device = &built.line_device;
            spec.seed = g.seed;
            auto e = xpqc::grad_variance(built.circuit, xpqc::CostKind::Local,
                                         sw.n_c, sw.grad_param, sw.samples,
                                         spec, sw.shots, g.seed);
            emit(name, L, m_used, "grad_variance", e.variance, 0.0);
          } else if (met == "stats") {
            auto st = xpqc::circuit_stats(built.circuit, built.line_device);
            emit(name, L, m_used, "total_gates", st.total_gates, 0);
            emit(name, L, m_used, "two_qubit_gates", st.two_qubit_gates, 0);
            emit(name, L, m_used, "duration_ns", st.duration_ns, 0);
            emit(name, L, m_used, "depth", st.depth, 0);
            if (have_base1)
              emit(name, L, m_used, "speedup_vs_base1",
                   xpqc::speedup(base1_stats, st), 0);
          } else {
            throw std::invalid_argument("unknown metric '" + met + "'");
          }
        }
      } catch (const std::exception& e) {
        if (!first_error) first_error = e.what();
        emit(name, L, cfg.m, "error", 0, 0);
        std::cerr << "sweep row failed (" << name << ", L=" << L
                  << "): " << e.what() << "\n";
      }
    }
  }
  write_file(fs::path(g.out) / "sweep.csv", csv.str());
  json params{{"n", sw.n},           {"layers", sw.layers},
              {"m", sw.m},           {"families", sw.families},
              {"metrics", sw.metrics}, {"pairs", sw.pairs},
              {"bins", sw.bins},     {"samples", sw.samples},
              {"shots", sw.shots},   {"mode", sw.mode},
              {"n_c", sw.n_c}};
  write_manifest(g, "sweep", argv, params, {"sweep.csv"});
  return kExitOk;
}

int run_vqe_cmd(const GlobalOpts& g, const std::vector<std::string>& argv,
                const std::string& ham_path, const std::string& family,
                const std::string& level, int layers, int m,
                const std::string& mode, std::uint64_t shots, int max_iter) {
  auto device = load_device_or_default(g);
  xpqc::PauliHamiltonian h = xpqc::load_hamiltonian(ham_path);
  xpqc::VqeOptions opts;
  opts.ansatz.family = xpqc::parse_family(family);
  opts.ansatz.level = xpqc::parse_level(level);
  opts.ansatz.L = layers;
  opts.ansatz.m = opts.ansatz.family == xpqc::PqcFamily::Xtalk ? m : 0;
  opts.mode = parse_mode(mode);
  opts.shots = shots;
  opts.spsa.max_iter = max_iter;
  opts.seed = g.seed;
  xpqc::VqeTrace trace = xpqc::run_vqe(h, device, opts);

  write_file(fs::path(g.out) / "trace.csv", xpqc::vqe_trace_csv(trace));
  json summary;
  summary["best_energy"] = trace.best_energy;
  summary["evaluations"] = trace.evaluations;
  summary["aborted"] = trace.aborted;
  if (trace.reference_energy)
    summary["reference_energy"] = *trace.reference_energy;
  write_file(fs::path(g.out) / "vqe_summary.json", summary.dump(2) + "\n");
  json params{{"hamiltonian", ham_path}, {"family", family}, {"level", level},
              {"layers", layers},        {"m", m},           {"mode", mode},
              {"shots", shots},          {"max_iter", max_iter}};
  write_manifest(g, "vqe", argv, params, {"trace.csv", "vqe_summary.json"});
  std::cout << "best_energy " << xpqc::format_double(trace.best_energy);
  if (trace.reference_energy)
    std::cout << " reference " << xpqc::format_double(*trace.reference_energy);
  std::cout << "\n";
  return trace.aborted ? kExitNumerical : kExitOk;
}

int dispatch(const std::vector<std::string>& argv);

int run_rerun(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  json m = json::parse(in);
  std::vector<std::string> argv = m.at("argv").get<std::vector<std::string>>();
  return dispatch(argv);
}

int dispatch(const std::vector<std::string>& argv) {
  CLI::App app{"Crosstalk-aware variational-ansatz toolkit"};
  app.require_subcommand(1);
  GlobalOpts g;
  app.add_option("--seed", g.seed, "global RNG seed");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--device", g.device_path,
                 "device JSON (defaults to the bundled 16-qubit model)");
  app.add_option("--threads", g.threads,
                 "worker threads (XTALK_PQC_THREADS, then cores)");

  auto* c_char = app.add_subcommand(
      "characterize", "SRB crosstalk characterization against the simulator");
  std::string lengths = "1,5,10,20,40";
  int k = 10;
  std::uint64_t shots = 10000;
  std::string mode = "xtalk";
  std::vector<std::string> edges;
  bool allow_partial = false;
  c_char->add_option("--lengths", lengths, "sequence lengths, comma-separated");
  c_char->add_option("--k", k, "sequences per length");
  c_char->add_option("--shots", shots, "shots per circuit");
  c_char->add_option("--mode", mode, "ideal|standard|xtalk");
  c_char->add_option("--edges", edges, "restrict to edges 'a,b' (repeatable)");
  c_char->add_flag("--allow-partial", allow_partial,
                   "exit 0 even when some fits fail");

  auto* c_sched = app.add_subcommand(
      "schedule", "crosstalk-adaptive scheduling of a circuit's first "
                  "entangling layer");
  std::string circuit_path;
  double omega = 0.5, threshold = 1.0;
  bool literal_sign = false, greedy = false;
  c_sched->add_option("--circuit", circuit_path, "circuit text file")
      ->required();
  c_sched->add_option("--omega", omega, "gate-error weight in [0,1]");
  c_sched->add_option("--threshold", threshold,
                      "conditional/independent admission threshold");
  c_sched->add_flag("--paper-literal-sign", literal_sign,
                    "keep the printed minus on the decoherence term");
  c_sched->add_flag("--greedy", greedy, "greedy fallback past 12 gates");

  auto* c_build = app.add_subcommand("build-ansatz", "construct a PQC family");
  std::string family = "base1", level = "medium";
  int n = 4, layers = 1, m = 2;
  double bthreshold = 1.0;
  c_build->add_option("--family", family, "base1|base2|xtalk");
  c_build->add_option("--level", level, "high|medium|low (xtalk)");
  c_build->add_option("--n", n, "qubit count");
  c_build->add_option("--layers", layers, "total layers L");
  c_build->add_option("--m", m, "leading base layers (xtalk)");
  c_build->add_option("--threshold", bthreshold, "scheduler threshold");

  auto* c_sweep = app.add_subcommand(
      "sweep", "metric sweeps across families and layer counts");
  SweepSpec sw;
  std::string layers_csv = "1,2,3,4";
  c_sweep->add_option("--n", sw.n, "qubit count");
  c_sweep->add_option("--layers", layers_csv, "layer counts, comma-separated");
  c_sweep->add_option("--m", sw.m, "leading base layers for xtalk families");
  c_sweep->add_option("--families", sw.families,
                      "all | base1 base2 xtalk_high xtalk_medium xtalk_low");
  c_sweep->add_option("--metrics", sw.metrics,
                      "expressibility entropy gradvar stats")
      ->required();
  c_sweep->add_option("--pairs", sw.pairs, "fidelity pairs (expressibility)");
  c_sweep->add_option("--bins", sw.bins, "histogram bins (expressibility)");
  c_sweep->add_option("--samples", sw.samples, "theta samples");
  c_sweep->add_option("--shots", sw.shots, "shots per cost evaluation");
  c_sweep->add_option("--mode", sw.mode, "ideal|standard|xtalk (gradvar)");
  c_sweep->add_option("--n-c", sw.n_c, "local cost qubits");
  c_sweep->add_option("--grad-param", sw.grad_param, "gradient parameter index");

  auto* c_vqe = app.add_subcommand("vqe", "VQE on a Pauli-sum Hamiltonian");
  std::string ham_path, vfamily = "base1", vlevel = "medium",
              vmode = "ideal";
  int vlayers = 5, vm = 2, max_iter = 100;
  std::uint64_t vshots = 4096;
  c_vqe->add_option("--hamiltonian", ham_path, "hamiltonian JSON")->required();
  c_vqe->add_option("--family", vfamily, "base1|base2|xtalk");
  c_vqe->add_option("--level", vlevel, "high|medium|low");
  c_vqe->add_option("--layers", vlayers, "ansatz layers");
  c_vqe->add_option("--m", vm, "leading base layers (xtalk)");
  c_vqe->add_option("--mode", vmode, "ideal|standard|xtalk");
  c_vqe->add_option("--shots", vshots, "shots per expectation setting");
  c_vqe->add_option("--max-iter", max_iter, "SPSA iterations");

  auto* c_rerun = app.add_subcommand("rerun", "replay a manifest");
  std::string manifest_path;
  c_rerun->add_option("--manifest", manifest_path, "manifest.json path")
      ->required();

  std::vector<const char*> cargv;
  cargv.push_back("xtalk_pqc");
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInput;
  }

  xpqc::set_max_threads(g.threads);
  fs::create_directories(g.out);

  if (c_rerun->parsed()) return run_rerun(manifest_path);
  if (c_char->parsed())
    return run_characterize(g, argv, lengths, k, shots, mode, edges,
                            allow_partial);
  if (c_sched->parsed())
    return run_schedule(g, argv, circuit_path, omega, threshold, literal_sign,
                        greedy);
  if (c_build->parsed())
    return run_build_ansatz(g, argv, family, level, n, layers, m, bthreshold);
  if (c_sweep->parsed()) {
    sw.layers = parse_int_list(layers_csv);
    return run_sweep(g, argv, sw);
  }
  if (c_vqe->parsed())
    return run_vqe_cmd(g, argv, ham_path, vfamily, vlevel, vlayers, vm, vmode,
                       vshots, max_iter);
  return kExitInput;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
