#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

std::string cli_bin() {
  const char* env = std::getenv("XPQC_CLI_BIN");
  return env ? env : "";
}

int run_cli(const std::string& args) {
  std::string cmd = cli_bin() + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli_smoke") {
  if (cli_bin().empty()) {
    MESSAGE("XPQC_CLI_BIN not set; skipping CLI tests");
    return;
  }
  fs::path tmp = fs::temp_directory_path() / "xpqc_cli_test";
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  SUBCASE("build-ansatz writes a parsable circuit and manifest") {
    fs::path out = tmp / "ansatz";
    int rc = run_cli("--seed 7 --out " + out.string() +
                     " build-ansatz --family xtalk --level medium --n 4 "
                     "--layers 3 --m 1");
    CHECK(rc == 0);
    CHECK(fs::exists(out / "ansatz.txt"));
    auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.at("command") == "build-ansatz");
    CHECK(manifest.at("params").at("num_params") == 2 * 4 * 4);
  }

  SUBCASE("schedule emits sublayers") {
    fs::path circ = tmp / "chain.txt";
    {
      std::ofstream f(circ);
      f << "qubits 4\ncx 0 1\ncx 1 2\ncx 2 3\n";
    }
    fs::path out = tmp / "sched";
    int rc = run_cli("--out " + out.string() + " schedule --circuit " +
                     circ.string() + " --omega 1.0");
    CHECK(rc == 0);
    auto sched = nlohmann::json::parse(slurp(out / "schedule.json"));
    CHECK(sched.at("num_sublayers").get<int>() >= 2);
  }

  SUBCASE("malformed device json exits 2") {
    fs::path bad = tmp / "bad.json";
    {
      std::ofstream f(bad);
      f << "{\"num_qubits\": 2}";
    }
    fs::path circ = tmp / "c.txt";
    {
      std::ofstream f(circ);
      f << "cx 0 1\n";
    }
    int rc = run_cli("--device " + bad.string() + " --out " +
                     (tmp / "x").string() + " schedule --circuit " +
                     circ.string());
    CHECK(rc == 2);
  }

  SUBCASE("sweep produces a deterministic csv grid") {
    fs::path out = tmp / "sweep";
    std::string args =
        "--seed 5 --out " + out.string() +
        " sweep --n 4 --layers 1,2 --metrics stats --families all";
    CHECK(run_cli(args) == 0);
    std::string first = slurp(out / "sweep.csv");
    // 5 families x 2 layer values x 5 stat rows + header
    int lines = 0;
    for (char ch : first)
      if (ch == '\n') ++lines;
    CHECK(lines == 1 + 5 * 2 * 5);
    CHECK(run_cli(args) == 0);
    CHECK(slurp(out / "sweep.csv") == first);
  }

  SUBCASE("expressibility sweep: 5 families x 4 layer counts = 20 rows") {
    fs::path out = tmp / "sweep_expr";
    int rc = run_cli("--seed 2 --out " + out.string() +
                     " sweep --n 5 --layers 1,2,3,4 --families all "
                     "--metrics expressibility --pairs 200 --bins 20");
    CHECK(rc == 0);
    std::string csv = slurp(out / "sweep.csv");
    int lines = 0;
    for (char ch : csv)
      if (ch == '\n') ++lines;
    CHECK(lines == 1 + 20);
  }

  SUBCASE("characterize on one pair recovers the table (tiny budget)") {
    fs::path out = tmp / "char";
    int rc = run_cli("--seed 3 --out " + out.string() +
                     " characterize --edges 0,1 --edges 2,3 --lengths 1,4,8 "
                     "--k 2 --shots 400");
    CHECK(rc == 0);
    auto table = nlohmann::json::parse(slurp(out / "xtalk.json"));
    CHECK(table.size() == 2);  // both directions of the (0,1)/(2,3) pair
    CHECK(fs::exists(out / "decays.csv"));
  }

  SUBCASE("vqe runs ideal mode end to end and rerun reproduces it") {
    fs::path out = tmp / "vqe";
    std::string ham =
        std::string(XPQC_SOURCE_DIR) + "/data/hamiltonians/h2_bk_4q.json";
    int rc = run_cli("--seed 1 --out " + out.string() + " vqe --hamiltonian " +
                     ham + " --layers 1 --shots 256 --max-iter 5");
    CHECK(rc == 0);
    auto summary = nlohmann::json::parse(slurp(out / "vqe_summary.json"));
    CHECK(summary.contains("reference_energy"));
    std::string trace = slurp(out / "trace.csv");

    fs::path out2 = tmp / "vqe_rerun";
    // the manifest stores argv; rerun must reproduce outputs byte for byte
    auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    auto argv = manifest.at("argv").get<std::vector<std::string>>();
    bool replaced = false;
    for (auto& a : argv)
      if (a == out.string()) {
        a = out2.string();
        replaced = true;
      }
    REQUIRE(replaced);
    nlohmann::json m2 = manifest;
    m2["argv"] = argv;
    fs::create_directories(out2);
    {
      std::ofstream f(tmp / "manifest_rerun.json");
      f << m2.dump();
    }
    CHECK(run_cli("rerun --manifest " + (tmp / "manifest_rerun.json").string()) ==
          0);
    CHECK(slurp(out2 / "trace.csv") == trace);
  }
}
