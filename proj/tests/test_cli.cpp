#include <doctest.h>

#include "nac/config.hpp"
#include "nac/csv.hpp"
#include "nac/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

using namespace nac;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nac_cli_" + name);
  fs::remove_all(p);
  return p;
}

const char* kInline = R"(mdp:
  n_states: 2
  n_actions: 2
  gamma: 0.8
  transition:
    - [[0.9, 0.1], [0.2, 0.8]]
    - [[0.5, 0.5], [0.3, 0.7]]
  reward:
    - [0.0, 0.5]
    - [1.0, -0.5]
)";

}  // namespace

TEST_CASE("load_config") {
  SUBCASE("minimal fixture config takes every default") {
    const ExperimentConfig cfg = parse_config("mdp: chain3\n");
    const ExperimentConfig def;
    CHECK(cfg.mdp.fixture == "chain3");
    CHECK(cfg.dt == 0.01);
    CHECK(cfg.alpha == 1.0);
    CHECK(cfg.mc_samples == 1'000'000);
    CHECK(cfg.canonical().substr(cfg.canonical().find("n_hidden")) ==
          def.canonical().substr(def.canonical().find("n_hidden")));
    CHECK(cfg.build_mdp().n_pairs() == 6);
  }
  SUBCASE("discount outside (0, 1)") {
    try {
      parse_config("mdp:\n  fixture: chain3\n  gamma: 1.2\n");
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("discount") != std::string::npos);
    }
  }
  SUBCASE("transition row not summing to one is named") {
    std::string text = kInline;
    text.replace(text.find("[0.2, 0.8]"), 10, "[0.2, 0.7]");
    try {
      parse_config(text);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("mdp.transition[0][1]") != std::string::npos);
    }
  }
  SUBCASE("parse errors carry field and line") {
    try {
      parse_config("mdp: chain3\nalpah: 2\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.field() == "alpah");
      CHECK(e.line() == 2);
    }
    try {
      parse_config("mdp: chain3\nseeds: [1, 2\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() > 0);
    }
    CHECK_THROWS_AS(parse_config("mdp: chain3\ndt: fast\n"), ParseError);
    CHECK_THROWS_AS(load_config("/nonexistent/nac.yaml"), ParseError);
  }
  SUBCASE("other invariants") {
    CHECK_THROWS_AS(parse_config("mdp: chain4\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("mdp: chain3\ndt: 0.01\nrecord_every: 0.015\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("mdp: chain3\nmc_samples: 100\n"), ValidationError);
    CHECK_THROWS_AS(parse_config("mdp: chain3\nn_hidden: []\n"), ValidationError);
    CHECK_THROWS_AS(parse_kind("simulation"), ValidationError);
  }
}

TEST_CASE("config hash tracks every field") {
  const std::string base = "mdp: chain3\n";
  const std::vector<std::string> edits = {
      "mdp: iid2\n",
      "mdp:\n  fixture: chain3\n  gamma: 0.5\n",
      "mdp:\n  fixture: chain3\n  rho0: [0.5, 0.5, 0, 0, 0, 0]\n",
      std::string(kInline),
      base + "kind: ode\n",
      base + "embedding: [[0,1],[1,1],[2,1],[3,1],[4,1],[5,1]]\n",
      base + "n_hidden: [101]\n",
      base + "seeds: [2]\n",
      base + "horizon_T: 2\n",
      base + "alpha: 0.5\n",
      base + "dt: 0.005\n",
      base + "t_end: 11\n",
      base + "record_every: 0.2\n",
      base + "diagnostics_period: 3\n",
      base + "drift_time: 1\n",
      base + "track_fluctuations: true\n",
      base + "zero_critic_outer: true\n",
      base + "zero_actor_outer: true\n",
      base + "mc_samples: 20000\n",
      base + "kernel_seed: 4\n",
      base + "kernel_file: k.csv\n",
      base + "ode_init: gaussian\n",
      base + "verify_step_halving: false\n",
      base + "etas: [0.5]\n",
      base + "n_max: 61\n",
      base + "poisson_policy: uniform\n",
      base + "n_instances: 21\n",
      base + "fd_step: 1.0e-6\n",
      base + "output_dir: elsewhere\n",
  };
  std::set<std::string> hashes{config_hash(parse_config(base))};
  for (const auto& e : edits) {
    INFO(e);
    CHECK(hashes.insert(config_hash(parse_config(e))).second);
  }
  // same fields, different layout
  CHECK(config_hash(parse_config(base + "alpha: 1.0\n# comment\n")) == config_hash(parse_config(base)));
  CHECK(config_hash(parse_config("seeds: [1]\n" + base)) == config_hash(parse_config(base)));
}

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 10'000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
  for (double v : {0.0, 1.0, 0.1, 1e-300, 4.9e-324, 1.7976931348623157e308})
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
}

TEST_CASE("run_experiment") {
  ExperimentConfig cfg = parse_config(
      "mdp: chain3\nn_hidden: [50, 80]\nseeds: [1, 2]\nhorizon_T: 1\nrecord_every: 0.5\n"
      "track_fluctuations: true\nmc_samples: 20000\nt_end: 1\n");

  SUBCASE("same config, byte-identical CSVs") {
    for (ExperimentKind kind : {ExperimentKind::simulate, ExperimentKind::ode, ExperimentKind::compare}) {
      const fs::path a = scratch("a"), b = scratch("b");
      const ExperimentOutcome ra = run_experiment(cfg, kind, a.string());
      const ExperimentOutcome rb = run_experiment(cfg, kind, b.string(), 2);
      REQUIRE(ra.files == rb.files);
      REQUIRE(!ra.files.empty());
      for (const auto& f : ra.files) {
        INFO(f);
        CHECK(slurp(a / f) == slurp(b / f));
      }
      fs::remove_all(a);
      fs::remove_all(b);
    }
  }

  SUBCASE("every CSV has a header and parses back") {
    const fs::path dir = scratch("csv");
    const ExperimentOutcome r = run_experiment(cfg, ExperimentKind::simulate, dir.string());
    for (const auto& f : r.files) {
      std::ifstream in(dir / f);
      std::string line;
      REQUIRE(std::getline(in, line));
      const auto header = split_csv_line(line);
      for (const auto& h : header) CHECK((!h.empty() && !std::isdigit(static_cast<unsigned char>(h[0]))));
      int rows = 0;
      while (std::getline(in, line)) {
        const auto cells = split_csv_line(line);
        CHECK(cells.size() == header.size());
        for (const auto& c : cells) {
          char* end = nullptr;
          const double v = std::strtod(c.c_str(), &end);
          if (*end == '\0') CHECK(format_double(v) == c);
        }
        ++rows;
      }
      CHECK(rows > 0);
    }
    const std::string manifest = slurp(r.manifest);
    CHECK(manifest.find("config_hash=" + config_hash(cfg)) != std::string::npos);
    CHECK(manifest.find("seeds=1,2") != std::string::npos);
    CHECK(manifest.find("version=") != std::string::npos);
    fs::remove_all(dir);
  }

  SUBCASE("ode with zero reward and zero critic has zero Q columns") {
    const ExperimentConfig z = parse_config(
        "mdp: chain3_zero_reward\nzero_critic_outer: true\nn_hidden: 60\nseeds: [3]\nt_end: 2\n"
        "record_every: 0.5\nmc_samples: 20000\n");
    const fs::path dir = scratch("ode0");
    const ExperimentOutcome r = run_experiment(z, ExperimentKind::ode, dir.string());
    REQUIRE(std::find(r.files.begin(), r.files.end(), "ode_seed3.csv") != r.files.end());
    std::ifstream in(dir / "ode_seed3.csv");
    std::string line;
    std::getline(in, line);
    const auto header = split_csv_line(line);
    int rows = 0, q_cols = 0;
    while (std::getline(in, line)) {
      const auto cells = split_csv_line(line);
      for (std::size_t j = 0; j < header.size(); ++j)
        if (header[j].size() > 1 && header[j][0] == 'q' && std::isdigit(static_cast<unsigned char>(header[j][1]))) {
          CHECK(std::stod(cells[j]) == 0.0);
          ++q_cols;
        }
      ++rows;
    }
    CHECK(rows == 5);
    CHECK(q_cols == 5 * 6);
    fs::remove_all(dir);
  }
}

#ifdef NACBENCH_PATH
TEST_CASE("nacbench error records") {
  const fs::path dir = scratch("proc");
  fs::create_directories(dir);
  const auto run = [&](const std::string& args) {
    const std::string cmd = std::string(NACBENCH_PATH) + " " + args + " 2> " + (dir / "err.txt").string() +
                            " > " + (dir / "out.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  {
    std::ofstream(dir / "bad.yaml") << "mdp:\n  fixture: chain3\n  gamma: 1.2\n";
    CHECK(run("simulate --config " + (dir / "bad.yaml").string()) == 2);
    const auto rec = nlohmann::json::parse(slurp(dir / "err.txt"));
    CHECK(rec["error"] == "ValidationError");
    CHECK(rec["exit_code"] == 2);
  }
  {
    std::ofstream(dir / "typo.yaml") << "mdp: chain3\nseedz: [1]\n";
    CHECK(run("simulate --config " + (dir / "typo.yaml").string()) == 2);
    const auto rec = nlohmann::json::parse(slurp(dir / "err.txt"));
    CHECK(rec["error"] == "ParseError");
    CHECK(rec["line"] == 2);
    CHECK(rec["field"] == "seedz");
  }
  {
    std::ofstream(dir / "ok.yaml") << "mdp: chain3\n";
    CHECK(run("simulation --config " + (dir / "ok.yaml").string()) == 2);
    CHECK(nlohmann::json::parse(slurp(dir / "err.txt"))["error"] == "ValidationError");
    CHECK(run("simulate") == 2);
    CHECK(nlohmann::json::parse(slurp(dir / "err.txt"))["error"] == "UsageError");
  }
  {
    std::ofstream(dir / "k.yaml") << "mdp: chain3\nmc_samples: 20000\n";
    CHECK(run("kernel --config " + (dir / "k.yaml").string() + " --out " + (dir / "kout").string()) == 0);
    CHECK(fs::exists(dir / "kout" / "manifest.txt"));
  }
  fs::remove_all(dir);
}
#endif
