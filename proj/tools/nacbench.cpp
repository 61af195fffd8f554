// nacbench <kind> --config <path> [--out <dir>] [--workers <n>]
//
// Output directory: --out, else output_dir from the config, else
// $NACBENCH_OUT, else ./nacbench_out. Failures print one JSON object to
// stderr and exit nonzero (2 for bad input, 1 otherwise).

#include "nac/config.hpp"
#include "nac/experiment.hpp"
#include "nac/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <iostream>

namespace {

int report(const std::string& type, const std::string& message, int code, nlohmann::json extra = {}) {
  nlohmann::json rec = {{"error", type}, {"message", message}, {"exit_code", code}};
  if (extra.is_object()) rec.update(extra);
  std::cerr << rec.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online neural actor-critic workbench"};
  app.set_version_flag("--version", std::string(nac::kVersion));
  std::string kind_name, config_path, out_dir;
  int workers = 1;
  app.add_option("kind", kind_name,
                 "simulate | ode | compare | kernel | poisson-check | gradcheck | fluctuation-sweep")
      ->required();
  app.add_option("--config", config_path, "YAML experiment config")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "parallel runs")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("UsageError", e.what(), 2);
  }

  const nlohmann::json ctx = {{"kind", kind_name}, {"config", config_path}};
  try {
    const nac::ExperimentKind kind = nac::parse_kind(kind_name);
    nac::ExperimentConfig cfg = nac::load_config(config_path);
    if (out_dir.empty()) out_dir = cfg.output_dir;
    if (out_dir.empty()) {
      const char* env = std::getenv("NACBENCH_OUT");
      out_dir = env && *env ? env : "nacbench_out";
    }
    const auto outcome = nac::run_experiment(cfg, kind, out_dir, workers);
    std::cout << "wrote " << outcome.files.size() << " files to " << outcome.out_dir << "\n";
    for (const auto& f : outcome.files) std::cout << "  " << f << "\n";
    std::cout << "manifest " << outcome.manifest << "\n";
    return 0;
  } catch (const nac::ParseError& e) {
    nlohmann::json extra = ctx;
    extra["field"] = e.field();
    extra["line"] = e.line();
    return report("ParseError", e.what(), 2, extra);
  } catch (const nac::ValidationError& e) {
    return report("ValidationError", e.what(), 2, ctx);
  } catch (const std::exception& e) {
    return report("RuntimeError", e.what(), 1, ctx);
  }
}
