#pragma once

#include "nac/mdp.hpp"
#include "nac/nets.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nac {

/// Malformed file, unknown field or a value of the wrong type. The message
/// carries the field path and, when known, the line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& field, int line, const std::string& what);
  const std::string& field() const { return field_; }
  int line() const { return line_; }

 private:
  std::string field_;
  int line_;
};

/// Well-formed file whose values violate an invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { simulate, ode, compare, kernel, poisson_check, gradcheck, fluctuation_sweep };

std::string to_string(ExperimentKind kind);
/// Throws ValidationError for unknown names.
ExperimentKind parse_kind(const std::string& name);

enum class OdeInit { coupled, gaussian, zero };

/// MDP given either by fixture name or by inline tables.
struct MdpSpec {
  std::string fixture;  // empty when inline
  int n_states = 0;
  int n_actions = 0;
  /// transition[x][a][x'] (inline only).
  std::vector<std::vector<std::vector<double>>> transition;
  /// reward[x][a] (inline only).
  std::vector<std::vector<double>> reward;
  /// Overrides the fixture discount when set; required for inline MDPs.
  std::optional<double> gamma;
  /// Over pairs; empty means uniform.
  std::vector<double> rho0;
};

struct ExperimentConfig {
  std::optional<ExperimentKind> kind;
  MdpSpec mdp;
  /// Empty means the default one-hot embedding; otherwise one row per pair.
  std::vector<std::vector<double>> embedding;

  std::vector<int> n_hidden{100};
  std::vector<std::uint64_t> seeds{1};
  double horizon_T = 1.0;
  double alpha = 1.0;
  double dt = 0.01;
  double t_end = 10.0;
  /// Spacing of the recording grid for trainer and ODE output.
  double record_every = 0.1;
  int diagnostics_period = 0;
  /// Time at which parameter-measure drift is reported (capped at horizon_T).
  double drift_time = 2.0;
  bool track_fluctuations = false;
  bool zero_critic_outer = false;
  bool zero_actor_outer = false;

  long long mc_samples = 1'000'000;
  std::uint64_t kernel_seed = 0;
  /// Precomputed kernel CSV; empty means estimate it.
  std::string kernel_file;

  OdeInit ode_init = OdeInit::coupled;
  bool verify_step_halving = true;

  /// poisson-check: exploration levels, TV horizon and the policy mixed in.
  std::vector<double> etas{1.0, 0.5, 0.1};
  int n_max = 60;
  std::string poisson_policy = "last_action";

  /// gradcheck: number of random logit draws and finite-difference step.
  int n_instances = 20;
  double fd_step = 1e-5;

  std::string output_dir;

  /// Throws ValidationError naming the violated invariant.
  void validate() const;
  FiniteMdp build_mdp() const;
  Embedding build_embedding(const FiniteMdp& mdp) const;
  /// Text listing every field in a fixed order; the manifest hash is taken of it.
  std::string canonical() const;
};

/// Reads a YAML file and fills defaults. Throws ParseError or ValidationError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& data);
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace nac
