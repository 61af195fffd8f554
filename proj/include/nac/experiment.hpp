#pragma once

#include "nac/config.hpp"
#include "nac/kernel.hpp"
#include "nac/trainer.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nac {

/// Settings of a pre-limit vs limit comparison sweep.
struct CompareSettings {
  std::vector<int> n_values;
  std::vector<std::uint64_t> seeds;
  double horizon_T = 5.0;
  double alpha = 1.0;
  double dt = 0.01;
  double record_every = 0.1;
  /// Time of the parameter-measure drift report (capped at horizon_T).
  double drift_time = 2.0;
  bool verify_step_halving = true;
};

/// One (N, seed) run of the comparison sweep.
struct CompareRow {
  int n_hidden = 0;
  std::uint64_t seed = 0;
  /// sup over the grid of ||Q^N_t - Q_t||_inf and ||P^N_t - P_t||_inf.
  double sup_q_gap = 0.0;
  double sup_p_gap = 0.0;
  IncrementStats increments;
  /// |<c^2, nu^N_t> - <c^2, nu^N_0>| for critic and actor parameters at the drift time.
  double drift_critic_c2 = 0.0;
  double drift_actor_c2 = 0.0;
};

/// Runs the trainer and the limit ODE from the coupled initial state for every
/// (N, seed). Rows come back sorted by (N, seed) whatever the worker count.
std::vector<CompareRow> compare_sweep(const FiniteMdp& mdp, const Embedding& emb, const Matrix& kernel,
                                      const CompareSettings& settings, int workers = 1);

/// Recording grid 0, h, 2h, ... up to t_end (within rounding).
std::vector<double> time_grid(double t_end, double h);

struct ExperimentOutcome {
  std::string out_dir;
  /// Data files written, in order (manifest excluded).
  std::vector<std::string> files;
  std::string manifest;
};

/// Runs one experiment kind, writing CSVs and manifest.txt into `out_dir`.
/// Data CSVs are a deterministic function of (cfg, kind).
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, ExperimentKind kind, const std::string& out_dir,
                                 int workers = 1);

}  // namespace nac
