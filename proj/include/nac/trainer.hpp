#pragma once

#include "nac/mdp.hpp"
#include "nac/nets.hpp"
#include "nac/rng.hpp"

#include <cstdint>
#include <vector>

namespace nac {

/// Settings of one online actor-critic run.
struct TrainConfig {
  int n_hidden = 100;
  /// The run executes floor(N * T) steps.
  double horizon_T = 1.0;
  /// Critic rate constant; the critic step is alpha / (N sqrt(N)).
  double alpha = 1.0;
  /// Times t at which (Q, P, f, g) are recorded, at step floor(N t). Empty
  /// means {0, T}.
  std::vector<double> record_times;
  /// Times at which full parameter copies are kept (for measure drift).
  std::vector<double> param_snapshot_times;
  std::uint64_t seed = 0;
  /// Steps between exact recomputes of the stationary laws and kernels used
  /// by the fluctuation diagnostics; 0 means ceil(N / 50).
  int diagnostics_period = 0;
  bool track_fluctuations = false;
  bool track_occupancy = false;
  /// Start with C == 0 (resp. B == 0); used to build frozen runs.
  bool zero_critic_outer = false;
  bool zero_actor_outer = false;
  InitLaw init_law{};

  long long total_steps() const;
  int effective_diagnostics_period() const;
  std::vector<double> effective_record_times() const;
  /// Throws std::invalid_argument naming the violated invariant.
  void validate() const;
};

struct TrainState {
  WideNetParams actor;
  WideNetParams critic;
  int critic_pair = 0;  // xi_k
  int actor_pair = 0;   // tilde xi_k
  long long step = 0;
  CounterRng rng;
};

struct Snapshot {
  double t = 0.0;
  long long step = 0;
  PairFunction q;
  PairFunction p;
  PolicyTable f = PolicyTable(Matrix::Ones(1, 1));
  PolicyTable g = PolicyTable(Matrix::Ones(1, 1));
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
};

/// Running fluctuation terms sampled at the record times. m1..m3 are the
/// critic terms, m_actor the actor term, each a PairFunction.
struct FluctuationLog {
  std::vector<double> times;
  std::vector<PairFunction> m1, m2, m3, m_actor;
};

/// (1/N) sum_{k < floor(N t)} [1{tilde xi_k = xi} - pi_aux^{g_k}(xi)] at the record times.
struct OccupancyLog {
  std::vector<double> times;
  std::vector<Vector> deviation;
};

/// Largest per-unit parameter increments.
struct IncrementStats {
  double max_dC = 0.0;
  double max_dW = 0.0;
  double max_dB = 0.0;
  double max_dU = 0.0;

  void merge(const IncrementStats& o);
};

struct ParamSnapshot {
  double t = 0.0;
  WideNetParams actor;
  WideNetParams critic;
};

struct RunResult {
  Trajectory trajectory;
  FluctuationLog fluctuations;
  OccupancyLog occupancy;
  IncrementStats increments;
  std::vector<ParamSnapshot> param_snapshots;
  WideNetParams actor0;
  WideNetParams critic0;
  TrainState final_state;
  /// Smallest sampling probability g_k(x, a) seen by any draw.
  double min_sampling_prob = 1.0;
  /// Range of clipped critic values fed to the actor.
  double min_clip = 2.0;
  double max_clip = 0.0;
};

/// Draws the initial parameters and the two initial pairs from rho0.
TrainState initial_state(const FiniteMdp& mdp, const Embedding& emb, const TrainConfig& cfg);

/// One iteration: sample both chains with g_k, update the critic by TD and
/// the actor by the clipped policy-gradient step, advance k.
TrainState train_step(TrainState state, const FiniteMdp& mdp, const Embedding& emb,
                      const TrainConfig& cfg);

/// Same as train_step, also reporting the step's parameter increments.
TrainState train_step(TrainState state, const FiniteMdp& mdp, const Embedding& emb,
                      const TrainConfig& cfg, IncrementStats& increments);

/// Full run of floor(N T) steps with recording and diagnostics.
RunResult run(const FiniteMdp& mdp, const Embedding& emb, const TrainConfig& cfg);

}  // namespace nac
