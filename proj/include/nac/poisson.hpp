#pragma once

#include "nac/mdp.hpp"
#include "nac/nets.hpp"
#include "nac/trainer.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace nac {

class NoConvergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solution nu(.) of nu - K nu = 1{. = target} - pi(target) built from the
/// series sum_n [K^n(. -> target) - pi(target)].
struct PoissonSolution {
  PairFunction values;
  int target = 0;
  /// Sup-norm residual of the Poisson equation.
  double residual = 0.0;
  /// Number of series terms summed.
  long long terms = 0;
};

PoissonSolution solve_poisson(const ChainKernel& k, int target, long long max_terms = 10'000'000);

/// Decay of sup_xi TV(K^n(xi -> .), pi) and a dominating (1 - beta)^floor(n / n0).
struct ErgodicityEstimate {
  int n0 = 1;
  double beta = 0.0;
  /// Per-step contraction exp(slope) of the least-squares fit of log TV.
  double decay_rate = 0.0;
  /// Coefficient of determination of that fit (1 when fewer than 3 points).
  double fit_r2 = 1.0;
  std::vector<std::pair<int, double>> tv_curve;
  double min_pi = 0.0;
  /// Smallest n <= n_max with every entry of K^n positive (the minorization
  /// horizon); -1 if none.
  int positivity_horizon = -1;
};

ErgodicityEstimate ergodicity_rate(const ChainKernel& k, int n_max);

/// sum_n (1 - beta)^floor(n / n0): bound on max |nu| implied by an estimate.
double poisson_bound(const ErgodicityEstimate& est);

struct OccupancyRow {
  int n_hidden = 0;
  int pair = 0;
  /// Seed mean of [(1/N) sum_k (1{tilde xi_k = xi} - pi_aux^{g_k}(xi))]^2 at T.
  double mean_sq_deviation = 0.0;
  /// Seed mean of the deviation summed over pairs (identically ~0).
  double mean_total_deviation = 0.0;
};

/// Runs the trainer for every (N, seed) and aggregates the squared
/// normalized occupancy deviation of the actor chain at T.
std::vector<OccupancyRow> fluctuation_decay_experiment(const FiniteMdp& mdp, const Embedding& emb,
                                                       const TrainConfig& base, const std::vector<int>& n_values,
                                                       const std::vector<std::uint64_t>& seeds, int workers = 1);

}  // namespace nac
