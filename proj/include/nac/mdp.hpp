#pragma once

#include <Eigen/Dense>

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nac {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Real function over state-action pairs, indexed by pair = x * n_actions + a.
using PairFunction = Vector;
/// Nonnegative mass over state-action pairs (same indexing as PairFunction).
using PairDistribution = Vector;

class NotErgodic : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMdp : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Finite MDP with known model. Transition probabilities are stored with one
/// row per state-action pair and one column per next state.
class FiniteMdp {
 public:
  /// `transition[x_next][x][a]`, `reward[x][a]`, `rho0` over pairs.
  /// Throws InvalidMdp naming the violated invariant.
  static FiniteMdp create(const std::vector<std::vector<std::vector<double>>>& transition,
                          const std::vector<std::vector<double>>& reward, double gamma,
                          const std::vector<double>& rho0);

  /// Same, from a pair-major table: `next_state_probs(pair, x_next)`.
  static FiniteMdp from_pair_table(int n_states, int n_actions, Matrix next_state_probs,
                                   Matrix reward, double gamma, Vector rho0);

  int n_states() const { return n_states_; }
  int n_actions() const { return n_actions_; }
  int n_pairs() const { return n_states_ * n_actions_; }
  int pair(int x, int a) const { return x * n_actions_ + a; }
  int state_of(int pair) const { return pair / n_actions_; }
  int action_of(int pair) const { return pair % n_actions_; }

  double p(int x_next, int x, int a) const { return next_state_(pair(x, a), x_next); }
  double r(int x, int a) const { return reward_(x, a); }
  double gamma() const { return gamma_; }

  /// M x #X matrix of p(x' | pair).
  const Matrix& next_state_probs() const { return next_state_; }
  /// Reward as a PairFunction.
  const PairFunction& reward_vector() const { return reward_vec_; }
  const Matrix& reward_table() const { return reward_; }
  const PairDistribution& rho0() const { return rho0_; }
  /// Marginal of rho0 over states.
  Vector rho0_states() const;

  /// Copy with a different reward table (validated).
  FiniteMdp with_reward(const Matrix& reward) const;

 private:
  FiniteMdp() = default;
  void validate() const;

  int n_states_ = 0;
  int n_actions_ = 0;
  Matrix next_state_;
  Matrix reward_;
  PairFunction reward_vec_;
  double gamma_ = 0.0;
  PairDistribution rho0_;
};

/// Row-stochastic table f(x, a).
class PolicyTable {
 public:
  /// Throws std::invalid_argument if a row is not a probability vector.
  explicit PolicyTable(Matrix probs);

  static PolicyTable uniform(int n_states, int n_actions);

  int n_states() const { return static_cast<int>(probs_.rows()); }
  int n_actions() const { return static_cast<int>(probs_.cols()); }
  double operator()(int x, int a) const { return probs_(x, a); }
  const Matrix& probs() const { return probs_; }
  /// Flattened in pair order.
  Vector as_pair_vector() const;

 private:
  Matrix probs_;
};

enum class ChainFlavor { critic_chain, actor_aux_chain };

struct ChainKernel {
  Matrix kernel;  // M x M, row-stochastic
  ChainFlavor flavor = ChainFlavor::critic_chain;

  int size() const { return static_cast<int>(kernel.rows()); }
};

enum class Ergodicity { ergodic, reducible, periodic };

std::string to_string(Ergodicity e);

/// K((x,a) -> (x',a')) = p(x'|x,a) g(x',a').
ChainKernel chain_kernel(const FiniteMdp& mdp, const PolicyTable& g);

/// Same with the restart kernel gamma p(x'|x,a) + (1-gamma) rho0(x').
ChainKernel aux_chain_kernel(const FiniteMdp& mdp, const PolicyTable& g);
/// Restart kernel with an explicit continuation weight in (0, 1]; weight 1
/// reproduces chain_kernel.
ChainKernel aux_chain_kernel(const FiniteMdp& mdp, const PolicyTable& g, double continuation);

/// Irreducibility by reachability on entries >= 1e-15, aperiodicity by the
/// gcd of level differences over a BFS tree.
Ergodicity ergodicity_check(const Matrix& kernel);
inline Ergodicity ergodicity_check(const ChainKernel& k) { return ergodicity_check(k.kernel); }

/// Unique stationary law. Throws NotErgodic for reducible or periodic chains.
PairDistribution stationary_distribution(const Matrix& kernel);
inline PairDistribution stationary_distribution(const ChainKernel& k) {
  return stationary_distribution(k.kernel);
}

/// Discounted visiting measure sigma^g_rho0 (total mass 1/(1-gamma)).
PairDistribution visiting_measure(const FiniteMdp& mdp, const PolicyTable& g);

/// Action-value function V^f(x, a); throws SingularSystem on solver failure.
PairFunction value_function(const FiniteMdp& mdp, const PolicyTable& f);

/// V^f(x) = sum_a V^f(x, a) f(x, a).
Vector state_value(const FiniteMdp& mdp, const PolicyTable& f, const PairFunction& v);

/// A^f(x, a) = V^f(x, a) - V^f(x).
PairFunction advantage(const FiniteMdp& mdp, const PolicyTable& f, const PairFunction& v);

/// J(f) = sum_xi sigma^f_rho0(xi) r(xi).
double objective(const FiniteMdp& mdp, const PolicyTable& f);

/// dJ/dP(x,a) = sigma^f_rho0(x,a) A^f(x,a) for f = Softmax(P).
PairFunction policy_gradient(const FiniteMdp& mdp, const PairFunction& logits);

/// Half the l1 distance between two mass vectors.
double tv_distance(std::span<const double> p, std::span<const double> q);
double tv_distance(const Vector& p, const Vector& q);
/// Max over states of the row TV distance.
double policy_distance(const PolicyTable& f, const PolicyTable& h);

}  // namespace nac
