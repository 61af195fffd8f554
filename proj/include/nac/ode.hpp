#pragma once

#include "nac/kernel.hpp"
#include "nac/mdp.hpp"
#include "nac/nets.hpp"

#include <stdexcept>
#include <vector>

namespace nac {

class StepInconsistency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Limit critic Q_t and actor logits P_t at time t.
struct OdeState {
  PairFunction q;
  PairFunction p;
  double t = 0.0;
};

struct OdeDrift {
  PairFunction dq;
  PairFunction dp;
};

struct OdeRunConfig {
  double dt = 0.01;
  double t_end = 0.0;
  double alpha = 1.0;
  /// Recording grid. Empty means every `record_every` time units plus t_end.
  std::vector<double> record_times;
  double record_every = 1.0;
  /// Re-integrate with dt/2 and require agreement at every recorded time.
  bool verify_step_halving = true;

  std::vector<double> effective_record_times() const;
  void validate() const;
};

/// Sup-norm tolerance of the dt vs dt/2 check at time t.
double step_halving_tolerance(double t);

struct OdeTrajectory {
  std::vector<OdeState> states;
  /// Largest sup-norm difference against the dt/2 pass (0 when not verified).
  double halving_gap = 0.0;
};

/// Right-hand side of the limit system at (t, Q, P):
///   dQ/dt = alpha A [pi^g o (r + gamma K_g Q - Q)]
///   dP/dt = zeta_t sum_xi' clip(Q(xi')) [A(., xi') - sum_a f(x', a) A(., (x', a))] pi_aux^g(xi')
/// with f = Softmax(P), g the exploration mixture at eta_t, pi^g the stationary
/// law of the critic chain and pi_aux^g the stationary law of the restart chain.
OdeDrift drift(const OdeState& state, const FiniteMdp& mdp, const Matrix& kernel, double alpha);

/// Classical fixed-step RK4. Throws StepInconsistency when the dt/2 pass
/// disagrees beyond step_halving_tolerance.
OdeTrajectory integrate(const OdeState& state0, const OdeRunConfig& cfg, const FiniteMdp& mdp,
                        const Matrix& kernel);

/// f_t = Softmax(P_t) and g_t at eta_t.
PolicyTable ode_policy(const OdeState& state, const FiniteMdp& mdp);
PolicyTable ode_exploration_policy(const OdeState& state, const FiniteMdp& mdp);

/// ||Q_t - V^{f_t}||_inf.
double critic_gap(const OdeState& state, const FiniteMdp& mdp);
/// Euclidean norm of the exact softmax policy gradient at P_t.
double grad_norm(const OdeState& state, const FiniteMdp& mdp);
/// sigma^{g_t}_rho0(x,a) [Q_t(x,a) - sum_a' Q_t(x,a') f_t(x,a')].
PairFunction approx_grad(const OdeState& state, const FiniteMdp& mdp);
/// Y_t = 1/2 phi^T A^{-1} phi with phi = Q_t - V^{g_t}.
double lyapunov(const OdeState& state, const FiniteMdp& mdp, const Matrix& kernel);

/// Q_0, P_0 taken from the finite network outputs of the same draw.
OdeState coupled_initial_state(const WideNetParams& actor, const WideNetParams& critic, const Embedding& emb);

/// Q_0, P_0 drawn from independent mean-zero Gaussians whose covariance
/// E[c^2 sigma(w.xi) sigma(w.xi')] is estimated by sampling the init law.
OdeState gaussian_initial_state(const Embedding& emb, std::uint64_t seed, long long mc_samples = 200'000,
                                const InitLaw& law = {});

}  // namespace nac
