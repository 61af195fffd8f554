#include "nac/ode.hpp"

#include "nac/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nac {

std::vector<double> OdeRunConfig::effective_record_times() const {
  if (!record_times.empty()) return record_times;
  std::vector<double> out;
  const long long n = static_cast<long long>(std::floor(t_end / record_every + 1e-9));
  for (long long i = 0; i <= n; ++i) out.push_back(static_cast<double>(i) * record_every);
  if (out.back() < t_end - 1e-12) out.push_back(t_end);
  return out;
}

void OdeRunConfig::validate() const {
  if (!(dt > 0.0 && dt <= 0.1)) throw std::invalid_argument("dt must lie in (0, 0.1]");
  if (!(t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (record_times.empty() && !(record_every > 0.0)) throw std::invalid_argument("record_every must be > 0");
  const auto times = effective_record_times();
  if (!std::is_sorted(times.begin(), times.end())) throw std::invalid_argument("record_times must be sorted");
  for (double t : times) {
    if (t < 0.0 || t > t_end + 1e-12) throw std::invalid_argument("record_times must lie in [0, t_end]");
    const double steps = t / dt;
    if (std::abs(steps - std::round(steps)) > 1e-6)
      throw std::invalid_argument("record time " + std::to_string(t) + " is not a multiple of dt");
  }
}

double step_halving_tolerance(double t) { return t > 50.0 ? 1e-4 : 1e-6; }

PolicyTable ode_policy(const OdeState& state, const FiniteMdp& mdp) {
  return softmax_policy(state.p, mdp.n_actions());
}

PolicyTable ode_exploration_policy(const OdeState& state, const FiniteMdp& mdp) {
  return exploration_policy(ode_policy(state, mdp), schedule_values_ct(state.t).eta);
}

OdeDrift drift(const OdeState& state, const FiniteMdp& mdp, const Matrix& kernel, double alpha) {
  const int m = mdp.n_pairs();
  const int na = mdp.n_actions();
  const auto rates = schedule_values_ct(state.t);
  const PolicyTable f = ode_policy(state, mdp);
  const PolicyTable g = exploration_policy(f, rates.eta);
  const Matrix kg = chain_kernel(mdp, g).kernel;
  const Vector pi = stationary_distribution(kg);
  const Vector pi_aux = stationary_distribution(aux_chain_kernel(mdp, g));

  OdeDrift out;
  const Vector residual = mdp.reward_vector() + mdp.gamma() * kg * state.q - state.q;
  out.dq = alpha * kernel * pi.cwiseProduct(residual);

  // weights w(xi') = clip(Q(xi')) pi_aux(xi'); the f-average is folded in per state
  Vector w(m);
  for (int k = 0; k < m; ++k) w(k) = clip(state.q(k)) * pi_aux(k);
  Vector combined = w;
  for (int x = 0; x < mdp.n_states(); ++x) {
    double total = 0.0;
    for (int a = 0; a < na; ++a) total += w(mdp.pair(x, a));
    for (int a = 0; a < na; ++a) combined(mdp.pair(x, a)) -= f(x, a) * total;
  }
  out.dp = rates.zeta * kernel * combined;
  if (!out.dq.allFinite() || !out.dp.allFinite()) throw std::runtime_error("drift produced non-finite values");
  return out;
}

namespace {

OdeState rk4_step(const OdeState& s, double dt, const FiniteMdp& mdp, const Matrix& kernel, double alpha) {
  auto shifted = [&](const OdeDrift& k, double h) {
    return OdeState{s.q + h * k.dq, s.p + h * k.dp, s.t + h};
  };
  const OdeDrift k1 = drift(s, mdp, kernel, alpha);
  const OdeDrift k2 = drift(shifted(k1, 0.5 * dt), mdp, kernel, alpha);
  const OdeDrift k3 = drift(shifted(k2, 0.5 * dt), mdp, kernel, alpha);
  const OdeDrift k4 = drift(shifted(k3, dt), mdp, kernel, alpha);
  OdeState next;
  next.q = s.q + dt / 6.0 * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq);
  next.p = s.p + dt / 6.0 * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  next.t = s.t + dt;
  return next;
}

std::vector<OdeState> integrate_fixed(const OdeState& state0, double dt, const std::vector<long long>& record_steps,
                                      const std::vector<double>& record_times, const FiniteMdp& mdp,
                                      const Matrix& kernel, double alpha) {
  std::vector<OdeState> out;
  OdeState s = state0;
  long long k = 0;
  for (std::size_t r = 0; r < record_steps.size(); ++r) {
    while (k < record_steps[r]) {
      s = rk4_step(s, dt, mdp, kernel, alpha);
      ++k;
      s.t = state0.t + static_cast<double>(k) * dt;
    }
    OdeState rec = s;
    rec.t = state0.t + record_times[r];
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace

OdeTrajectory integrate(const OdeState& state0, const OdeRunConfig& cfg, const FiniteMdp& mdp,
                        const Matrix& kernel) {
  cfg.validate();
  if (kernel.rows() != mdp.n_pairs() || state0.q.size() != mdp.n_pairs() || state0.p.size() != mdp.n_pairs())
    throw std::invalid_argument("integrate: size mismatch between state, kernel and MDP");
  const auto times = cfg.effective_record_times();
  std::vector<long long> steps;
  for (double t : times) steps.push_back(std::llround(t / cfg.dt));

  OdeTrajectory traj;
  traj.states = integrate_fixed(state0, cfg.dt, steps, times, mdp, kernel, cfg.alpha);
  if (cfg.verify_step_halving) {
    std::vector<long long> fine_steps;
    for (long long s : steps) fine_steps.push_back(2 * s);
    const auto fine = integrate_fixed(state0, 0.5 * cfg.dt, fine_steps, times, mdp, kernel, cfg.alpha);
    for (std::size_t i = 0; i < fine.size(); ++i) {
      const double gap = std::max((fine[i].q - traj.states[i].q).cwiseAbs().maxCoeff(),
                                  (fine[i].p - traj.states[i].p).cwiseAbs().maxCoeff());
      traj.halving_gap = std::max(traj.halving_gap, gap);
      if (gap > step_halving_tolerance(times[i]))
        throw StepInconsistency("dt/2 pass differs by " + std::to_string(gap) + " at t=" + std::to_string(times[i]));
    }
  }
  return traj;
}

double critic_gap(const OdeState& state, const FiniteMdp& mdp) {
  const PairFunction v = value_function(mdp, ode_policy(state, mdp));
  return (state.q - v).cwiseAbs().maxCoeff();
}

double grad_norm(const OdeState& state, const FiniteMdp& mdp) {
  return policy_gradient(mdp, state.p).norm();
}

PairFunction approx_grad(const OdeState& state, const FiniteMdp& mdp) {
  const PolicyTable f = ode_policy(state, mdp);
  const PolicyTable g = exploration_policy(f, schedule_values_ct(state.t).eta);
  const Vector sigma = visiting_measure(mdp, g);
  const Vector baseline = state_value(mdp, f, state.q);
  PairFunction out(mdp.n_pairs());
  for (int k = 0; k < mdp.n_pairs(); ++k) out(k) = sigma(k) * (state.q(k) - baseline(mdp.state_of(k)));
  return out;
}

double lyapunov(const OdeState& state, const FiniteMdp& mdp, const Matrix& kernel) {
  const Vector phi = state.q - value_function(mdp, ode_exploration_policy(state, mdp));
  const Eigen::LLT<Matrix> llt(kernel);
  if (llt.info() != Eigen::Success) throw PDCheckFailed("lyapunov: kernel is not positive definite");
  return 0.5 * phi.dot(llt.solve(phi));
}

OdeState coupled_initial_state(const WideNetParams& actor, const WideNetParams& critic, const Embedding& emb) {
  return OdeState{network_output(critic, emb), network_output(actor, emb), 0.0};
}

OdeState gaussian_initial_state(const Embedding& emb, std::uint64_t seed, long long mc_samples, const InitLaw& law) {
  const int m = emb.n_pairs();
  const int d = emb.dim();
  CounterRng rng(seed, streams::kGaussianInit);
  const double wo = law.outer_half_width;
  const double wi = law.inner_width_for(d);
  Matrix cov = Matrix::Zero(m, m);
  Vector w(d);
  for (long long i = 0; i < mc_samples; ++i) {
    const double c = rng.uniform(-wo, wo);
    for (int j = 0; j < d; ++j) w(j) = rng.uniform(-wi, wi);
    const Vector s = (emb.vectors() * w).unaryExpr([](double z) { return sigmoid(z); });
    cov.noalias() += c * c * s * s.transpose();
  }
  cov /= static_cast<double>(mc_samples);
  const Eigen::LDLT<Matrix> ldlt(cov);
  const Matrix l = ldlt.matrixL();
  const Vector dsqrt = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();

  auto normal = [&rng]() {
    const double u1 = 1.0 - rng.uniform();
    const double u2 = rng.uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  };
  auto draw = [&]() {
    Vector z(m);
    for (int k = 0; k < m; ++k) z(k) = normal();
    return Vector(ldlt.transpositionsP().transpose() * (l * dsqrt.cwiseProduct(z)));
  };
  OdeState s;
  s.q = draw();
  s.p = draw();
  s.t = 0.0;
  return s;
}

}  // namespace nac
