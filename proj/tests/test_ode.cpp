#include <doctest.h>

#include "nac/fixtures.hpp"
#include "nac/kernel.hpp"
#include "nac/ode.hpp"
#include "nac/trainer.hpp"
#include "support/oracles.hpp"

#include <cmath>
#include <random>

using namespace nac;

namespace {

const LimitKernel& chain3_kernel() {
  static const LimitKernel k = estimate_limit_kernel(default_embedding(chain3()), 200'000, 3);
  return k;
}

Vector random_vector(int m, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(m);
  for (int i = 0; i < m; ++i) v(i) = u(rng);
  return v;
}

// Both drift components with every sum written out. The actor weights use
// the normalized restart-chain law (1 - gamma) * visiting series.
OdeDrift naive_drift(const OdeState& s, const FiniteMdp& mdp, const Matrix& a, double alpha) {
  const int m = mdp.n_pairs(), na = mdp.n_actions(), ns = mdp.n_states();
  const double zeta = 1.0 / (1.0 + s.t);
  const double l = std::log(s.t + 1.0);
  const double eta = 1.0 / (1.0 + l * l);
  const PolicyTable f = oracle::softmax_naive(s.p, na);
  Matrix gp(ns, na);
  for (int x = 0; x < ns; ++x)
    for (int b = 0; b < na; ++b) gp(x, b) = eta / na + (1.0 - eta) * f(x, b);
  const PolicyTable g(gp);
  const Vector pi = oracle::power_iteration(oracle::naive_kernel(mdp, g), 20'000);
  const Vector sigma = (1.0 - mdp.gamma()) * oracle::visiting_series(mdp, g);

  OdeDrift out{Vector::Zero(m), Vector::Zero(m)};
  for (int xi = 0; xi < m; ++xi) {
    for (int xp = 0; xp < m; ++xp) {
      double next = 0.0;
      for (int z = 0; z < ns; ++z)
        for (int b = 0; b < na; ++b) next += s.q(z * na + b) * g(z, b) * mdp.p(z, xp / na, xp % na);
      out.dq(xi) += alpha * a(xi, xp) * (mdp.reward_vector()(xp) + mdp.gamma() * next - s.q(xp)) * pi(xp);

      double avg = 0.0;
      for (int b = 0; b < na; ++b) avg += f(xp / na, b) * a(xi, (xp / na) * na + b);
      const double c = std::max(0.0, std::min(2.0, s.q(xp)));
      out.dp(xi) += zeta * c * (a(xi, xp) - avg) * sigma(xp);
    }
  }
  return out;
}

OdeRunConfig run_config(double t_end, double dt = 0.01) {
  OdeRunConfig c;
  c.dt = dt;
  c.t_end = t_end;
  c.record_every = 1.0;
  return c;
}

}  // namespace

TEST_CASE("drift") {
  const FiniteMdp m = chain3();
  const Matrix& a = chain3_kernel().a;
  std::mt19937_64 rng(12);

  SUBCASE("zero reward and zero critic give zero drift") {
    const OdeState s{Vector::Zero(6), random_vector(6, rng), 0.7};
    const OdeDrift d = drift(s, chain3_zero_reward(), a, 1.0);
    CHECK(d.dq.cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.dp.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("critic component vanishes at the Bellman fixed point") {
    for (int i = 0; i < 30; ++i) {
      const int ns = 1 + static_cast<int>(rng() % 5), na = 2 + static_cast<int>(rng() % 4);
      const FiniteMdp mdp = oracle::random_mdp(ns, na, rng());
      OdeState s{Vector::Zero(ns * na), random_vector(ns * na, rng, 2.0), 3.0 * (i % 5)};
      s.q = value_function(mdp, ode_exploration_policy(s, mdp));
      const Matrix k = estimate_limit_kernel(default_embedding(mdp), 20'000, 1).a;
      CHECK(drift(s, mdp, k, 1.0).dq.cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  SUBCASE("matches a naive recomputation on chain3") {
    for (int i = 0; i < 10; ++i) {
      const OdeState s{random_vector(6, rng, 2.5), random_vector(6, rng, 2.0), 0.5 * i};
      const OdeDrift d = drift(s, m, a, 1.3);
      const OdeDrift ref = naive_drift(s, m, a, 1.3);
      CHECK((d.dq - ref.dq).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((d.dp - ref.dp).cwiseAbs().maxCoeff() < 1e-10);
    }
  }

  SUBCASE("matches a naive recomputation on random MDPs") {
    for (int i = 0; i < 10; ++i) {
      const int ns = 2 + static_cast<int>(rng() % 3), na = 2 + static_cast<int>(rng() % 3);
      const FiniteMdp mdp = oracle::random_mdp(ns, na, rng(), 0.8);
      const Matrix k = estimate_limit_kernel(default_embedding(mdp), 20'000, 2).a;
      const OdeState s{random_vector(ns * na, rng, 2.5), random_vector(ns * na, rng), 1.0 + i};
      const OdeDrift d = drift(s, mdp, k, 1.0);
      const OdeDrift ref = naive_drift(s, mdp, k, 1.0);
      CHECK((d.dq - ref.dq).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((d.dp - ref.dp).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("integrate") {
  const FiniteMdp m = chain3();
  const Matrix& a = chain3_kernel().a;
  std::mt19937_64 rng(13);
  const OdeState s0{random_vector(6, rng, 0.3), random_vector(6, rng, 0.3), 0.0};

  SUBCASE("t_end = 0 returns the initial state") {
    const OdeTrajectory tr = integrate(s0, run_config(0.0), m, a);
    REQUIRE(tr.states.size() == 1);
    CHECK(tr.states[0].q == s0.q);
    CHECK(tr.states[0].p == s0.p);
    CHECK(tr.states[0].t == 0.0);
  }

  SUBCASE("zero field is preserved exactly") {
    const OdeState z{Vector::Zero(6), s0.p, 0.0};
    const OdeTrajectory tr = integrate(z, run_config(5.0), chain3_zero_reward(), a);
    CHECK(tr.states.size() == 6);
    for (const auto& s : tr.states) {
      CHECK(s.q.cwiseAbs().maxCoeff() == 0.0);
      CHECK(s.p == s0.p);
    }
  }

  SUBCASE("finite differences match the drift") {
    const double dt = 0.01;
    OdeRunConfig cfg = run_config(3.01, dt);
    cfg.record_times = {0.0, 0.01, 1.0, 1.01, 3.0, 3.01};
    const OdeTrajectory tr = integrate(s0, cfg, m, a);
    for (int i = 0; i < 6; i += 2) {
      const OdeDrift d = drift(tr.states[i], m, a, 1.0);
      const Vector fq = (tr.states[i + 1].q - tr.states[i].q) / dt;
      const Vector fp = (tr.states[i + 1].p - tr.states[i].p) / dt;
      CHECK((fq - d.dq).cwiseAbs().maxCoeff() < 10 * dt);
      CHECK((fp - d.dp).cwiseAbs().maxCoeff() < 10 * dt);
    }
  }

  SUBCASE("step halving stays within the gate") {
    const OdeTrajectory tr = integrate(s0, run_config(10.0), m, a);
    CHECK(tr.halving_gap < step_halving_tolerance(10.0));
    CHECK(tr.halving_gap > 0.0);
  }

  SUBCASE("per-state shifts of P0 do not change the policy path") {
    OdeState shifted = s0;
    for (int x = 0; x < 3; ++x) shifted.p.segment(2 * x, 2).array() += 0.7 * (x + 1);
    const OdeTrajectory a1 = integrate(s0, run_config(5.0), m, a);
    const OdeTrajectory a2 = integrate(shifted, run_config(5.0), m, a);
    for (std::size_t i = 0; i < a1.states.size(); ++i) {
      CHECK((a1.states[i].q - a2.states[i].q).cwiseAbs().maxCoeff() < 1e-6);
      CHECK(policy_distance(ode_policy(a1.states[i], m), ode_policy(a2.states[i], m)) < 1e-6);
    }
  }

  SUBCASE("configuration errors") {
    CHECK_THROWS_AS(integrate(s0, run_config(1.0, 0.2), m, a), std::invalid_argument);
    OdeRunConfig cfg = run_config(1.0);
    cfg.record_times = {0.0, 0.555};
    CHECK_THROWS_AS(integrate(s0, cfg, m, a), std::invalid_argument);
    CHECK_THROWS_AS(integrate(s0, run_config(1.0), m, Matrix::Identity(4, 4)), std::invalid_argument);
  }
}

TEST_CASE("critic_gap") {
  const FiniteMdp m = chain3();
  std::mt19937_64 rng(14);
  OdeState s{Vector::Zero(6), random_vector(6, rng), 2.0};
  const PairFunction v = value_function(m, ode_policy(s, m));
  s.q = v;
  CHECK(critic_gap(s, m) < 1e-12);
  s.q(3) += 0.3;
  CHECK(std::abs(critic_gap(s, m) - 0.3) < 1e-12);
}

TEST_CASE("grad_norm and approx_grad") {
  std::mt19937_64 rng(15);

  SUBCASE("constant reward has zero gradient") {
    const FiniteMdp m = chain3().with_reward(Matrix::Constant(3, 2, 0.4));
    for (int i = 0; i < 10; ++i) {
      const OdeState s{Vector::Zero(6), random_vector(6, rng, 3.0), 1.0};
      CHECK(grad_norm(s, m) < 1e-12);
    }
  }

  SUBCASE("grad_norm is the norm of the finite-difference gradient") {
    const FiniteMdp m = chain3();
    const OdeState s{Vector::Zero(6), random_vector(6, rng), 1.0};
    CHECK(std::abs(grad_norm(s, m) - oracle::fd_gradient(m, s.p, 1e-5).norm()) < 1e-6);
  }

  SUBCASE("approx_grad within twice the critic gap of the exact advantage form") {
    // |(Q - sum Q f) - (V - sum V f)| <= 2 ||Q - V||
    for (int i = 0; i < 20; ++i) {
      const FiniteMdp m = oracle::random_mdp(3, 3, rng());
      OdeState s{Vector::Zero(9), random_vector(9, rng, 2.0), 5.0 * i};
      const PolicyTable f = ode_policy(s, m);
      const PairFunction v = value_function(m, f);
      s.q = v + random_vector(9, rng, 0.2);
      const Vector sigma = oracle::visiting_series(m, ode_exploration_policy(s, m));
      const PairFunction adv = advantage(m, f, v);
      const PairFunction ag = approx_grad(s, m);
      const double gap = critic_gap(s, m);
      for (int k = 0; k < 9; ++k) CHECK(std::abs(ag(k) - sigma(k) * adv(k)) <= 2.0 * gap * sigma(k) + 1e-9);
    }
  }

  SUBCASE("with an exact critic, approx_grad approaches the gradient as eta falls") {
    const FiniteMdp m = chain3();
    const Vector logits = random_vector(6, rng, 1.5);
    const PairFunction exact = policy_gradient(m, logits);
    double prev = std::numeric_limits<double>::infinity();
    for (double t : {1.0, 100.0, 1e6, 1e30}) {
      OdeState s{Vector::Zero(6), logits, t};
      s.q = value_function(m, ode_policy(s, m));
      const double diff = (approx_grad(s, m) - exact).cwiseAbs().maxCoeff();
      CHECK(diff < prev);
      prev = diff;
    }
  }
}

TEST_CASE("lyapunov") {
  const FiniteMdp m = chain3();
  const Matrix& a = chain3_kernel().a;
  std::mt19937_64 rng(16);
  OdeState s{Vector::Zero(6), random_vector(6, rng), 4.0};
  s.q = value_function(m, ode_exploration_policy(s, m));
  CHECK(std::abs(lyapunov(s, m, a)) < 1e-20);

  const double lambda_max = Eigen::SelfAdjointEigenSolver<Matrix>(a).eigenvalues().maxCoeff();
  for (int i = 0; i < 20; ++i) {
    OdeState t = s;
    const Vector phi = random_vector(6, rng);
    t.q += phi;
    const double y = lyapunov(t, m, a);
    CHECK(y >= 0.5 * phi.squaredNorm() / lambda_max * (1 - 1e-9));
  }
}

TEST_CASE("initial states") {
  const FiniteMdp m = chain3();
  const Embedding emb = default_embedding(m);

  SUBCASE("zero outer weights give zero outputs") {
    WideNetParams actor = init_params(50, 6, NetRole::actor, 1), critic = init_params(50, 6, NetRole::critic, 1);
    actor.outer.setZero();
    critic.outer.setZero();
    const OdeState s = coupled_initial_state(actor, critic, emb);
    CHECK(s.q.cwiseAbs().maxCoeff() == 0.0);
    CHECK(s.p.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("coupled state equals the trainer's first snapshot") {
    TrainConfig cfg;
    cfg.n_hidden = 300;
    cfg.horizon_T = 0.1;
    cfg.seed = 17;
    const RunResult r = run(m, emb, cfg);
    const OdeState s = coupled_initial_state(r.actor0, r.critic0, emb);
    CHECK(s.q == r.trajectory.snapshots.front().q);
    CHECK(s.p == r.trajectory.snapshots.front().p);
  }

  SUBCASE("coupled Q0 has mean zero over seeds") {
    const int seeds = 500;
    Vector sum = Vector::Zero(6), sq = Vector::Zero(6);
    for (int i = 0; i < seeds; ++i) {
      const OdeState s = coupled_initial_state(init_params(1000, 6, NetRole::actor, 7000 + i),
                                               init_params(1000, 6, NetRole::critic, 7000 + i), emb);
      sum += s.q;
      sq += s.q.cwiseAbs2();
    }
    const Vector mean = sum / seeds;
    const Vector var = (sq / seeds - mean.cwiseAbs2()) * seeds / (seeds - 1.0);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(mean(k)) <= 3.0 * std::sqrt(var(k) / seeds));
  }

  SUBCASE("gaussian mode: deterministic, variance E[c^2 sigma^2]") {
    const OdeState a1 = gaussian_initial_state(emb, 4, 20'000);
    const OdeState a2 = gaussian_initial_state(emb, 4, 20'000);
    CHECK(a1.q == a2.q);
    CHECK(a1.p == a2.p);
    CHECK(a1.q != a1.p);

    // E[c^2] = 1/3 and E[sigma(w.xi)^2] by an independent sampler
    std::mt19937_64 rng(18);
    const double wi = 1.0 / std::sqrt(6.0);
    std::uniform_real_distribution<double> uw(-wi, wi);
    Vector target = Vector::Zero(6);
    const int samples = 400'000;
    Vector w(6);
    for (int s = 0; s < samples; ++s) {
      for (int j = 0; j < 6; ++j) w(j) = uw(rng);
      for (int k = 0; k < 6; ++k) {
        const double sg = 1.0 / (1.0 + std::exp(-w.dot(emb.row(k).transpose())));
        target(k) += sg * sg / 3.0;
      }
    }
    target /= samples;

    const int draws = 400;
    Vector sq = Vector::Zero(6);
    for (int i = 0; i < draws; ++i) sq += gaussian_initial_state(emb, 100 + i, 20'000).q.cwiseAbs2();
    // sample variance of a Gaussian has relative sd sqrt(2 / draws) ~ 7%
    for (int k = 0; k < 6; ++k) CHECK(std::abs(sq(k) / draws / target(k) - 1.0) < 4.0 * std::sqrt(2.0 / draws));
  }
}
