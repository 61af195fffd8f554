#include "nac/trainer.hpp"

#include "nac/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nac {

long long TrainConfig::total_steps() const {
  return static_cast<long long>(std::floor(static_cast<double>(n_hidden) * horizon_T));
}

int TrainConfig::effective_diagnostics_period() const {
  if (diagnostics_period > 0) return diagnostics_period;
  return std::max(1, (n_hidden + 49) / 50);
}

std::vector<double> TrainConfig::effective_record_times() const {
  if (!record_times.empty()) return record_times;
  return {0.0, horizon_T};
}

void TrainConfig::validate() const {
  if (n_hidden < 1) throw std::invalid_argument("n_hidden must be >= 1");
  if (!(horizon_T > 0.0)) throw std::invalid_argument("horizon_T must be > 0");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
  if (diagnostics_period < 0) throw std::invalid_argument("diagnostics_period must be >= 0");
  auto check_times = [this](const std::vector<double>& ts, const char* what) {
    if (!std::is_sorted(ts.begin(), ts.end()))
      throw std::invalid_argument(std::string(what) + " must be sorted");
    for (double t : ts)
      if (t < 0.0 || t > horizon_T) throw std::invalid_argument(std::string(what) + " must lie in [0, T]");
  };
  check_times(record_times, "record_times");
  check_times(param_snapshot_times, "param_snapshot_times");
}

void IncrementStats::merge(const IncrementStats& o) {
  max_dC = std::max(max_dC, o.max_dC);
  max_dW = std::max(max_dW, o.max_dW);
  max_dB = std::max(max_dB, o.max_dB);
  max_dU = std::max(max_dU, o.max_dU);
}

namespace {

long long step_of(double t, int n_hidden) {
  return static_cast<long long>(std::floor(static_cast<double>(n_hidden) * t + 1e-9));
}

/// Hidden-unit activations at every pair and the derived network outputs.
/// Buffers are kept across steps; at large N they dominate the step cost.
struct Evaluation {
  Matrix critic_act;  // N x M, sigma(W_i . xi)
  Matrix actor_act;   // N x M, sigma(U_i . xi)
  Matrix direction;   // N x d scratch for the actor's inner update
  PairFunction q;
  PairFunction p;

  void update(const TrainState& s, const Embedding& emb) {
    hidden_activations(s.critic, emb, critic_act);
    hidden_activations(s.actor, emb, actor_act);
    q = output_from_activations(critic_act, s.critic.outer);
    p = output_from_activations(actor_act, s.actor.outer);
  }
};

/// Quantities the diagnostics need from one step, captured before the update.
struct StepRecord {
  int critic_pair;       // xi_k
  int critic_next_pair;  // xi_{k+1}
  int actor_pair;        // tilde xi_k
  double zeta;
  double eta;
  double clipped;  // clip(Q_k(tilde xi_k))
  double min_prob;
};

StepRecord advance(TrainState& s, const FiniteMdp& mdp, const Embedding& emb, const TrainConfig& cfg,
                   Evaluation& ev, const PolicyTable& f, const PolicyTable& g,
                   const ScheduleValues& rates, IncrementStats* inc) {
  const int na = mdp.n_actions();
  const int ns = mdp.n_states();
  const double gamma = mdp.gamma();
  const int n = s.critic.n_hidden();
  const double n_d = static_cast<double>(n);
  const double step_scale = 1.0 / (n_d * std::sqrt(n_d));

  StepRecord rec{};
  rec.critic_pair = s.critic_pair;
  rec.actor_pair = s.actor_pair;
  rec.zeta = rates.zeta;
  rec.eta = rates.eta;

  // Critic chain: x_{k+1} ~ p(.|xi_k), a_{k+1} ~ g_k(x_{k+1}, .)
  Vector masses = mdp.next_state_probs().row(s.critic_pair).transpose();
  const int x_next = s.rng.sample({masses.data(), static_cast<std::size_t>(ns)});
  Vector row = g.probs().row(x_next).transpose();
  const int a_next = s.rng.sample({row.data(), static_cast<std::size_t>(na)});
  double min_prob = row.minCoeff();

  // Actor chain: tilde x_{k+1} ~ gamma p(.|tilde xi_k) + (1 - gamma) rho0
  masses = gamma * mdp.next_state_probs().row(s.actor_pair).transpose() + (1.0 - gamma) * mdp.rho0_states();
  const int xt_next = s.rng.sample({masses.data(), static_cast<std::size_t>(ns)});
  row = g.probs().row(xt_next).transpose();
  const int at_next = s.rng.sample({row.data(), static_cast<std::size_t>(na)});
  min_prob = std::min(min_prob, row.minCoeff());
  rec.min_prob = min_prob;

  const int xi = s.critic_pair;
  const int xi_next = mdp.pair(x_next, a_next);
  rec.critic_next_pair = xi_next;

  // Critic TD update with the target held at the old parameters.
  {
    const double td = mdp.reward_vector()(xi) + gamma * ev.q(xi_next) - ev.q(xi);
    const double coef = cfg.alpha * step_scale * td;
    const auto act = ev.critic_act.col(xi);
    const Vector dact = act.array() * (1.0 - act.array());
    const Vector d_outer = coef * act;
    const Vector unit = coef * s.critic.outer.cwiseProduct(dact);  // dW_i = unit_i * xi
    s.critic.inner.noalias() += unit * emb.row(xi);
    s.critic.outer += d_outer;
    if (inc) {
      inc->max_dC = std::max(inc->max_dC, d_outer.cwiseAbs().maxCoeff());
      inc->max_dW = std::max(inc->max_dW, unit.cwiseAbs().maxCoeff() * emb.row(xi).norm());
    }
  }

  // Actor update: clipped critic times the score of log f at tilde xi_k.
  {
    const int xt = mdp.state_of(s.actor_pair);
    const double c = clip(ev.q(s.actor_pair));
    rec.clipped = c;
    const double coef = rates.zeta * step_scale * c;
    const auto act = ev.actor_act.col(s.actor_pair);
    Vector score_outer = act;                              // sigma(U_i.xi~) - sum f sigma(U_i.(x~,a''))
    Vector score_scalar = act.array() * (1.0 - act.array());  // coefficient on xi~
    Matrix& direction = ev.direction;                         // N x d
    direction.resize(n, emb.dim());
    direction.noalias() = score_scalar * emb.row(s.actor_pair);
    for (int a = 0; a < na; ++a) {
      const int pr = mdp.pair(xt, a);
      const double w = f(xt, a);
      const auto act_a = ev.actor_act.col(pr);
      score_outer -= w * act_a;
      const Vector dact_a = act_a.array() * (1.0 - act_a.array());
      direction.noalias() -= (w * dact_a) * emb.row(pr);
    }
    const Vector d_outer = coef * score_outer;
    direction.array().colwise() *= (coef * s.actor.outer).array();  // now the inner increment
    s.actor.outer += d_outer;
    s.actor.inner += direction;
    if (inc) {
      inc->max_dB = std::max(inc->max_dB, d_outer.cwiseAbs().maxCoeff());
      inc->max_dU = std::max(inc->max_dU, direction.rowwise().norm().maxCoeff());
    }
  }

  s.critic_pair = xi_next;
  s.actor_pair = mdp.pair(xt_next, at_next);
  ++s.step;
  return rec;
}

TrainState step_impl(TrainState state, const FiniteMdp& mdp, const Embedding& emb, const TrainConfig& cfg,
                     IncrementStats* inc) {
  Evaluation ev;
  ev.update(state, emb);
  const ScheduleValues rates = schedule_values(state.step, cfg.n_hidden);
  const PolicyTable f = softmax_policy(ev.p, mdp.n_actions());
  const PolicyTable g = exploration_policy(f, rates.eta);
  advance(state, mdp, emb, cfg, ev, f, g, rates, inc);
  return state;
}

/// Piecewise-constant caches and running sums for the fluctuation terms.
class FluctuationAccumulator {
 public:
  FluctuationAccumulator(const FiniteMdp& mdp, bool fluct, bool occ)
      : mdp_(mdp), fluct_(fluct), occ_(occ) {
    const int m = mdp.n_pairs();
    m1_ = m2_ = m3_ = ma_ = occupancy_ = Vector::Zero(m);
  }

  bool active() const { return fluct_ || occ_; }

  void refresh(const TrainState& s, const Embedding& emb, const PolicyTable& g) {
    pi_ = stationary_distribution(chain_kernel(mdp_, g));
    sigma_ = stationary_distribution(aux_chain_kernel(mdp_, g));
    if (fluct_) {
      b_critic_ = empirical_kernel(s.critic, emb);
      b_actor_ = empirical_kernel(s.actor, emb);
    }
  }

  void accumulate(const StepRecord& rec, const Evaluation& ev, const PolicyTable& f, const PolicyTable& g,
                  int n_hidden) {
    const double inv_n = 1.0 / n_hidden;
    if (occ_) {
      occupancy_ -= inv_n * sigma_;
      occupancy_(rec.actor_pair) += inv_n;
    }
    if (!fluct_) return;
    const int m = mdp_.n_pairs();
    const int na = mdp_.n_actions();
    const double gamma = mdp_.gamma();
    const auto& r = mdp_.reward_vector();
    const auto col = b_critic_.col(rec.critic_pair);

    // sum_{z,a''} Q(z,a'') g(z,a'') p(z|xi') for every xi'
    Vector next_q = Vector::Zero(m);
    for (int from = 0; from < m; ++from) {
      double acc = 0.0;
      for (int z = 0; z < mdp_.n_states(); ++z) {
        const double pz = mdp_.next_state_probs()(from, z);
        if (pz == 0.0) continue;
        double inner = 0.0;
        for (int a = 0; a < na; ++a) inner += ev.q(mdp_.pair(z, a)) * g(z, a);
        acc += pz * inner;
      }
      next_q(from) = acc;
    }

    m1_ += inv_n * (-ev.q(rec.critic_pair) * col + b_critic_ * ev.q.cwiseProduct(pi_));
    m2_ += inv_n * (r(rec.critic_pair) * col - b_critic_ * r.cwiseProduct(pi_));
    m3_ += inv_n * gamma * (ev.q(rec.critic_next_pair) * col - b_critic_ * next_q.cwiseProduct(pi_));

    // D(., xi') = Bbar(., xi') - sum_a'' f(x', a'') Bbar(., (x', a''))
    auto drive = [&](int pair) {
      const int x = mdp_.state_of(pair);
      Vector d = b_actor_.col(pair);
      for (int a = 0; a < na; ++a) d -= f(x, a) * b_actor_.col(mdp_.pair(x, a));
      return d;
    };
    Vector expected = Vector::Zero(m);
    for (int pr = 0; pr < m; ++pr) {
      const double w = clip(ev.q(pr)) * sigma_(pr);
      if (w != 0.0) expected += w * drive(pr);
    }
    ma_ += inv_n * rec.zeta * (rec.clipped * drive(rec.actor_pair) - expected);
  }

  void record(double t, FluctuationLog& flog, OccupancyLog& olog) const {
    if (fluct_) {
      flog.times.push_back(t);
      flog.m1.push_back(m1_);
      flog.m2.push_back(m2_);
      flog.m3.push_back(m3_);
      flog.m_actor.push_back(ma_);
    }
    if (occ_) {
      olog.times.push_back(t);
      olog.deviation.push_back(occupancy_);
    }
  }

 private:
  const FiniteMdp& mdp_;
  bool fluct_;
  bool occ_;
  Vector pi_, sigma_;
  Matrix b_critic_, b_actor_;
  Vector m1_, m2_, m3_, ma_, occupancy_;
};

}  // namespace

TrainState initial_state(const FiniteMdp& mdp, const Embedding& emb, const TrainConfig& cfg) {
  cfg.validate();
  if (emb.n_pairs() != mdp.n_pairs()) throw std::invalid_argument("embedding does not match the MDP");
  TrainState s;
  s.critic = init_params(cfg.n_hidden, emb.dim(), NetRole::critic, cfg.seed, cfg.init_law);
  s.actor = init_params(cfg.n_hidden, emb.dim(), NetRole::actor, cfg.seed, cfg.init_law);
  if (cfg.zero_critic_outer) s.critic.outer.setZero();
  if (cfg.zero_actor_outer) s.actor.outer.setZero();
  s.rng = CounterRng(cfg.seed, streams::kSampling);
  const Vector& rho0 = mdp.rho0();
  const std::span<const double> masses(rho0.data(), static_cast<std::size_t>(rho0.size()));
  s.critic_pair = s.rng.sample(masses);
  s.actor_pair = s.rng.sample(masses);
  s.step = 0;
  return s;
}

TrainState train_step(TrainState state, const FiniteMdp& mdp, const Embedding& emb, const TrainConfig& cfg) {
  return step_impl(std::move(state), mdp, emb, cfg, nullptr);
}

TrainState train_step(TrainState state, const FiniteMdp& mdp, const Embedding& emb, const TrainConfig& cfg,
                      IncrementStats& increments) {
  increments = IncrementStats{};
  return step_impl(std::move(state), mdp, emb, cfg, &increments);
}

RunResult run(const FiniteMdp& mdp, const Embedding& emb, const TrainConfig& cfg) {
  RunResult out;
  TrainState s = initial_state(mdp, emb, cfg);
  out.actor0 = s.actor;
  out.critic0 = s.critic;

  const long long total = cfg.total_steps();
  const int period = cfg.effective_diagnostics_period();
  const auto record_times = cfg.effective_record_times();
  std::size_t next_record = 0;
  std::size_t next_snapshot = 0;
  FluctuationAccumulator acc(mdp, cfg.track_fluctuations, cfg.track_occupancy);

  Evaluation ev;
  for (long long k = 0;; ++k) {
    ev.update(s, emb);
    const ScheduleValues rates = schedule_values(k, cfg.n_hidden);
    const PolicyTable f = softmax_policy(ev.p, mdp.n_actions());
    const PolicyTable g = exploration_policy(f, rates.eta);

    while (next_record < record_times.size() && step_of(record_times[next_record], cfg.n_hidden) <= k) {
      const double t = record_times[next_record++];
      out.trajectory.snapshots.push_back(Snapshot{t, k, ev.q, ev.p, f, g});
      acc.record(t, out.fluctuations, out.occupancy);
    }
    while (next_snapshot < cfg.param_snapshot_times.size() &&
           step_of(cfg.param_snapshot_times[next_snapshot], cfg.n_hidden) <= k) {
      out.param_snapshots.push_back(ParamSnapshot{cfg.param_snapshot_times[next_snapshot++], s.actor, s.critic});
    }
    if (k >= total) break;

    if (acc.active() && k % period == 0) acc.refresh(s, emb, g);
    IncrementStats inc;
    const StepRecord rec = advance(s, mdp, emb, cfg, ev, f, g, rates, &inc);
    out.increments.merge(inc);
    out.min_sampling_prob = std::min(out.min_sampling_prob, rec.min_prob);
    out.min_clip = std::min(out.min_clip, rec.clipped);
    out.max_clip = std::max(out.max_clip, rec.clipped);
    if (acc.active()) acc.accumulate(rec, ev, f, g, cfg.n_hidden);
  }
  out.final_state = std::move(s);
  return out;
}

}  // namespace nac
