#include "nac/experiment.hpp"

#include "nac/csv.hpp"
#include "nac/diagnostics.hpp"
#include "nac/ode.hpp"
#include "nac/parallel.hpp"
#include "nac/poisson.hpp"
#include "nac/rng.hpp"
#include "nac/version.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;

namespace nac {

std::vector<double> time_grid(double t_end, double h) {
  std::vector<double> out;
  const long long n = static_cast<long long>(std::floor(t_end / h + 1e-9));
  for (long long i = 0; i <= n; ++i) out.push_back(static_cast<double>(i) * h);
  return out;
}

std::vector<CompareRow> compare_sweep(const FiniteMdp& mdp, const Embedding& emb, const Matrix& kernel,
                                      const CompareSettings& settings, int workers) {
  std::vector<int> ns = settings.n_values;
  std::vector<std::uint64_t> seeds = settings.seeds;
  std::sort(ns.begin(), ns.end());
  std::sort(seeds.begin(), seeds.end());
  const auto grid = time_grid(settings.horizon_T, settings.record_every);
  const double drift_t = std::min(settings.drift_time, settings.horizon_T);

  OdeRunConfig ode_cfg;
  ode_cfg.dt = settings.dt;
  ode_cfg.t_end = grid.back();
  ode_cfg.alpha = settings.alpha;
  ode_cfg.record_times = grid;
  ode_cfg.verify_step_halving = settings.verify_step_halving;
  ode_cfg.validate();

  std::vector<CompareRow> rows(ns.size() * seeds.size());
  parallel_for(rows.size(), workers, [&](std::size_t j) {
    TrainConfig cfg;
    cfg.n_hidden = ns[j / seeds.size()];
    cfg.seed = seeds[j % seeds.size()];
    cfg.horizon_T = settings.horizon_T;
    cfg.alpha = settings.alpha;
    cfg.record_times = grid;
    cfg.param_snapshot_times = {drift_t};
    const RunResult res = run(mdp, emb, cfg);
    const OdeTrajectory limit =
        integrate(coupled_initial_state(res.actor0, res.critic0, emb), ode_cfg, mdp, kernel);

    CompareRow row;
    row.n_hidden = cfg.n_hidden;
    row.seed = cfg.seed;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Snapshot& snap = res.trajectory.snapshots[i];
      row.sup_q_gap = std::max(row.sup_q_gap, (snap.q - limit.states[i].q).cwiseAbs().maxCoeff());
      row.sup_p_gap = std::max(row.sup_p_gap, (snap.p - limit.states[i].p).cwiseAbs().maxCoeff());
    }
    row.increments = res.increments;
    const ParamSnapshot& at = res.param_snapshots.front();
    row.drift_critic_c2 = measure_drift(at.critic, res.critic0, phi_outer_squared);
    row.drift_actor_c2 = measure_drift(at.actor, res.actor0, phi_outer_squared);
    rows[j] = row;
  });
  return rows;
}

namespace {

class Outputs {
 public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}

  CsvWriter open(const std::string& name, const std::vector<std::string>& header) {
    files_.push_back(name);
    return CsvWriter((fs::path(dir_) / name).string(), header);
  }
  /// Path for a file written by other code, recorded like the CSVs.
  std::string add(const std::string& name) {
    files_.push_back(name);
    return (fs::path(dir_) / name).string();
  }
  const std::vector<std::string>& files() const { return files_; }
  const std::string& dir() const { return dir_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

void ensure_writable(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("output directory " + dir + " cannot be created: " + ec.message());
  const fs::path probe = fs::path(dir) / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw std::runtime_error("output directory " + dir + " is not writable");
  }
  fs::remove(probe, ec);
}

std::vector<int> sorted_n(const ExperimentConfig& cfg) {
  auto v = cfg.n_hidden;
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<std::uint64_t> sorted_seeds(const ExperimentConfig& cfg) {
  auto v = cfg.seeds;
  std::sort(v.begin(), v.end());
  return v;
}

Matrix obtain_kernel(const ExperimentConfig& cfg, const Embedding& emb, int workers) {
  if (!cfg.kernel_file.empty()) {
    LimitKernel k = load_kernel_csv(cfg.kernel_file);
    if (k.size() != emb.n_pairs()) throw std::runtime_error("kernel file does not match the MDP size");
    return k.a;
  }
  return estimate_limit_kernel(emb, cfg.mc_samples, cfg.kernel_seed, {}, workers).a;
}

TrainConfig train_config(const ExperimentConfig& cfg, int n, std::uint64_t seed) {
  TrainConfig t;
  t.n_hidden = n;
  t.seed = seed;
  t.horizon_T = cfg.horizon_T;
  t.alpha = cfg.alpha;
  t.diagnostics_period = cfg.diagnostics_period;
  t.zero_critic_outer = cfg.zero_critic_outer;
  t.zero_actor_outer = cfg.zero_actor_outer;
  return t;
}

void run_simulate(const ExperimentConfig& cfg, const FiniteMdp& mdp, const Embedding& emb, Outputs& out,
                  int workers) {
  const auto ns = sorted_n(cfg);
  const auto seeds = sorted_seeds(cfg);
  const auto grid = time_grid(cfg.horizon_T, cfg.record_every);
  std::vector<RunResult> results(ns.size() * seeds.size());
  parallel_for(results.size(), workers, [&](std::size_t j) {
    TrainConfig t = train_config(cfg, ns[j / seeds.size()], seeds[j % seeds.size()]);
    t.record_times = grid;
    t.param_snapshot_times = grid;
    t.track_fluctuations = cfg.track_fluctuations;
    results[j] = run(mdp, emb, t);
  });

  auto traj = out.open("trajectory.csv", {"N", "seed", "t", "pair", "q", "p", "f", "g"});
  auto inc = out.open("increments.csv",
                      {"N", "seed", "max_dC", "max_dW", "max_dB", "max_dU", "max_dC_times_N", "max_dB_times_N15"});
  auto drift = out.open("drift.csv", {"N", "seed", "t", "critic_c2", "critic_tanh", "actor_c2", "actor_tanh"});
  for (std::size_t j = 0; j < results.size(); ++j) {
    const int n = ns[j / seeds.size()];
    const std::uint64_t seed = seeds[j % seeds.size()];
    const RunResult& r = results[j];
    for (const Snapshot& s : r.trajectory.snapshots)
      for (int pr = 0; pr < mdp.n_pairs(); ++pr) {
        const int x = mdp.state_of(pr), a = mdp.action_of(pr);
        traj.cell(n).cell(seed).cell(s.t).cell(pr).cell(s.q(pr)).cell(s.p(pr)).cell(s.f(x, a)).cell(s.g(x, a));
        traj.end_row();
      }
    const double nd = n;
    inc.cell(n).cell(seed).cell(r.increments.max_dC).cell(r.increments.max_dW).cell(r.increments.max_dB);
    inc.cell(r.increments.max_dU).cell(r.increments.max_dC * nd).cell(r.increments.max_dB * nd * std::sqrt(nd));
    inc.end_row();
    for (const ParamSnapshot& ps : r.param_snapshots) {
      drift.cell(n).cell(seed).cell(ps.t);
      drift.cell(measure_drift(ps.critic, r.critic0, phi_outer_squared));
      drift.cell(measure_drift(ps.critic, r.critic0, phi_tanh_sum));
      drift.cell(measure_drift(ps.actor, r.actor0, phi_outer_squared));
      drift.cell(measure_drift(ps.actor, r.actor0, phi_tanh_sum));
      drift.end_row();
    }
  }
  if (!cfg.track_fluctuations) return;
  auto fl = out.open("fluctuations.csv", {"N", "seed", "t", "pair", "m1", "m2", "m3", "m_actor"});
  for (std::size_t j = 0; j < results.size(); ++j) {
    const auto& log = results[j].fluctuations;
    for (std::size_t i = 0; i < log.times.size(); ++i)
      for (int pr = 0; pr < mdp.n_pairs(); ++pr) {
        fl.cell(ns[j / seeds.size()]).cell(seeds[j % seeds.size()]).cell(log.times[i]).cell(pr);
        fl.cell(log.m1[i](pr)).cell(log.m2[i](pr)).cell(log.m3[i](pr)).cell(log.m_actor[i](pr));
        fl.end_row();
      }
  }
}

void write_ode_rows(CsvWriter& w, const OdeTrajectory& traj, const FiniteMdp& mdp, const Matrix& kernel) {
  for (const OdeState& s : traj.states) {
    w.cell(s.t);
    for (int pr = 0; pr < mdp.n_pairs(); ++pr) w.cell(s.q(pr));
    for (int pr = 0; pr < mdp.n_pairs(); ++pr) w.cell(s.p(pr));
    const auto rates = schedule_values_ct(s.t);
    w.cell(critic_gap(s, mdp)).cell(grad_norm(s, mdp)).cell(lyapunov(s, mdp, kernel));
    w.cell(objective(mdp, ode_policy(s, mdp))).cell(rates.eta).cell(rates.zeta);
    w.end_row();
  }
}

void run_ode(const ExperimentConfig& cfg, const FiniteMdp& mdp, const Embedding& emb, Outputs& out, int workers) {
  const Matrix kernel = obtain_kernel(cfg, emb, workers);
  OdeRunConfig oc;
  oc.dt = cfg.dt;
  oc.t_end = cfg.t_end;
  oc.alpha = cfg.alpha;
  oc.record_times = time_grid(cfg.t_end, cfg.record_every);
  if (oc.record_times.back() < cfg.t_end - 1e-9) oc.record_times.push_back(cfg.t_end);
  oc.verify_step_halving = cfg.verify_step_halving;
  oc.validate();

  const auto seeds = sorted_seeds(cfg);
  const int n0 = sorted_n(cfg).front();
  std::vector<OdeTrajectory> trajs(seeds.size());
  parallel_for(seeds.size(), workers, [&](std::size_t j) {
    OdeState s0;
    switch (cfg.ode_init) {
      case OdeInit::coupled: {
        const TrainState ts = initial_state(mdp, emb, train_config(cfg, n0, seeds[j]));
        s0 = coupled_initial_state(ts.actor, ts.critic, emb);
        break;
      }
      case OdeInit::gaussian:
        s0 = gaussian_initial_state(emb, seeds[j], cfg.mc_samples);
        if (cfg.zero_critic_outer) s0.q.setZero();
        if (cfg.zero_actor_outer) s0.p.setZero();
        break;
      case OdeInit::zero:
        s0 = OdeState{Vector::Zero(mdp.n_pairs()), Vector::Zero(mdp.n_pairs()), 0.0};
        break;
    }
    trajs[j] = integrate(s0, oc, mdp, kernel);
  });

  std::vector<std::string> header{"t"};
  for (int pr = 0; pr < mdp.n_pairs(); ++pr) header.push_back("q" + std::to_string(pr));
  for (int pr = 0; pr < mdp.n_pairs(); ++pr) header.push_back("p" + std::to_string(pr));
  for (const char* h : {"critic_gap", "grad_norm", "lyapunov", "objective", "eta", "zeta"}) header.push_back(h);
  auto gaps = out.open("ode_halving.csv", {"seed", "halving_gap"});
  for (std::size_t j = 0; j < seeds.size(); ++j) {
    auto w = out.open("ode_seed" + std::to_string(seeds[j]) + ".csv", header);
    write_ode_rows(w, trajs[j], mdp, kernel);
    gaps.cell(seeds[j]).cell(trajs[j].halving_gap);
    gaps.end_row();
  }
}

void run_compare(const ExperimentConfig& cfg, const FiniteMdp& mdp, const Embedding& emb, Outputs& out,
                 int workers) {
  const Matrix kernel = obtain_kernel(cfg, emb, workers);
  CompareSettings cs;
  cs.n_values = cfg.n_hidden;
  cs.seeds = cfg.seeds;
  cs.horizon_T = cfg.horizon_T;
  cs.alpha = cfg.alpha;
  cs.dt = cfg.dt;
  cs.record_every = cfg.record_every;
  cs.drift_time = cfg.drift_time;
  cs.verify_step_halving = cfg.verify_step_halving;
  const auto rows = compare_sweep(mdp, emb, kernel, cs, workers);

  auto w = out.open("compare.csv", {"N", "seed", "sup_q_gap", "sup_p_gap", "max_dC_times_N", "max_dB_times_N15",
                                    "drift_critic_c2", "drift_actor_c2"});
  for (const auto& r : rows) {
    const double nd = r.n_hidden;
    w.cell(r.n_hidden).cell(r.seed).cell(r.sup_q_gap).cell(r.sup_p_gap);
    w.cell(r.increments.max_dC * nd).cell(r.increments.max_dB * nd * std::sqrt(nd));
    w.cell(r.drift_critic_c2).cell(r.drift_actor_c2);
    w.end_row();
  }
  auto s = out.open("compare_summary.csv", {"N", "seeds", "mean_sup_q_gap", "mean_sup_p_gap", "max_dC_times_N",
                                            "max_dB_times_N15", "mean_drift_critic_c2"});
  for (int n : sorted_n(cfg)) {
    double q = 0, p = 0, dc = 0, db = 0, dr = 0;
    int count = 0;
    for (const auto& r : rows)
      if (r.n_hidden == n) {
        const double nd = n;
        q += r.sup_q_gap;
        p += r.sup_p_gap;
        dc = std::max(dc, r.increments.max_dC * nd);
        db = std::max(db, r.increments.max_dB * nd * std::sqrt(nd));
        dr += r.drift_critic_c2;
        ++count;
      }
    s.cell(n).cell(count).cell(q / count).cell(p / count).cell(dc).cell(db).cell(dr / count);
    s.end_row();
  }
}

void run_kernel(const ExperimentConfig& cfg, const Embedding& emb, Outputs& out, int workers) {
  const LimitKernel k = estimate_limit_kernel(emb, cfg.mc_samples, cfg.kernel_seed, {}, workers);
  save_kernel_csv(k, out.add("kernel.csv"));

  std::vector<std::string> header;
  for (int j = 0; j < k.size(); ++j) header.push_back("c" + std::to_string(j));
  {
    auto se = out.open("kernel_stderr.csv", header);
    for (int i = 0; i < k.size(); ++i) {
      for (int j = 0; j < k.size(); ++j) se.cell(k.std_error(i, j));
      se.end_row();
    }
  }
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(k.a, Eigen::EigenvaluesOnly);
    auto spec = out.open("kernel_spectrum.csv", {"index", "eigenvalue"});
    for (int i = 0; i < k.size(); ++i) {
      spec.cell(i).cell(es.eigenvalues()(i));
      spec.end_row();
    }
  }
  const auto ns = sorted_n(cfg);
  const auto seeds = sorted_seeds(cfg);
  std::vector<double> agreement(ns.size() * seeds.size());
  parallel_for(agreement.size(), workers, [&](std::size_t j) {
    const WideNetParams p = init_params(ns[j / seeds.size()], emb.dim(), NetRole::critic, seeds[j % seeds.size()]);
    agreement[j] = kernel_agreement(p, k, emb);
  });
  auto w = out.open("kernel_agreement.csv", {"N", "seed", "agreement"});
  for (std::size_t j = 0; j < agreement.size(); ++j) {
    w.cell(ns[j / seeds.size()]).cell(seeds[j % seeds.size()]).cell(agreement[j]);
    w.end_row();
  }
}

PolicyTable poisson_base_policy(const ExperimentConfig& cfg, const FiniteMdp& mdp) {
  if (cfg.poisson_policy == "uniform") return PolicyTable::uniform(mdp.n_states(), mdp.n_actions());
  Matrix probs = Matrix::Zero(mdp.n_states(), mdp.n_actions());
  probs.col(cfg.poisson_policy == "first_action" ? 0 : mdp.n_actions() - 1).setOnes();
  return PolicyTable(probs);
}

void run_poisson_check(const ExperimentConfig& cfg, const FiniteMdp& mdp, Outputs& out, int workers) {
  const PolicyTable f = poisson_base_policy(cfg, mdp);
  struct Item {
    double eta;
    ChainFlavor flavor;
    ErgodicityEstimate est;
    double max_abs_nu = 0.0;
    double max_residual = 0.0;
    long long max_terms = 0;
  };
  std::vector<Item> items;
  for (double eta : cfg.etas)
    for (ChainFlavor fl : {ChainFlavor::critic_chain, ChainFlavor::actor_aux_chain}) items.push_back({eta, fl, {}});
  parallel_for(items.size(), workers, [&](std::size_t j) {
    Item& it = items[j];
    const PolicyTable g = exploration_policy(f, it.eta);
    const ChainKernel k =
        it.flavor == ChainFlavor::critic_chain ? chain_kernel(mdp, g) : aux_chain_kernel(mdp, g);
    it.est = ergodicity_rate(k, cfg.n_max);
    for (int target = 0; target < k.size(); ++target) {
      const PoissonSolution sol = solve_poisson(k, target);
      it.max_abs_nu = std::max(it.max_abs_nu, sol.values.cwiseAbs().maxCoeff());
      it.max_residual = std::max(it.max_residual, sol.residual);
      it.max_terms = std::max(it.max_terms, sol.terms);
    }
  });
  auto name = [](ChainFlavor fl) { return std::string(fl == ChainFlavor::critic_chain ? "critic" : "aux"); };
  auto e = out.open("ergodicity.csv", {"eta", "chain", "n0", "beta", "decay_rate", "fit_r2", "min_pi",
                                       "positivity_horizon", "poisson_bound", "max_abs_nu", "max_residual", "max_terms"});
  auto tv = out.open("tv_curve.csv", {"eta", "chain", "n", "tv"});
  for (const Item& it : items) {
    e.cell(it.eta).cell(name(it.flavor)).cell(it.est.n0).cell(it.est.beta).cell(it.est.decay_rate);
    e.cell(it.est.fit_r2).cell(it.est.min_pi).cell(it.est.positivity_horizon).cell(poisson_bound(it.est)).cell(it.max_abs_nu);
    e.cell(it.max_residual).cell(it.max_terms);
    e.end_row();
    for (const auto& [n, v] : it.est.tv_curve) {
      tv.cell(it.eta).cell(name(it.flavor)).cell(n).cell(v);
      tv.end_row();
    }
  }
}

void run_gradcheck(const ExperimentConfig& cfg, const FiniteMdp& mdp, Outputs& out) {
  auto w = out.open("gradcheck.csv", {"instance", "pair", "analytic", "finite_difference", "abs_error",
                                      "rel_error"});
  const int m = mdp.n_pairs();
  const double h = cfg.fd_step;
  for (int i = 0; i < cfg.n_instances; ++i) {
    CounterRng rng(cfg.seeds.front(), 1000 + static_cast<std::uint64_t>(i));
    Vector logits(m);
    for (int k = 0; k < m; ++k) logits(k) = rng.uniform(-2.0, 2.0);
    const Vector grad = policy_gradient(mdp, logits);
    Vector fd(m);
    for (int k = 0; k < m; ++k) {
      Vector up = logits, down = logits;
      up(k) += h;
      down(k) -= h;
      fd(k) = (objective(mdp, softmax_policy(up, mdp.n_actions())) -
               objective(mdp, softmax_policy(down, mdp.n_actions()))) /
              (2.0 * h);
    }
    // relative to the gradient's sup norm: entries near zero have no meaningful own scale
    const double scale = std::max(grad.cwiseAbs().maxCoeff(), 1e-300);
    for (int k = 0; k < m; ++k) {
      const double err = std::abs(grad(k) - fd(k));
      w.cell(i).cell(k).cell(grad(k)).cell(fd(k)).cell(err).cell(err / scale);
      w.end_row();
    }
  }
}

void run_fluctuation_sweep(const ExperimentConfig& cfg, const FiniteMdp& mdp, const Embedding& emb,
                           Outputs& out, int workers) {
  const auto ns = sorted_n(cfg);
  const auto seeds = sorted_seeds(cfg);
  const TrainConfig base = train_config(cfg, ns.front(), seeds.front());
  const auto rows = fluctuation_decay_experiment(mdp, emb, base, ns, seeds, workers);
  {
    auto w = out.open("fluctuation_decay.csv", {"N", "pair", "mean_sq_deviation", "mean_total_deviation"});
    for (const auto& r : rows) {
      w.cell(r.n_hidden).cell(r.pair).cell(r.mean_sq_deviation).cell(r.mean_total_deviation);
      w.end_row();
    }
    auto s = out.open("fluctuation_decay_summary.csv", {"N", "sum_mean_sq_deviation"});
    for (int n : ns) {
      double total = 0.0;
      for (const auto& r : rows)
        if (r.n_hidden == n) total += r.mean_sq_deviation;
      s.cell(n).cell(total);
      s.end_row();
    }
  }
  if (!cfg.track_fluctuations) return;

  std::vector<FluctuationLog> logs(ns.size() * seeds.size());
  parallel_for(logs.size(), workers, [&](std::size_t j) {
    TrainConfig t = train_config(cfg, ns[j / seeds.size()], seeds[j % seeds.size()]);
    t.record_times = {cfg.horizon_T};
    t.track_fluctuations = true;
    logs[j] = run(mdp, emb, t).fluctuations;
  });
  auto w = out.open("fluctuation_terms.csv", {"N", "seed", "pair", "m1", "m2", "m3", "m_actor"});
  for (std::size_t j = 0; j < logs.size(); ++j)
    for (int pr = 0; pr < mdp.n_pairs(); ++pr) {
      w.cell(ns[j / seeds.size()]).cell(seeds[j % seeds.size()]).cell(pr);
      w.cell(logs[j].m1.back()(pr)).cell(logs[j].m2.back()(pr)).cell(logs[j].m3.back()(pr));
      w.cell(logs[j].m_actor.back()(pr));
      w.end_row();
    }
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, ExperimentKind kind, const std::string& out_dir,
                                 int workers) {
  cfg.validate();
  if (cfg.kind && *cfg.kind != kind)
    throw ValidationError("config is for kind '" + to_string(*cfg.kind) + "' but '" + to_string(kind) +
                          "' was requested");
  ensure_writable(out_dir);
  const FiniteMdp mdp = cfg.build_mdp();
  const Embedding emb = cfg.build_embedding(mdp);
  Outputs out(out_dir);
  switch (kind) {
    case ExperimentKind::simulate: run_simulate(cfg, mdp, emb, out, workers); break;
    case ExperimentKind::ode: run_ode(cfg, mdp, emb, out, workers); break;
    case ExperimentKind::compare: run_compare(cfg, mdp, emb, out, workers); break;
    case ExperimentKind::kernel: run_kernel(cfg, emb, out, workers); break;
    case ExperimentKind::poisson_check: run_poisson_check(cfg, mdp, out, workers); break;
    case ExperimentKind::gradcheck: run_gradcheck(cfg, mdp, out); break;
    case ExperimentKind::fluctuation_sweep: run_fluctuation_sweep(cfg, mdp, emb, out, workers); break;
  }

  ExperimentOutcome outcome;
  outcome.out_dir = out_dir;
  outcome.files = out.files();
  outcome.manifest = (fs::path(out_dir) / "manifest.txt").string();
  std::ofstream m(outcome.manifest);
  if (!m) throw std::runtime_error("cannot write " + outcome.manifest);
  m << "kind=" << to_string(kind) << '\n'
    << "config_hash=" << config_hash(cfg) << '\n'
    << "version=" << kVersion << '\n';
  m << "seeds=";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) m << (i ? "," : "") << cfg.seeds[i];
  m << "\nn_hidden=";
  for (std::size_t i = 0; i < cfg.n_hidden.size(); ++i) m << (i ? "," : "") << cfg.n_hidden[i];
  m << "\nkernel_seed=" << cfg.kernel_seed << '\n' << "workers=" << workers << '\n';
  m << "files=";
  for (std::size_t i = 0; i < outcome.files.size(); ++i) m << (i ? "," : "") << outcome.files[i];
  m << "\ncreated=" << timestamp() << '\n';
  return outcome;
}

}  // namespace nac
