#include "nac/poisson.hpp"

#include "nac/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace nac {

namespace {

constexpr double kRoundOffFloor = 1e-14;
// TV values at or below this are treated as round-off when fitting
constexpr double kTvFloor = 1e-13;

}  // namespace

PoissonSolution solve_poisson(const ChainKernel& k, int target, long long max_terms) {
  const int m = k.size();
  if (target < 0 || target >= m) throw std::out_of_range("solve_poisson: target pair out of range");
  const Vector pi = stationary_distribution(k);
  const double pt = pi(target);

  // column target of K^n, i.e. K^n(xi' -> target) for every xi'
  Vector col = Vector::Zero(m);
  col(target) = 1.0;
  Vector sum = Vector::Zero(m);
  double prev_term = std::numeric_limits<double>::infinity();
  double ratio = 0.0;  // recent worst contraction of the term sizes
  long long n = 0;
  for (; n < max_terms; ++n) {
    const Vector term = col.array() - pt;
    const double size = term.cwiseAbs().maxCoeff();
    if (size == 0.0) break;
    // below this the entries of K^n are round-off, and so are further terms
    if (size < kRoundOffFloor) break;
    if (std::isfinite(prev_term) && prev_term > 0.0) ratio = std::max(0.9 * ratio, size / prev_term);
    // geometric tail bound once the terms have started contracting
    if (n > 1 && ratio < 1.0 && size * ratio / (1.0 - ratio) < 1e-12 && size < 1e-12) break;
    sum += term;
    prev_term = size;
    col = k.kernel * col;
  }
  if (n >= max_terms) throw NoConvergence("Poisson series did not converge (TV decay stalled)");

  PoissonSolution sol;
  sol.values = sum;
  sol.target = target;
  sol.terms = n;
  Vector rhs = -pt * Vector::Ones(m);
  rhs(target) += 1.0;
  sol.residual = (sum - k.kernel * sum - rhs).cwiseAbs().maxCoeff();
  return sol;
}

ErgodicityEstimate ergodicity_rate(const ChainKernel& k, int n_max) {
  if (n_max < 1) throw std::invalid_argument("ergodicity_rate: n_max must be >= 1");
  const Vector pi = stationary_distribution(k);
  const int m = k.size();
  ErgodicityEstimate est;
  est.min_pi = pi.minCoeff();

  Matrix power = Matrix::Identity(m, m);
  for (int n = 0; n <= n_max; ++n) {
    double worst = 0.0;
    for (int i = 0; i < m; ++i) worst = std::max(worst, 0.5 * (power.row(i).transpose() - pi).cwiseAbs().sum());
    est.tv_curve.emplace_back(n, worst);
    if (n >= 1 && est.positivity_horizon < 0 && (power.array() > 0.0).all()) est.positivity_horizon = n;
    power = (power * k.kernel).eval();
  }

  est.n0 = n_max;
  for (const auto& [n, tv] : est.tv_curve)
    if (n >= 1 && tv < 1.0 - 1e-3) {
      est.n0 = n;
      break;
    }

  // least squares on log TV over [n0, n_max], ignoring the round-off floor
  std::vector<double> xs, ys;
  for (const auto& [n, tv] : est.tv_curve)
    if (n >= est.n0 && tv > kTvFloor) {
      xs.push_back(n);
      ys.push_back(std::log(tv));
    }
  if (xs.empty()) {
    est.decay_rate = 0.0;
    est.beta = 1.0;
    est.fit_r2 = 1.0;
    return est;
  }
  if (xs.size() == 1) {
    est.decay_rate = std::exp(ys[0] / std::max(1.0, xs[0]));
    est.fit_r2 = 1.0;
  } else {
    const double nx = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / nx, my += ys[i] / nx;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
      syy += (ys[i] - my) * (ys[i] - my);
    }
    const double slope = sxy / sxx;
    est.decay_rate = std::exp(slope);
    est.fit_r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  }
  est.beta = std::clamp(1.0 - std::pow(est.decay_rate, est.n0), 0.0, 1.0);

  // shrink beta until (1 - beta)^floor(n / n0) dominates the whole curve
  for (const auto& [n, tv] : est.tv_curve) {
    const int blocks = n / est.n0;
    if (blocks == 0 || tv <= kTvFloor) continue;
    if (tv > std::pow(1.0 - est.beta, blocks)) est.beta = 1.0 - std::pow(tv, 1.0 / blocks);
  }
  return est;
}

double poisson_bound(const ErgodicityEstimate& est) {
  if (est.beta >= 1.0) return static_cast<double>(est.n0);
  if (est.beta <= 0.0) return std::numeric_limits<double>::infinity();
  return est.n0 / est.beta;
}

std::vector<OccupancyRow> fluctuation_decay_experiment(const FiniteMdp& mdp, const Embedding& emb,
                                                       const TrainConfig& base, const std::vector<int>& n_values,
                                                       const std::vector<std::uint64_t>& seeds, int workers) {
  const int m = mdp.n_pairs();
  const std::size_t jobs = n_values.size() * seeds.size();
  std::vector<Vector> deviations(jobs);
  parallel_for(jobs, workers, [&](std::size_t j) {
    TrainConfig cfg = base;
    cfg.n_hidden = n_values[j / seeds.size()];
    cfg.seed = seeds[j % seeds.size()];
    cfg.track_occupancy = true;
    cfg.track_fluctuations = false;
    cfg.record_times = {cfg.horizon_T};
    cfg.param_snapshot_times.clear();
    const RunResult res = run(mdp, emb, cfg);
    deviations[j] = res.occupancy.deviation.back();
  });

  std::vector<OccupancyRow> rows;
  for (std::size_t ni = 0; ni < n_values.size(); ++ni)
    for (int pr = 0; pr < m; ++pr) {
      OccupancyRow row;
      row.n_hidden = n_values[ni];
      row.pair = pr;
      for (std::size_t si = 0; si < seeds.size(); ++si) {
        const Vector& dev = deviations[ni * seeds.size() + si];
        row.mean_sq_deviation += dev(pr) * dev(pr);
        row.mean_total_deviation += dev.sum();
      }
      row.mean_sq_deviation /= static_cast<double>(seeds.size());
      row.mean_total_deviation /= static_cast<double>(seeds.size());
      rows.push_back(row);
    }
  return rows;
}

}  // namespace nac
