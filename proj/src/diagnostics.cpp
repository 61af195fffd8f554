#include "nac/diagnostics.hpp"

#include <cmath>
#include <stdexcept>

namespace nac {

Matrix empirical_kernel(const WideNetParams& params, const Embedding& emb) {
  if (params.dim() != emb.dim()) throw std::invalid_argument("empirical_kernel: dimension mismatch");
  Matrix s;  // N x M
  hidden_activations(params, emb, s);
  const Matrix ds = (s.array() * (1.0 - s.array())).matrix();
  const Matrix weighted = params.outer.cwiseAbs2().asDiagonal() * ds;
  const double n = static_cast<double>(params.n_hidden());
  Matrix b = s.transpose() * s / n;
  b += ((ds.transpose() * weighted / n).array() * emb.gram().array()).matrix();
  return b;
}

IncrementStats increment_stats(const TrainState& before, const TrainState& after) {
  if (before.critic.n_hidden() != after.critic.n_hidden() || before.actor.n_hidden() != after.actor.n_hidden())
    throw std::invalid_argument("increment_stats: network sizes differ");
  IncrementStats s;
  s.max_dC = (after.critic.outer - before.critic.outer).cwiseAbs().maxCoeff();
  s.max_dW = (after.critic.inner - before.critic.inner).rowwise().norm().maxCoeff();
  s.max_dB = (after.actor.outer - before.actor.outer).cwiseAbs().maxCoeff();
  s.max_dU = (after.actor.inner - before.actor.inner).rowwise().norm().maxCoeff();
  return s;
}

double phi_outer_squared(double c, std::span<const double>) { return c * c; }

double phi_tanh_sum(double c, std::span<const double> w) {
  double s = c;
  for (double v : w) s += v;
  return std::tanh(s);
}

double measure_pairing(const WideNetParams& params, const UnitTestFunction& phi) {
  const int n = params.n_hidden();
  const int d = params.dim();
  std::vector<double> w(d);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) w[j] = params.inner(i, j);
    sum += phi(params.outer(i), w);
  }
  return sum / n;
}

double measure_drift(const WideNetParams& at_t, const WideNetParams& at_0, const UnitTestFunction& phi) {
  return std::abs(measure_pairing(at_t, phi) - measure_pairing(at_0, phi));
}

}  // namespace nac
