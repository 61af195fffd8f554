#include "nac/nets.hpp"

#include "nac/rng.hpp"

#include <stdexcept>

namespace nac {

Embedding::Embedding(Matrix vectors) : vectors_(std::move(vectors)) {
  if (vectors_.rows() < 1 || vectors_.cols() < 2)
    throw std::invalid_argument("embedding needs at least one pair and dimension >= 2");
  for (Eigen::Index i = 0; i < vectors_.rows(); ++i)
    if (vectors_(i, vectors_.cols() - 1) != 1.0)
      throw std::invalid_argument("embedding row " + std::to_string(i) + " lacks the bias coordinate 1");
  if (!distinct_directions(vectors_))
    throw std::invalid_argument("embedding rows are not in distinct directions");
}

bool Embedding::distinct_directions(const Matrix& vectors, double tol) {
  for (Eigen::Index i = 0; i < vectors.rows(); ++i)
    for (Eigen::Index j = i + 1; j < vectors.rows(); ++j) {
      const auto u = vectors.row(i);
      const auto v = vectors.row(j);
      // |u|^2 |v|^2 - (u.v)^2 vanishes iff u and v are parallel
      const double cross = u.squaredNorm() * v.squaredNorm() - std::pow(u.dot(v), 2);
      if (cross <= tol * u.squaredNorm() * v.squaredNorm()) return false;
    }
  return true;
}

Embedding default_embedding(const FiniteMdp& mdp) {
  const int ns = mdp.n_states();
  const int na = mdp.n_actions();
  Matrix v = Matrix::Zero(mdp.n_pairs(), ns + na + 1);
  for (int x = 0; x < ns; ++x)
    for (int a = 0; a < na; ++a) {
      const int k = mdp.pair(x, a);
      v(k, x) = 1.0;
      v(k, ns + a) = 1.0;
      v(k, ns + na) = 1.0;
    }
  return Embedding(std::move(v));
}

WideNetParams init_params(int n_hidden, int dim, NetRole role, std::uint64_t seed, const InitLaw& law) {
  if (n_hidden < 1) throw std::invalid_argument("init_params: N must be >= 1");
  if (dim < 2) throw std::invalid_argument("init_params: d must be >= 2");
  CounterRng rng(seed, role == NetRole::critic ? streams::kCriticInit : streams::kActorInit);
  WideNetParams p{role, Vector(n_hidden), Matrix(n_hidden, dim)};
  const double wo = law.outer_half_width;
  const double wi = law.inner_width_for(dim);
  for (int i = 0; i < n_hidden; ++i) {
    p.outer(i) = rng.uniform(-wo, wo);
    for (int j = 0; j < dim; ++j) p.inner(i, j) = rng.uniform(-wi, wi);
  }
  return p;
}

void hidden_activations(const WideNetParams& params, const Embedding& emb, Matrix& act) {
  if (params.dim() != emb.dim()) throw std::invalid_argument("network_output: dimension mismatch");
  act.resize(params.n_hidden(), emb.n_pairs());
  act.noalias() = params.inner * emb.vectors().transpose();
  act = act.unaryExpr([](double z) { return sigmoid(z); });
}

PairFunction output_from_activations(const Matrix& act, const Vector& outer) {
  return act.transpose() * outer / std::sqrt(static_cast<double>(outer.size()));
}

PairFunction network_output(const WideNetParams& params, const Embedding& emb) {
  Matrix act;
  hidden_activations(params, emb, act);
  return output_from_activations(act, params.outer);
}

double network_output_at(const WideNetParams& params, const Embedding& emb, int pair) {
  if (params.dim() != emb.dim()) throw std::invalid_argument("network_output: dimension mismatch");
  const Vector pre = params.inner * emb.row(pair).transpose();
  double s = 0.0;
  for (int i = 0; i < params.n_hidden(); ++i) s += params.outer(i) * sigmoid(pre(i));
  return s / std::sqrt(static_cast<double>(params.n_hidden()));
}

PolicyTable softmax_policy(const PairFunction& logits, int n_actions) {
  const int ns = static_cast<int>(logits.size()) / n_actions;
  Matrix probs(ns, n_actions);
  for (int x = 0; x < ns; ++x) {
    const auto row = logits.segment(x * n_actions, n_actions);
    const double top = row.maxCoeff();
    double z = 0.0;
    for (int a = 0; a < n_actions; ++a) {
      probs(x, a) = std::exp(row(a) - top);
      z += probs(x, a);
    }
    probs.row(x) /= z;
  }
  return PolicyTable(std::move(probs));
}

PolicyTable exploration_policy(const PolicyTable& f, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("exploration rate outside (0,1]");
  const double floor = eta / f.n_actions();
  Matrix g = (floor + (1.0 - eta) * f.probs().array()).matrix();
  return PolicyTable(std::move(g));
}

ScheduleValues schedule_values(long long k, long long n_hidden) {
  return schedule_values_ct(static_cast<double>(k) / static_cast<double>(n_hidden));
}

ScheduleValues schedule_values_ct(double t) {
  const double l = std::log(t + 1.0);
  return {1.0 / (1.0 + t), 1.0 / (1.0 + l * l)};
}

}  // namespace nac
