#pragma once

#include "nac/mdp.hpp"

#include <cmath>
#include <cstdint>

namespace nac {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
inline double sigmoid_prime(double z) {
  const double s = sigmoid(z);
  return s * (1.0 - s);
}
inline double sigmoid_second(double z) {
  const double s = sigmoid(z);
  return s * (1.0 - s) * (1.0 - 2.0 * s);
}

/// Feature vectors for every state-action pair: one row per pair, d columns,
/// last column identically 1 (bias). Rows must point in distinct directions.
class Embedding {
 public:
  /// Throws std::invalid_argument when the bias column or the
  /// distinct-directions condition fails.
  explicit Embedding(Matrix vectors);

  int n_pairs() const { return static_cast<int>(vectors_.rows()); }
  int dim() const { return static_cast<int>(vectors_.cols()); }
  const Matrix& vectors() const { return vectors_; }
  auto row(int pair) const { return vectors_.row(pair); }
  /// Gram matrix of pair features.
  Matrix gram() const { return vectors_ * vectors_.transpose(); }

  /// True when no two rows are scalar multiples of each other.
  static bool distinct_directions(const Matrix& vectors, double tol = 1e-10);

 private:
  Matrix vectors_;
};

/// one-hot(x) ++ one-hot(a) ++ [1].
Embedding default_embedding(const FiniteMdp& mdp);

enum class NetRole { actor, critic };

/// Single hidden layer, output (1/sqrt(N)) sum_i outer_i sigma(inner_i . xi).
struct WideNetParams {
  NetRole role = NetRole::critic;
  Vector outer;  // C (critic) or B (actor), length N
  Matrix inner;  // W (critic) or U (actor), N x d

  int n_hidden() const { return static_cast<int>(outer.size()); }
  int dim() const { return static_cast<int>(inner.cols()); }
};

/// Initialization law: outer ~ U(-1, 1), each inner coordinate ~ U(-1/sqrt(d), 1/sqrt(d)),
/// all independent. Actor and critic use separate streams of the same seed.
struct InitLaw {
  double outer_half_width = 1.0;
  /// Per-coordinate half width of the inner weights; <= 0 means 1/sqrt(d).
  double inner_half_width = 0.0;

  double inner_width_for(int d) const {
    return inner_half_width > 0.0 ? inner_half_width : 1.0 / std::sqrt(static_cast<double>(d));
  }
};

WideNetParams init_params(int n_hidden, int dim, NetRole role, std::uint64_t seed,
                          const InitLaw& law = {});

/// act(i, xi) = sigma(inner_i . xi) for every unit and pair. Reuses act's
/// storage when it already has the right shape.
void hidden_activations(const WideNetParams& params, const Embedding& emb, Matrix& act);
/// (1/sqrt(N)) act^T outer, the output read off precomputed activations.
PairFunction output_from_activations(const Matrix& act, const Vector& outer);

/// Network output at every pair of the embedding.
PairFunction network_output(const WideNetParams& params, const Embedding& emb);
/// Network output at a single pair.
double network_output_at(const WideNetParams& params, const Embedding& emb, int pair);

/// Row-wise softmax of logits laid out in pair order.
PolicyTable softmax_policy(const PairFunction& logits, int n_actions);

/// g = eta / #A + (1 - eta) f. Throws std::invalid_argument if eta is outside (0, 1].
PolicyTable exploration_policy(const PolicyTable& f, double eta);

inline double clip(double x) { return std::max(std::min(x, 2.0), 0.0); }

struct ScheduleValues {
  double zeta;  // actor learning rate
  double eta;   // exploration rate
};

/// zeta = 1 / (1 + k/N), eta = 1 / (1 + log^2(k/N + 1)).
ScheduleValues schedule_values(long long k, long long n_hidden);
/// Continuous-time versions at t = k/N.
ScheduleValues schedule_values_ct(double t);

}  // namespace nac
