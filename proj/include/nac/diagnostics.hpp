#pragma once

#include "nac/nets.hpp"
#include "nac/trainer.hpp"

#include <functional>
#include <span>

namespace nac {

/// B_{xi,xi'} = (1/N) sum_i [sigma(w_i.xi') sigma(w_i.xi)
///                           + c_i^2 sigma'(w_i.xi') sigma'(w_i.xi) (xi.xi')].
/// With actor parameters this is the actor-side kernel.
Matrix empirical_kernel(const WideNetParams& params, const Embedding& emb);

/// Max over hidden units of |dC|, ||dW||, |dB|, ||dU|| between two states.
IncrementStats increment_stats(const TrainState& before, const TrainState& after);

/// Test function on one hidden unit's (outer, inner) parameters.
using UnitTestFunction = std::function<double(double outer, std::span<const double> inner)>;

/// phi(c, w) = c^2.
double phi_outer_squared(double c, std::span<const double> w);
/// phi(c, w) = tanh(c + sum_j w_j).
double phi_tanh_sum(double c, std::span<const double> w);

/// (1/N) sum_i phi(outer_i, inner_i).
double measure_pairing(const WideNetParams& params, const UnitTestFunction& phi);

/// |<phi, nu_t> - <phi, nu_0>| for the empirical parameter measures.
double measure_drift(const WideNetParams& at_t, const WideNetParams& at_0, const UnitTestFunction& phi);

}  // namespace nac
