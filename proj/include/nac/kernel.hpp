#pragma once

#include "nac/nets.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace nac {

class PDCheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Infinite-width tangent kernel
///   A_{xi,xi'} = E[sigma(w.xi') sigma(w.xi) + c^2 sigma'(w.xi') sigma'(w.xi) (xi.xi')]
/// under the initialization law, estimated by Monte Carlo.
struct LimitKernel {
  Matrix a;
  /// Per-entry Monte Carlo standard error.
  Matrix std_error;
  long long mc_samples = 0;
  std::uint64_t seed = 0;
  int dim = 0;

  int size() const { return static_cast<int>(a.rows()); }
  double min_eigenvalue() const;
};

inline constexpr double kPositiveDefiniteThreshold = 1e-8;
inline constexpr long long kDefaultKernelSamples = 1'000'000;

/// Blocked Monte Carlo estimate. Blocks use seeds derived from (seed, block)
/// and are reduced in block order, so the result is independent of `workers`.
/// Throws PDCheckFailed when the symmetrized estimate has an eigenvalue
/// below kPositiveDefiniteThreshold, std::invalid_argument if mc_samples < 1e4.
LimitKernel estimate_limit_kernel(const Embedding& emb, long long mc_samples, std::uint64_t seed,
                                  const InitLaw& law = {}, int workers = 1);

/// Max-entry |B^N - A| for freshly initialized parameters.
double kernel_agreement(const WideNetParams& params, const LimitKernel& kernel, const Embedding& emb);

/// CSV with a header line "M,d,mc_samples,seed", its values, then the M rows.
void save_kernel_csv(const LimitKernel& kernel, const std::string& path);
LimitKernel load_kernel_csv(const std::string& path);

}  // namespace nac
