#include "nac/kernel.hpp"

#include "nac/csv.hpp"
#include "nac/diagnostics.hpp"
#include "nac/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <thread>

namespace nac {

namespace {

constexpr long long kBlockSize = 8192;

/// Raw moment sums of one block of (c, w) draws.
struct BlockSums {
  Matrix ss;     // sum s s^T
  Matrix dd_c2;  // sum c^2 s' s'^T
  Matrix t1;     // sum (s s)(s s)^T
  Matrix t2;     // sum c^2 (s s')(s s')^T
  Matrix t3;     // sum c^4 (s' s')(s' s')^T
};

BlockSums block_sums(const Embedding& emb, long long count, std::uint64_t block_seed, const InitLaw& law) {
  const int d = emb.dim();
  CounterRng rng(block_seed, streams::kKernelBlocks);
  const double wo = law.outer_half_width;
  const double wi = law.inner_width_for(d);
  Matrix w(count, d);
  Vector c(count);
  for (long long i = 0; i < count; ++i) {
    c(i) = rng.uniform(-wo, wo);
    for (int j = 0; j < d; ++j) w(i, j) = rng.uniform(-wi, wi);
  }
  const Matrix s = (emb.vectors() * w.transpose()).unaryExpr([](double z) { return sigmoid(z); });  // M x count
  const Matrix ds = (s.array() * (1.0 - s.array())).matrix();
  const Vector c2 = c.cwiseAbs2();
  const Vector c4 = c2.cwiseAbs2();
  const Matrix s2 = s.cwiseAbs2();
  const Matrix sds = s.cwiseProduct(ds);
  const Matrix ds2 = ds.cwiseAbs2();

  BlockSums b;
  b.ss = s * s.transpose();
  b.dd_c2 = ds * c2.asDiagonal() * ds.transpose();
  b.t1 = s2 * s2.transpose();
  b.t2 = sds * c2.asDiagonal() * sds.transpose();
  b.t3 = ds2 * c4.asDiagonal() * ds2.transpose();
  return b;
}

}  // namespace

double LimitKernel::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

LimitKernel estimate_limit_kernel(const Embedding& emb, long long mc_samples, std::uint64_t seed,
                                  const InitLaw& law, int workers) {
  if (mc_samples < 10'000) throw std::invalid_argument("estimate_limit_kernel: mc_samples must be >= 1e4");
  const long long n_blocks = (mc_samples + kBlockSize - 1) / kBlockSize;
  std::vector<BlockSums> blocks(static_cast<std::size_t>(n_blocks));
  auto work = [&](int w, int stride) {
    for (long long b = w; b < n_blocks; b += stride) {
      const long long count = std::min(kBlockSize, mc_samples - b * kBlockSize);
      blocks[static_cast<std::size_t>(b)] =
          block_sums(emb, count, derive_seed(seed, static_cast<std::uint64_t>(b)), law);
    }
  };
  workers = std::max(1, workers);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }

  const int m = emb.n_pairs();
  Matrix ss = Matrix::Zero(m, m), dd = Matrix::Zero(m, m);
  Matrix t1 = Matrix::Zero(m, m), t2 = Matrix::Zero(m, m), t3 = Matrix::Zero(m, m);
  for (const auto& b : blocks) {
    ss += b.ss;
    dd += b.dd_c2;
    t1 += b.t1;
    t2 += b.t2;
    t3 += b.t3;
  }
  const double n = static_cast<double>(mc_samples);
  const Matrix gram = emb.gram();
  LimitKernel k;
  k.mc_samples = mc_samples;
  k.seed = seed;
  k.dim = emb.dim();
  k.a = (ss + (dd.array() * gram.array()).matrix()) / n;
  k.a = 0.5 * (k.a + k.a.transpose()).eval();
  const Matrix second = (t1.array() + 2.0 * gram.array() * t2.array() + gram.array().square() * t3.array()) / n;
  k.std_error = ((second.array() - k.a.array().square()).max(0.0) / n).sqrt().matrix();

  const double lam = k.min_eigenvalue();
  if (!(lam > kPositiveDefiniteThreshold))
    throw PDCheckFailed("estimated kernel has minimum eigenvalue " + format_double(lam));
  return k;
}

double kernel_agreement(const WideNetParams& params, const LimitKernel& kernel, const Embedding& emb) {
  return (empirical_kernel(params, emb) - kernel.a).cwiseAbs().maxCoeff();
}

void save_kernel_csv(const LimitKernel& kernel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "M,d,mc_samples,seed\n"
      << kernel.size() << ',' << kernel.dim << ',' << kernel.mc_samples << ',' << kernel.seed << '\n';
  for (int i = 0; i < kernel.size(); ++i) {
    for (int j = 0; j < kernel.size(); ++j) out << (j ? "," : "") << format_double(kernel.a(i, j));
    out << '\n';
  }
}

LimitKernel load_kernel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel file " + path);
  std::string line;
  std::getline(in, line);
  if (line != "M,d,mc_samples,seed") throw std::runtime_error(path + ": bad kernel header");
  std::getline(in, line);
  const auto meta = split_csv_line(line);
  if (meta.size() != 4) throw std::runtime_error(path + ": bad kernel metadata");
  LimitKernel k;
  const int m = std::stoi(meta[0]);
  k.dim = std::stoi(meta[1]);
  k.mc_samples = std::stoll(meta[2]);
  k.seed = std::stoull(meta[3]);
  k.a.resize(m, m);
  for (int i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error(path + ": truncated kernel matrix");
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != m) throw std::runtime_error(path + ": ragged kernel row");
    for (int j = 0; j < m; ++j) k.a(i, j) = std::stod(cells[j]);
  }
  k.std_error = Matrix::Zero(m, m);
  return k;
}

}  // namespace nac
