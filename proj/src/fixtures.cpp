#include "nac/fixtures.hpp"

#include <algorithm>

namespace nac {

FiniteMdp chain3() {
  constexpr int ns = 3, na = 2;
  Matrix next = Matrix::Zero(ns * na, ns);
  Matrix reward = Matrix::Zero(ns, na);
  for (int x = 0; x < ns; ++x) {
    const int left = std::max(x - 1, 0);
    const int right = std::min(x + 1, ns - 1);
    next(x * na + 0, left) += 0.8;
    next(x * na + 0, x) += 0.2;
    next(x * na + 1, right) += 0.8;
    next(x * na + 1, x) += 0.2;
    if (x == 2) reward.row(x).setOnes();
  }
  return FiniteMdp::from_pair_table(ns, na, next, reward, 0.9, Vector::Constant(ns * na, 1.0 / (ns * na)));
}

FiniteMdp chain3_zero_reward() { return chain3().with_reward(Matrix::Zero(3, 2)); }

FiniteMdp iid2() {
  Matrix reward = Matrix::Zero(2, 2);
  reward(1, 1) = 1.0;
  return FiniteMdp::from_pair_table(2, 2, Matrix::Constant(4, 2, 0.5), reward, 0.9, Vector::Constant(4, 0.25));
}

FiniteMdp fixture(const std::string& name) {
  if (name == "chain3") return chain3();
  if (name == "chain3_zero_reward") return chain3_zero_reward();
  if (name == "iid2") return iid2();
  throw std::invalid_argument("unknown fixture '" + name + "'");
}

std::vector<std::string> fixture_names() { return {"chain3", "chain3_zero_reward", "iid2"}; }

}  // namespace nac
