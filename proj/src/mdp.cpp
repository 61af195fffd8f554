#include "nac/mdp.hpp"

#include "nac/nets.hpp"

#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace nac {

namespace {

constexpr double kStochasticTol = 1e-12;
constexpr double kStructuralZero = 1e-15;

std::string row_name(int x, int a) {
  std::ostringstream os;
  os << "(x=" << x << ", a=" << a << ")";
  return os.str();
}

}  // namespace

FiniteMdp FiniteMdp::create(const std::vector<std::vector<std::vector<double>>>& transition,
                            const std::vector<std::vector<double>>& reward, double gamma,
                            const std::vector<double>& rho0) {
  const int ns = static_cast<int>(transition.size());
  if (ns == 0) throw InvalidMdp("transition table is empty");
  if (transition[0].size() != static_cast<std::size_t>(ns))
    throw InvalidMdp("transition table must be indexed [x_next][x][a]");
  const int na = static_cast<int>(transition[0][0].size());
  if (na == 0) throw InvalidMdp("action set is empty");

  Matrix next(ns * na, ns);
  for (int xn = 0; xn < ns; ++xn) {
    if (transition[xn].size() != static_cast<std::size_t>(ns))
      throw InvalidMdp("transition table has ragged state dimension");
    for (int x = 0; x < ns; ++x) {
      if (transition[xn][x].size() != static_cast<std::size_t>(na))
        throw InvalidMdp("transition table has ragged action dimension");
      for (int a = 0; a < na; ++a) next(x * na + a, xn) = transition[xn][x][a];
    }
  }
  if (reward.size() != static_cast<std::size_t>(ns)) throw InvalidMdp("reward table needs one row per state");
  Matrix rew(ns, na);
  for (int x = 0; x < ns; ++x) {
    if (reward[x].size() != static_cast<std::size_t>(na))
      throw InvalidMdp("reward table needs one column per action");
    for (int a = 0; a < na; ++a) rew(x, a) = reward[x][a];
  }
  if (rho0.size() != static_cast<std::size_t>(ns * na))
    throw InvalidMdp("rho0 needs one entry per state-action pair");
  Vector r0 = Eigen::Map<const Vector>(rho0.data(), static_cast<Eigen::Index>(rho0.size()));
  return from_pair_table(ns, na, std::move(next), std::move(rew), gamma, std::move(r0));
}

FiniteMdp FiniteMdp::from_pair_table(int n_states, int n_actions, Matrix next_state_probs,
                                     Matrix reward, double gamma, Vector rho0) {
  FiniteMdp m;
  m.n_states_ = n_states;
  m.n_actions_ = n_actions;
  m.next_state_ = std::move(next_state_probs);
  m.reward_ = std::move(reward);
  m.gamma_ = gamma;
  m.rho0_ = std::move(rho0);
  m.validate();
  m.reward_vec_.resize(m.n_pairs());
  for (int x = 0; x < n_states; ++x)
    for (int a = 0; a < n_actions; ++a) m.reward_vec_(m.pair(x, a)) = m.reward_(x, a);
  return m;
}

void FiniteMdp::validate() const {
  if (n_states_ < 1 || n_actions_ < 1) throw InvalidMdp("need at least one state and one action");
  if (next_state_.rows() != n_pairs() || next_state_.cols() != n_states_)
    throw InvalidMdp("transition table has wrong shape");
  if (reward_.rows() != n_states_ || reward_.cols() != n_actions_)
    throw InvalidMdp("reward table has wrong shape");
  if (rho0_.size() != n_pairs()) throw InvalidMdp("rho0 has wrong length");
  if (!(gamma_ > 0.0 && gamma_ < 1.0)) {
    std::ostringstream os;
    os << "discount gamma=" << gamma_ << " outside (0,1)";
    throw InvalidMdp(os.str());
  }
  for (int x = 0; x < n_states_; ++x) {
    for (int a = 0; a < n_actions_; ++a) {
      const auto row = next_state_.row(pair(x, a));
      if ((row.array() < 0.0).any() || !row.allFinite())
        throw InvalidMdp("transition row " + row_name(x, a) + " has a negative or non-finite entry");
      if (std::abs(row.sum() - 1.0) > kStochasticTol) {
        std::ostringstream os;
        os << "transition row " << row_name(x, a) << " sums to " << row.sum() << ", not 1";
        throw InvalidMdp(os.str());
      }
      const double rv = reward_(x, a);
      if (!(rv >= -1.0 && rv <= 1.0))
        throw InvalidMdp("reward " + row_name(x, a) + " outside [-1,1]");
    }
  }
  if ((rho0_.array() < 0.0).any() || std::abs(rho0_.sum() - 1.0) > kStochasticTol)
    throw InvalidMdp("rho0 is not a probability vector over pairs");
}

Vector FiniteMdp::rho0_states() const {
  Vector out = Vector::Zero(n_states_);
  for (int x = 0; x < n_states_; ++x)
    for (int a = 0; a < n_actions_; ++a) out(x) += rho0_(pair(x, a));
  return out;
}

FiniteMdp FiniteMdp::with_reward(const Matrix& reward) const {
  return from_pair_table(n_states_, n_actions_, next_state_, reward, gamma_, rho0_);
}

PolicyTable::PolicyTable(Matrix probs) : probs_(std::move(probs)) {
  for (Eigen::Index x = 0; x < probs_.rows(); ++x) {
    const auto row = probs_.row(x);
    if ((row.array() < 0.0).any() || std::abs(row.sum() - 1.0) > kStochasticTol)
      throw std::invalid_argument("policy row " + std::to_string(x) + " is not a probability vector");
  }
}

PolicyTable PolicyTable::uniform(int n_states, int n_actions) {
  return PolicyTable(Matrix::Constant(n_states, n_actions, 1.0 / n_actions));
}

Vector PolicyTable::as_pair_vector() const {
  Vector out(probs_.size());
  for (Eigen::Index x = 0; x < probs_.rows(); ++x)
    for (Eigen::Index a = 0; a < probs_.cols(); ++a) out(x * probs_.cols() + a) = probs_(x, a);
  return out;
}

std::string to_string(Ergodicity e) {
  switch (e) {
    case Ergodicity::ergodic: return "ergodic";
    case Ergodicity::reducible: return "reducible";
    case Ergodicity::periodic: return "periodic";
  }
  return "unknown";
}

ChainKernel chain_kernel(const FiniteMdp& mdp, const PolicyTable& g) {
  const int m = mdp.n_pairs();
  const int na = mdp.n_actions();
  ChainKernel k{Matrix::Zero(m, m), ChainFlavor::critic_chain};
  for (int from = 0; from < m; ++from)
    for (int xn = 0; xn < mdp.n_states(); ++xn) {
      const double px = mdp.next_state_probs()(from, xn);
      if (px == 0.0) continue;
      for (int a = 0; a < na; ++a) k.kernel(from, xn * na + a) = px * g(xn, a);
    }
  return k;
}

ChainKernel aux_chain_kernel(const FiniteMdp& mdp, const PolicyTable& g) {
  return aux_chain_kernel(mdp, g, mdp.gamma());
}

ChainKernel aux_chain_kernel(const FiniteMdp& mdp, const PolicyTable& g, double continuation) {
  if (!(continuation > 0.0 && continuation <= 1.0))
    throw std::invalid_argument("aux_chain_kernel: continuation weight outside (0,1]");
  const int m = mdp.n_pairs();
  const int na = mdp.n_actions();
  const double gamma = continuation;
  const Vector restart = mdp.rho0_states();
  ChainKernel k{Matrix::Zero(m, m), ChainFlavor::actor_aux_chain};
  for (int from = 0; from < m; ++from)
    for (int xn = 0; xn < mdp.n_states(); ++xn) {
      const double px = gamma * mdp.next_state_probs()(from, xn) + (1.0 - gamma) * restart(xn);
      if (px == 0.0) continue;
      for (int a = 0; a < na; ++a) k.kernel(from, xn * na + a) = px * g(xn, a);
    }
  return k;
}

Ergodicity ergodicity_check(const Matrix& kernel) {
  const int m = static_cast<int>(kernel.rows());
  std::vector<std::vector<int>> out(m), in(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (kernel(i, j) >= kStructuralZero) {
        out[i].push_back(j);
        in[j].push_back(i);
      }

  auto reach_all = [m](const std::vector<std::vector<int>>& adj, std::vector<int>* level) {
    std::vector<int> lvl(m, -1);
    std::queue<int> q;
    lvl[0] = 0;
    q.push(0);
    int seen = 1;
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (lvl[v] < 0) {
          lvl[v] = lvl[u] + 1;
          ++seen;
          q.push(v);
        }
    }
    if (level) *level = lvl;
    return seen == m;
  };

  std::vector<int> level;
  if (!reach_all(out, &level) || !reach_all(in, nullptr)) return Ergodicity::reducible;

  int period = 0;
  for (int u = 0; u < m; ++u)
    for (int v : out[u]) period = std::gcd(period, std::abs(level[u] + 1 - level[v]));
  return period == 1 ? Ergodicity::ergodic : Ergodicity::periodic;
}

PairDistribution stationary_distribution(const Matrix& kernel) {
  const auto cls = ergodicity_check(kernel);
  if (cls != Ergodicity::ergodic) throw NotErgodic("chain is " + to_string(cls));

  const Eigen::Index m = kernel.rows();
  Matrix lhs = kernel.transpose() - Matrix::Identity(m, m);
  lhs.row(m - 1).setOnes();
  Vector rhs = Vector::Zero(m);
  rhs(m - 1) = 1.0;
  Vector pi = lhs.fullPivLu().solve(rhs);

  auto residual = [&](const Vector& v) { return (kernel.transpose() * v - v).cwiseAbs().maxCoeff(); };
  if (!pi.allFinite() || residual(pi) > 1e-11) {
    // power-iteration fallback
    pi = Vector::Constant(m, 1.0 / static_cast<double>(m));
    for (int it = 0; it < 1'000'000 && residual(pi) > 1e-13; ++it) {
      pi = kernel.transpose() * pi;
      pi /= pi.sum();
    }
  }
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  return pi;
}

PairDistribution visiting_measure(const FiniteMdp& mdp, const PolicyTable& g) {
  return stationary_distribution(aux_chain_kernel(mdp, g)) / (1.0 - mdp.gamma());
}

PairFunction value_function(const FiniteMdp& mdp, const PolicyTable& f) {
  const int m = mdp.n_pairs();
  const Matrix k = chain_kernel(mdp, f).kernel;
  Matrix system = Matrix::Identity(m, m) - mdp.gamma() * k;
  Vector v = system.partialPivLu().solve(mdp.reward_vector());
  if (!v.allFinite()) throw SingularSystem("Bellman system solve produced non-finite values");
  const double res = (v - mdp.reward_vector() - mdp.gamma() * k * v).cwiseAbs().maxCoeff();
  if (res > 1e-9) throw SingularSystem("Bellman residual " + std::to_string(res) + " too large");
  return v;
}

Vector state_value(const FiniteMdp& mdp, const PolicyTable& f, const PairFunction& v) {
  Vector out = Vector::Zero(mdp.n_states());
  for (int x = 0; x < mdp.n_states(); ++x)
    for (int a = 0; a < mdp.n_actions(); ++a) out(x) += v(mdp.pair(x, a)) * f(x, a);
  return out;
}

PairFunction advantage(const FiniteMdp& mdp, const PolicyTable& f, const PairFunction& v) {
  const Vector vs = state_value(mdp, f, v);
  PairFunction adv(mdp.n_pairs());
  for (int x = 0; x < mdp.n_states(); ++x)
    for (int a = 0; a < mdp.n_actions(); ++a) adv(mdp.pair(x, a)) = v(mdp.pair(x, a)) - vs(x);
  return adv;
}

double objective(const FiniteMdp& mdp, const PolicyTable& f) {
  return visiting_measure(mdp, f).dot(mdp.reward_vector());
}

PairFunction policy_gradient(const FiniteMdp& mdp, const PairFunction& logits) {
  const PolicyTable f = softmax_policy(logits, mdp.n_actions());
  const PairFunction v = value_function(mdp, f);
  return visiting_measure(mdp, f).cwiseProduct(advantage(mdp, f, v));
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("tv_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double tv_distance(const Vector& p, const Vector& q) {
  return tv_distance(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
                     std::span<const double>(q.data(), static_cast<std::size_t>(q.size())));
}

double policy_distance(const PolicyTable& f, const PolicyTable& h) {
  if (f.n_states() != h.n_states() || f.n_actions() != h.n_actions())
    throw std::invalid_argument("policy_distance: shape mismatch");
  double worst = 0.0;
  for (int x = 0; x < f.n_states(); ++x) {
    const Vector a = f.probs().row(x).transpose();
    const Vector b = h.probs().row(x).transpose();
    worst = std::max(worst, tv_distance(a, b));
  }
  return worst;
}

}  // namespace nac
