#include <doctest.h>

#include "nac/fixtures.hpp"
#include "nac/nets.hpp"
#include "nac/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace nac;

TEST_CASE("init_params") {
  SUBCASE("outer mean over a million units") {
    const WideNetParams p = init_params(1'000'000, 6, NetRole::critic, 1);
    CHECK(std::abs(p.outer.mean()) < 0.005);
    CHECK(p.outer.cwiseAbs().maxCoeff() <= 1.0);
  }
  SUBCASE("inner rows stay in the unit ball") {
    for (int d : {2, 6, 12}) {
      const WideNetParams p = init_params(20'000, d, NetRole::actor, 3);
      CHECK(p.inner.rowwise().norm().maxCoeff() <= 1.0);
      CHECK(p.inner.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(static_cast<double>(d)));
    }
  }
  SUBCASE("same seed, same parameters; actor and critic differ") {
    const WideNetParams a = init_params(50, 6, NetRole::critic, 42);
    const WideNetParams b = init_params(50, 6, NetRole::critic, 42);
    const WideNetParams c = init_params(50, 6, NetRole::actor, 42);
    CHECK(a.outer == b.outer);
    CHECK(a.inner == b.inner);
    CHECK(a.outer != c.outer);
  }
  CHECK_THROWS(init_params(0, 6, NetRole::critic, 1));
  CHECK_THROWS(init_params(5, 1, NetRole::critic, 1));
}

TEST_CASE("network_output") {
  Matrix v(2, 2);
  v << 0.0, 1.0, 1.0, 1.0;
  const Embedding emb(v);
  SUBCASE("single unit at zero preactivation") {
    WideNetParams p{NetRole::critic, Vector::Ones(1), Matrix::Zero(1, 2)};
    CHECK(network_output(p, emb)(0) == 0.5);
  }
  SUBCASE("zero outer weights") {
    WideNetParams p = init_params(10, 2, NetRole::critic, 2);
    p.outer.setZero();
    CHECK(network_output(p, emb).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("hand evaluation with three units") {
    WideNetParams p{NetRole::actor, Vector(3), Matrix(3, 2)};
    p.outer << 0.3, -0.7, 0.9;
    p.inner << 0.1, -0.2, 0.4, 0.5, -0.6, 0.05;
    const Vector out = network_output(p, emb);
    for (int k = 0; k < 2; ++k) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) {
        const double z = p.inner(i, 0) * v(k, 0) + p.inner(i, 1) * v(k, 1);
        s += p.outer(i) / (1.0 + std::exp(-z));
      }
      CHECK(std::abs(out(k) - s / std::sqrt(3.0)) < 1e-12);
      CHECK(std::abs(network_output_at(p, emb, k) - out(k)) < 1e-12);
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS(network_output(init_params(4, 3, NetRole::critic, 1), emb));
  }
}

TEST_CASE("softmax_policy") {
  const Vector constant = (Vector(4) << 2.0, 2.0, -1.0, -1.0).finished();
  CHECK((softmax_policy(constant, 2).probs().array() - 0.5).abs().maxCoeff() < 1e-15);
  const Vector hand = (Vector(2) << 0.0, std::log(3.0)).finished();
  const PolicyTable f = softmax_policy(hand, 2);
  CHECK(std::abs(f(0, 0) - 0.25) < 1e-15);
  CHECK(std::abs(f(0, 1) - 0.75) < 1e-15);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  for (int i = 0; i < 200; ++i) {
    Vector logits(12);
    for (int k = 0; k < 12; ++k) logits(k) = u(rng);
    const PolicyTable g = softmax_policy(logits, 3);
    CHECK((g.probs().rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    Vector shifted = logits;
    for (int x = 0; x < 4; ++x) shifted.segment(3 * x, 3).array() += u(rng);
    CHECK((softmax_policy(shifted, 3).probs() - g.probs()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("exploration_policy") {
  Matrix det(1, 2);
  det << 1.0, 0.0;
  const PolicyTable f(det);
  CHECK((exploration_policy(f, 1.0).probs().array() - 0.5).abs().maxCoeff() < 1e-15);
  CHECK((exploration_policy(f, 1e-12).probs() - det).cwiseAbs().maxCoeff() < 1e-11);
  const PolicyTable g = exploration_policy(f, 0.5);
  CHECK(g(0, 0) == 0.75);
  CHECK(g(0, 1) == 0.25);
  CHECK_THROWS(exploration_policy(f, 0.0));
  CHECK_THROWS(exploration_policy(f, 1.5));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 5.0), e(1e-3, 1.0);
  for (int i = 0; i < 100; ++i) {
    Vector logits(8);
    for (int k = 0; k < 8; ++k) logits(k) = u(rng);
    const double eta = e(rng);
    CHECK(exploration_policy(softmax_policy(logits, 4), eta).probs().minCoeff() >= eta / 4 - 1e-15);
  }
}

TEST_CASE("clip") {
  CHECK(clip(3.0) == 2.0);
  CHECK(clip(-1.0) == 0.0);
  CHECK(clip(1.5) == 1.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    CHECK(std::abs(clip(a) - clip(b)) <= std::abs(a - b));
    CHECK(clip(a) >= 0.0);
    CHECK(clip(a) <= 2.0);
  }
}

TEST_CASE("schedules") {
  const auto s0 = schedule_values(0, 100);
  CHECK(s0.zeta == 1.0);
  CHECK(s0.eta == 1.0);
  CHECK(std::abs(schedule_values_ct(std::numbers::e - 1.0).eta - 0.5) < 1e-15);
  CHECK(schedule_values_ct(1.0).zeta == 0.5);
  CHECK(schedule_values(250, 100).zeta == schedule_values_ct(2.5).zeta);

  SUBCASE("rates stay in (0, 1] and do not increase") {
    double prev_z = 2.0, prev_e = 2.0;
    for (double t = 0.0; t <= 1e4; t += 0.37) {
      const auto s = schedule_values_ct(t);
      CHECK(s.zeta > 0.0);
      CHECK(s.zeta <= 1.0);
      CHECK(s.eta > 0.0);
      CHECK(s.eta <= 1.0);
      CHECK(s.zeta <= prev_z);
      CHECK(s.eta <= prev_e);
      prev_z = s.zeta;
      prev_e = s.eta;
    }
  }
  SUBCASE("integral conditions") {
    // trapezoid on a fine grid near 0, coarser later
    double integral = 0.0;
    double t = 0.0;
    while (t < 1e4) {
      const double h = t < 10 ? 1e-3 : 0.1;
      integral += 0.5 * h * (schedule_values_ct(t).zeta + schedule_values_ct(t + h).zeta);
      t += h;
    }
    CHECK(integral > 9.0);
    // int_{1e4}^inf (1+t)^-2 dt = 1/(1+1e4)
    CHECK(1.0 / (1.0 + 1e4) < 1e-4);
  }
  SUBCASE("zeta / eta^n tends to 0 for n <= 4") {
    // log-derivative of (1 + L^2)^n / (1 + t), L = log(1 + t), is negative once
    // L > n + sqrt(n^2 - 1); before that point the ratio grows
    for (int n = 1; n <= 4; ++n) {
      const double peak = std::exp(n + std::sqrt(n * n - 1.0)) - 1.0;
      double prev = std::numeric_limits<double>::infinity();
      for (double t = std::max(10.0, peak); t <= 1e4; t *= 1.5) {
        const auto s = schedule_values_ct(t);
        const double ratio = s.zeta / std::pow(s.eta, n);
        CHECK(ratio < prev);
        prev = ratio;
      }
      const auto far = schedule_values_ct(1e20);
      CHECK(far.zeta / std::pow(far.eta, n) < 1e-6);
    }
  }
}

TEST_CASE("default_embedding") {
  const FiniteMdp m = chain3();
  const Embedding emb = default_embedding(m);
  CHECK(emb.dim() == 6);
  CHECK((emb.vectors().rowwise().squaredNorm().array() - 3.0).abs().maxCoeff() == 0.0);
  CHECK(Embedding::distinct_directions(emb.vectors()));
  const Vector expected = (Vector(6) << 0, 1, 0, 1, 0, 1).finished();
  CHECK(emb.row(m.pair(1, 0)).transpose() == expected);

  Matrix bad(2, 2);
  bad << 2.0, 1.0, 2.0, 1.0;
  CHECK_THROWS(Embedding(bad));
  bad << 1.0, 0.5, 2.0, 1.0;
  CHECK_THROWS(Embedding(bad));
}

TEST_CASE("initial output variance does not depend on N") {
  const FiniteMdp m = chain3();
  const Embedding emb = default_embedding(m);
  auto sample_var = [&](int n, NetRole role) {
    Vector sum = Vector::Zero(6), sq = Vector::Zero(6);
    const int seeds = 200;
    for (int s = 0; s < seeds; ++s) {
      const Vector out = network_output(init_params(n, 6, role, 1000 + s), emb);
      sum += out;
      sq += out.cwiseAbs2();
    }
    return Vector((sq.array() / seeds - (sum.array() / seeds).square()) * seeds / (seeds - 1));
  };
  for (NetRole role : {NetRole::critic, NetRole::actor}) {
    const Vector small = sample_var(100, role);
    const Vector large = sample_var(10'000, role);
    for (int k = 0; k < 6; ++k) CHECK(std::abs(small(k) / large(k) - 1.0) < 0.2);
  }
}
