#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "framescale/frame_scaler.hpp"
#include "framescale/generate.hpp"
#include "framescale/perceptron.hpp"

using namespace framescale;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Vector random_direction(Index d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(d);
  for (Index i = 0; i < d; ++i) w(i) = normal(rng);
  return w;
}

std::vector<LabeledSample> label_by(const Matrix& points, const QMetric& q, const Vector& w) {
  std::vector<LabeledSample> out;
  for (Index j = 0; j < points.cols(); ++j) {
    const Vector p = points.col(j);
    out.push_back({p, q.inner(w, p) >= 0.0 ? 1 : -1});
  }
  return out;
}

// every sample at margin gamma under v carries the right sign
bool margin_points_correct(const std::vector<LabeledSample>& samples, const QMetric& q, double gamma, const Vector& v) {
  const double vv = q.norm2(v);
  for (const auto& s : samples) {
    const double vu = q.inner(v, s.point);
    if (vu * vu < gamma * gamma * vv * q.norm2(s.point)) continue;
    if ((vu > 0.0 ? 1 : -1) != s.label) return false;
  }
  return true;
}

}  // namespace

TEST(Perceptron, AlreadyCorrectStartNeedsNoUpdates) {
  const Frame f(Matrix::Identity(2, 2));
  const QMetric q(f, Vector::Ones(2));
  const std::vector<LabeledSample> samples{{vec({1, 0}), 1}, {vec({0, 1}), 1}};
  const PerceptronResult r = improved_perceptron(samples, q, 1.0 / std::sqrt(2.0), vec({1, 0}));
  EXPECT_EQ(r.updates, 0);
  EXPECT_EQ(r.v, vec({1, 0}));
}

TEST(Perceptron, UpdateIdentityAtExactMargin) {
  const Frame f(Matrix::Identity(2, 2));
  const QMetric q(f, Vector::Ones(2));
  const double gamma = 0.3;
  // u makes angle with v whose cosine is exactly -gamma
  const Vector v = vec({1, 0});
  const Vector u = vec({-gamma, std::sqrt(1.0 - gamma * gamma)});
  const Vector next = perceptron_update(q, v, u);
  EXPECT_NEAR(q.norm2(next), q.norm2(v) - q.inner(v, u) * q.inner(v, u) / q.norm2(u), 1e-15);
  EXPECT_LE(q.norm2(next), (1.0 - gamma * gamma) * q.norm2(v) + 1e-15);
}

TEST(Perceptron, StepsObeyUpdateIdentityAndCorrelationGrows) {
  std::mt19937_64 rng(181);
  for (int rep = 0; rep < 40; ++rep) {
    const Index d = 2 + rep % 4;
    const Index n = 4 * d;
    const Frame f(gaussian_frame(d, n, rng));
    const QMetric q(f, Vector::Ones(n));
    const Vector w = random_direction(d, rng);
    const auto samples = label_by(f.matrix(), q, w);
    const double gamma = 1.0 / std::sqrt(4.0 * static_cast<double>(d));

    Vector v0 = random_direction(d, rng);
    if (q.inner(v0, w) < 0.0) v0 = -v0;
    const PerceptronResult r = improved_perceptron(samples, q, gamma, v0);
    EXPECT_TRUE(margin_points_correct(samples, q, gamma, r.v));

    Vector v = v0;
    double corr = q.inner(v, w);
    for (const PerceptronStep& s : r.steps) {
      EXPECT_NEAR(s.norm2_after, s.norm2_before - s.inner_sq_over_norm2, 1e-10 * s.norm2_before);
      EXPECT_LE(s.norm2_after, (1.0 - gamma * gamma) * s.norm2_before * (1.0 + 1e-12));
      v = perceptron_update(q, v, samples[s.sample].point);
      const double next = q.inner(v, w);
      EXPECT_GT(next, corr);
      corr = next;
    }
    const double rho0 = q.inner(v0, w) / std::sqrt(q.norm2(v0) * q.norm2(w));
    const double bound = std::ceil(std::log(1.0 / (rho0 * rho0)) / std::log(1.0 / (1.0 - gamma * gamma)));
    EXPECT_LE(static_cast<double>(r.updates), bound);
  }
}

TEST(Perceptron, SeededInstancesSeparateRandomSets) {
  std::mt19937_64 rng(191);
  for (int rep = 0; rep < 40; ++rep) {
    const Index d = 2 + rep % 3;
    const Index n = 6 + rep % 10;
    const Frame f(gaussian_frame(d, n, rng));
    const ScalingResult scaled = run(f, uniform_marginals(d, n), 1e-6);
    ASSERT_EQ(scaled.status, Status::Scaled);
    const QMetric q(f, scaled.z);
    const Vector w = random_direction(d, rng);
    const auto samples = label_by(f.matrix(), q, w);
    const double gamma = 1.0 / std::sqrt(4.0 * static_cast<double>(d));
    const PerceptronResult r = improved_perceptron(samples, q, gamma);
    EXPECT_TRUE(margin_points_correct(samples, q, gamma, r.v));
    EXPECT_LT(r.seed, 2 * samples.size());
  }
}

TEST(Perceptron, ContradictoryLabelsAreNotSeparable) {
  const Frame f(Matrix::Identity(2, 2));
  const QMetric q(f, Vector::Ones(2));
  const std::vector<LabeledSample> samples{
      {vec({1, 0}), 1}, {vec({-1, 0}), 1}, {vec({0, 1}), 1}, {vec({0, -1}), 1}};
  EXPECT_THROW(improved_perceptron(samples, q, 0.5), NotSeparable);
}

TEST(Perceptron, RejectsBadInput) {
  const Frame f(Matrix::Identity(2, 2));
  const QMetric q(f, Vector::Ones(2));
  EXPECT_THROW(improved_perceptron({}, q, 0.5), InvalidInput);
  EXPECT_THROW(improved_perceptron({{vec({1, 0}), 0}}, q, 0.5), InvalidInput);
  EXPECT_THROW(improved_perceptron({{vec({1, 0, 0}), 1}}, q, 0.5), InvalidInput);
  EXPECT_THROW(improved_perceptron({{vec({1, 0}), 1}}, q, 1.0), InvalidInput);
}

TEST(MarginFraction, Examples) {
  for (Index d = 1; d <= 5; ++d) {
    const Frame f(Matrix::Identity(d, d));
    Vector w = Vector::Zero(d);
    w(0) = 1.0;
    EXPECT_NEAR(margin_fraction(f, Vector::Ones(d), w), 1.0 / static_cast<double>(d), 1e-15);
  }
  const Frame line(vec({1, -2, 0.5, 3}).transpose());
  const ScalingResult r = run(line, uniform_marginals(1, 4), 0.1);
  EXPECT_EQ(margin_fraction(line, r.z, vec({-0.7})), 1.0);
}

TEST(MarginFraction, RequiresNearUniformLeverage) {
  const Frame f(vec({1, 1, 1}).transpose());
  EXPECT_THROW(margin_fraction(f, vec({100, 1, 1}), vec({1})), PreconditionViolated);
}

TEST(MarginFraction, GaussianFramesAfterScaling) {
  std::mt19937_64 rng(193);
  for (int rep = 0; rep < 10; ++rep) {
    const Index d = 2 + rep % 5;
    const Index n = 3 * d + rep;
    const Frame f(gaussian_frame(d, n, rng));
    const double eps = 0.9 * static_cast<double>(d) / (2.0 * static_cast<double>(n));
    const ScalingResult r = run(f, uniform_marginals(d, n), eps);
    ASSERT_EQ(r.status, Status::Scaled);
    for (int trial = 0; trial < 100; ++trial) {
      const double frac = margin_fraction(f, r.z, random_direction(d, rng));
      EXPECT_GE(frac, 1.0 / (5.0 * static_cast<double>(d)));
    }
  }
}
