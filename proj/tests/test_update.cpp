#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "framescale/eigen_sum.hpp"
#include "framescale/generate.hpp"
#include "framescale/update.hpp"
#include "oracles.hpp"

using namespace framescale;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// gapped instances satisfying h'(1) < 1/4, d <= 6
std::vector<oracle::GappedInstance> guess_instances(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> leak(-3.5, -1.0);
  std::vector<oracle::GappedInstance> out;
  while (static_cast<int>(out.size()) < count) {
    const Index d = 2 + static_cast<Index>(rng() % 5);
    const Index tsize = d + static_cast<Index>(rng() % 4);
    const Index n = tsize + d + static_cast<Index>(rng() % 3);
    const Index p = static_cast<Index>(rng() % static_cast<std::uint64_t>(d + 1));
    auto g = oracle::gapped_instance(d, n, tsize, p, std::pow(10.0, leak(rng)), rng);
    if (numerical_rank(g.u) < d) continue;
    const Frame f(g.u);
    const ProxyContext ctx(f, g.z, g.t);
    if (!(proxy_h_prime(ctx, 1.0) < 0.25)) continue;
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace

TEST(NewtonDinkelbach, LogarithmOneStep) {
  const NDProblem problem{[](double a) { return std::log(a); }, [](double a) { return 1.0 / a; }, 1.0, 0.5, 1.0, 20};
  const NDResult r = newton_dinkelbach(problem);
  EXPECT_DOUBLE_EQ(r.alpha, 2.0);
  EXPECT_EQ(r.iterations, 1);
}

TEST(NewtonDinkelbach, EarlyExit) {
  const NDProblem problem{[](double a) { return std::log(a); }, [](double a) { return 1.0 / a; }, 2.0, 0.5, 1.0, 20};
  const NDResult r = newton_dinkelbach(problem);
  EXPECT_EQ(r.alpha, 2.0);
  EXPECT_EQ(r.iterations, 0);
}

TEST(NewtonDinkelbach, ScalarProxy) {
  auto h = [](double a) { return a / (a + 1.0); };
  auto hp = [](double a) { return 1.0 / ((a + 1.0) * (a + 1.0)); };
  const double gamma = 0.2;
  const NDProblem problem{h, hp, 1.0, 0.5 + gamma / 5.0, 0.5 + gamma, 20};
  const NDResult r = newton_dinkelbach(problem);
  EXPECT_NEAR(r.alpha, 1.8, 1e-15);
  EXPECT_NEAR(r.f, 9.0 / 14.0, 1e-15);
  EXPECT_EQ(r.iterations, 1);
}

TEST(NewtonDinkelbach, Errors) {
  auto flat = [](double) { return 0.0; };
  EXPECT_THROW(newton_dinkelbach(NDProblem{flat, flat, 1.0, 0.5, 1.0, 20}), DerivativeVanished);
  auto ln = [](double a) { return std::log(a); };
  auto inv = [](double a) { return 1.0 / a; };
  EXPECT_THROW(newton_dinkelbach(NDProblem{ln, inv, 10.0, 0.5, 1.0, 20}), PreconditionViolated);
  EXPECT_THROW(newton_dinkelbach(NDProblem{ln, inv, 1.0, 1.0, 0.5, 20}), PreconditionViolated);
  // sqrt(a) - 1 from far below with a very narrow band needs several steps
  auto sq = [](double a) { return std::sqrt(a); };
  auto sqp = [](double a) { return 0.5 / std::sqrt(a); };
  EXPECT_THROW(newton_dinkelbach(NDProblem{sq, sqp, 1e-12, 1e3 - 1e-9, 1e3, 2}), IterationCapExceeded);
}

TEST(NewtonDinkelbach, IteratesAndDerivativeDrop) {
  std::mt19937_64 rng(61);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    // f(a) = c log(a) + b sqrt(a): increasing and concave
    const double c = 0.1 + u(rng), b = u(rng);
    auto f = [=](double a) { return c * std::log(a) + b * std::sqrt(a); };
    auto fp = [=](double a) { return c / a + 0.5 * b / std::sqrt(a); };
    const double f1 = f(1.0);
    const double gap = 0.5 + 10.0 * u(rng);
    const NDProblem problem{f, fp, 1.0, f1 + gap / 5.0, f1 + gap, 200};
    const NDResult r = newton_dinkelbach(problem);
    EXPECT_GE(r.f, problem.b_low);
    EXPECT_LE(r.f, problem.b_high + 1e-9);
    for (std::size_t k = 1; k < r.iterates.size(); ++k) {
      EXPECT_GT(r.iterates[k].alpha, r.iterates[k - 1].alpha);
      EXPECT_GT(r.iterates[k].f, r.iterates[k - 1].f);
      if (k + 1 < r.iterates.size()) {
        EXPECT_LE(r.iterates[k].f_prime, (1.0 - 0.8) * r.iterates[k - 1].f_prime * (1.0 + 1e-12));
      }
    }
  }
}

TEST(ComputeUpdate, ScalarBranchOne) {
  const Frame f(vec({1, 1}).transpose());
  const UpdateResult r = compute_update(f, Vector::Ones(2), {0}, 0.2);
  EXPECT_FALSE(r.guess_branch);
  EXPECT_NEAR(r.alpha, 1.8, 1e-15);
  EXPECT_EQ(r.nd_iterations, 1);
}

TEST(ComputeUpdate, GuaranteeOnRandomInstances) {
  std::mt19937_64 rng(67);
  std::uniform_real_distribution<double> e(-2.0, 2.0);
  int guess = 0;
  int total = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Index d = 2 + rep % 5;
    const Index n = d + 2 + rep % 6;
    const Frame frame(gaussian_frame(d, n, rng));
    Vector z(n);
    for (Index j = 0; j < n; ++j) z(j) = std::exp(e(rng));
    const Vector lev = leverage_scores(frame, z);
    const MarginSet m = select_margin_set(lev, uniform_marginals(d, n));
    const IndexSet t = m.set();
    if (check_infeasibility(frame, uniform_marginals(d, n), t)) continue;
    const UpdateResult r = compute_update(frame, z, t, m.gamma);
    const ProxyContext ctx(frame, z, t);
    const double gain = proxy_h(ctx, r.alpha) - proxy_h(ctx, 1.0);
    EXPECT_GE(gain, m.gamma / 5.0 - 1e-9);
    EXPECT_LE(gain, m.gamma + 1e-9);
    EXPECT_GE(r.alpha, 1.0);
    if (!r.guess_branch) {
      EXPECT_LE(r.nd_iterations, 1);
    }
    EXPECT_LE(r.nd_iterations, nd_iteration_cap(n, d));
    guess += r.guess_branch;
    ++total;
  }
  EXPECT_GT(total, 150);
  (void)guess;
}

TEST(ComputeUpdate, GuessBranchOnGappedInstances) {
  const auto cases = guess_instances(200, 71);
  int used = 0;
  for (const auto& g : cases) {
    const Frame f(g.u);
    const ProxyContext ctx(f, g.z, g.t);
    const double h1 = proxy_h(ctx, 1.0);
    const double hp1 = proxy_h_prime(ctx, 1.0);
    const double gamma = std::min(1.0, 8.0 * hp1 + 1e-3);
    if (h1 + gamma > static_cast<double>(ctx.rank()) - 1e-6) continue;
    const UpdateResult r = compute_update(f, g.z, g.t, gamma);
    EXPECT_TRUE(r.guess_branch);
    const double gain = proxy_h(ctx, r.alpha) - h1;
    EXPECT_GE(gain, gamma / 5.0 - 1e-9);
    EXPECT_LE(gain, gamma + 1e-9);
    EXPECT_LE(r.nd_iterations, nd_iteration_cap(f.n(), f.d()));
    ++used;
  }
  EXPECT_GT(used, 100);
}

TEST(ApproxSmallEigenSum, PEqualsRank) {
  const Frame f(Matrix::Identity(2, 2));
  const EigenSumEstimate e = approx_small_eigen_sum(f, Vector::Ones(2), {0});
  EXPECT_EQ(e.p, 1);
  EXPECT_EQ(e.mu_tilde, 0.0);
  EXPECT_TRUE(e.D.empty());
}

TEST(ApproxSmallEigenSum, PZeroReturnsTrace) {
  const Frame f(vec({1, 1}).transpose());
  const EigenSumEstimate e = approx_small_eigen_sum(f, vec({0.1, 1.0}), {0});
  EXPECT_EQ(e.p, 0);
  EXPECT_NEAR(e.mu_tilde, 0.1 / 1.1, 1e-15);
}

TEST(ApproxSmallEigenSum, RejectsLargeDerivative) {
  // mu = (1/2, 1/2), h'(1) = 1/2
  Matrix u(2, 4);
  u << 1, 1, 0, 0, 0, 0, 1, 1;
  EXPECT_THROW(approx_small_eigen_sum(Frame(u), Vector::Ones(4), {0, 2}), PreconditionViolated);
}

TEST(ApproxSmallEigenSum, SandwichAndPRecovery) {
  const auto cases = guess_instances(200, 73);
  int nontrivial = 0;
  for (const auto& g : cases) {
    const Frame f(g.u);
    const EigenSumEstimate e = approx_small_eigen_sum(f, g.z, g.t);
    const Vector mu = oracle::mu(g.u, g.z, g.t);
    const double mus = oracle::small_eigen_sum(mu);
    Index large = 0;
    for (Index i = 0; i < mu.size(); ++i) large += mu(i) >= 0.5;
    EXPECT_EQ(e.p, large);
    const double n = static_cast<double>(f.n()), d = static_cast<double>(f.d());
    EXPECT_GE(e.mu_tilde, mus * (1.0 - 1e-9) - 1e-12);
    EXPECT_LE(e.mu_tilde, (1.0 + 8.0 * n * d * d) * mus * (1.0 + 1e-9) + 1e-12);
    nontrivial += !e.D.empty();
  }
  EXPECT_GT(nontrivial, 50);
}

TEST(DetLocalOpt, PEqualsOnePicksLargestLeverage) {
  std::mt19937_64 rng(79);
  for (int rep = 0; rep < 30; ++rep) {
    const Frame f(gaussian_frame(3, 8, rng));
    const Vector z = Vector::Ones(8);
    const IndexSet t{1, 2, 4, 6, 7};
    const LocalOptResult r = det_local_opt(f, z, t, 1);
    const Vector lev = leverage_scores(f, z);
    Index best = t[0];
    for (Index j : t)
      if (lev(j) > lev(best)) best = j;
    ASSERT_EQ(r.subset.size(), 1u);
    EXPECT_EQ(r.subset[0], best);
    EXPECT_EQ(r.swaps, 0);
  }
}

TEST(DetLocalOpt, SymmetricTieBreak) {
  const Frame f(Matrix::Identity(3, 4));
  Vector z = Vector::Ones(4);
  const LocalOptResult r = det_local_opt(f, z, {0, 1, 2}, 2);
  EXPECT_EQ(r.subset, (IndexSet{0, 1}));
}

TEST(DetLocalOpt, Preconditions) {
  const Frame f(Matrix::Identity(3, 4));
  EXPECT_THROW(det_local_opt(f, Vector::Ones(4), {0, 1, 2}, 3), PreconditionViolated);
  EXPECT_THROW(det_local_opt(f, Vector::Ones(4), {0, 1, 2}, 0), PreconditionViolated);
  // leverage mass of T is about 1.002, short of the 1.5 that p = 2 needs
  Matrix u(3, 5);
  u << 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0, 1, 1, 0;
  Vector z(5);
  z << 1, 1e-3, 1e-3, 1, 1;
  EXPECT_THROW(det_local_opt(Frame(u), z, {0, 1, 2}, 2), PreconditionViolated);
}

TEST(DetLocalOpt, LocalOptimalityAndSpectralBound) {
  const auto cases = guess_instances(150, 83);
  int checked = 0;
  for (const auto& g : cases) {
    const Frame f(g.u);
    const EigenSumEstimate e = approx_small_eigen_sum(f, g.z, g.t);
    if (e.D.empty() || g.t.size() > 10) continue;
    const LocalOptResult r = det_local_opt(f, g.z, g.t, e.p);
    EXPECT_EQ(r.subset, e.D);
    EXPECT_TRUE(oracle::is_local_opt(g.u, g.z, g.t, r.subset, 2.0));
    EXPECT_LE(r.swaps, local_opt_swap_bound(static_cast<Index>(g.t.size()), e.p));

    const Matrix vd = oracle::isotropic_columns(g.u, g.z, r.subset);
    Eigen::JacobiSVD<Matrix> svd(vd);
    const double sp = svd.singularValues()(e.p - 1);
    EXPECT_GE(sp * sp, 1.0 / (4.0 * static_cast<double>(f.n()) * static_cast<double>(e.p)));

    // Ky-Fan: the projection captures at most the top-p eigenvalue mass
    const Matrix vt = oracle::isotropic_columns(g.u, g.z, g.t);
    Eigen::HouseholderQR<Matrix> qr(vd);
    const Matrix q = qr.householderQ() * Matrix::Identity(vd.rows(), e.p);
    const double captured = (q.transpose() * vt).squaredNorm();
    const Vector mu = oracle::mu(g.u, g.z, g.t);
    EXPECT_LE(captured, mu.head(e.p).sum() + 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 30);
}

TEST(DetLocalOpt, RandomInstancesPassSwapCheck) {
  std::mt19937_64 rng(89);
  std::uniform_real_distribution<double> e(-2.0, 2.0);
  for (int rep = 0; rep < 60; ++rep) {
    const Index d = 3 + rep % 4;
    const Index n = 10;
    const Frame f(gaussian_frame(d, n, rng));
    Vector z(n);
    for (Index j = 0; j < n; ++j) z(j) = std::exp(e(rng));
    IndexSet t;
    for (Index j = 0; j < 8; ++j) t.push_back(j);
    const Vector lev = leverage_scores(f, z);
    double trace = 0.0;
    for (Index j : t) trace += lev(j);
    const Index rank = numerical_rank(f.columns(t));
    for (Index p = 1; p < rank; ++p) {
      if (trace < static_cast<double>(p) - 0.5) break;
      const LocalOptResult r = det_local_opt(f, z, t, p);
      EXPECT_EQ(static_cast<Index>(r.subset.size()), p);
      EXPECT_TRUE(oracle::is_local_opt(f.matrix(), z, t, r.subset, 2.0));
      EXPECT_LE(r.swaps, local_opt_swap_bound(8, p));
    }
  }
}
