#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace semigroup_lab;
using sgl_test::diag;
using sgl_test::mat;
using sgl_test::op;

namespace {

LinearOperator gaussian(std::mt19937_64& gen, int n, double scale) {
  std::normal_distribution<double> nd(0.0, scale / std::sqrt(static_cast<double>(n)));
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = nd(gen);
  return LinearOperator(m);
}

// Generator with a prescribed spectrum in a random (well-conditioned) basis.
LinearOperator similar_diag(std::mt19937_64& gen, const std::vector<double>& eigs) {
  const int n = static_cast<int>(eigs.size());
  std::normal_distribution<double> nd;
  Matrix s(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s(i, j) = (i == j ? 3.0 : 0.0) + 0.5 * nd(gen);
  Matrix d = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) d(i, i) = eigs[static_cast<std::size_t>(i)];
  return LinearOperator(s * d * s.inverse());
}

}  // namespace

TEST(YosidaDistance, Examples) {
  LinearOperator a = op({{-1.0, 10.0}, {0.0, -1.0}});
  EXPECT_EQ(yosida_distance(a, a).value, 0.0);
  YosidaDistanceEstimate e = yosida_distance(LinearOperator::zero(2), diag({1.0, 0.0}));
  EXPECT_NEAR(e.value, 1.0, 1e-6);
  EXPECT_TRUE(e.convergence_flag);
  EXPECT_EQ(e.laurent_limit, 1.0);
}

TEST(YosidaDistance, AgreesWithOperatorNormOfDifference) {
  std::mt19937_64 gen(61);
  for (int trial = 0; trial < 20; ++trial) {
    LinearOperator a = gaussian(gen, 6, 1.0);
    LinearOperator b = gaussian(gen, 6, 1.0);
    YosidaDistanceEstimate e = yosida_distance(a, b);
    double oracle = sgl_test::svd_norm(a.matrix() - b.matrix());
    EXPECT_NEAR(e.value, oracle, 1e-6 * std::max(1.0, oracle));
    EXPECT_TRUE(e.convergence_flag);
    // Raw values approach the limit from a first-order 1/lambda correction.
    EXPECT_LT(std::abs(e.raw_values.back() - oracle), std::abs(e.raw_values.front() - oracle) + 1e-12);
  }
}

TEST(YosidaDistance, MetricProperties) {
  std::mt19937_64 gen(67);
  for (int trial = 0; trial < 10; ++trial) {
    LinearOperator a = gaussian(gen, 4, 1.0);
    LinearOperator b = gaussian(gen, 4, 1.0);
    LinearOperator c = gaussian(gen, 4, 1.0);
    double ab = yosida_distance(a, b).value;
    double ba = yosida_distance(b, a).value;
    EXPECT_NEAR(ab, ba, 1e-6 * std::max(1.0, ab));
    EXPECT_LE(ab, yosida_distance(a, c).value + yosida_distance(c, b).value + 1e-6 * std::max(1.0, ab));
    EXPECT_GE(ab, 0.0);
  }
}

TEST(YosidaVsANorm, EqualPerturbationsAndZeroGenerator) {
  LinearOperator a = op({{-1.0, 10.0}, {0.0, -1.0}});
  GrowthEnvelope env = certify_growth_envelope(a, 0.0);
  LinearOperator c = op({{0.1, 0.0}, {0.2, -0.3}});
  YosidaVsANorm same = yosida_vs_anorm(a, c, c, env, default_mu_grid(a, 0.0));
  EXPECT_EQ(same.d, 0.0);
  EXPECT_EQ(same.bound, 0.0);
  EXPECT_TRUE(same.ok);

  // A = 0, M = 1: both sides equal ||C1 - C2||.
  LinearOperator z = LinearOperator::zero(2);
  GrowthEnvelope envz = certify_growth_envelope(z, 0.0);
  LinearOperator c2 = op({{0.0, 0.5}, {0.0, 0.0}});
  YosidaVsANorm r = yosida_vs_anorm(z, c, c2, envz, default_mu_grid(z, 0.0));
  double oracle = sgl_test::svd_norm(c.matrix() - c2.matrix());
  EXPECT_NEAR(r.d, oracle, 1e-6 * oracle);
  EXPECT_NEAR(r.bound, oracle, 1e-12 * oracle);
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.m_squared_bound, r.bound);
}

TEST(YosidaVsANorm, MSquaredBoundHoldsOnJordanPerturbations) {
  LinearOperator a = op({{-1.0, 10.0}, {0.0, -1.0}});
  GrowthEnvelope env = certify_growth_envelope(a, 0.0);
  std::mt19937_64 gen(71);
  for (int trial = 0; trial < 10; ++trial) {
    LinearOperator c1 = gaussian(gen, 2, 1.0);
    LinearOperator c2 = gaussian(gen, 2, 1.0);
    YosidaVsANorm r = yosida_vs_anorm(a, c1, c2, env, default_mu_grid(a, 0.0));
    EXPECT_LE(r.d, r.m_squared_bound * (1.0 + kPowerTol));
    EXPECT_NEAR(r.m_squared_bound, env.M * env.M * r.bound, 1e-15 * r.m_squared_bound);
  }
}

TEST(CheckDichotomy, HyperbolicDiagonal) {
  DichotomyData d = check_dichotomy(diag({-1.0, 1.0}));
  EXPECT_EQ(d.has_dichotomy, Tristate::yes);
  ASSERT_TRUE(d.P.has_value());
  EXPECT_TRUE(d.P->matrix().isApprox(sgl_test::mat({{1.0, 0.0}, {0.0, 0.0}}), 1e-12));
  EXPECT_NEAR(d.N, 1.0, 1e-12);
  EXPECT_NEAR(d.alpha, 1.0, 1e-12);
  EXPECT_EQ(d.stable_dim, 1);
  EXPECT_NEAR(d.circle_gap, 1.0 - std::exp(-1.0), 1e-12);
}

TEST(CheckDichotomy, CenterDirectionsAreRejected) {
  DichotomyData d = check_dichotomy(diag({-1.0, 0.0}));
  EXPECT_NE(d.has_dichotomy, Tristate::yes);
  EXPECT_FALSE(d.P.has_value());
  DichotomyData r = check_dichotomy(op({{0.0, -1.0}, {1.0, 0.0}}));
  EXPECT_EQ(r.has_dichotomy, Tristate::no);
  DichotomyData near = check_dichotomy(diag({-1.0, 1e-10}));
  EXPECT_EQ(near.has_dichotomy, Tristate::marginal);
}

TEST(CheckDichotomy, ProjectionLawsAndDecay) {
  std::mt19937_64 gen(73);
  for (int trial = 0; trial < 6; ++trial) {
    LinearOperator a = similar_diag(gen, {-2.0, -0.5, 0.7, 1.5, -1.0});
    DichotomyData d = check_dichotomy(a);
    ASSERT_EQ(d.has_dichotomy, Tristate::yes);
    EXPECT_EQ(d.stable_dim, 3);
    const Matrix& p = d.P->matrix();
    double scale = std::max(1.0, sgl_test::svd_norm(p));
    EXPECT_LE(sgl_test::svd_norm(p * p - p), 1e-10 * scale * scale);
    for (double t : {0.3, 1.0, 2.5}) {
      Matrix e = sgl_test::taylor_expm(t * a.matrix());
      double ne = std::max(1.0, sgl_test::svd_norm(e));
      EXPECT_LE(sgl_test::svd_norm(p * e - e * p), 1e-9 * scale * ne);
      Matrix id = Matrix::Identity(5, 5);
      // ||T(t) P|| <= N e^{-alpha t} and ||T(-t) (I - P)|| <= N e^{-alpha t}.
      double bound = d.N * std::exp(-d.alpha * t) * (1.0 + kEnvTol);
      EXPECT_LE(sgl_test::svd_norm(e * p), bound * scale);
      Matrix back = sgl_test::taylor_expm(-t * a.matrix());
      EXPECT_LE(sgl_test::svd_norm(back * (id - p)), bound * scale);
    }
    // Restricted decay on the orthonormal bases is the certified quantity.
    for (double t : {0.5, 2.0}) {
      Matrix e = sgl_test::taylor_expm(t * a.matrix());
      Matrix back = sgl_test::taylor_expm(-t * a.matrix());
      EXPECT_LE(sgl_test::svd_norm(e * d.stable_basis), d.N * std::exp(-d.alpha * t) * (1.0 + kEnvTol));
      EXPECT_LE(sgl_test::svd_norm(back * d.unstable_basis), d.N * std::exp(-d.alpha * t) * (1.0 + kEnvTol));
    }
  }
}

TEST(CheckDichotomy, StableDimCountsOpenLeftHalfPlane) {
  std::mt19937_64 gen(79);
  for (int trial = 0; trial < 10; ++trial) {
    LinearOperator a = gaussian(gen, 6, 2.0);
    DichotomyData d = check_dichotomy(a);
    if (d.has_dichotomy != Tristate::yes) continue;
    int left = 0;
    for (Complex z : spectrum(a).eigenvalues)
      if (z.real() < 0.0) ++left;
    EXPECT_EQ(d.stable_dim, left);
  }
}

TEST(ExpStability, Examples) {
  ExpStability s = exp_stability_check(diag({-1.0, -2.0}));
  EXPECT_EQ(s.stable, Tristate::yes);
  EXPECT_NEAR(s.spectral_radius, std::exp(-1.0), 1e-14);
  EXPECT_EQ(exp_stability_check(diag({-1.0, 0.5})).stable, Tristate::no);
  EXPECT_EQ(exp_stability_check(LinearOperator::zero(2)).stable, Tristate::marginal);
  EXPECT_EQ(exp_stability_check(op({{0.0, -1.0}, {1.0, 0.0}})).stable, Tristate::marginal);
}

TEST(SemigroupDifferenceBound, EqualPerturbationsAndTimeZero) {
  LinearOperator a = diag({-1.0, -2.0});
  GrowthEnvelope env = certify_growth_envelope(a, -1.0);
  LinearOperator c = op({{0.1, 0.0}, {0.0, 0.1}});
  DifferenceBound same = semigroup_difference_bound(a, c, c, env, 0.1, ScalarGrid::linear(0.0, 5.0, 16));
  EXPECT_FALSE(same.violated);
  for (const auto& s : same.bound_at) EXPECT_EQ(s.lhs, 0.0);

  LinearOperator c2 = op({{0.1, 0.01}, {0.0, 0.1}});
  DifferenceBound at0 = semigroup_difference_bound(a, c, c2, env, 0.1, ScalarGrid({0.0}, Spacing::linear));
  EXPECT_EQ(at0.bound_at.front().lhs, 0.0);
  EXPECT_EQ(at0.bound_at.front().bound, 0.0);
}

TEST(SemigroupDifferenceBound, ScalarDecayingExampleViolatesFourOmegaForm) {
  // A = -I, C1 = 0, C2 = 0.01 I, M = 1, omega = -1, eps0 = 0.02: omega0 = -0.98 and at t = 1
  // the difference is e^{-1} - e^{-0.99} in modulus while the bound is e^{-3.92} * 0.01.
  LinearOperator a = Complex(-1.0) * LinearOperator::identity(2);
  LinearOperator c2 = Complex(0.01) * LinearOperator::identity(2);
  GrowthEnvelope env = GrowthEnvelope::declared(1.0, -1.0);
  DifferenceBound r = semigroup_difference_bound(a, LinearOperator::zero(2), c2, env, 0.02,
                                                 ScalarGrid({1.0}, Spacing::linear));
  EXPECT_NEAR(r.omega0, -0.98, 1e-15);
  EXPECT_NEAR(r.d, 0.01, 1e-8);
  const DifferenceSample& s = r.bound_at.front();
  EXPECT_NEAR(s.lhs, std::exp(-0.99) - std::exp(-1.0), 1e-14);
  EXPECT_NEAR(s.bound, std::exp(-3.92) * 0.01, 1e-9);
  EXPECT_TRUE(r.violated);
  ASSERT_TRUE(r.witness_t.has_value());
  EXPECT_EQ(*r.witness_t, 1.0);
  EXPECT_FALSE(r.voc_violated);
}

TEST(SemigroupDifferenceBound, VariationOfConstantsFormHoldsOnRandomPairs) {
  std::mt19937_64 gen(83);
  for (int trial = 0; trial < 10; ++trial) {
    LinearOperator a = gaussian(gen, 4, 1.0);
    double omega = spectrum(a).spectral_abscissa + 0.5;
    GrowthEnvelope env = certify_growth_envelope(a, omega);
    LinearOperator c1 = gaussian(gen, 4, 0.5);
    LinearOperator small = gaussian(gen, 4, 0.01);
    double eps0 = 2.0 * op_norm(small);
    DifferenceBound r =
        semigroup_difference_bound(a, c1, c1 + small, env, eps0, ScalarGrid::linear(0.05, 5.0, 32));
    EXPECT_FALSE(r.voc_violated) << "trial " << trial;
    EXPECT_EQ(r.omega0, omega + env.M * env.M * (op_norm(c1) + eps0));
  }
}

TEST(SemigroupDifferenceBound, Preconditions) {
  LinearOperator a = diag({-1.0, -2.0});
  GrowthEnvelope env = certify_growth_envelope(a, -1.0);
  LinearOperator c2 = Complex(0.5) * LinearOperator::identity(2);
  EXPECT_THROW((void)semigroup_difference_bound(a, LinearOperator::zero(2), c2, env, 0.5,
                                                ScalarGrid({1.0}, Spacing::linear)),
               InputError);
  EXPECT_THROW((void)semigroup_difference_bound(a, LinearOperator::zero(2), c2, env, 0.0,
                                                ScalarGrid({1.0}, Spacing::linear)),
               InputError);
}

TEST(PersistenceMargin, ZeroDifferenceIsCertified) {
  LinearOperator a = diag({-1.0, 1.0});
  GrowthEnvelope env = certify_growth_envelope(a, 1.0);
  PersistenceReport r = persistence_margin(a, LinearOperator::zero(2), LinearOperator::zero(2), env,
                                           default_mu_grid(a, 1.0));
  EXPECT_EQ(r.bound_t1, 0.0);
  EXPECT_TRUE(r.certified);
  EXPECT_EQ(r.a_posteriori, Tristate::yes);
  EXPECT_GT(r.safety_radius, 0.0);
  EXPECT_NEAR(r.circle_gap, 1.0 - std::exp(-1.0), 1e-12);
}

TEST(PersistenceMargin, SmallPerturbationPersistsAndLargeOneDestroys) {
  LinearOperator a = diag({-1.0, 1.0});
  GrowthEnvelope env = certify_growth_envelope(a, 1.0);
  ScalarGrid grid = default_mu_grid(a, 1.0);
  LinearOperator tiny = op({{0.0, 1e-6}, {0.0, 0.0}});
  PersistenceReport small = persistence_margin(a, LinearOperator::zero(2), tiny, env, grid);
  EXPECT_EQ(small.a_posteriori, Tristate::yes);
  EXPECT_LE(small.actual_difference_t1, small.bound_t1 * (1.0 + kPowerTol) + 1e-15);

  // Pushing the unstable eigenvalue onto the imaginary axis removes the dichotomy.
  LinearOperator big = diag({0.0, -1.0});
  PersistenceReport large = persistence_margin(a, LinearOperator::zero(2), big, env, grid);
  EXPECT_NE(large.a_posteriori, Tristate::yes);
  EXPECT_FALSE(large.certified);
}

TEST(PersistenceMargin, StableBaseFindsIntegerHorizon) {
  LinearOperator a = op({{-1.0, 10.0}, {0.0, -1.0}});
  GrowthEnvelope env = certify_growth_envelope(a, 0.0);
  PersistenceReport r = persistence_margin(a, LinearOperator::zero(2), Complex(1e-4) * LinearOperator::identity(2),
                                           env, default_mu_grid(a, 0.0));
  ASSERT_TRUE(r.n0.has_value());
  // ||e^{-n}[[1, 10n], [0, 1]]|| < 1 first holds at n = 4.
  EXPECT_EQ(*r.n0, 4);
  ASSERT_TRUE(r.stable_c2_at_n0.has_value());
  EXPECT_TRUE(*r.stable_c2_at_n0);
}

TEST(PersistenceMargin, RequiresDichotomousBase) {
  LinearOperator a = diag({-1.0, 0.0});
  GrowthEnvelope env = certify_growth_envelope(a, 0.0);
  EXPECT_THROW((void)persistence_margin(a, LinearOperator::zero(2), LinearOperator::zero(2), env,
                                        default_mu_grid(a, 0.0)),
               PreconditionError);
}

TEST(SpectralProjection, MatchesEigenbasisOracle) {
  std::mt19937_64 gen(89);
  for (int trial = 0; trial < 5; ++trial) {
    LinearOperator a = similar_diag(gen, {-1.0, 0.5, -0.25, 2.0});
    Matrix v = detail::expm(a.matrix());
    SpectralSplit split = spectral_projection(v, [](Complex z) { return std::abs(z) < 1.0; });
    EXPECT_EQ(split.image_dim, 2);
    // Oracle: P = S diag(selected) S^{-1} from the eigen-decomposition.
    Eigen::ComplexEigenSolver<Matrix> es(v);
    Matrix s = es.eigenvectors();
    Matrix sel = Matrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i)
      if (std::abs(es.eigenvalues()(i)) < 1.0) sel(i, i) = 1.0;
    Matrix oracle = s * sel * s.inverse();
    EXPECT_LE(sgl_test::svd_norm(split.projection - oracle), 1e-9 * sgl_test::svd_norm(oracle));
    EXPECT_LE(sgl_test::svd_norm(split.image_basis.adjoint() * split.image_basis - Matrix::Identity(2, 2)), 1e-12);
  }
}
