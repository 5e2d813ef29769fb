#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <numbers>
#include <random>

#include "support.hpp"

using namespace semigroup_lab;
using sgl_test::diag;
using sgl_test::mat;
using sgl_test::op;

namespace {

Matrix random_matrix(std::mt19937_64& gen, int n, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(nd(gen), nd(gen));
  return m;
}

}  // namespace

TEST(LinearOperator, RejectsNonSquareEmptyAndNonFinite) {
  EXPECT_THROW(LinearOperator(Matrix(2, 3)), InputError);
  EXPECT_THROW(LinearOperator(Matrix(0, 0)), InputError);
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = std::nan("");
  EXPECT_THROW(LinearOperator{m}, InputError);
  m(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(LinearOperator{m}, InputError);
}

TEST(LinearOperator, ArithmeticChecksDimensions) {
  EXPECT_THROW(LinearOperator::identity(2) + LinearOperator::identity(3), InputError);
  LinearOperator s = LinearOperator::identity(2) + Complex(2.0) * LinearOperator::identity(2);
  EXPECT_EQ(s.matrix(), (3.0 * Matrix::Identity(2, 2)).eval());
}

TEST(OpNorm, Examples) {
  EXPECT_EQ(op_norm(LinearOperator::zero(2)), 0.0);
  for (int n : {1, 3, 7}) EXPECT_NEAR(op_norm(LinearOperator::identity(n)), 1.0, 1e-15);
  EXPECT_NEAR(op_norm(diag({3.0, -4.0})), 4.0, 1e-14);
}

TEST(OpNorm, AgreesWithSvdAndIsSubmultiplicative) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    LinearOperator a(random_matrix(gen, 6));
    LinearOperator b(random_matrix(gen, 6));
    EXPECT_NEAR(op_norm(a), sgl_test::svd_norm(a.matrix()), 1e-12 * op_norm(a));
    EXPECT_LE(op_norm(a * b), op_norm(a) * op_norm(b) * (1.0 + 1e-12));
  }
}

TEST(Resolvent, Examples) {
  LinearOperator r0 = resolvent(LinearOperator::zero(2), 2.0);
  EXPECT_TRUE(r0.matrix().isApprox(0.5 * Matrix::Identity(2, 2), 1e-15));
  LinearOperator r1 = resolvent(diag({-1.0, -3.0}), 1.0);
  EXPECT_TRUE(r1.matrix().isApprox(mat({{0.5, 0.0}, {0.0, 0.25}}), 1e-15));
  LinearOperator r2 = resolvent(op({{0.0, 1.0}, {0.0, 0.0}}), 1.0);
  EXPECT_TRUE(r2.matrix().isApprox(mat({{1.0, 1.0}, {0.0, 1.0}}), 1e-15));
}

TEST(Resolvent, GuardNamesTheEigenvalue) {
  LinearOperator a = diag({-1.0, 2.0});
  try {
    (void)resolvent(a, Complex(2.0 + 1e-9, 0.0));
    FAIL() << "expected a singularity error";
  } catch (const SingularityError& e) {
    EXPECT_NEAR(e.eigenvalue().real(), 2.0, 1e-12);
  }
  EXPECT_NO_THROW((void)resolvent(a, Complex(2.0 + 1e-6, 0.0)));
}

TEST(Resolvent, ResidualAndFirstIdentity) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + trial % 15;
    LinearOperator a(random_matrix(gen, n));
    Resolvent res(a);
    double na = res.norm();
    Complex lambda = std::polar(1.5 * na + 0.1 * na, angle(gen));
    Complex mu = std::polar(2.0 * na, angle(gen));
    ResolventEvaluation ev = res.evaluate(lambda);
    double cond = (std::abs(lambda) + na) * op_norm(ev.value);
    EXPECT_LE(ev.residual, 1e-10 * cond);
    Matrix rl = ev.value.matrix();
    Matrix rm = res.raw(mu);
    Matrix lhs = rl - rm;
    Matrix rhs = (mu - lambda) * rl * rm;
    EXPECT_LE(sgl_test::norm2(lhs - rhs), 1e-8 * sgl_test::norm2(lhs));
  }
}

TEST(Resolvent, LaurentTail) {
  std::mt19937_64 gen(13);
  for (int trial = 0; trial < 10; ++trial) {
    LinearOperator a(random_matrix(gen, 5));
    double na = op_norm(a);
    for (double f : {4.0, 10.0, 100.0}) {
      double lambda = f * na;
      Matrix d = lambda * resolvent(a, lambda).matrix() - Matrix::Identity(5, 5);
      EXPECT_LE(sgl_test::norm2(d), 2.0 * na / lambda);
    }
  }
}

TEST(Spectrum, Examples) {
  SpectralData s1 = spectrum(diag({-1.0, 1.0}));
  ASSERT_EQ(s1.eigenvalues.size(), 2u);
  EXPECT_NEAR(s1.eigenvalues[0].real(), -1.0, 1e-14);
  EXPECT_NEAR(s1.eigenvalues[1].real(), 1.0, 1e-14);
  EXPECT_NEAR(s1.spectral_abscissa, 1.0, 1e-14);
  EXPECT_NEAR(s1.spectral_radius, 1.0, 1e-14);

  const double pi = std::numbers::pi;
  SpectralData s2 = spectrum(op({{0.0, -pi}, {pi, 0.0}}));
  EXPECT_NEAR(s2.eigenvalues[0].imag(), -pi, 1e-13);
  EXPECT_NEAR(s2.eigenvalues[1].imag(), pi, 1e-13);
  EXPECT_NEAR(s2.spectral_abscissa, 0.0, 1e-13);
  EXPECT_NEAR(s2.spectral_radius, pi, 1e-13);

  SpectralData s3 = spectrum(op({{2.0, 1.0}, {0.0, 2.0}}));
  for (Complex z : s3.eigenvalues) EXPECT_NEAR(std::abs(z - 2.0), 0.0, 1e-7);
  EXPECT_NEAR(s3.spectral_abscissa, 2.0, 1e-7);
  EXPECT_NEAR(s3.spectral_radius, 2.0, 1e-7);
}

TEST(MatrixExponential, Examples) {
  LinearOperator any = op({{1.0, 2.0}, {3.0, 4.0}});
  EXPECT_EQ(matrix_exponential(any, 0.0).matrix(), Matrix::Identity(2, 2));
  LinearOperator n = op({{0.0, 1.0}, {0.0, 0.0}});
  EXPECT_TRUE(matrix_exponential(n, 3.0).matrix().isApprox(mat({{1.0, 3.0}, {0.0, 1.0}}), 1e-14));
  Matrix d = matrix_exponential(diag({-1.0, 2.0}), 1.0).matrix();
  EXPECT_NEAR(std::abs(d(0, 0) - std::exp(-1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(d(1, 1) - std::exp(2.0)), 0.0, 1e-14);
  EXPECT_EQ(std::abs(d(0, 1)), 0.0);
}

TEST(MatrixExponential, MatchesIndependentTaylorOracle) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    double scale = std::ldexp(1.0, trial % 8 - 3);
    Matrix a = random_matrix(gen, 6, scale);
    Matrix e = detail::expm(a);
    Matrix ref = sgl_test::taylor_expm(a);
    EXPECT_LE(sgl_test::norm2(e - ref), 1e-12 * std::exp(sgl_test::norm2(a)) * 10.0) << "scale " << scale;
  }
}

TEST(MatrixExponential, SemigroupLawAndNegativeTime) {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    LinearOperator a(random_matrix(gen, 5));
    double s = u(gen), t = u(gen);
    Matrix lhs = matrix_exponential(a, s + t).matrix();
    Matrix rhs = matrix_exponential(a, s).matrix() * matrix_exponential(a, t).matrix();
    EXPECT_LE(sgl_test::norm2(lhs - rhs), 1e-8 * std::exp((s + t) * op_norm(a)));
    Matrix inv = matrix_exponential(a, -t).matrix() * matrix_exponential(a, t).matrix();
    EXPECT_LE(sgl_test::norm2(inv - Matrix::Identity(5, 5)), 1e-8 * std::exp(2 * t * op_norm(a)));
  }
}

TEST(MatrixExponential, OverflowIsARangeError) {
  EXPECT_THROW((void)matrix_exponential(diag({1.0, 0.0}), 1e4), RangeError);
  EXPECT_THROW((void)matrix_exponential(diag({1.0, 0.0}), std::nan("")), InputError);
}

TEST(ShiftGenerator, Examples) {
  EXPECT_EQ(shift_generator(LinearOperator::zero(2), 1.0).matrix(), (-Matrix::Identity(2, 2)).eval());
  EXPECT_EQ(shift_generator(diag({2.0, 3.0}), 2.0).matrix(), diag({0.0, 1.0}).matrix());
  LinearOperator a = op({{1.0, 5.0}, {0.0, 1.0}});
  EXPECT_NEAR(spectrum(shift_generator(a, 1.0)).spectral_abscissa, 0.0, 1e-7);
  EXPECT_NEAR(spectrum(shift_generator(a, 1.0)).spectral_abscissa, spectrum(a).spectral_abscissa - 1.0, 1e-12);
}

TEST(ShiftGenerator, ExponentialIdentity) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 10; ++trial) {
    LinearOperator a(random_matrix(gen, 4));
    double omega = 0.7 * trial - 3.0, t = 0.3 * trial;
    Matrix lhs = matrix_exponential(shift_generator(a, omega), t).matrix();
    Matrix rhs = std::exp(-omega * t) * matrix_exponential(a, t).matrix();
    EXPECT_LE(sgl_test::norm2(lhs - rhs), 1e-12 * std::max(1.0, sgl_test::norm2(rhs)) * 10.0);
  }
}

TEST(ScalarGrid, ValidatesPoints) {
  EXPECT_THROW(ScalarGrid({}, Spacing::linear), InputError);
  EXPECT_THROW(ScalarGrid({1.0, 1.0}, Spacing::linear), InputError);
  EXPECT_THROW(ScalarGrid({0.0, std::nan("")}, Spacing::linear), InputError);
  ScalarGrid g = ScalarGrid::geometric(1.0, 1e-3, 1e3, 7);
  EXPECT_NEAR(g.front(), 1.001, 1e-15);
  EXPECT_NEAR(g.points()[3], 2.0, 1e-14);
  EXPECT_NEAR(g.back(), 1001.0, 1e-10);
  ScalarGrid l = ScalarGrid::linear(0.0, 10.0, 64);
  EXPECT_EQ(l.front(), 0.0);
  EXPECT_EQ(l.back(), 10.0);
}

TEST(ScalarOperator, DimensionOneIsSupported) {
  LinearOperator a = op({{-1.5}});
  EXPECT_NEAR(op_norm(a), 1.5, 1e-15);
  EXPECT_NEAR(resolvent(a, 0.5).matrix()(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(matrix_exponential(a, 2.0).matrix()(0, 0).real(), std::exp(-3.0), 1e-15);
}

TEST(Verdict, TightIsDistinctFromPass) {
  EXPECT_EQ(classify_ratio(1.0, 1e-8), Status::tight);
  EXPECT_EQ(classify_ratio(1.0 + 5e-9, 1e-8), Status::tight);
  EXPECT_EQ(classify_ratio(0.5, 1e-8), Status::pass);
  EXPECT_EQ(classify_ratio(1.0 + 2e-8, 1e-8), Status::fail);
  EXPECT_EQ(classify_ratio(std::nan(""), 1e-8), Status::fail);
}

TEST(CertifiedMaximum, BoundsAKnownOrbitMaximum) {
  // f(t) = ||exp(tB)|| for B = [[-1, 10], [0, -1]]: closed form e^{-t} (10t + sqrt(100t^2 + 4)) / 2,
  // maximum 3.7159552280300225 (bounded scalar minimization of the closed form).
  Matrix b = mat({{-1.0, 10.0}, {0.0, -1.0}});
  auto f = [](double t) { return std::exp(-t) * (10.0 * t + std::sqrt(100.0 * t * t + 4.0)) / 2.0; };
  CertifiedMaximum cm = certify_maximum(f, 8.0, detail::growth_rates(b), 1e-7);
  EXPECT_TRUE(cm.converged);
  EXPECT_GE(cm.bound, 3.7159552280300225);
  EXPECT_LE(cm.bound, 3.7159552280300225 * (1.0 + 2e-7));
  EXPECT_NEAR(cm.argmax, 0.979795896610414, 1e-3);
}

TEST(Parallel, ResultsAreIndexOrderedForAnyThreadCount) {
  auto run = [] { return parallel_map<double>(100, [](std::size_t i) { return std::sqrt(static_cast<double>(i)); }); };
  setenv("SEMIGROUP_LAB_THREADS", "1", 1);
  auto serial = run();
  setenv("SEMIGROUP_LAB_THREADS", "4", 1);
  auto parallel = run();
  unsetenv("SEMIGROUP_LAB_THREADS");
  EXPECT_EQ(serial, parallel);
  EXPECT_THROW(parallel_map<int>(10, [](std::size_t i) -> int { if (i == 7) throw InputError("x"); return 0; }),
               InputError);
}
