#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace fdb;
using namespace fdb::test;

namespace {

template <class F>
errc code_of(F&& f)
{
    try {
        f();
    } catch (const error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected an fdb::error";
    return errc::domain_error;
}

} // namespace

TEST(Median, OddEvenSingleton)
{
    EXPECT_EQ(median(Vector{2, 1, 3}), 2.0);
    EXPECT_EQ(median(Vector{1, 2, 3, 4}), 2.5);
    EXPECT_EQ(median(Vector{5}), 5.0);
}

TEST(Median, EmptyInputRejected)
{
    EXPECT_EQ(code_of([] { (void)median(Vector{}); }), errc::empty_input);
    EXPECT_EQ(code_of([] { (void)mad(Vector{}); }), errc::empty_input);
}

TEST(Mad, Examples)
{
    EXPECT_EQ(mad(Vector{1, 2, 3}), 1.0);
    EXPECT_EQ(mad(Vector{1, 2, 4, 7}), 1.5);
    EXPECT_EQ(mad(Vector{4.25, 4.25, 4.25}), 0.0);
}

TEST(MedianMad, PermutationInvariant)
{
    Rng rng(3);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 200; ++trial) {
        Vector v(1 + rng() % 40);
        for (auto& x : v)
            x = normal(rng);
        const double m0 = median(v);
        const double d0 = mad(v);
        for (int s = 0; s < 5; ++s) {
            std::shuffle(v.begin(), v.end(), rng);
            EXPECT_EQ(median(v), m0);
            EXPECT_EQ(mad(v), d0);
        }
    }
}

TEST(Cholesky, IdentityAndHandFactor)
{
    EXPECT_EQ(cholesky(Matrix::identity(3)).lower(), Matrix::identity(3));
    const auto f = cholesky(Matrix{{4, 2}, {2, 5}});
    EXPECT_EQ(f.lower(), (Matrix{{2, 0}, {1, 2}}));
}

TEST(Cholesky, NotPositiveDefiniteCarriesPivot)
{
    try {
        (void)cholesky(Matrix{{1, 0, 0}, {0, 1, 1}, {0, 1, 1}});
        FAIL() << "expected NotPositiveDefinite";
    } catch (const error& e) {
        EXPECT_EQ(e.code(), errc::not_positive_definite);
        ASSERT_TRUE(e.pivot().has_value());
        EXPECT_EQ(*e.pivot(), 2u);
    }
    EXPECT_EQ(code_of([] { (void)cholesky(Matrix{{-1}}); }), errc::not_positive_definite);
}

TEST(Cholesky, RejectsNonSquare)
{
    EXPECT_EQ(code_of([] { (void)cholesky(Matrix(2, 3)); }), errc::dimension_error);
}

TEST(Cholesky, RoundTripOnRandomSpd)
{
    Rng rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t p = 1 + trial % 50;
        const Matrix m = random_spd(p, rng);
        const auto f = cholesky(m);
        for (std::size_t i = 0; i < p; ++i) {
            EXPECT_GT(f.lower()(i, i), 0.0);
            for (std::size_t j = i + 1; j < p; ++j)
                EXPECT_EQ(f.lower()(i, j), 0.0);
        }
        const double rel = frobenius_norm(f.reconstruct() - m) / frobenius_norm(m);
        EXPECT_LE(rel, 1e-10) << "p=" << p;
    }
}

TEST(LogDeterminant, Examples)
{
    EXPECT_EQ(log_determinant(cholesky(Matrix::identity(4))), 0.0);
    EXPECT_NEAR(log_determinant(cholesky(Matrix{{4, 0}, {0, 1}})), std::log(4.0), 1e-15);
    EXPECT_NEAR(log_determinant(cholesky(Matrix{{4, 2}, {2, 5}})), std::log(16.0), 1e-15);
}

TEST(LogDeterminant, MatchesCofactorExpansion)
{
    Rng rng(5);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t p = 1 + trial % 4;
        const Matrix m = random_spd(p, rng);
        EXPECT_NEAR(log_determinant(cholesky(m)), std::log(cofactor_determinant(m)), 1e-9);
    }
}

TEST(SolveSpd, Examples)
{
    const Vector rhs{1.5, -2.0, 3.25};
    EXPECT_EQ(solve_spd(cholesky(Matrix::identity(3)), rhs), rhs);
    const auto x = solve_spd(cholesky(Matrix{{4, 0}, {0, 1}}), Vector{8, 3});
    EXPECT_DOUBLE_EQ(x[0], 2.0);
    EXPECT_DOUBLE_EQ(x[1], 3.0);
}

TEST(SolveSpd, ResidualOnRandomSystems)
{
    Rng rng(17);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t p = 1 + trial % 30;
        const Matrix m = random_spd(p, rng);
        Vector b(p);
        for (auto& v : b)
            v = normal(rng);
        const auto x = solve_spd(cholesky(m), b);
        const auto r = m * x;
        double res = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            res += (r[i] - b[i]) * (r[i] - b[i]);
        EXPECT_LE(std::sqrt(res), 1e-9 * norm2(b));
    }
}

TEST(SolveSpd, DimensionMismatch)
{
    EXPECT_EQ(code_of([] { (void)solve_spd(cholesky(Matrix::identity(2)), Vector{1, 2, 3}); }),
              errc::dimension_error);
}

TEST(Eigen, DiagonalInput)
{
    const auto e = eigen_symmetric(Matrix{{3, 0, 0}, {0, 1, 0}, {0, 0, 2}});
    EXPECT_EQ(e.values, (Vector{3, 2, 1}));
    // Column k is ± the axis of the k-th largest entry.
    EXPECT_EQ(std::abs(e.vectors(0, 0)), 1.0);
    EXPECT_EQ(std::abs(e.vectors(2, 1)), 1.0);
    EXPECT_EQ(std::abs(e.vectors(1, 2)), 1.0);
}

TEST(Eigen, TwoByTwo)
{
    const auto e = eigen_symmetric(Matrix{{2, 1}, {1, 2}});
    EXPECT_NEAR(e.values[0], 3.0, 1e-14);
    EXPECT_NEAR(e.values[1], 1.0, 1e-14);
    const double s = std::numbers::sqrt2 / 2.0;
    EXPECT_NEAR(std::abs(e.vectors(0, 0)), s, 1e-14);
    EXPECT_NEAR(e.vectors(0, 0), e.vectors(1, 0), 1e-14);
    EXPECT_NEAR(std::abs(e.vectors(0, 1)), s, 1e-14);
    EXPECT_NEAR(e.vectors(0, 1), -e.vectors(1, 1), 1e-14);
}

TEST(Eigen, RoundTripAndOrthonormality)
{
    Rng rng(23);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t p = 1 + trial % 30;
        const Matrix m = random_symmetric(p, rng);
        const auto e = eigen_symmetric(m);
        ASSERT_EQ(e.values.size(), p);
        for (std::size_t k = 1; k < p; ++k)
            EXPECT_GE(e.values[k - 1], e.values[k]);
        EXPECT_LE(max_abs_diff(e.vectors.transpose() * e.vectors, Matrix::identity(p)), 1e-10);
        for (std::size_t k = 0; k < p; ++k) {
            const auto v = e.vectors.column(k);
            const auto mv = m * v;
            for (std::size_t i = 0; i < p; ++i)
                EXPECT_NEAR(mv[i], e.values[k] * v[i], 1e-8);
        }
        if (p == 5) {
            const Matrix rebuilt = e.vectors * Matrix::diagonal(e.values) * e.vectors.transpose();
            EXPECT_LE(max_abs_diff(rebuilt, m), 1e-8);
        }
    }
}

TEST(Eigen, SweepCapRaisesConvergenceFailure)
{
    Rng rng(1);
    const Matrix m = random_symmetric(8, rng);
    EXPECT_EQ(code_of([&] { (void)eigen_symmetric(m, 1); }), errc::convergence_failure);
}

TEST(ConditionNumber, Examples)
{
    EXPECT_DOUBLE_EQ(condition_number(Matrix::identity(3)), 1.0);
    EXPECT_DOUBLE_EQ(condition_number(Matrix{{4, 0}, {0, 1}}), 4.0);

    Rng rng(2);
    const Matrix sigma = random_spd(4, rng);
    const auto f = cholesky(sigma);
    const Matrix li = inverse_lower(f);
    // L⁻¹(2Σ)L⁻ᵀ = 2I, similar to Σ̂Σ⁻¹.
    const Matrix w = symmetrize(li * (2.0 * sigma) * li.transpose());
    EXPECT_NEAR(condition_number(w), 1.0, 1e-10);
    EXPECT_EQ(code_of([] { (void)condition_number(Matrix{{1, 0}, {0, -1}}); }), errc::not_positive_definite);
}

TEST(ChiSquareQuantile, ClosedFormTwoDegrees)
{
    EXPECT_NEAR(chi_square_quantile(2, 0.5), 2.0 * std::log(2.0), 1e-12);
    EXPECT_NEAR(chi_square_quantile(2, 0.975), -2.0 * std::log(0.025), 1e-12);
    for (double p : {0.01, 0.1, 0.3, 0.7, 0.9, 0.99, 0.999})
        EXPECT_NEAR(chi_square_quantile(2, p), -2.0 * std::log1p(-p), 1e-12 * std::max(1.0, -2.0 * std::log1p(-p)));
}

TEST(ChiSquareQuantile, FiveDegreesAgainstQuadrature)
{
    // Frozen from the quadrature-bisection reference.
    constexpr double frozen = 12.832501994030027;
    EXPECT_NEAR(bisection_chi_square_quantile(5, 0.975), frozen, 1e-8);
    EXPECT_NEAR(chi_square_quantile(5, 0.975), frozen, 1e-8);
}

TEST(ChiSquareQuantile, ProbabilitySpaceAccuracy)
{
    for (unsigned dof : {1u, 2u, 3u, 7u, 40u, 200u, 500u})
        for (double p : {1e-6, 0.01, 0.5, 0.975, 0.999999}) {
            const double x = chi_square_quantile(dof, p);
            EXPECT_NEAR(regularized_gamma_p(0.5 * dof, 0.5 * x), p, 1e-10) << dof << " " << p;
        }
}

TEST(ChiSquareQuantile, MonotoneInProbAndDof)
{
    const Vector probs{0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.975, 0.99};
    for (unsigned dof = 1; dof <= 60; ++dof) {
        for (std::size_t i = 1; i < probs.size(); ++i)
            EXPECT_LT(chi_square_quantile(dof, probs[i - 1]), chi_square_quantile(dof, probs[i]));
        for (double p : probs)
            EXPECT_LT(chi_square_quantile(dof, p), chi_square_quantile(dof + 1, p));
    }
}

TEST(ChiSquareQuantile, DomainErrors)
{
    for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")})
        EXPECT_EQ(code_of([&] { (void)chi_square_quantile(3, p); }), errc::domain_error);
    EXPECT_EQ(code_of([] { (void)chi_square_quantile(0, 0.5); }), errc::domain_error);
}

TEST(NormalQuantile, KnownValues)
{
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-10);
    EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-12);
    EXPECT_NEAR(normal_quantile(0.025), -1.959963984540054, 1e-10);
}

TEST(Matrix, ShapeErrors)
{
    EXPECT_EQ(code_of([] { (void)(Matrix(2, 3) * Matrix(2, 3)); }), errc::dimension_error);
    EXPECT_EQ(code_of([] { Matrix m{{1, 2}, {3}}; }), errc::dimension_error);
    EXPECT_EQ(code_of([] { DataMatrix d(Matrix(0, 2)); }), errc::empty_input);
    EXPECT_EQ(code_of([] { DataMatrix d{{1.0, std::nan("")}}; }), errc::domain_error);
}

TEST(Parallel, ThreadResolution)
{
    EXPECT_EQ(resolve_threads(3), 3u);
    EXPECT_GE(resolve_threads(0), 1u);
}

TEST(Parallel, CoversEveryIndexOnceAndRethrows)
{
    for (std::size_t threads : {1u, 2u, 7u}) {
        std::vector<int> hits(101, 0);
        parallel_for(hits.size(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
            for (std::size_t i = b; i < e; ++i)
                ++hits[i];
        });
        EXPECT_TRUE(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    }
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t b, std::size_t, std::size_t) {
                                  if (b == 0)
                                      throw std::runtime_error("boom");
                              }),
                 std::runtime_error);
}

TEST(Random, DerivedSeedsDiffer)
{
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
    Rng rng(9);
    const auto s = random_subset(20, 6, rng);
    EXPECT_EQ(s.size(), 6u);
    EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
    EXPECT_EQ(std::adjacent_find(s.begin(), s.end()), s.end());
}
