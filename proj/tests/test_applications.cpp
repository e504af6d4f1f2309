#include "support.hpp"

#include <gtest/gtest.h>

using namespace fdb;
using namespace fdb::test;

TEST(RobustPca, DiagonalOneComponent)
{
    const auto model = robust_pca(LocationScatter{{1.0, 2.0}, Matrix{{3, 0}, {0, 1}}}, 1);
    EXPECT_EQ(model.components(), 1u);
    EXPECT_EQ(model.eigenvalues, (Vector{3.0}));
    EXPECT_EQ(std::abs(model.loadings(0, 0)), 1.0);
    EXPECT_EQ(model.loadings(1, 0), 0.0);
    EXPECT_EQ(model.mu, (Vector{1.0, 2.0}));
}

TEST(RobustPca, MatchesEigenColumns)
{
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t p = 2 + trial % 7;
        const Matrix sigma = random_spd(p, rng);
        const std::size_t K = 1 + trial % p;
        const auto model = robust_pca(LocationScatter{Vector(p, 0.0), sigma}, K);
        const auto eig = eigen_symmetric(sigma);
        for (std::size_t k = 0; k < K; ++k) {
            EXPECT_EQ(model.eigenvalues[k], eig.values[k]);
            for (std::size_t j = 0; j < p; ++j)
                EXPECT_EQ(model.loadings(j, k), eig.vectors(j, k));
        }
        EXPECT_LE(max_abs_diff(model.loadings.transpose() * model.loadings, Matrix::identity(K)), 1e-10);
    }
}

TEST(RobustPca, FullRankReconstructsExactly)
{
    Rng rng(2);
    const Matrix sigma = random_spd(4, rng);
    const auto model = robust_pca(LocationScatter{Vector(4, 0.0), sigma}, 4);
    EXPECT_LE(max_abs_diff(model.loadings * model.loadings.transpose(), Matrix::identity(4)), 1e-10);
    const DataMatrix data(random_matrix(30, 4, rng));
    const auto diag = pca_diagnostics(data, model);
    EXPECT_TRUE(std::all_of(diag.od.begin(), diag.od.end(), [](double v) { return v == 0.0; }));
}

TEST(RobustPca, ComponentCountErrors)
{
    const LocationScatter ls{{0.0, 0.0}, Matrix::identity(2)};
    EXPECT_THROW(robust_pca(ls, 0), error);
    EXPECT_THROW(robust_pca(ls, 3), error);
    const DataMatrix three{{1.0, 2.0, 3.0}};
    EXPECT_THROW(robust_pca(three, ls, 1), error);
}

TEST(PcaDiagnostics, Examples)
{
    PcaModel model{{0.0, 0.0}, Matrix::identity(2), {1.0, 1.0}};
    const DataMatrix data{{3.0, 4.0}, {0.0, 0.0}};
    const auto d = pca_diagnostics(data, model);
    EXPECT_DOUBLE_EQ(d.sd[0], 25.0);
    EXPECT_EQ(d.od[0], 0.0);
    EXPECT_EQ(d.sd[1], 0.0);
    EXPECT_EQ(d.category[1], SampleCategory::regular);
    EXPECT_EQ(d.category[0], SampleCategory::good_leverage);
}

TEST(PcaDiagnostics, InSpanSampleHasZeroOd)
{
    PcaModel model{{1.0, 1.0, 1.0}, Matrix(3, 1), {2.0}};
    model.loadings(0, 0) = 1.0;
    const DataMatrix data{{4.0, 1.0, 1.0}, {1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}};
    const auto d = pca_diagnostics(data, model);
    EXPECT_EQ(d.od[0], 0.0);
    EXPECT_DOUBLE_EQ(d.sd[0], 4.5);
    EXPECT_EQ(d.sd[1], 0.0);
    EXPECT_EQ(d.od[1], 0.0);
    EXPECT_DOUBLE_EQ(d.od[2], 5.0);
    EXPECT_DOUBLE_EQ(d.scores(0, 0), 3.0);
}

TEST(PcaDiagnostics, CutoffsAndPartition)
{
    Rng rng(3);
    const auto data = DataMatrix(random_matrix(300, 6, rng));
    const auto fit = fdb_estimate(data, {});
    const auto model = robust_pca(data, fit.estimate, 2);
    const auto d = pca_diagnostics(data, model);
    EXPECT_DOUBLE_EQ(d.sd_cutoff, chi_square_quantile(2, 0.975));
    EXPECT_DOUBLE_EQ(d.od_cutoff, orthogonal_distance_cutoff(d.od));
    EXPECT_GT(d.od_cutoff, 0.0);
    for (std::size_t i = 0; i < data.n(); ++i) {
        EXPECT_GE(d.sd[i], 0.0);
        EXPECT_GE(d.od[i], 0.0);
        const bool far_in = d.sd[i] > d.sd_cutoff;
        const bool far_out = d.od[i] > d.od_cutoff;
        const SampleCategory want = far_in ? (far_out ? SampleCategory::bad_leverage : SampleCategory::good_leverage)
                                           : (far_out ? SampleCategory::orthogonal_outlier : SampleCategory::regular);
        EXPECT_EQ(d.category[i], want);
    }
}

TEST(PcaDiagnostics, OdCutoffFormula)
{
    const Vector od{1.0, 8.0, 27.0, 64.0, 125.0};
    // OD^{2/3} = {1, 4, 9, 16, 25}: median 9, MAD 7.
    const double want = std::pow(9.0 + 1.4826 * 7.0 * 1.959963984540054, 1.5);
    EXPECT_NEAR(orthogonal_distance_cutoff(od), want, 1e-9 * want);
}

TEST(PcaDiagnostics, OdInvariantUnderRotationWithinSpan)
{
    Rng rng(4);
    const std::size_t p = 6, K = 3;
    const DataMatrix data(random_matrix(80, p, rng));
    const auto model = robust_pca(LocationScatter{Vector(p, 0.1), random_spd(p, rng)}, K);
    PcaModel rotated = model;
    rotated.loadings = model.loadings * random_orthogonal(K, rng);
    const auto a = pca_diagnostics(data, model);
    const auto b = pca_diagnostics(data, rotated);
    EXPECT_LE(max_abs_diff(a.od, b.od), 1e-10);
}

TEST(PcaDiagnostics, ModelMismatch)
{
    PcaModel model{{0.0, 0.0}, Matrix::identity(2), {1.0, 1.0}};
    EXPECT_THROW(pca_diagnostics(DataMatrix{{1.0, 2.0, 3.0}}, model), error);
}

TEST(Auc, SeparatedTiedAndErrors)
{
    EXPECT_EQ(auc(Vector{0.1, 0.2, 0.9, 1.5}, {false, false, true, true}), 1.0);
    EXPECT_EQ(auc(Vector{0.1, 0.2, 0.9, 1.5}, {true, true, false, false}), 0.0);
    EXPECT_EQ(auc(Vector(6, 2.0), {true, false, true, false, false, false}), 0.5);
    EXPECT_THROW(auc(Vector{1.0, 2.0}, {true, true}), error);
    EXPECT_THROW(auc(Vector{1.0, 2.0}, {true}), error);
}

TEST(Auc, MatchesPairCounting)
{
    Rng rng(5);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 40;
        Vector s(n);
        std::vector<bool> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            l[i] = i % 3 == 0;
            s[i] = std::round(4.0 * normal(rng) + (l[i] ? 2.0 : 0.0)) / 4.0;
        }
        double count = 0.0, pairs = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (l[i] && !l[j]) {
                    pairs += 1.0;
                    count += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
                }
        EXPECT_NEAR(auc(s, l), count / pairs, 1e-14);
    }
}

TEST(Auc, InvariantUnderIncreasingTransform)
{
    Rng rng(6);
    std::normal_distribution<double> normal;
    Vector s(100);
    std::vector<bool> l(100);
    for (std::size_t i = 0; i < 100; ++i) {
        l[i] = i % 4 == 0;
        s[i] = std::abs(normal(rng)) + (l[i] ? 0.5 : 0.0);
    }
    Vector t(100);
    for (std::size_t i = 0; i < 100; ++i)
        t[i] = std::exp(3.0 * s[i]) + 7.0;
    EXPECT_EQ(auc(s, l), auc(t, l));
}

TEST(DetectOutliers, SinglePlanarOutlier)
{
    const DataMatrix data{{0.0, 0.0}, {1.0, 0.2}, {-0.8, 0.5}, {0.3, -1.0}, {-0.5, -0.4}, {30.0, -25.0}};
    const auto clean = subset_mean_cov(data, SubsetIndices({0, 1, 2, 3, 4}), Denominator::h_minus_one);
    const auto r = detect_outliers(data, clean, Chi2Rule{0.975});
    EXPECT_EQ(r.flags, (std::vector<bool>{false, false, false, false, false, true}));
    EXPECT_DOUBLE_EQ(r.cutoff, std::sqrt(chi_square_quantile(2, 0.975)));
    for (std::size_t i = 0; i < 6; ++i)
        EXPECT_EQ(r.flags[i], r.distances[i] > r.cutoff);
    EXPECT_FALSE(r.auc.has_value());
}

TEST(DetectOutliers, TopRuleFlagsExactlyM)
{
    Rng rng(7);
    const DataMatrix data(random_matrix(60, 3, rng));
    const auto ls = sample_mean_cov(data);
    for (std::size_t m : {0u, 1u, 7u, 59u, 60u}) {
        const auto r = detect_outliers(data, ls, TopRule{m});
        EXPECT_EQ(static_cast<std::size_t>(std::count(r.flags.begin(), r.flags.end(), true)), m);
        for (std::size_t i = 0; i < 60; ++i)
            EXPECT_EQ(r.flags[i], r.distances[i] > r.cutoff) << m << " " << i;
    }
    EXPECT_THROW(detect_outliers(data, ls, TopRule{61}), error);
}

TEST(DetectOutliers, TopRuleTiesGoToLowerIndex)
{
    const DataMatrix data{{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    const auto r = detect_outliers(data, LocationScatter{{0.0, 0.0}, Matrix::identity(2)}, TopRule{2});
    EXPECT_EQ(r.flags, (std::vector<bool>{true, true, false, false}));
}

TEST(DetectOutliers, AucWithLabels)
{
    const DataMatrix data{{0.0, 0.0}, {1.0, 0.2}, {-0.8, 0.5}, {0.3, -1.0}, {-0.5, -0.4}, {30.0, -25.0}};
    const auto clean = subset_mean_cov(data, SubsetIndices({0, 1, 2, 3, 4}), Denominator::h_minus_one);
    const std::vector<bool> labels{false, false, false, false, false, true};
    const auto r = detect_outliers(data, clean, Chi2Rule{}, labels);
    ASSERT_TRUE(r.auc.has_value());
    EXPECT_EQ(*r.auc, 1.0);
    EXPECT_THROW(detect_outliers(data, clean, Chi2Rule{}, std::vector<bool>{true, false}), error);
}

TEST(ParseRule, Grammar)
{
    EXPECT_DOUBLE_EQ(std::get<Chi2Rule>(*parse_rule("chi2:0.99")).prob, 0.99);
    EXPECT_EQ(std::get<TopRule>(*parse_rule("top:50")).m, 50u);
    for (const char* bad : {"chi2", "chi2:1.5", "chi2:0", "top:-1", "top:x", "top:5x", "median:3", ""})
        EXPECT_FALSE(parse_rule(bad).has_value()) << bad;
}
