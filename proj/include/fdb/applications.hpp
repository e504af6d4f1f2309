#ifndef FDB_APPLICATIONS_HPP
#define FDB_APPLICATIONS_HPP

#include "fdb/error.hpp"
#include "fdb/estimators.hpp"
#include "fdb/matrix.hpp"
#include "fdb/numeric.hpp"
#include "fdb/special.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace fdb {

// ---------------------------------------------------------------------------
// Robust PCA

struct PcaModel {
    Vector mu;
    Matrix loadings; ///< p×K, orthonormal columns
    Vector eigenvalues; ///< K, descending

    std::size_t components() const noexcept { return loadings.cols(); }
};

inline PcaModel robust_pca(const LocationScatter& ls, std::size_t components)
{
    const std::size_t p = ls.dim();
    if (components < 1 || components > p)
        throw error(errc::dimension_error, "component count must lie in [1, p]");
    auto eig = eigen_symmetric(ls.sigma);
    if (!(eig.values[components - 1] > 0.0))
        throw error(errc::not_positive_definite, "retained eigenvalues must be positive");
    PcaModel model{ls.mu, Matrix(p, components), Vector(eig.values.begin(), eig.values.begin() + components)};
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t k = 0; k < components; ++k)
            model.loadings(i, k) = eig.vectors(i, k);
    return model;
}

inline PcaModel robust_pca(const DataMatrix& data, const LocationScatter& ls, std::size_t components)
{
    if (data.p() != ls.dim())
        throw error(errc::dimension_error, "estimate dimension does not match data");
    return robust_pca(ls, components);
}

enum class SampleCategory { regular, good_leverage, orthogonal_outlier, bad_leverage };

constexpr std::string_view to_string(SampleCategory c) noexcept
{
    switch (c) {
    case SampleCategory::regular: return "regular";
    case SampleCategory::good_leverage: return "good_leverage";
    case SampleCategory::orthogonal_outlier: return "orthogonal_outlier";
    case SampleCategory::bad_leverage: return "bad_leverage";
    }
    return "unknown";
}

struct PcaDiagnostics {
    Matrix scores; ///< n×K
    Vector sd;     ///< Σ_k t_ik² / λ_k
    Vector od;     ///< Σ_j e_ij²
    std::vector<SampleCategory> category;
    double sd_cutoff = 0.0;
    double od_cutoff = 0.0;
};

inline SampleCategory categorize(double sd, double od, double sd_cutoff, double od_cutoff) noexcept
{
    const bool far_in = sd > sd_cutoff;
    const bool far_out = od > od_cutoff;
    if (far_in && far_out)
        return SampleCategory::bad_leverage;
    if (far_in)
        return SampleCategory::good_leverage;
    if (far_out)
        return SampleCategory::orthogonal_outlier;
    return SampleCategory::regular;
}

/// Cutoff on OD: (median(OD^{2/3}) + 1.4826·MAD(OD^{2/3})·z_{0.975})^{3/2}.
inline double orthogonal_distance_cutoff(std::span<const double> od)
{
    Vector t(od.size());
    for (std::size_t i = 0; i < od.size(); ++i)
        t[i] = std::pow(od[i], 2.0 / 3.0);
    const double center = median(t);
    const double spread = mad(t);
    return std::pow(center + 1.4826 * spread * normal_quantile(0.975), 1.5);
}

/// Scores T = (X − 1μᵀ)P, score and orthogonal distances, and the four-way
/// categorization. With K = p the residual space is empty and OD is exactly 0.
inline PcaDiagnostics pca_diagnostics(const DataMatrix& data, const PcaModel& model)
{
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    const std::size_t K = model.components();
    if (model.loadings.rows() != p || model.mu.size() != p || K > p)
        throw error(errc::dimension_error, "PCA model does not match data dimension");

    PcaDiagnostics out{Matrix(n, K), Vector(n, 0.0), Vector(n, 0.0), {}, 0.0, 0.0};
    Vector centered(p), residual(p);
    for (std::size_t i = 0; i < n; ++i) {
        const auto x = data.row(i);
        for (std::size_t j = 0; j < p; ++j)
            centered[j] = x[j] - model.mu[j];
        residual = centered;
        for (std::size_t k = 0; k < K; ++k) {
            double t = 0.0;
            for (std::size_t j = 0; j < p; ++j)
                t += centered[j] * model.loadings(j, k);
            out.scores(i, k) = t;
            out.sd[i] += t * t / model.eigenvalues[k];
            for (std::size_t j = 0; j < p; ++j)
                residual[j] -= t * model.loadings(j, k);
        }
        out.od[i] = K == p ? 0.0 : dot(residual, residual);
    }
    out.sd_cutoff = chi_square_quantile(static_cast<unsigned>(K), 0.975);
    out.od_cutoff = K == p ? 0.0 : orthogonal_distance_cutoff(out.od);
    out.category.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.category[i] = categorize(out.sd[i], out.od[i], out.sd_cutoff, out.od_cutoff);
    return out;
}

// ---------------------------------------------------------------------------
// Outlier detection

struct Chi2Rule {
    double prob = 0.975;
};
struct TopRule {
    std::size_t m = 50;
};
using DetectionRule = std::variant<Chi2Rule, TopRule>;

/// Parses "chi2:<prob>" or "top:<m>".
inline std::optional<DetectionRule> parse_rule(std::string_view s)
{
    const auto colon = s.find(':');
    if (colon == std::string_view::npos)
        return std::nullopt;
    const std::string kind(s.substr(0, colon));
    const std::string value(s.substr(colon + 1));
    try {
        std::size_t used = 0;
        if (kind == "chi2") {
            const double prob = std::stod(value, &used);
            if (used != value.size() || !(prob > 0.0 && prob < 1.0))
                return std::nullopt;
            return Chi2Rule{prob};
        }
        if (kind == "top") {
            if (!value.empty() && value[0] == '-')
                return std::nullopt;
            const unsigned long m = std::stoul(value, &used);
            if (used != value.size())
                return std::nullopt;
            return TopRule{m};
        }
    } catch (...) {
    }
    return std::nullopt;
}

struct DetectionResult {
    Vector distances; ///< robust Mahalanobis distances (not squared)
    std::vector<bool> flags;
    double cutoff = 0.0;
    std::optional<double> auc;
};

/// Mann-Whitney AUC of `scores` for separating positives (labels true)
/// from negatives; ties count one half.
inline double auc(std::span<const double> scores, const std::vector<bool>& labels)
{
    if (scores.size() != labels.size())
        throw error(errc::dimension_error, "labels and scores differ in length");
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Midranks handle ties.
    double positive_rank_sum = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]])
            ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t)
            if (labels[order[t]]) {
                positive_rank_sum += midrank;
                ++positives;
            }
        i = j + 1;
    }
    const std::size_t negatives = n - positives;
    if (positives == 0 || negatives == 0)
        throw error(errc::domain_error, "AUC needs both positive and negative labels");
    const double np = static_cast<double>(positives);
    const double u = positive_rank_sum - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(negatives));
}

inline DetectionResult detect_outliers(const DataMatrix& data, const LocationScatter& ls, const DetectionRule& rule,
                                       const std::optional<std::vector<bool>>& labels = std::nullopt)
{
    const std::size_t n = data.n();
    DetectionResult out;
    const auto d2 = mahalanobis_sq(data, ls);
    out.distances.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.distances[i] = std::sqrt(d2[i]);
    out.flags.assign(n, false);

    if (const auto* chi = std::get_if<Chi2Rule>(&rule)) {
        out.cutoff = std::sqrt(chi_square_quantile(static_cast<unsigned>(data.p()), chi->prob));
        for (std::size_t i = 0; i < n; ++i)
            out.flags[i] = out.distances[i] > out.cutoff;
    } else {
        const std::size_t m = std::get<TopRule>(rule).m;
        if (m > n)
            throw error(errc::invalid_rule, "top-m rule asks for more samples than available");
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return out.distances[a] > out.distances[b]; });
        for (std::size_t t = 0; t < m; ++t)
            out.flags[order[t]] = true;
        // Reported cutoff: the largest unflagged distance.
        out.cutoff = m < n ? out.distances[order[m]] : -std::numeric_limits<double>::infinity();
    }
    if (labels) {
        if (labels->size() != n)
            throw error(errc::dimension_error, "label count does not match sample count");
        out.auc = auc(out.distances, *labels);
    }
    return out;
}

} // namespace fdb

#endif
