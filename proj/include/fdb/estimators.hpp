#ifndef FDB_ESTIMATORS_HPP
#define FDB_ESTIMATORS_HPP

#include "fdb/depth.hpp"
#include "fdb/error.hpp"
#include "fdb/matrix.hpp"
#include "fdb/numeric.hpp"
#include "fdb/parallel.hpp"
#include "fdb/random.hpp"
#include "fdb/special.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fdb {

enum class Provenance { raw, reweighted, cstep, oracle, classical };

constexpr std::string_view to_string(Provenance p) noexcept
{
    switch (p) {
    case Provenance::raw: return "raw";
    case Provenance::reweighted: return "reweighted";
    case Provenance::cstep: return "cstep";
    case Provenance::oracle: return "oracle";
    case Provenance::classical: return "classical";
    }
    return "unknown";
}

/// A location vector and positive-definite scatter matrix.
struct LocationScatter {
    Vector mu;
    Matrix sigma;
    Provenance provenance = Provenance::raw;

    std::size_t dim() const noexcept { return mu.size(); }
};

/// Divisor for the subset scatter: h (FDB raw step) or h − 1 (C-step).
enum class Denominator { h, h_minus_one };

namespace detail {

inline void require_spd(const Matrix& sigma, std::string_view what)
{
    try {
        (void)cholesky(sigma);
    } catch (const error& e) {
        if (e.code() == errc::not_positive_definite)
            throw error(errc::singular_covariance, std::string(what) + " is singular (" + e.what() + ")");
        throw;
    }
}

inline double median_over(Vector values) { return median_inplace(values); }

} // namespace detail

/// Mean and scatter of the rows in `subset`. With `ridge_repair`, a singular
/// scatter gets (1e−10·trace/p)·I added instead of raising SingularCovariance.
inline LocationScatter subset_mean_cov(const DataMatrix& data, const SubsetIndices& subset, Denominator denominator,
                                       bool ridge_repair = false)
{
    const std::size_t p = data.p();
    const std::size_t h = subset.size();
    if (h == 0 || subset.indices().back() >= data.n())
        throw error(errc::invalid_subset_size, "subset is empty or indexes past the data");
    const double divisor = denominator == Denominator::h ? static_cast<double>(h) : static_cast<double>(h) - 1.0;
    if (!(divisor > 0.0))
        throw error(errc::invalid_subset_size, "subset too small for the requested denominator");

    LocationScatter out{Vector(p, 0.0), Matrix(p, p), Provenance::raw};
    for (auto i : subset) {
        const auto x = data.row(i);
        for (std::size_t j = 0; j < p; ++j)
            out.mu[j] += x[j];
    }
    for (auto& m : out.mu)
        m /= static_cast<double>(h);

    Vector centered(p);
    for (auto i : subset) {
        const auto x = data.row(i);
        for (std::size_t j = 0; j < p; ++j)
            centered[j] = x[j] - out.mu[j];
        for (std::size_t a = 0; a < p; ++a) {
            const double ca = centered[a];
            auto row = out.sigma.row(a);
            for (std::size_t b = a; b < p; ++b)
                row[b] += ca * centered[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) {
            const double v = out.sigma(a, b) / divisor;
            out.sigma(a, b) = v;
            out.sigma(b, a) = v;
        }

    try {
        (void)cholesky(out.sigma);
    } catch (const error& e) {
        if (e.code() != errc::not_positive_definite)
            throw;
        const double ridge = 1e-10 * trace(out.sigma) / static_cast<double>(p);
        if (!ridge_repair || !(ridge > 0.0))
            throw error(errc::singular_covariance, "subset covariance is singular");
        for (std::size_t a = 0; a < p; ++a)
            out.sigma(a, a) += ridge;
        detail::require_spd(out.sigma, "ridge-repaired subset covariance");
    }
    return out;
}

/// Classical sample mean and (n − 1)-denominator covariance.
inline LocationScatter sample_mean_cov(const DataMatrix& data)
{
    std::vector<std::size_t> all(data.n());
    std::iota(all.begin(), all.end(), std::size_t{0});
    auto ls = subset_mean_cov(data, SubsetIndices(std::move(all)), Denominator::h_minus_one);
    ls.provenance = Provenance::classical;
    return ls;
}

inline Vector mahalanobis_sq(const DataMatrix& data, std::span<const double> mu, const CholeskyFactor& factor)
{
    if (mu.size() != data.p() || factor.dim() != data.p())
        throw error(errc::dimension_error, "location/scatter dimension does not match data");
    const std::size_t p = data.p();
    Vector out(data.n());
    Vector z(p);
    for (std::size_t i = 0; i < data.n(); ++i) {
        const auto x = data.row(i);
        for (std::size_t j = 0; j < p; ++j)
            z[j] = x[j] - mu[j];
        factor.forward_substitute(z);
        out[i] = dot(z, z);
    }
    return out;
}

/// Squared Mahalanobis distances (x_i − μ)ᵀ Σ⁻¹ (x_i − μ) via Cholesky solves.
inline Vector mahalanobis_sq(const DataMatrix& data, const LocationScatter& ls)
{
    return mahalanobis_sq(data, ls.mu, cholesky(ls.sigma));
}

inline double log_det(const LocationScatter& ls) { return log_determinant(cholesky(ls.sigma)); }

/// Indices of the h smallest values; ties go to the lower index.
inline SubsetIndices smallest_h(std::span<const double> values, std::size_t h)
{
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) { return values[a] < values[b] || (values[a] == values[b] && a < b); };
    if (h < order.size())
        std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(h), order.end(), less);
    order.resize(h);
    return SubsetIndices(std::move(order));
}

struct CStepResult {
    SubsetIndices subset;
    LocationScatter estimate;
};

/// One concentration step: keep the h samples closest under `state`, then
/// re-estimate with denominator h − 1.
inline CStepResult c_step(const DataMatrix& data, const LocationScatter& state, std::size_t h)
{
    if (h <= data.p() || h > data.n())
        throw error(errc::invalid_subset_size, "C-step needs p < h <= n");
    const auto d2 = mahalanobis_sq(data, state);
    auto subset = smallest_h(d2, h);
    auto estimate = subset_mean_cov(data, subset, Denominator::h_minus_one);
    estimate.provenance = Provenance::cstep;
    return {std::move(subset), std::move(estimate)};
}

struct CStepIteration {
    SubsetIndices subset;
    LocationScatter estimate;
    std::size_t iterations = 0;
    Vector log_dets; ///< log det of the start followed by one entry per step
};

/// Repeats c_step until the subset repeats or the determinant changes by a
/// relative amount below `rel_tol`; at most `max_iterations` steps.
inline CStepIteration iterate_c_steps(const DataMatrix& data, const LocationScatter& start, std::size_t h,
                                      std::size_t max_iterations = 100, double rel_tol = 1e-12)
{
    CStepIteration out;
    double previous = log_det(start);
    out.log_dets.push_back(previous);
    LocationScatter current = start;
    std::optional<SubsetIndices> previous_subset;
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        auto step = c_step(data, current, h);
        const double ld = log_det(step.estimate);
        out.log_dets.push_back(ld);
        out.iterations = it;
        const bool repeated = previous_subset && *previous_subset == step.subset;
        const bool stalled = std::abs(std::expm1(ld - previous)) < rel_tol;
        previous = ld;
        previous_subset = step.subset;
        current = std::move(step.estimate);
        if (repeated || stalled)
            break;
    }
    out.subset = std::move(*previous_subset);
    out.estimate = std::move(current);
    return out;
}

struct ReweightResult {
    std::vector<std::uint8_t> weights;
    double c0 = 1.0;
    LocationScatter estimate;
};

/// One-pass reweighting: drop samples whose c0-scaled robust distance exceeds
/// √χ²_{p,0.975}, then take the weighted mean and (ΣW − 1)-denominator scatter.
inline ReweightResult reweight(const DataMatrix& data, const LocationScatter& ls)
{
    const std::size_t p = data.p();
    const auto d2 = mahalanobis_sq(data, ls);
    ReweightResult out;
    out.c0 = detail::median_over(d2) / chi_square_quantile(static_cast<unsigned>(p), 0.5);
    if (!(out.c0 > 0.0))
        throw error(errc::degenerate_data, "median squared distance is zero");
    const double cutoff = chi_square_quantile(static_cast<unsigned>(p), 0.975);
    out.weights.resize(data.n());
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < data.n(); ++i) {
        out.weights[i] = d2[i] / out.c0 <= cutoff ? 1 : 0;
        if (out.weights[i])
            kept.push_back(i);
    }
    if (kept.size() <= p + 1)
        throw error(errc::too_few_weighted_samples,
                    "only " + std::to_string(kept.size()) + " samples kept by the reweighting rule");
    out.estimate = subset_mean_cov(data, SubsetIndices(std::move(kept)), Denominator::h_minus_one);
    out.estimate.provenance = Provenance::reweighted;
    return out;
}

struct EstimatorConfig {
    double alpha = 0.75;                ///< h = ⌊α·n⌋ unless `h` is given
    std::optional<std::size_t> h;
    DepthKind depth = DepthKind::projection;
    std::optional<std::size_t> k;       ///< directions; default max(1000, 10p)
    std::uint64_t seed = 1;
    bool reweight = true;
    std::size_t threads = 1;
};

/// h for a given configuration; validates α ∈ [0.5, 1] and p < h ≤ n.
inline std::size_t resolve_subset_size(double alpha, std::optional<std::size_t> h, std::size_t n, std::size_t p)
{
    std::size_t size = 0;
    if (h) {
        size = *h;
    } else {
        if (!(alpha >= 0.5 && alpha <= 1.0))
            throw error(errc::invalid_subset_size, "alpha must lie in [0.5, 1]");
        size = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n)));
    }
    if (size <= p || size > n)
        throw error(errc::invalid_subset_size, "subset size h=" + std::to_string(size) + " must satisfy p=" +
                                                   std::to_string(p) + " < h <= n=" + std::to_string(n));
    return size;
}

struct EstimationReport {
    LocationScatter estimate;     ///< final (reweighted unless disabled)
    LocationScatter raw;          ///< consistency-scaled raw estimate
    SubsetIndices subset;
    std::vector<std::uint8_t> weights; ///< W_i; subset membership when reweighting is off
    double c0 = 1.0;
    double c1 = 1.0;
    Vector distances_sq;          ///< D² under `estimate`
    double elapsed_seconds = 0.0;
    std::size_t h = 0;
    std::size_t k = 0;            ///< directions used (0 when no projections)
    std::vector<std::string> warnings;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Consistency-scales a subset estimate by c = med D² / χ²_{p,0.5} and applies
// the optional reweighting step, filling the tail of the report.
inline void finish_report(const DataMatrix& data, LocationScatter base, bool do_reweight, EstimationReport& report)
{
    const std::size_t p = data.p();
    with_stage("raw", [&] {
        const auto d2 = mahalanobis_sq(data, base);
        report.c1 = median_over(d2) / chi_square_quantile(static_cast<unsigned>(p), 0.5);
        if (!(report.c1 > 0.0))
            throw error(errc::degenerate_data, "median squared distance of the raw estimate is zero");
        base.sigma *= report.c1;
        base.provenance = Provenance::raw;
        report.raw = base;
        return 0;
    });
    if (do_reweight) {
        with_stage("reweight", [&] {
            auto rw = reweight(data, report.raw);
            report.c0 = rw.c0;
            report.weights = std::move(rw.weights);
            report.estimate = std::move(rw.estimate);
            return 0;
        });
    } else {
        report.c0 = 1.0;
        report.weights.assign(data.n(), 0);
        for (auto i : report.subset)
            report.weights[i] = 1;
        report.estimate = report.raw;
    }
    report.distances_sq = mahalanobis_sq(data, report.estimate);
}

} // namespace detail

/// Depth-based MCD approximation: deepest h-subset, raw mean/scatter with
/// consistency factor c1, then the reweighting step.
inline EstimationReport fdb_estimate(const DataMatrix& data, const EstimatorConfig& config)
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    EstimationReport report;
    report.h = with_stage("config", [&] { return resolve_subset_size(config.alpha, config.h, n, p); });
    if (n <= 5 * p)
        report.warnings.push_back("n <= 5p: estimates may be unstable");

    const auto depths = with_stage("depth", [&] {
        if (config.depth == DepthKind::l2)
            return l2_depth(data, config.threads);
        report.k = config.k.value_or(default_direction_count(p));
        return projection_depth(data, sample_directions(p, report.k, config.seed), config.threads);
    });
    report.subset = with_stage("subset", [&] { return deepest_subset(depths, report.h, p); });
    auto base = with_stage("raw", [&] { return subset_mean_cov(data, report.subset, Denominator::h); });
    detail::finish_report(data, std::move(base), config.reweight, report);
    report.elapsed_seconds = detail::seconds_since(t0);
    return report;
}

struct FastMcdConfig {
    double alpha = 0.75;
    std::optional<std::size_t> h;
    std::size_t n_starts = 500;
    std::size_t n_best = 10;
    std::uint64_t seed = 1;
    bool reweight = true;
    std::size_t threads = 1;
};

/// FASTMCD-style comparator: random elemental starts, two C-steps each, the
/// best few iterated to convergence, then the same scaling and reweighting
/// as fdb_estimate.
inline EstimationReport fastmcd_baseline(const DataMatrix& data, const FastMcdConfig& config)
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    if (config.n_starts == 0)
        throw error(errc::domain_error, "fastmcd needs at least one start");
    EstimationReport report;
    report.h = with_stage("config", [&] { return resolve_subset_size(config.alpha, config.h, n, p); });
    if (n <= 5 * p)
        report.warnings.push_back("n <= 5p: estimates may be unstable");
    const std::size_t h = report.h;
    const std::size_t elemental = std::min(n, p + 1);

    struct Candidate {
        double log_det = std::numeric_limits<double>::infinity();
        LocationScatter estimate;
        bool ok = false;
    };
    std::vector<Candidate> candidates(config.n_starts);
    parallel_for(config.n_starts, config.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t s = begin; s < end; ++s) {
            Rng rng(derive_seed(config.seed, s));
            try {
                auto start = subset_mean_cov(data, SubsetIndices(random_subset(n, elemental, rng)),
                                             Denominator::h_minus_one, true);
                auto step = c_step(data, start, h);
                step = c_step(data, step.estimate, h);
                candidates[s].log_det = log_det(step.estimate);
                candidates[s].estimate = std::move(step.estimate);
                candidates[s].ok = true;
            } catch (const error&) {
            }
        }
    });

    std::vector<std::size_t> order;
    for (std::size_t s = 0; s < candidates.size(); ++s)
        if (candidates[s].ok)
            order.push_back(s);
    if (order.empty())
        throw error(errc::degenerate_data, "every elemental start was singular").with_stage("starts");
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return candidates[a].log_det < candidates[b].log_det; });
    order.resize(std::min(order.size(), config.n_best));

    std::vector<std::optional<CStepIteration>> refined(order.size());
    parallel_for(order.size(), config.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t r = begin; r < end; ++r) {
            try {
                refined[r] = iterate_c_steps(data, candidates[order[r]].estimate, h);
            } catch (const error&) {
            }
        }
    });
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < refined.size(); ++r)
        if (refined[r] && (!best || refined[r]->log_dets.back() < refined[*best]->log_dets.back()))
            best = r;
    if (!best)
        throw error(errc::singular_covariance, "every refined start became singular").with_stage("csteps");

    report.subset = refined[*best]->subset;
    detail::finish_report(data, refined[*best]->estimate, config.reweight, report);
    report.elapsed_seconds = detail::seconds_since(t0);
    return report;
}

inline double binomial_coefficient(std::size_t n, std::size_t k)
{
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    return std::round(c);
}

struct ExhaustiveResult {
    SubsetIndices subset;
    LocationScatter estimate; ///< denominator h − 1
    double log_det = 0.0;
};

/// Global minimum-determinant h-subset by enumeration (ties: lexicographically
/// smallest subset). Test oracle; refuses instances with C(n, h) > max_candidates.
inline ExhaustiveResult exhaustive_mcd(const DataMatrix& data, std::size_t h, double max_candidates = 1e6)
{
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    if (h <= p || h > n)
        throw error(errc::invalid_subset_size, "exhaustive MCD needs p < h <= n");
    if (binomial_coefficient(n, h) > max_candidates)
        throw error(errc::oracle_too_large, "C(n, h) exceeds the enumeration budget");

    // Work on centered data; covariances are translation invariant.
    Vector center(p, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            center[j] += data(i, j) / static_cast<double>(n);
    Matrix x(n, p);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < p; ++j)
            x(i, j) = data(i, j) - center[j];

    // Enumerate whichever of subset / complement is smaller and accumulate
    // first and second moments accordingly.
    const bool by_complement = n - h < h;
    const std::size_t r = by_complement ? n - h : h;
    Vector total1(p, 0.0);
    Matrix total2(p, p);
    if (by_complement) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < p; ++a) {
                total1[a] += x(i, a);
                for (std::size_t b = 0; b < p; ++b)
                    total2(a, b) += x(i, a) * x(i, b);
            }
    }

    const double hd = static_cast<double>(h);
    std::vector<std::size_t> combo(r);
    std::iota(combo.begin(), combo.end(), std::size_t{0});
    std::optional<std::vector<std::size_t>> best_subset;
    double best = std::numeric_limits<double>::infinity();
    Vector s1(p);
    Matrix s2(p, p);
    auto subset_of = [&](const std::vector<std::size_t>& c) {
        if (!by_complement)
            return c;
        std::vector<std::size_t> s;
        s.reserve(h);
        std::size_t ci = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (ci < c.size() && c[ci] == i)
                ++ci;
            else
                s.push_back(i);
        }
        return s;
    };

    while (true) {
        std::fill(s1.begin(), s1.end(), 0.0);
        std::fill(s2.data().begin(), s2.data().end(), 0.0);
        for (auto i : combo)
            for (std::size_t a = 0; a < p; ++a) {
                s1[a] += x(i, a);
                for (std::size_t b = a; b < p; ++b)
                    s2(a, b) += x(i, a) * x(i, b);
            }
        Matrix cov(p, p);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b) {
                const double m1a = by_complement ? total1[a] - s1[a] : s1[a];
                const double m1b = by_complement ? total1[b] - s1[b] : s1[b];
                const double m2 = by_complement ? total2(a, b) - s2(a, b) : s2(a, b);
                const double v = (m2 - m1a * m1b / hd) / (hd - 1.0);
                cov(a, b) = v;
                cov(b, a) = v;
            }
        double ld = -std::numeric_limits<double>::infinity();
        try {
            ld = log_determinant(cholesky(cov));
        } catch (const error& e) {
            if (e.code() != errc::not_positive_definite)
                throw;
        }
        if (ld < best) {
            best = ld;
            best_subset = subset_of(combo);
        } else if (ld == best) {
            auto candidate = subset_of(combo);
            if (candidate < *best_subset)
                best_subset = std::move(candidate);
        }

        // Next combination in lexicographic order.
        std::size_t i = r;
        while (i > 0 && combo[i - 1] == n - r + i - 1)
            --i;
        if (i == 0)
            break;
        ++combo[i - 1];
        for (std::size_t j = i; j < r; ++j)
            combo[j] = combo[j - 1] + 1;
    }

    ExhaustiveResult out;
    out.subset = SubsetIndices(std::move(*best_subset));
    out.estimate = subset_mean_cov(data, out.subset, Denominator::h_minus_one);
    out.estimate.provenance = Provenance::oracle;
    out.log_det = log_det(out.estimate);
    return out;
}

} // namespace fdb

#endif
