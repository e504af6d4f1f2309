#ifndef FDB_EVALUATION_HPP
#define FDB_EVALUATION_HPP

#include "fdb/depth.hpp"
#include "fdb/error.hpp"
#include "fdb/estimators.hpp"
#include "fdb/matrix.hpp"
#include "fdb/numeric.hpp"
#include "fdb/parallel.hpp"
#include "fdb/random.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

namespace fdb {

// ---------------------------------------------------------------------------
// Data generation

struct GenerationSpec {
    std::size_t n = 200;
    std::size_t p = 5;
    double off_diagonal = 0.75;
    std::uint64_t seed = 1;
};

/// p×p matrix with unit diagonal and constant off-diagonal entries.
inline Matrix structure_matrix(std::size_t p, double off_diagonal)
{
    if (p > 1 && !(off_diagonal > -1.0 / static_cast<double>(p - 1) && off_diagonal < 1.0))
        throw error(errc::domain_error, "off-diagonal value makes the structure matrix singular or indefinite");
    Matrix g(p, p, off_diagonal);
    for (std::size_t i = 0; i < p; ++i)
        g(i, i) = 1.0;
    return g;
}

/// Row form of x_i = G y_i, i.e. X = Y Gᵀ.
inline DataMatrix apply_structure(const DataMatrix& y, const Matrix& g)
{
    return DataMatrix(y.matrix() * g.transpose());
}

struct CleanSample {
    DataMatrix x;
    DataMatrix y;
    Matrix g;
};

inline CleanSample generate_clean(const GenerationSpec& spec)
{
    if (spec.n == 0 || spec.p == 0)
        throw error(errc::empty_input, "generation needs n >= 1 and p >= 1");
    Matrix g = structure_matrix(spec.p, spec.off_diagonal);
    Rng rng(spec.seed);
    DataMatrix y(standard_normal_matrix(spec.n, spec.p, rng));
    DataMatrix x = spec.off_diagonal == 0.0 ? y : apply_structure(y, g);
    return {std::move(x), std::move(y), std::move(g)};
}

// ---------------------------------------------------------------------------
// Contamination

enum class ContaminationKind { none, point, random, cluster, radial };

constexpr std::string_view to_string(ContaminationKind k) noexcept
{
    switch (k) {
    case ContaminationKind::none: return "none";
    case ContaminationKind::point: return "point";
    case ContaminationKind::random: return "random";
    case ContaminationKind::cluster: return "cluster";
    case ContaminationKind::radial: return "radial";
    }
    return "unknown";
}

inline std::optional<ContaminationKind> parse_contamination_kind(std::string_view s)
{
    for (auto k : {ContaminationKind::none, ContaminationKind::point, ContaminationKind::random,
                   ContaminationKind::cluster, ContaminationKind::radial})
        if (to_string(k) == s)
            return k;
    return std::nullopt;
}

struct ContaminationSpec {
    ContaminationKind kind = ContaminationKind::none;
    double epsilon = 0.0;
    double r = 5.0; ///< abnormality level; unused for radial
};

inline std::size_t outlier_count(std::size_t n, double epsilon)
{
    return static_cast<std::size_t>(std::floor(static_cast<double>(n) * epsilon));
}

struct ContaminatedSample {
    DataMatrix y;
    std::vector<bool> labels; ///< true for injected outliers
};

/// Replaces the last ⌊nε⌋ rows of Y (standard-normal space) by outliers.
inline ContaminatedSample contaminate(const DataMatrix& y, const ContaminationSpec& spec, std::uint64_t seed)
{
    if (!(spec.epsilon >= 0.0 && spec.epsilon <= 0.5))
        throw error(errc::invalid_contamination, "contamination fraction must lie in [0, 0.5]");
    const std::size_t n = y.n();
    const std::size_t p = y.p();
    const std::size_t m = spec.kind == ContaminationKind::none ? 0 : outlier_count(n, spec.epsilon);
    if (spec.kind == ContaminationKind::point && p == 1 && m > 0)
        throw error(errc::invalid_contamination, "point contamination needs p >= 2");

    Matrix out = y.matrix();
    std::vector<bool> labels(n, false);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double pd = static_cast<double>(p);

    Vector center(p, 0.0);
    if (spec.kind == ContaminationKind::point && m > 0) {
        // Unit vector orthogonal to the all-ones direction.
        Vector a(p);
        double len = 0.0;
        while (!(len > 1e-12)) {
            for (auto& v : a)
                v = normal(rng);
            double mean = 0.0;
            for (auto v : a)
                mean += v / pd;
            for (auto& v : a)
                v -= mean;
            len = norm2(a);
        }
        for (std::size_t j = 0; j < p; ++j)
            center[j] = spec.r * std::sqrt(pd) * a[j] / len;
    } else if (spec.kind == ContaminationKind::cluster) {
        std::fill(center.begin(), center.end(), spec.r * std::pow(pd, -0.25));
    }

    for (std::size_t i = n - m; i < n; ++i) {
        labels[i] = true;
        auto row = out.row(i);
        switch (spec.kind) {
        case ContaminationKind::point:
            for (std::size_t j = 0; j < p; ++j)
                row[j] = center[j] + 0.01 * normal(rng);
            break;
        case ContaminationKind::random: {
            Vector nu(p);
            double len = 0.0;
            while (!(len > 0.0)) {
                for (auto& v : nu)
                    v = normal(rng);
                len = norm2(nu);
            }
            const double scale = spec.r * std::pow(pd, 0.25) / len;
            for (std::size_t j = 0; j < p; ++j)
                row[j] = scale * nu[j] + normal(rng);
            break;
        }
        case ContaminationKind::cluster:
            for (std::size_t j = 0; j < p; ++j)
                row[j] = center[j] + normal(rng);
            break;
        case ContaminationKind::radial:
            for (std::size_t j = 0; j < p; ++j)
                row[j] = std::sqrt(5.0) * normal(rng);
            break;
        case ContaminationKind::none: break;
        }
    }
    return {DataMatrix(std::move(out)), std::move(labels)};
}

// ---------------------------------------------------------------------------
// Back-transformation and oracle subset

/// Inverse by Gauss-Jordan elimination with partial pivoting.
inline Matrix invert(const Matrix& m)
{
    if (m.rows() != m.cols())
        throw error(errc::dimension_error, "only square matrices can be inverted");
    const std::size_t p = m.rows();
    Matrix a = m;
    Matrix inv = Matrix::identity(p);
    double scale = 0.0;
    for (auto v : m.data())
        scale = std::max(scale, std::abs(v));
    const double tiny = static_cast<double>(p) * std::numeric_limits<double>::epsilon() * scale;
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::abs(a(r, col)) > std::abs(a(piv, col)))
                piv = r;
        if (!(std::abs(a(piv, col)) > tiny))
            throw error(errc::singular_transform, "matrix is singular to working precision");
        if (piv != col)
            for (std::size_t j = 0; j < p; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        const double d = a(col, col);
        for (std::size_t j = 0; j < p; ++j) {
            a(col, j) /= d;
            inv(col, j) /= d;
        }
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col)
                continue;
            const double f = a(r, col);
            if (f == 0.0)
                continue;
            for (std::size_t j = 0; j < p; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

/// Maps an estimate made on X = Y Gᵀ back to Y space: (G⁻¹μ, G⁻¹ Σ G⁻ᵀ).
inline LocationScatter back_transform(const LocationScatter& ls, const Matrix& g)
{
    if (g.rows() != ls.dim() || g.cols() != ls.dim())
        throw error(errc::dimension_error, "transform dimension does not match estimate");
    const Matrix gi = invert(g);
    LocationScatter out;
    out.mu = gi * std::span<const double>(ls.mu);
    out.sigma = symmetrize(gi * ls.sigma * gi.transpose());
    out.provenance = ls.provenance;
    return out;
}

/// The ⌊α·n⌋ samples with smallest true Mahalanobis distance under (mu, sigma).
inline SubsetIndices oracle_ellipsoid_subset(const DataMatrix& data, double alpha, std::span<const double> mu,
                                             const Matrix& sigma)
{
    const std::size_t h = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(data.n())));
    const auto d2 = mahalanobis_sq(data, mu, cholesky(sigma));
    return smallest_h(d2, h);
}

/// Standard-normal truth (μ = 0, Σ = I).
inline SubsetIndices oracle_ellipsoid_subset(const DataMatrix& y, double alpha)
{
    return oracle_ellipsoid_subset(y, alpha, Vector(y.p(), 0.0), Matrix::identity(y.p()));
}

// ---------------------------------------------------------------------------
// Accuracy metrics

struct MetricsReport {
    double e_mu = 0.0;
    double e_sigma = 0.0;
    double mse_single = 0.0;
    double kl = 0.0;
    double seconds = 0.0;
};

inline double location_error(const LocationScatter& ls, std::span<const double> mu0)
{
    if (mu0.size() != ls.dim())
        throw error(errc::dimension_error, "location dimension mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < mu0.size(); ++j)
        s += (ls.mu[j] - mu0[j]) * (ls.mu[j] - mu0[j]);
    return std::sqrt(s);
}

namespace detail {

// L⁻¹ Σ̂ L⁻ᵀ with Σ = L Lᵀ: symmetric and similar to Σ̂ Σ⁻¹.
inline Matrix whitened(const Matrix& sigma_hat, const Matrix& sigma_true)
{
    if (sigma_hat.rows() != sigma_true.rows() || sigma_hat.cols() != sigma_true.cols())
        throw error(errc::dimension_error, "scatter dimension mismatch");
    const Matrix li = inverse_lower(cholesky(sigma_true));
    return symmetrize(li * sigma_hat * li.transpose());
}

} // namespace detail

/// log₁₀ cond(Σ̂ Σ⁻¹).
inline double scatter_cond_error(const Matrix& sigma_hat, const Matrix& sigma_true)
{
    return std::log10(condition_number(detail::whitened(sigma_hat, sigma_true)));
}

/// ‖Σ̂ − Σ‖²_F / p².
inline double scatter_mse_single(const Matrix& sigma_hat, const Matrix& sigma_true)
{
    const double f = frobenius_norm(sigma_hat - sigma_true);
    const double p = static_cast<double>(sigma_true.rows());
    return f * f / (p * p);
}

/// trace(Σ̂Σ⁻¹) − log det(Σ̂Σ⁻¹) − p.
inline double kl_divergence(const Matrix& sigma_hat, const Matrix& sigma_true)
{
    const Matrix w = detail::whitened(sigma_hat, sigma_true);
    const double value = trace(w) - log_determinant(cholesky(w)) - static_cast<double>(w.rows());
    return std::max(0.0, value);
}

inline MetricsReport evaluate(const LocationScatter& estimate, std::span<const double> mu0, const Matrix& sigma0,
                              double seconds)
{
    return {location_error(estimate, mu0), scatter_cond_error(estimate.sigma, sigma0),
            scatter_mse_single(estimate.sigma, sigma0), kl_divergence(estimate.sigma, sigma0), seconds};
}

// ---------------------------------------------------------------------------
// Method dispatch

enum class Method { fdb_pro, fdb_l2, fastmcd };

constexpr std::string_view to_string(Method m) noexcept
{
    switch (m) {
    case Method::fdb_pro: return "fdb-pro";
    case Method::fdb_l2: return "fdb-l2";
    case Method::fastmcd: return "fastmcd";
    }
    return "unknown";
}

inline std::optional<Method> parse_method(std::string_view s)
{
    for (auto m : {Method::fdb_pro, Method::fdb_l2, Method::fastmcd})
        if (to_string(m) == s)
            return m;
    return std::nullopt;
}

struct MethodOptions {
    double alpha = 0.75;
    std::optional<std::size_t> h;
    std::optional<std::size_t> k;
    std::size_t n_starts = 500;
    std::uint64_t seed = 1;
    bool reweight = true;
    std::size_t threads = 1;
};

inline EstimationReport run_method(const DataMatrix& data, Method method, const MethodOptions& opt)
{
    if (method == Method::fastmcd) {
        FastMcdConfig cfg;
        cfg.alpha = opt.alpha;
        cfg.h = opt.h;
        cfg.n_starts = opt.n_starts;
        cfg.seed = opt.seed;
        cfg.reweight = opt.reweight;
        cfg.threads = opt.threads;
        return fastmcd_baseline(data, cfg);
    }
    EstimatorConfig cfg;
    cfg.alpha = opt.alpha;
    cfg.h = opt.h;
    cfg.depth = method == Method::fdb_l2 ? DepthKind::l2 : DepthKind::projection;
    cfg.k = opt.k;
    cfg.seed = opt.seed;
    cfg.reweight = opt.reweight;
    cfg.threads = opt.threads;
    return fdb_estimate(data, cfg);
}

// ---------------------------------------------------------------------------
// Benchmark harness

struct BenchmarkSetting {
    std::string name;
    std::size_t n = 0;
    std::size_t p = 0;
};

/// Named sizes A (200×5), B (400×40), C (2000×200), or "<n>x<p>".
inline std::optional<BenchmarkSetting> parse_setting(std::string_view s)
{
    if (s == "A")
        return BenchmarkSetting{"A", 200, 5};
    if (s == "B")
        return BenchmarkSetting{"B", 400, 40};
    if (s == "C")
        return BenchmarkSetting{"C", 2000, 200};
    const auto x = s.find('x');
    if (x == std::string_view::npos)
        return std::nullopt;
    try {
        std::size_t used_n = 0, used_p = 0;
        const std::string ns(s.substr(0, x)), ps(s.substr(x + 1));
        const unsigned long n = std::stoul(ns, &used_n);
        const unsigned long p = std::stoul(ps, &used_p);
        if (used_n != ns.size() || used_p != ps.size() || n == 0 || p == 0)
            return std::nullopt;
        return BenchmarkSetting{std::string(s), n, p};
    } catch (...) {
        return std::nullopt;
    }
}

struct BenchmarkGrid {
    std::vector<BenchmarkSetting> settings;
    std::vector<ContaminationSpec> contaminations;
    std::vector<Method> methods;
    std::size_t replicates = 100;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    double off_diagonal = 0.75;
    std::optional<double> alpha; ///< default: 0.5 when ε > 0.25, else 0.75
    std::optional<std::size_t> k;
    std::size_t n_starts = 500;
    bool record_time = true;     ///< false writes zero seconds (byte-reproducible output)
};

struct MetricSummary {
    double mean = 0.0;
    double sd = 0.0;
};

struct BenchmarkCell {
    BenchmarkSetting setting;
    ContaminationSpec contamination;
    Method method = Method::fdb_pro;
    double alpha = 0.75;
    std::size_t replicates = 0; ///< successful replicates
    std::size_t failures = 0;
    bool flagged = false;       ///< more than 1% of replicates failed
    MetricSummary e_mu, e_sigma, mse, kl, seconds;
};

namespace detail {

inline double pairwise_sum(std::span<const double> v)
{
    if (v.size() <= 8) {
        double s = 0.0;
        for (auto x : v)
            s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline MetricSummary summarize(const Vector& v)
{
    MetricSummary s;
    if (v.empty())
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    s.mean = pairwise_sum(v) / static_cast<double>(v.size());
    if (v.size() > 1) {
        Vector sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i)
            sq[i] = (v[i] - s.mean) * (v[i] - s.mean);
        s.sd = std::sqrt(pairwise_sum(sq) / static_cast<double>(v.size() - 1));
    }
    return s;
}

} // namespace detail

inline double default_alpha(double epsilon) { return epsilon > 0.25 ? 0.5 : 0.75; }

struct ReplicateData {
    DataMatrix x;
    Matrix g;
    std::vector<bool> labels;
    std::uint64_t estimator_seed = 0;
};

/// One simulated data set: clean N(0, I) bulk, contamination in Y space,
/// X = Y Gᵀ, then a seeded row shuffle.
inline ReplicateData simulate_replicate(std::size_t n, std::size_t p, double off_diagonal,
                                        const ContaminationSpec& contamination, std::uint64_t replicate_seed)
{
    auto clean = generate_clean({n, p, 0.0, derive_seed(replicate_seed, 0)});
    auto dirty = contaminate(clean.y, contamination, derive_seed(replicate_seed, 1));
    Matrix g = structure_matrix(p, off_diagonal);
    DataMatrix x = apply_structure(dirty.y, g);
    Rng shuffle_rng(derive_seed(replicate_seed, 2));
    const auto perm = random_permutation(n, shuffle_rng);
    std::vector<bool> labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = dirty.labels[perm[i]];
    return {permute_rows(x, perm), std::move(g), std::move(labels), derive_seed(replicate_seed, 3)};
}

using BenchmarkProgress = std::function<void(const BenchmarkCell&, std::size_t done, std::size_t total)>;

/// Runs every (setting, contamination, method) cell for `replicates`
/// replicates. All methods in a (setting, contamination) pair see the same
/// data sets. Results are independent of the thread count.
inline std::vector<BenchmarkCell> run_benchmark(const BenchmarkGrid& grid, const BenchmarkProgress& progress = {})
{
    if (grid.settings.empty() || grid.contaminations.empty() || grid.methods.empty() || grid.replicates == 0)
        throw error(errc::domain_error, "benchmark grid is empty");
    std::vector<BenchmarkCell> cells;
    const std::size_t total = grid.settings.size() * grid.contaminations.size() * grid.methods.size();
    std::size_t data_cell = 0;
    for (const auto& setting : grid.settings) {
        for (const auto& cont : grid.contaminations) {
            const std::uint64_t cell_seed = derive_seed(grid.seed, data_cell++);
            const double alpha = grid.alpha.value_or(default_alpha(cont.epsilon));
            for (const auto method : grid.methods) {
                const std::size_t S = grid.replicates;
                std::vector<std::optional<MetricsReport>> results(S);
                parallel_for(S, grid.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
                    for (std::size_t rep = begin; rep < end; ++rep) {
                        try {
                            auto data = simulate_replicate(setting.n, setting.p, grid.off_diagonal, cont,
                                                           derive_seed(cell_seed, rep));
                            MethodOptions opt;
                            opt.alpha = alpha;
                            opt.k = grid.k;
                            opt.n_starts = grid.n_starts;
                            opt.seed = data.estimator_seed;
                            auto report = run_method(data.x, method, opt);
                            auto back = back_transform(report.estimate, data.g);
                            results[rep] = evaluate(back, Vector(setting.p, 0.0), Matrix::identity(setting.p),
                                                    grid.record_time ? report.elapsed_seconds : 0.0);
                        } catch (const error&) {
                        }
                    }
                });

                BenchmarkCell cell;
                cell.setting = setting;
                cell.contamination = cont;
                cell.method = method;
                cell.alpha = alpha;
                Vector e_mu, e_sigma, mse, kl, secs;
                for (const auto& r : results) {
                    if (!r) {
                        ++cell.failures;
                        continue;
                    }
                    e_mu.push_back(r->e_mu);
                    e_sigma.push_back(r->e_sigma);
                    mse.push_back(r->mse_single);
                    kl.push_back(r->kl);
                    secs.push_back(r->seconds);
                }
                cell.replicates = e_mu.size();
                cell.flagged = static_cast<double>(cell.failures) > 0.01 * static_cast<double>(S);
                cell.e_mu = detail::summarize(e_mu);
                cell.e_sigma = detail::summarize(e_sigma);
                cell.mse = detail::summarize(mse);
                cell.kl = detail::summarize(kl);
                cell.seconds = detail::summarize(secs);
                cells.push_back(cell);
                if (progress)
                    progress(cells.back(), cells.size(), total);
            }
        }
    }
    return cells;
}

/// CSV: setting,kind,epsilon,r,method,metric,mean,sd,replicates; one row per
/// (cell, metric). Metric "fail_rate" carries the failed-replicate fraction.
inline void write_benchmark_csv(std::ostream& os, const std::vector<BenchmarkCell>& cells, int decimals = 3)
{
    auto fixed = [&](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
        return std::string(buf);
    };
    auto compact = [](double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.6g", v);
        return std::string(buf);
    };
    os << "setting,kind,epsilon,r,method,metric,mean,sd,replicates\n";
    for (const auto& c : cells) {
        const std::string prefix = c.setting.name + "," + std::string(to_string(c.contamination.kind)) + "," +
                                   compact(c.contamination.epsilon) + "," + compact(c.contamination.r) + "," +
                                   std::string(to_string(c.method)) + ",";
        auto row = [&](std::string_view metric, const MetricSummary& s) {
            os << prefix << metric << ',' << fixed(s.mean) << ',' << fixed(s.sd) << ',' << c.replicates << '\n';
        };
        row("e_mu", c.e_mu);
        row("e_sigma", c.e_sigma);
        row("mse", c.mse);
        row("kl", c.kl);
        row("t", c.seconds);
        const double total = static_cast<double>(c.replicates + c.failures);
        row("fail_rate", {static_cast<double>(c.failures) / total, 0.0});
    }
}

} // namespace fdb

#endif
