// Shared fixtures and independent reference computations for the test suites.
// Nothing here calls into the routine it is used to check.
#ifndef FDB_TESTS_SUPPORT_HPP
#define FDB_TESTS_SUPPORT_HPP

#include "fdb/fdb.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace fdb::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng)
{
    return standard_normal_matrix(rows, cols, rng);
}

/// AᵀA + I with A standard normal.
inline Matrix random_spd(std::size_t p, Rng& rng)
{
    const Matrix a = random_matrix(p, p, rng);
    return symmetrize(a.transpose() * a + Matrix::identity(p));
}

inline Matrix random_symmetric(std::size_t p, Rng& rng)
{
    Matrix a = random_matrix(p, p, rng);
    return symmetrize(a + a.transpose());
}

/// Random orthogonal matrix from Gram-Schmidt on a Gaussian matrix.
inline Matrix random_orthogonal(std::size_t p, Rng& rng)
{
    Matrix a = random_matrix(p, p, rng);
    Matrix q(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        Vector v = a.column(j);
        for (std::size_t k = 0; k < j; ++k) {
            double d = 0.0;
            for (std::size_t i = 0; i < p; ++i)
                d += v[i] * q(i, k);
            for (std::size_t i = 0; i < p; ++i)
                v[i] -= d * q(i, k);
        }
        const double len = norm2(v);
        for (std::size_t i = 0; i < p; ++i)
            q(i, j) = v[i] / len;
    }
    return q;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k)
        m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
    return m;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

/// Determinant by cofactor expansion along the first row.
inline double cofactor_determinant(const Matrix& m)
{
    const std::size_t n = m.rows();
    if (n == 1)
        return m(0, 0);
    double det = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        Matrix minor(n - 1, n - 1);
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0, jj = 0; j < n; ++j)
                if (j != c)
                    minor(i - 1, jj++) = m(i, j);
        det += (c % 2 == 0 ? 1.0 : -1.0) * m(0, c) * cofactor_determinant(minor);
    }
    return det;
}

/// Inverse by Gauss-Jordan elimination with partial pivoting.
inline Matrix explicit_inverse(const Matrix& m)
{
    const std::size_t n = m.rows();
    Matrix a = m;
    Matrix inv = Matrix::identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a(r, c)) > std::abs(a(piv, c)))
                piv = r;
        for (std::size_t j = 0; j < n; ++j) {
            std::swap(a(c, j), a(piv, j));
            std::swap(inv(c, j), inv(piv, j));
        }
        const double d = a(c, c);
        for (std::size_t j = 0; j < n; ++j) {
            a(c, j) /= d;
            inv(c, j) /= d;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c)
                continue;
            const double f = a(r, c);
            for (std::size_t j = 0; j < n; ++j) {
                a(r, j) -= f * a(c, j);
                inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

/// (x − μ)ᵀ Σ⁻¹ (x − μ) with an explicitly inverted Σ.
inline double explicit_mahalanobis_sq(std::span<const double> x, std::span<const double> mu, const Matrix& inverse)
{
    const std::size_t p = x.size();
    double s = 0.0;
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j)
            s += (x[i] - mu[i]) * inverse(i, j) * (x[j] - mu[j]);
    return s;
}

/// Textbook two-pass mean and covariance over selected rows.
inline LocationScatter direct_mean_cov(const DataMatrix& data, const std::vector<std::size_t>& rows, double divisor)
{
    const std::size_t p = data.p();
    LocationScatter out{Vector(p, 0.0), Matrix(p, p), Provenance::oracle};
    for (auto i : rows)
        for (std::size_t j = 0; j < p; ++j)
            out.mu[j] += data(i, j);
    for (auto& v : out.mu)
        v /= static_cast<double>(rows.size());
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < p; ++b) {
            double s = 0.0;
            for (auto i : rows)
                s += (data(i, a) - out.mu[a]) * (data(i, b) - out.mu[b]);
            out.sigma(a, b) = s / divisor;
        }
    return out;
}

// ---------------------------------------------------------------------------
// Chi-square quantile reference: adaptive Simpson integration of the density
// followed by bisection on the resulting CDF.

namespace detail {

inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                           double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol)
{
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, 60);
}

/// χ²_dof CDF, integrated in t = √x so the integrand is smooth at the origin
/// for every dof ≥ 1: F(x) = ∫₀^√x 2t·f(t²) dt.
inline double quadrature_chi_square_cdf(unsigned dof, double x)
{
    if (x <= 0.0)
        return 0.0;
    const double k = static_cast<double>(dof);
    const double log_norm = -0.5 * k * std::log(2.0) - std::lgamma(0.5 * k);
    const double mode = std::sqrt(std::max(k - 1.0, 0.0));
    // With u = t/mode the exponent is (k−1)(log u − (u² − 1)/2) + const; summing
    // the large raw terms instead leaves noise that stalls the adaptive refinement.
    const double peak = dof == 1 ? log_norm : log_norm + (k - 1.0) * (std::log(mode) - 0.5);
    auto integrand = [&](double t) {
        if (t <= 0.0)
            return dof == 1 ? 2.0 * std::exp(log_norm) : 0.0;
        if (dof == 1)
            return 2.0 * std::exp(log_norm - 0.5 * t * t);
        const double e = t / mode - 1.0;
        return 2.0 * std::exp(peak + (k - 1.0) * (std::log1p(e) - e - 0.5 * e * e));
    };
    // Split at the mode of the integrand so the peak is resolved for large dof.
    const double upper = std::sqrt(x);
    if (mode > 0.0 && mode < upper)
        return adaptive_simpson(integrand, 0.0, mode, 1e-15) + adaptive_simpson(integrand, mode, upper, 1e-15);
    return adaptive_simpson(integrand, 0.0, upper, 1e-15);
}

inline double bisection_chi_square_quantile(unsigned dof, double prob)
{
    const double k = static_cast<double>(dof);
    double lo = 0.0;
    double hi = k + 20.0 * std::sqrt(2.0 * k) + 50.0;
    while (hi - lo > 1e-11 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        (quadrature_chi_square_cdf(dof, mid) < prob ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Small fixtures

/// Ten points in a tight planar cluster plus two distant points (indices 10, 11).
inline DataMatrix twelve_point_instance()
{
    return DataMatrix{{0.0, 0.0},  {0.5, 0.1},  {-0.4, 0.3}, {0.2, -0.5}, {-0.3, -0.2}, {0.6, 0.4},
                      {-0.1, 0.7}, {0.3, 0.2},  {-0.6, -0.1}, {0.1, -0.3}, {8.0, 9.0},  {-7.0, 10.0}};
}

/// Least-squares slope of log(y) on log(x).
inline double log_log_slope(std::span<const double> x, std::span<const double> y)
{
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Fraction of consecutive pairs, in increasing order of `reference`, that
/// `candidate` also orders non-decreasingly.
inline double adjacent_pair_agreement(std::span<const double> candidate, std::span<const double> reference)
{
    std::vector<std::size_t> order(reference.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return reference[a] < reference[b]; });
    std::size_t agree = 0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i)
        agree += candidate[order[i]] <= candidate[order[i + 1]] ? 1 : 0;
    return static_cast<double>(agree) / static_cast<double>(order.size() - 1);
}

} // namespace fdb::test

#endif
