#ifndef FDB_NUMERIC_HPP
#define FDB_NUMERIC_HPP

#include "fdb/error.hpp"
#include "fdb/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace fdb {

// ---------------------------------------------------------------------------
// Univariate statistics

/// Median of `values`, reordering them. Even lengths average the two middle
/// order statistics.
inline double median_inplace(std::span<double> values)
{
    if (values.empty())
        throw error(errc::empty_input, "median of an empty sequence");
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (n % 2 == 1)
        return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

inline double median(std::span<const double> values)
{
    std::vector<double> copy(values.begin(), values.end());
    return median_inplace(copy);
}

/// Median absolute deviation from the median (unscaled). Reorders `values`
/// and overwrites them with the absolute deviations.
inline double mad_inplace(std::span<double> values, double center)
{
    for (auto& v : values)
        v = std::abs(v - center);
    return median_inplace(values);
}

inline double mad(std::span<const double> values)
{
    std::vector<double> copy(values.begin(), values.end());
    const double center = median_inplace(copy);
    return mad_inplace(copy, center);
}

// ---------------------------------------------------------------------------
// Cholesky

/// Lower-triangular L with strictly positive diagonal such that L Lᵀ = A.
class CholeskyFactor {
public:
    CholeskyFactor() = default;

    std::size_t dim() const noexcept { return lower_.rows(); }
    const Matrix& lower() const noexcept { return lower_; }

    /// Solves L y = b in place.
    void forward_substitute(std::span<double> b) const noexcept
    {
        const std::size_t p = dim();
        for (std::size_t i = 0; i < p; ++i) {
            auto li = lower_.row(i);
            double s = b[i];
            for (std::size_t k = 0; k < i; ++k)
                s -= li[k] * b[k];
            b[i] = s / li[i];
        }
    }

    /// Solves Lᵀ x = y in place.
    void backward_substitute(std::span<double> y) const noexcept
    {
        const std::size_t p = dim();
        for (std::size_t ii = p; ii-- > 0;) {
            double s = y[ii];
            for (std::size_t k = ii + 1; k < p; ++k)
                s -= lower_(k, ii) * y[k];
            y[ii] = s / lower_(ii, ii);
        }
    }

    Matrix reconstruct() const { return lower_ * lower_.transpose(); }

private:
    explicit CholeskyFactor(Matrix lower) : lower_(std::move(lower)) {}
    friend CholeskyFactor cholesky(const Matrix& m);

    Matrix lower_;
};

/// Cholesky factorization of a symmetric matrix. A pivot at or below
/// p·ε·max|diag| raises NotPositiveDefinite carrying the pivot index.
inline CholeskyFactor cholesky(const Matrix& m)
{
    if (m.rows() != m.cols() || m.rows() == 0)
        throw error(errc::dimension_error, "cholesky needs a non-empty square matrix");
    const std::size_t p = m.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < p; ++i)
        max_diag = std::max(max_diag, std::abs(m(i, i)));
    const double threshold = static_cast<double>(p) * std::numeric_limits<double>::epsilon() * max_diag;

    Matrix l(p, p);
    for (std::size_t j = 0; j < p; ++j) {
        auto lj = l.row(j);
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k)
            d -= lj[k] * lj[k];
        if (!(d > threshold))
            throw error(errc::not_positive_definite,
                        "non-positive pivot " + std::to_string(d) + " at index " + std::to_string(j), j);
        const double djj = std::sqrt(d);
        lj[j] = djj;
        for (std::size_t i = j + 1; i < p; ++i) {
            auto li = l.row(i);
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k)
                s -= li[k] * lj[k];
            li[j] = s / djj;
        }
    }
    return CholeskyFactor(std::move(l));
}

inline double log_determinant(const CholeskyFactor& f) noexcept
{
    double s = 0.0;
    for (std::size_t i = 0; i < f.dim(); ++i)
        s += std::log(f.lower()(i, i));
    return 2.0 * s;
}

inline Vector solve_spd(const CholeskyFactor& f, std::span<const double> rhs)
{
    if (rhs.size() != f.dim())
        throw error(errc::dimension_error, "right-hand side length does not match factor dimension");
    Vector x(rhs.begin(), rhs.end());
    f.forward_substitute(x);
    f.backward_substitute(x);
    return x;
}

/// Inverse of L (lower triangular).
inline Matrix inverse_lower(const CholeskyFactor& f)
{
    const std::size_t p = f.dim();
    Matrix inv(p, p);
    Vector e(p);
    for (std::size_t j = 0; j < p; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        f.forward_substitute(e);
        for (std::size_t i = 0; i < p; ++i)
            inv(i, j) = e[i];
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Symmetric eigenproblem

struct EigenDecomposition {
    Vector values;  ///< descending
    Matrix vectors; ///< column k pairs with values[k]
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
inline EigenDecomposition eigen_symmetric(const Matrix& m, int max_sweeps = 100)
{
    if (m.rows() != m.cols())
        throw error(errc::dimension_error, "eigen_symmetric needs a square matrix");
    const std::size_t p = m.rows();
    Matrix a = m;
    Matrix v = Matrix::identity(p);

    bool converged = p <= 1;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j)
                off += std::abs(a(i, j));
        if (off == 0.0) {
            converged = true;
            break;
        }
        for (std::size_t ip = 0; ip + 1 < p; ++ip) {
            for (std::size_t iq = ip + 1; iq < p; ++iq) {
                const double apq = a(ip, iq);
                if (apq == 0.0)
                    continue;
                const double app = a(ip, ip);
                const double aqq = a(iq, iq);
                // Off-diagonal entry below the resolution of both diagonals: drop it.
                const double g = 100.0 * std::abs(apq);
                if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
                    a(ip, iq) = 0.0;
                    a(iq, ip) = 0.0;
                    continue;
                }
                const double theta = 0.5 * (aqq - app) / apq;
                double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                if (theta < 0.0)
                    t = -t;
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < p; ++k) {
                    const double akp = a(k, ip);
                    const double akq = a(k, iq);
                    a(k, ip) = c * akp - s * akq;
                    a(k, iq) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < p; ++k) {
                    const double apk = a(ip, k);
                    const double aqk = a(iq, k);
                    a(ip, k) = c * apk - s * aqk;
                    a(iq, k) = s * apk + c * aqk;
                }
                a(ip, iq) = 0.0;
                a(iq, ip) = 0.0;
                for (std::size_t k = 0; k < p; ++k) {
                    const double vkp = v(k, ip);
                    const double vkq = v(k, iq);
                    v(k, ip) = c * vkp - s * vkq;
                    v(k, iq) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = i + 1; j < p; ++j)
                off += std::abs(a(i, j));
        if (off != 0.0)
            throw error(errc::convergence_failure,
                        "Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) + " sweeps");
    }

    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    EigenDecomposition out{Vector(p), Matrix(p, p)};
    for (std::size_t k = 0; k < p; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < p; ++i)
            out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

inline double condition_number(const Matrix& m)
{
    const auto eig = eigen_symmetric(m);
    const double lo = eig.values.back();
    if (!(lo > 0.0))
        throw error(errc::not_positive_definite, "smallest eigenvalue is not positive");
    return eig.values.front() / lo;
}

} // namespace fdb

#endif
