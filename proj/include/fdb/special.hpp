#ifndef FDB_SPECIAL_HPP
#define FDB_SPECIAL_HPP

#include "fdb/error.hpp"

#include <cmath>
#include <limits>

namespace fdb {

namespace detail {

inline double gamma_log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

// P(a, x) by its power series; converges quickly for x < a + 1.
inline double gamma_p_series(double a, double x)
{
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17)
            break;
    }
    return sum * std::exp(gamma_log_prefactor(a, x));
}

// Q(a, x) by the modified-Lentz continued fraction; used for x >= a + 1.
inline double gamma_q_continued_fraction(double a, double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-17)
            break;
    }
    return std::exp(gamma_log_prefactor(a, x)) * h;
}

// Acklam's rational approximation; only used as a starting point.
inline double normal_quantile_approx(double p)
{
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double plow = 0.02425;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

} // namespace detail

/// Regularized lower incomplete gamma function P(a, x).
inline double regularized_gamma_p(double a, double x)
{
    if (!(a > 0.0) || x < 0.0)
        throw error(errc::domain_error, "regularized_gamma_p needs a > 0 and x >= 0");
    if (x == 0.0)
        return 0.0;
    if (x < a + 1.0)
        return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_continued_fraction(a, x);
}

inline double chi_square_cdf(double dof, double x) { return x <= 0.0 ? 0.0 : regularized_gamma_p(0.5 * dof, 0.5 * x); }

inline double chi_square_pdf(double dof, double x)
{
    if (x <= 0.0)
        return 0.0;
    const double k = 0.5 * dof;
    return std::exp((k - 1.0) * std::log(x) - 0.5 * x - k * std::log(2.0) - std::lgamma(k));
}

/// x with P(dof/2, x/2) = prob. Newton's method on the CDF from a
/// Wilson-Hilferty start, falling back to bisection whenever a Newton step
/// leaves the current bracket.
inline double chi_square_quantile(unsigned dof, double prob)
{
    if (dof == 0)
        throw error(errc::domain_error, "chi-square degrees of freedom must be positive");
    if (!(prob > 0.0 && prob < 1.0))
        throw error(errc::domain_error, "chi-square quantile probability must lie in (0, 1)");
    const double k = dof;

    double lo = 0.0;
    double hi = k + 10.0 * std::sqrt(2.0 * k) + 40.0;
    while (chi_square_cdf(k, hi) < prob)
        hi *= 2.0;

    const double z = detail::normal_quantile_approx(prob);
    const double wh = 2.0 / (9.0 * k);
    double x = k * std::pow(std::max(1.0 - wh + z * std::sqrt(wh), 0.0), 3.0);
    if (!(x > lo && x < hi))
        x = 0.5 * (lo + hi);

    for (int iter = 0; iter < 500; ++iter) {
        const double f = chi_square_cdf(k, x) - prob;
        if (f == 0.0)
            return x;
        if (f < 0.0)
            lo = x;
        else
            hi = x;
        const double slope = chi_square_pdf(k, x);
        double next = slope > 0.0 ? x - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
            next = 0.5 * (lo + hi);
        if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x) ||
            hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, x))
            return next;
        x = next;
    }
    return x;
}

/// Standard normal quantile, via z_p² = χ²₁ quantile at 2p − 1.
inline double normal_quantile(double prob)
{
    if (!(prob > 0.0 && prob < 1.0))
        throw error(errc::domain_error, "normal quantile probability must lie in (0, 1)");
    if (prob == 0.5)
        return 0.0;
    const double tail = prob > 0.5 ? 2.0 * prob - 1.0 : 1.0 - 2.0 * prob;
    const double magnitude = std::sqrt(chi_square_quantile(1, tail));
    return prob > 0.5 ? magnitude : -magnitude;
}

} // namespace fdb

#endif
