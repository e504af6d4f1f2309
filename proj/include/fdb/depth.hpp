#ifndef FDB_DEPTH_HPP
#define FDB_DEPTH_HPP

#include "fdb/error.hpp"
#include "fdb/matrix.hpp"
#include "fdb/numeric.hpp"
#include "fdb/parallel.hpp"
#include "fdb/random.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace fdb {

enum class DepthKind { projection, l2 };

/// Per-sample depth values, each in (0, 1].
struct DepthVector {
    Vector values;

    std::size_t size() const noexcept { return values.size(); }
    double operator[](std::size_t i) const noexcept { return values[i]; }
};

/// k unit directions in R^p, stored as the rows of a k×p matrix.
struct DirectionSet {
    Matrix directions;
    std::uint64_t seed = 0;

    std::size_t k() const noexcept { return directions.rows(); }
    std::size_t p() const noexcept { return directions.cols(); }
};

/// Sorted, duplicate-free sample indices.
class SubsetIndices {
public:
    SubsetIndices() = default;
    explicit SubsetIndices(std::vector<std::size_t> indices) : indices_(std::move(indices))
    {
        std::sort(indices_.begin(), indices_.end());
        if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
            throw error(errc::invalid_subset_size, "subset indices must be distinct");
    }

    std::size_t size() const noexcept { return indices_.size(); }
    const std::vector<std::size_t>& indices() const noexcept { return indices_; }
    auto begin() const noexcept { return indices_.begin(); }
    auto end() const noexcept { return indices_.end(); }
    std::size_t operator[](std::size_t i) const noexcept { return indices_[i]; }

    friend bool operator==(const SubsetIndices&, const SubsetIndices&) = default;

private:
    std::vector<std::size_t> indices_;
};

/// Direction count used when none is configured: max(1000, 10p).
constexpr std::size_t default_direction_count(std::size_t p) noexcept { return std::max<std::size_t>(1000, 10 * p); }

/// k directions drawn as normalized standard-normal vectors.
inline DirectionSet sample_directions(std::size_t p, std::size_t k, std::uint64_t seed)
{
    if (k == 0 || p == 0)
        throw error(errc::domain_error, "direction set needs k >= 1 and p >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    DirectionSet set{Matrix(k, p), seed};
    for (std::size_t d = 0; d < k; ++d) {
        auto u = set.directions.row(d);
        double len = 0.0;
        while (!(len > 0.0) || !std::isfinite(len)) {
            for (auto& v : u)
                v = normal(rng);
            len = norm2(u);
        }
        for (auto& v : u)
            v /= len;
    }
    return set;
}

/// Approximate projection depth over the given directions. Directions along
/// which the projected MAD is zero are skipped.
inline DepthVector projection_depth(const DataMatrix& data, const DirectionSet& dirs, std::size_t threads = 1)
{
    if (dirs.p() != data.p())
        throw error(errc::dimension_error, "direction dimension does not match data dimension");
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    const std::size_t k = dirs.k();
    threads = std::max<std::size_t>(1, std::min(threads, k));

    std::vector<Vector> chunk_max(threads, Vector(n, 0.0));
    std::vector<std::size_t> chunk_usable(threads, 0);

    parallel_for(k, threads, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        Vector proj(n), scratch(n);
        auto& outlying = chunk_max[chunk];
        for (std::size_t d = begin; d < end; ++d) {
            const auto u = dirs.directions.row(d);
            for (std::size_t i = 0; i < n; ++i) {
                const auto x = data.row(i);
                double s = 0.0;
                for (std::size_t j = 0; j < p; ++j)
                    s += x[j] * u[j];
                proj[i] = s;
            }
            std::copy(proj.begin(), proj.end(), scratch.begin());
            const double center = median_inplace(scratch);
            const double spread = mad_inplace(scratch, center);
            if (!(spread > 0.0))
                continue;
            ++chunk_usable[chunk];
            const double inv = 1.0 / spread;
            for (std::size_t i = 0; i < n; ++i)
                outlying[i] = std::max(outlying[i], std::abs(proj[i] - center) * inv);
        }
    });

    std::size_t usable = 0;
    for (auto u : chunk_usable)
        usable += u;
    if (usable == 0)
        throw error(errc::degenerate_data, "every projection direction has zero MAD");

    DepthVector out{Vector(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        double o = 0.0;
        for (const auto& c : chunk_max)
            o = std::max(o, c[i]);
        out.values[i] = 1.0 / (1.0 + o);
    }
    return out;
}

/// Exact sample L2 depth: (1 + mean_j ‖x_j − x_i‖)⁻¹.
inline DepthVector l2_depth(const DataMatrix& data, std::size_t threads = 1)
{
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    DepthVector out{Vector(n)};
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto xi = data.row(i);
            double total = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                const auto xj = data.row(j);
                double s = 0.0;
                for (std::size_t c = 0; c < p; ++c) {
                    const double diff = xj[c] - xi[c];
                    s += diff * diff;
                }
                total += std::sqrt(s);
            }
            out.values[i] = 1.0 / (1.0 + total / static_cast<double>(n));
        }
    });
    return out;
}

/// Indices of the h largest depths; ties at the boundary go to the lower index.
inline SubsetIndices deepest_subset(const DepthVector& depths, std::size_t h, std::size_t p)
{
    const std::size_t n = depths.size();
    if (h <= p || h > n)
        throw error(errc::invalid_subset_size,
                    "subset size h=" + std::to_string(h) + " must satisfy p=" + std::to_string(p) +
                        " < h <= n=" + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return depths.values[a] > depths.values[b]; });
    order.resize(h);
    return SubsetIndices(std::move(order));
}

} // namespace fdb

#endif
