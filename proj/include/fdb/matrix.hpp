#ifndef FDB_MATRIX_HPP
#define FDB_MATRIX_HPP

#include "fdb/error.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace fdb {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {
    }
    Matrix(std::initializer_list<std::initializer_list<double>> init)
        : rows_(init.size()), cols_(init.size() ? init.begin()->size() : 0)
    {
        data_.reserve(rows_ * cols_);
        for (const auto& r : init) {
            if (r.size() != cols_)
                throw error(errc::dimension_error, "ragged matrix initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n)
    {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i)
            m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(std::span<const double> d)
    {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i)
            m(i, i) = d[i];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept
    {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const noexcept
    {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }

    Vector column(std::size_t j) const
    {
        Vector c(rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            c[i] = (*this)(i, j);
        return c;
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    Matrix transpose() const
    {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j)
                t(j, i) = (*this)(i, j);
        return t;
    }

    Matrix& operator+=(const Matrix& o)
    {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o)
    {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k)
            data_[k] -= o.data_[k];
        return *this;
    }
    Matrix& operator*=(double s) noexcept
    {
        for (auto& v : data_)
            v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(Matrix a, double s) { return a *= s; }
    friend Matrix operator*(double s, Matrix a) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b)
    {
        if (a.cols_ != b.rows_)
            throw error(errc::dimension_error, "matrix product shape mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            auto ci = c.row(i);
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                if (aik == 0.0)
                    continue;
                auto bk = b.row(k);
                for (std::size_t j = 0; j < b.cols_; ++j)
                    ci[j] += aik * bk[j];
            }
        }
        return c;
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    void check_same_shape(const Matrix& o) const
    {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw error(errc::dimension_error, "matrix shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Vector operator*(const Matrix& a, std::span<const double> x)
{
    if (a.cols() != x.size())
        throw error(errc::dimension_error, "matrix-vector shape mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto r = a.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j)
            s += r[j] * x[j];
        y[i] = s;
    }
    return y;
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) noexcept { return std::sqrt(dot(a, a)); }

inline double frobenius_norm(const Matrix& m) noexcept { return norm2(m.data()); }

inline double trace(const Matrix& m) noexcept
{
    double s = 0.0;
    for (std::size_t i = 0; i < std::min(m.rows(), m.cols()); ++i)
        s += m(i, i);
    return s;
}

inline bool is_symmetric(const Matrix& m) noexcept
{
    if (m.rows() != m.cols())
        return false;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j)
            if (m(i, j) != m(j, i))
                return false;
    return true;
}

inline bool all_finite(const Matrix& m) noexcept
{
    return std::all_of(m.data().begin(), m.data().end(), [](double v) { return std::isfinite(v); });
}

/// Averages m and mᵀ so that the result is symmetric bit-for-bit.
inline Matrix symmetrize(Matrix m)
{
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = i + 1; j < m.cols(); ++j) {
            const double v = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = v;
            m(j, i) = v;
        }
    return m;
}

/// n×p sample matrix; rows are observations. Finite entries only.
class DataMatrix {
public:
    DataMatrix() = default;
    explicit DataMatrix(Matrix values) : values_(std::move(values))
    {
        if (values_.rows() == 0 || values_.cols() == 0)
            throw error(errc::empty_input, "data matrix must have at least one row and one column");
        if (!all_finite(values_))
            throw error(errc::domain_error, "data matrix contains non-finite entries");
    }
    DataMatrix(std::initializer_list<std::initializer_list<double>> init) : DataMatrix(Matrix(init)) {}

    std::size_t n() const noexcept { return values_.rows(); }
    std::size_t p() const noexcept { return values_.cols(); }
    std::span<const double> row(std::size_t i) const noexcept { return values_.row(i); }
    const Matrix& matrix() const noexcept { return values_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }

private:
    Matrix values_;
};

/// Returns data with rows reordered so that row i of the result is row perm[i] of the input.
inline DataMatrix permute_rows(const DataMatrix& data, std::span<const std::size_t> perm)
{
    Matrix out(data.n(), data.p());
    for (std::size_t i = 0; i < perm.size(); ++i)
        std::copy(data.row(perm[i]).begin(), data.row(perm[i]).end(), out.row(i).begin());
    return DataMatrix(std::move(out));
}

/// Applies x ↦ A x + shift to each row, i.e. X Aᵀ + 1 shiftᵀ.
inline DataMatrix transform_rows(const DataMatrix& data, const Matrix& a, std::span<const double> shift)
{
    if (a.cols() != data.p() || shift.size() != a.rows())
        throw error(errc::dimension_error, "transform shape mismatch");
    Matrix out(data.n(), a.rows());
    for (std::size_t i = 0; i < data.n(); ++i) {
        auto y = a * data.row(i);
        for (std::size_t j = 0; j < y.size(); ++j)
            out(i, j) = y[j] + shift[j];
    }
    return DataMatrix(std::move(out));
}

} // namespace fdb

#endif
