#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "modcs/errors.hpp"
#include "modcs/index_set.hpp"

namespace modcs {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

inline double norm1(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

inline double norm_inf(const Vector& v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

inline bool all_finite(const Vector& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

/// Dense row-major matrix. Zero columns are allowed (empty support selections).
class DenseMatrix {
public:
    DenseMatrix() : rows_(0), cols_(0) {}
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }

    const std::vector<double>& data() const { return a_; }
    std::vector<double>& data() { return a_; }

    bool finite() const {
        for (double x : a_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    Vector column(std::size_t c) const {
        Vector v(rows_);
        for (std::size_t r = 0; r < rows_; ++r) v[r] = a_[r * cols_ + c];
        return v;
    }

    /// y = A x
    Vector mul(const Vector& x) const {
        if (x.size() != cols_) throw input_error("DenseMatrix::mul: dimension mismatch");
        Vector y(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            const double* row = a_.data() + r * cols_;
            double s = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) s += row[c] * x[c];
            y[r] = s;
        }
        return y;
    }

    /// y = A' x
    Vector tmul(const Vector& x) const {
        if (x.size() != rows_) throw input_error("DenseMatrix::tmul: dimension mismatch");
        Vector y(cols_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            const double* row = a_.data() + r * cols_;
            const double xr = x[r];
            for (std::size_t c = 0; c < cols_; ++c) y[c] += row[c] * xr;
        }
        return y;
    }

    DenseMatrix transposed() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> a_;
};

/// A_T: sub-matrix of the columns listed in T, in T's order.
inline DenseMatrix columns(const DenseMatrix& a, const IndexSet& t) {
    if (!t.empty() && t.max_index() >= a.cols())
        throw input_error("columns: index out of range");
    DenseMatrix s(a.rows(), t.size());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t k = 0; k < t.size(); ++k) s(r, k) = a(r, t[k]);
    return s;
}

/// v_T: sub-vector of the entries listed in T.
inline Vector subvector(const Vector& v, const IndexSet& t) {
    Vector s(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (t[k] >= v.size()) throw input_error("subvector: index out of range");
        s[k] = v[t[k]];
    }
    return s;
}

/// Support of v at a strict threshold: {i : |v_i| > alpha}.
inline IndexSet support_above(const Vector& v, double alpha) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > alpha) idx.push_back(i);
    return IndexSet(std::move(idx));
}

inline IndexSet support_of(const Vector& v) { return support_above(v, 0.0); }

} // namespace modcs
