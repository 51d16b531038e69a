#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "modcs/matrix.hpp"

namespace modcs {

// Relative tolerance below which a column-rank check fails: sigma_min <= tol * sigma_max.
inline constexpr double kRankTol = 1e-10;

/// All singular values of A, descending, via one-sided Jacobi on the columns.
inline std::vector<double> singular_values(const DenseMatrix& a) {
    if (!a.finite()) throw input_error("singular_values: non-finite entries");
    const std::size_t n = a.rows(), k = a.cols();
    if (k == 0) return {};
    // column-major working copy
    std::vector<double> u(n * k);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t r = 0; r < n; ++r) u[c * n + r] = a(r, c);

    const double eps = 1e-15;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                double* cp = u.data() + p * n;
                double* cq = u.data() + q * n;
                double app = 0, aqq = 0, apq = 0;
                for (std::size_t r = 0; r < n; ++r) {
                    app += cp[r] * cp[r];
                    aqq += cq[r] * cq[r];
                    apq += cp[r] * cq[r];
                }
                if (std::abs(apq) <= eps * std::sqrt(app * aqq) || apq == 0.0) continue;
                rotated = true;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t r = 0; r < n; ++r) {
                    const double vp = cp[r], vq = cq[r];
                    cp[r] = c * vp - s * vq;
                    cq[r] = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sv(k);
    for (std::size_t c = 0; c < k; ++c) {
        double s = 0;
        for (std::size_t r = 0; r < n; ++r) s += u[c * n + r] * u[c * n + r];
        sv[c] = std::sqrt(s);
    }
    std::sort(sv.rbegin(), sv.rend());
    return sv;
}

/// Smallest singular value; +inf for a 0-column matrix so empty-support
/// conditioning conditions hold vacuously.
inline double min_singular_value(const DenseMatrix& a) {
    if (a.cols() == 0) return std::numeric_limits<double>::infinity();
    if (!a.finite()) throw input_error("min_singular_value: non-finite entries");
    if (a.cols() > a.rows()) return 0.0; // rank <= rows < cols
    return singular_values(a).back();
}

/// Largest singular value (spectral norm); 0 for a 0-column matrix.
inline double operator_norm(const DenseMatrix& a) {
    if (a.cols() == 0) return 0.0;
    return singular_values(a).front();
}

namespace detail {

/// Householder QR of a tall matrix (n >= k). R is returned in the upper
/// triangle; the reflectors stay in the lower part with betas alongside.
struct QR {
    std::size_t n = 0, k = 0;
    std::vector<double> a;    // column-major n x k, factored in place
    std::vector<double> beta; // k reflector scales

    void factor(const DenseMatrix& m) {
        n = m.rows();
        k = m.cols();
        a.resize(n * k);
        beta.assign(k, 0.0);
        for (std::size_t c = 0; c < k; ++c)
            for (std::size_t r = 0; r < n; ++r) a[c * n + r] = m(r, c);
        for (std::size_t j = 0; j < k; ++j) {
            double* cj = a.data() + j * n;
            double sigma = 0;
            for (std::size_t r = j + 1; r < n; ++r) sigma += cj[r] * cj[r];
            const double alpha = cj[j];
            const double norm = std::sqrt(alpha * alpha + sigma);
            if (norm == 0.0 || (sigma == 0.0 && alpha > 0)) { beta[j] = 0.0; continue; }
            // v = x - norm*e1, computed without cancellation, then scaled to v_j = 1
            const double v0 = alpha <= 0 ? alpha - norm : -sigma / (alpha + norm);
            const double v0sq = v0 * v0;
            beta[j] = 2.0 * v0sq / (sigma + v0sq);
            for (std::size_t r = j + 1; r < n; ++r) cj[r] /= v0;
            // apply to trailing columns (v_j == 1 implied)
            for (std::size_t c = j + 1; c < k; ++c) {
                double* cc = a.data() + c * n;
                double s = cc[j];
                for (std::size_t r = j + 1; r < n; ++r) s += cj[r] * cc[r];
                s *= beta[j];
                cc[j] -= s;
                for (std::size_t r = j + 1; r < n; ++r) cc[r] -= s * cj[r];
            }
            cj[j] = norm; // R_jj
        }
    }

    // y <- Q' y (apply reflectors in order)
    void apply_qt(std::vector<double>& y) const {
        for (std::size_t j = 0; j < k; ++j) {
            if (beta[j] == 0.0) continue;
            const double* cj = a.data() + j * n;
            double s = y[j];
            for (std::size_t r = j + 1; r < n; ++r) s += cj[r] * y[r];
            s *= beta[j];
            y[j] -= s;
            for (std::size_t r = j + 1; r < n; ++r) y[r] -= s * cj[r];
        }
    }

    // solve R x = b for the leading k entries of b
    std::vector<double> solve_r(const std::vector<double>& b) const {
        std::vector<double> x(k);
        for (std::size_t jj = k; jj-- > 0;) {
            double s = b[jj];
            for (std::size_t c = jj + 1; c < k; ++c) s -= a[c * n + jj] * x[c];
            x[jj] = s / a[jj * n + jj];
        }
        return x;
    }

    double min_abs_diag() const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) m = std::min(m, std::abs(a[j * n + j]));
        return m;
    }
};

} // namespace detail

/// argmin_b ||y - A b||_2 for full-column-rank A, by Householder QR.
inline Vector least_squares(const DenseMatrix& a, const Vector& y) {
    const std::size_t n = a.rows(), k = a.cols();
    if (y.size() != n) throw input_error("least_squares: dimension mismatch");
    if (k == 0) return {};
    if (!a.finite() || !all_finite(y)) throw input_error("least_squares: non-finite input");
    if (k > n) throw singular_error("least_squares: more columns than rows");
    auto sv = singular_values(a);
    if (sv.back() <= kRankTol * sv.front())
        throw singular_error("least_squares: rank-deficient matrix");
    detail::QR qr;
    qr.factor(a);
    Vector z = y;
    qr.apply_qt(z);
    return qr.solve_r(z);
}

/// Cholesky factor (lower) of a symmetric positive definite matrix.
struct Cholesky {
    std::size_t n = 0;
    std::vector<double> l; // row-major lower triangle, full n x n storage

    void factor(const DenseMatrix& g) {
        n = g.rows();
        l.assign(n * n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = g(i, j);
                for (std::size_t p = 0; p < j; ++p) s -= l[i * n + p] * l[j * n + p];
                if (i == j) {
                    if (s <= 0.0) throw singular_error("Cholesky: matrix not positive definite");
                    l[i * n + i] = std::sqrt(s);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
    }

    // solve (L L') x = b
    Vector solve(const Vector& b) const {
        Vector x = b;
        for (std::size_t i = 0; i < n; ++i) {
            double s = x[i];
            for (std::size_t p = 0; p < i; ++p) s -= l[i * n + p] * x[p];
            x[i] = s / l[i * n + i];
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double s = x[ii];
            for (std::size_t p = ii + 1; p < n; ++p) s -= l[p * n + ii] * x[p];
            x[ii] = s / l[ii * n + ii];
        }
        return x;
    }
};

/// G = A' A (k x k Gram matrix).
inline DenseMatrix gram(const DenseMatrix& a) {
    const std::size_t n = a.rows(), k = a.cols();
    DenseMatrix g(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            double s = 0;
            for (std::size_t r = 0; r < n; ++r) s += a(r, i) * a(r, j);
            g(i, j) = s;
            g(j, i) = s;
        }
    return g;
}

/// G = A A' (n x n outer Gram matrix).
inline DenseMatrix outer_gram(const DenseMatrix& a) {
    const std::size_t n = a.rows(), k = a.cols();
    DenseMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double s = 0;
            for (std::size_t c = 0; c < k; ++c) s += a(i, c) * a(j, c);
            g(i, j) = s;
            g(j, i) = s;
        }
    return g;
}

} // namespace modcs
