#pragma once

#include <cmath>
#include <cstdint>

#include "modcs/matrix.hpp"
#include "modcs/rng.hpp"

namespace modcs {

/// Per-entry uniform(-c_t, c_t) measurement noise.
struct NoiseSpec {
    double c_t = 0.0;

    explicit NoiseSpec(double c) : c_t(c) {
        if (!(c >= 0.0)) throw input_error("NoiseSpec: half-width must be >= 0");
    }

    /// Worst-case l2 bound for an n-entry draw: every true signal stays
    /// feasible for the epsilon-ball data constraint.
    double epsilon(std::size_t n) const { return c_t * std::sqrt(static_cast<double>(n)); }
};

/// One time step of measurements: y = A x + w with ||w|| <= epsilon.
struct MeasurementFrame {
    std::size_t t = 0;
    Vector y;
    double epsilon = 0.0;

    std::size_t n() const { return y.size(); }
};

/// Zero-mean Gaussian n x m matrix with columns normalized to unit norm.
inline DenseMatrix gen_gaussian_unit_columns(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (n == 0 || m == 0) throw input_error("gen_gaussian_unit_columns: empty shape");
    Rng rng(seed);
    DenseMatrix a(n, m);
    for (std::size_t c = 0; c < m; ++c) {
        double ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double g = rng.gaussian();
            a(r, c) = g;
            ss += g * g;
        }
        while (ss == 0.0) { // zero column: measure-zero, redraw entry 0
            const double g = rng.gaussian();
            a(0, c) = g;
            ss = g * g;
        }
        const double inv = 1.0 / std::sqrt(ss);
        for (std::size_t r = 0; r < n; ++r) a(r, c) *= inv;
    }
    return a;
}

inline Vector gen_bounded_uniform_noise(std::size_t n, const NoiseSpec& spec, std::uint64_t seed) {
    if (n == 0) throw input_error("gen_bounded_uniform_noise: n must be >= 1");
    Rng rng(seed);
    Vector w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = rng.uniform(-spec.c_t, spec.c_t);
    return w;
}

/// y_t = A_t x_t + w_t. epsilon is the worst-case bound c*sqrt(n) of the spec
/// that generated w, so the frame invariant ||w|| <= epsilon always holds.
inline MeasurementFrame measure(const DenseMatrix& a, const Vector& x, const Vector& w,
                                const NoiseSpec& spec, std::size_t t) {
    if (x.size() != a.cols() || w.size() != a.rows())
        throw input_error("measure: dimension mismatch");
    MeasurementFrame f;
    f.t = t;
    f.y = a.mul(x);
    for (std::size_t i = 0; i < w.size(); ++i) f.y[i] += w[i];
    f.epsilon = spec.epsilon(a.rows());
    if (norm2(w) > f.epsilon + 1e-12)
        throw input_error("measure: noise exceeds its declared bound");
    return f;
}

} // namespace modcs
