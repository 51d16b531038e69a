#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "modcs/linalg.hpp"
#include "modcs/matrix.hpp"

namespace modcs {

/// min ||beta_{T^c}||_1  s.t.  ||y - A beta|| <= epsilon.
/// T carries weight zero (the predicted support); T = empty is plain noisy l1.
struct WeightedL1Problem {
    const DenseMatrix* a = nullptr;
    Vector y;
    double epsilon = 0.0;
    IndexSet t;
};

struct SolverConfig {
    std::size_t max_iterations = 5000;
    double primal_tol = 1e-7;
    double dual_tol = 1e-7;
    double penalty = 1.0; // scaled internally by ||A'y||_inf
};

struct SolverResult {
    Vector beta;
    std::size_t iterations = 0;
    double feasibility_slack = 0.0; // epsilon - ||y - A beta||
    double objective = 0.0;         // ||beta_{T^c}||_1
    bool converged = false;
};

struct CertReport {
    bool pass = false;
    bool feasible = false;
    bool gradient_zero_on_t = false;
    bool multiplier_exists = false;
    double residual_norm = 0.0;
    double objective = 0.0;
    double multiplier_lo = 0.0;
    double multiplier_hi = 0.0;
};

namespace detail {

inline double soft(double v, double thr) {
    if (v > thr) return v - thr;
    if (v < -thr) return v + thr;
    return 0.0;
}

// CG on the normal equations, used only to test whether y is reachable from
// range(A) when epsilon = 0.
inline double range_residual_norm(const DenseMatrix& a, const Vector& y) {
    const std::size_t m = a.cols();
    Vector x(m, 0.0);
    Vector r = y;                 // y - A x
    Vector g = a.tmul(r);         // gradient of 1/2||y-Ax||^2 (negated)
    Vector d = g;
    double gg = dot(g, g);
    const double stop = 1e-24 * std::max(1.0, dot(y, y));
    for (std::size_t it = 0; it < 4 * m + 16 && gg > stop; ++it) {
        Vector ad = a.mul(d);
        const double dd = dot(ad, ad);
        if (dd == 0.0) break;
        const double step = gg / dd;
        for (std::size_t i = 0; i < m; ++i) x[i] += step * d[i];
        for (std::size_t i = 0; i < r.size(); ++i) r[i] -= step * ad[i];
        Vector g_new = a.tmul(r);
        const double gg_new = dot(g_new, g_new);
        const double ratio = gg_new / gg;
        for (std::size_t i = 0; i < m; ++i) d[i] = g_new[i] + ratio * d[i];
        g = std::move(g_new);
        gg = gg_new;
    }
    return norm2(r);
}

} // namespace detail

/// ADMM solver for the epsilon-ball weighted-l1 program. The beta-step system
/// (I + A'A) is penalty-free, so it is factored once per matrix and reused
/// across solves; for n < m the (I + AA')^{-1} form is used instead.
class Wl1Solver {
public:
    explicit Wl1Solver(const DenseMatrix& a) : a_(a) {
        const std::size_t n = a.rows(), m = a.cols();
        woodbury_ = n < m;
        DenseMatrix g = woodbury_ ? outer_gram(a) : gram(a);
        for (std::size_t i = 0; i < g.rows(); ++i) g(i, i) += 1.0;
        chol_.factor(g);
    }

    const DenseMatrix& matrix() const { return a_; }

    SolverResult solve(const Vector& y, double epsilon, const IndexSet& t,
                       const SolverConfig& cfg = {}) const {
        const std::size_t n = a_.rows(), m = a_.cols();
        if (y.size() != n) throw input_error("Wl1Solver: y has wrong length");
        if (!(epsilon >= 0.0)) throw input_error("Wl1Solver: epsilon must be >= 0");
        if (!t.empty() && t.max_index() >= m) throw input_error("Wl1Solver: T index out of range");

        SolverResult res;
        res.beta.assign(m, 0.0);

        const double ynorm = norm2(y);
        if (ynorm <= epsilon) { // zero is feasible, objective 0 is optimal
            res.converged = true;
            res.feasibility_slack = epsilon - ynorm;
            return res;
        }
        if (epsilon == 0.0) {
            const double unreachable = detail::range_residual_norm(a_, y);
            if (unreachable > 1e-9 * std::max(1.0, ynorm))
                throw infeasible_error("Wl1Solver: y is not in range(A) and epsilon = 0");
        }

        // zero-objective shortcut: if the LS fit on T alone already satisfies
        // the data constraint (up to roundoff), that point is a global optimum
        if (!t.empty() && t.size() <= n) {
            const double fit_tol = epsilon + 1e-12 * std::max(1.0, ynorm);
            if (auto beta_t = try_ls_fit(y, t); beta_t && norm2_residual(*beta_t, y) <= fit_tol) {
                res.beta = std::move(*beta_t);
                res.converged = true;
                res.feasibility_slack = epsilon - norm2_residual(res.beta, y);
                res.objective = 0.0;
                return res;
            }
        }

        std::vector<char> weighted(m, 1);
        for (std::size_t i : t) weighted[i] = 0;

        const double scale = std::max(norm_inf(a_.tmul(y)), 1e-12);
        const double rho = cfg.penalty / scale;

        Vector beta(m, 0.0), z(m, 0.0), u(n, 0.0), p(m, 0.0), q(n, 0.0);
        Vector abeta(n, 0.0);
        const double relax = 1.6;

        std::size_t it = 0;
        bool converged = false;
        for (; it < cfg.max_iterations; ++it) {
            // beta-step: (I + A'A) beta = (z - p) + A'(y - u + q)
            Vector w(n);
            for (std::size_t i = 0; i < n; ++i) w[i] = y[i] - u[i] + q[i];
            Vector rhs = a_.tmul(w);
            for (std::size_t i = 0; i < m; ++i) rhs[i] += z[i] - p[i];
            beta = apply_inverse(rhs);
            abeta = a_.mul(beta);

            // relaxed copies of the two constraint residual anchors
            Vector z_old_diff = z; // keep for dual residual
            Vector u_old = u;

            Vector h(m);
            for (std::size_t i = 0; i < m; ++i) h[i] = relax * beta[i] + (1.0 - relax) * z[i];
            Vector g(n);
            for (std::size_t i = 0; i < n; ++i)
                g[i] = relax * (y[i] - abeta[i]) + (1.0 - relax) * u[i];

            // z-step: prox of (1/rho)|.|_1 on weighted coordinates
            const double thr = 1.0 / rho;
            for (std::size_t i = 0; i < m; ++i) {
                const double v = h[i] + p[i];
                z[i] = weighted[i] ? detail::soft(v, thr) : v;
            }
            // u-step: projection onto the epsilon ball
            double gq_norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                u[i] = g[i] + q[i];
                gq_norm += u[i] * u[i];
            }
            gq_norm = std::sqrt(gq_norm);
            if (gq_norm > epsilon) {
                const double sc = epsilon > 0.0 ? epsilon / gq_norm : 0.0;
                for (std::size_t i = 0; i < n; ++i) u[i] *= sc;
            }
            // scaled dual updates
            for (std::size_t i = 0; i < m; ++i) p[i] += h[i] - z[i];
            for (std::size_t i = 0; i < n; ++i) q[i] += g[i] - u[i];

            if (it % 5 == 4 || it + 1 == cfg.max_iterations) {
                double pr = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double d = beta[i] - z[i];
                    pr += d * d;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = y[i] - abeta[i] - u[i];
                    pr += d * d;
                }
                pr = std::sqrt(pr);
                Vector du(n);
                for (std::size_t i = 0; i < n; ++i) du[i] = u[i] - u_old[i];
                Vector atdu = a_.tmul(du);
                double ds = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double d = rho * ((z[i] - z_old_diff[i]) - atdu[i]);
                    ds += d * d;
                }
                ds = std::sqrt(ds);

                const double pri_ref = std::max({1e-12, norm2(beta), norm2(z), ynorm});
                // dual reference floored by the primal scale: at degenerate
                // optima (zero objective) the multipliers vanish and a purely
                // relative dual test could never fire
                const double dua_ref =
                    std::max({1e-12, rho * std::sqrt(dot(p, p) + dot(q, q)), pri_ref});
                if (pr <= cfg.primal_tol * pri_ref && ds <= cfg.dual_tol * dua_ref) {
                    converged = true;
                    ++it;
                    break;
                }
            }
        }

        res.beta = std::move(beta);
        res.iterations = it;
        res.converged = converged;
        const double rn = norm2_residual(res.beta, y);
        res.feasibility_slack = epsilon - rn;
        res.objective = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            if (weighted[i]) res.objective += std::abs(res.beta[i]);

        // epsilon = 0 polish: the optimum is a basic solution, so refit LS on
        // the top-k magnitude supports of the (exactly sparse) z iterate and
        // keep the best exactly-interpolating candidate
        if (epsilon == 0.0) {
            std::vector<std::size_t> order;
            for (std::size_t i = 0; i < m; ++i)
                if (weighted[i] && z[i] != 0.0) order.push_back(i);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return std::abs(z[a]) > std::abs(z[b]);
            });
            const double fit_tol = 1e-12 * std::max(1.0, ynorm);
            bool improved = false;
            IndexSet u_set = t;
            for (std::size_t k = 0; k <= order.size(); ++k) {
                if (k > 0) u_set.insert(order[k - 1]);
                if (u_set.empty() || u_set.size() > n) continue;
                auto refit = try_ls_fit(y, u_set);
                if (!refit || norm2_residual(*refit, y) > fit_tol) continue;
                double refit_obj = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    if (weighted[i]) refit_obj += std::abs((*refit)[i]);
                if (!improved || refit_obj < res.objective) {
                    res.beta = std::move(*refit);
                    res.feasibility_slack = -norm2_residual(res.beta, y);
                    res.objective = refit_obj;
                    improved = true;
                }
            }
        }
        return res;
    }

private:
    std::optional<Vector> try_ls_fit(const Vector& y, const IndexSet& t) const {
        DenseMatrix at = columns(a_, t);
        try {
            Vector coef = least_squares(at, y);
            Vector beta(a_.cols(), 0.0);
            for (std::size_t k = 0; k < t.size(); ++k) beta[t[k]] = coef[k];
            return beta;
        } catch (const singular_error&) {
            return std::nullopt;
        }
    }

    double norm2_residual(const Vector& beta, const Vector& y) const {
        Vector r = a_.mul(beta);
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = y[i] - r[i];
        return norm2(r);
    }

    Vector apply_inverse(const Vector& v) const {
        if (!woodbury_) return chol_.solve(v);
        Vector av = a_.mul(v);
        Vector s = chol_.solve(av);
        Vector ats = a_.tmul(s);
        Vector out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - ats[i];
        return out;
    }

    DenseMatrix a_;
    Cholesky chol_;
    bool woodbury_ = false;
};

inline SolverResult solve_modcs(const WeightedL1Problem& p, const SolverConfig& cfg = {}) {
    Wl1Solver solver(*p.a);
    return solver.solve(p.y, p.epsilon, p.t, cfg);
}

inline SolverResult solve_noisy_l1(const DenseMatrix& a, const Vector& y, double epsilon,
                                   const SolverConfig& cfg = {}) {
    Wl1Solver solver(a);
    return solver.solve(y, epsilon, IndexSet{}, cfg);
}

/// First-order optimality check for the weighted-l1 ball program. For a point
/// strictly inside the ball the objective must be (numerically) zero; on the
/// boundary the negative-gradient g = A'(y - A beta) must vanish on T and align
/// with sign(beta) at a common multiplier rho on the active part of T^c.
inline CertReport kkt_certificate(const WeightedL1Problem& p, const Vector& beta, double tol) {
    if (!all_finite(beta)) throw input_error("kkt_certificate: non-finite point");
    const DenseMatrix& a = *p.a;
    const std::size_t m = a.cols();

    CertReport rep;
    Vector resid = a.mul(beta);
    for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = p.y[i] - resid[i];
    rep.residual_norm = norm2(resid);

    std::vector<char> weighted(m, 1);
    for (std::size_t i : p.t) weighted[i] = 0;
    rep.objective = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        if (weighted[i]) rep.objective += std::abs(beta[i]);

    const double scale = std::max(1.0, norm_inf(a.tmul(p.y)));
    rep.feasible = rep.residual_norm <= p.epsilon * (1.0 + tol) + tol * std::max(1.0, norm2(p.y));

    if (rep.residual_norm < p.epsilon * (1.0 - tol)) {
        // interior: the ball constraint is slack, so the optimum has zero objective
        rep.gradient_zero_on_t = true;
        rep.multiplier_exists = rep.objective <= tol * scale;
        rep.pass = rep.feasible && rep.multiplier_exists;
        return rep;
    }

    Vector g = a.tmul(resid);
    rep.gradient_zero_on_t = true;
    for (std::size_t i : p.t)
        if (std::abs(g[i]) > tol * scale) rep.gradient_zero_on_t = false;

    // the multiplier interval carries an absolute tol*scale slack so that an
    // exactly-interpolating point (epsilon = 0, g ~ 0) certifies at rho = 0
    const double slack = tol * scale;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        if (!weighted[i]) continue;
        if (std::abs(beta[i]) > tol * scale) {
            const double s = g[i] * (beta[i] > 0 ? 1.0 : -1.0);
            if (s < -slack) { lo = std::numeric_limits<double>::infinity(); break; }
            lo = std::max(lo, (s - slack) / (1.0 + tol));
            hi = std::min(hi, std::max(0.0, (s + slack)) / (1.0 - tol));
        } else {
            lo = std::max(lo, (std::abs(g[i]) - slack) / (1.0 + tol));
        }
    }
    rep.multiplier_lo = lo;
    rep.multiplier_hi = hi;
    rep.multiplier_exists = lo <= hi * (1.0 + 1e-12);
    rep.pass = rep.feasible && rep.gradient_zero_on_t && rep.multiplier_exists;
    return rep;
}

/// Exhaustive epsilon = 0 oracle: the optimum of the linear program is attained
/// at a basic solution, so every full-column-rank column subset of size <= n is
/// tried and the feasible candidate with the smallest weighted objective wins.
inline std::pair<Vector, double> bp_enumeration_oracle(const DenseMatrix& a, const Vector& y,
                                                       const IndexSet& t) {
    const std::size_t n = a.rows(), m = a.cols();
    if (m > 14 || n > 10) throw input_error("bp_enumeration_oracle: instance too large");
    if (y.size() != n) throw input_error("bp_enumeration_oracle: dimension mismatch");

    std::vector<char> weighted(m, 1);
    for (std::size_t i : t) weighted[i] = 0;

    const double feas_tol = 1e-9 * std::max(1.0, norm2(y));
    double best = std::numeric_limits<double>::infinity();
    Vector best_beta;
    bool found = false;

    const std::size_t kmax = std::min(n, m);
    std::vector<std::size_t> comb;
    // enumerate subsets by size using the usual lexicographic combination walk
    for (std::size_t k = 0; k <= kmax; ++k) {
        comb.resize(k);
        for (std::size_t i = 0; i < k; ++i) comb[i] = i;
        while (true) {
            IndexSet u(std::vector<std::size_t>(comb.begin(), comb.end()));
            Vector beta(m, 0.0);
            bool feasible = false;
            if (k == 0) {
                feasible = norm2(y) <= feas_tol;
            } else {
                DenseMatrix au = columns(a, u);
                try {
                    Vector coef = least_squares(au, y);
                    Vector r = au.mul(coef);
                    double rn = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const double d = y[i] - r[i];
                        rn += d * d;
                    }
                    if (std::sqrt(rn) <= feas_tol) {
                        feasible = true;
                        for (std::size_t i = 0; i < k; ++i) beta[u[i]] = coef[i];
                    }
                } catch (const singular_error&) {
                }
            }
            if (feasible) {
                double obj = 0.0;
                for (std::size_t i = 0; i < m; ++i)
                    if (weighted[i]) obj += std::abs(beta[i]);
                if (!found || obj < best) {
                    best = obj;
                    best_beta = beta;
                    found = true;
                }
            }
            // advance combination
            if (k == 0) break;
            std::size_t i = k;
            while (i-- > 0) {
                if (comb[i] != i + m - k) {
                    ++comb[i];
                    for (std::size_t j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
                    break;
                }
                if (i == 0) { i = SIZE_MAX; break; }
            }
            if (i == SIZE_MAX) break;
        }
    }
    if (!found) throw infeasible_error("bp_enumeration_oracle: no feasible support");
    return {best_beta, best};
}

} // namespace modcs
