#pragma once

#include <deque>
#include <optional>

#include "modcs/linalg.hpp"
#include "modcs/sensing.hpp"
#include "modcs/wl1.hpp"

namespace modcs {

inline constexpr std::size_t kXminWindow = 10;    // t0 of the short-time average
inline constexpr double kSigmaMinTarget = 0.4;    // conditioning floor for kept supports
inline constexpr double kMinMagnitudeFactor = 0.5;// (1 - C) with C = 0.5
inline constexpr double kDeletionFactor = 0.7;
// Deletion never drops below 4x the per-entry noise scale eps/sqrt(n): extras
// carry LS values at that level, so a smaller threshold deletes nothing and
// lets them accumulate. The working thresholds ride at about this multiple.
inline constexpr double kDeletionNoiseFloor = 4.0;

/// Rolling estimate of the smallest nonzero magnitude, averaged over the last
/// kXminWindow support estimates.
struct XminTracker {
    std::deque<double> window;

    void push(double v) {
        window.push_back(v);
        if (window.size() > kXminWindow) window.pop_front();
    }

    std::optional<double> average() const {
        if (window.empty()) return std::nullopt;
        double s = 0.0;
        for (double v : window) s += v;
        return s / static_cast<double>(window.size());
    }
};

/// Pushes min_{j in support} |x_hat_j| (skipped when the support is empty) and
/// returns the window mean, or nothing if the window is still empty.
inline std::optional<double> update_xmin(XminTracker& xmin, const IndexSet& support,
                                         const Vector& x_hat) {
    if (!support.empty()) {
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t i : support) mn = std::min(mn, std::abs(x_hat[i]));
        xmin.push(mn);
    }
    return xmin.average();
}

struct TrackerState {
    IndexSet prev_support; // N-hat_{t-1}; empty at t = 0
    XminTracker xmin;
    std::size_t t = 0;
};

/// Fixed thresholds; anything left unset uses the automatic rules.
struct Thresholds {
    std::optional<double> alpha;     // Algorithm 1
    std::optional<double> alpha_add; // Algorithm 2
    std::optional<double> alpha_del; // Algorithm 2

    static Thresholds automatic() { return {}; }
};

struct StepOutput {
    std::size_t t = 0;
    Vector x_hat;            // final estimate
    Vector x_hat_modcs;      // step-2 weighted-l1 output
    Vector x_hat_add;        // LS estimate on T_add (Algorithm 2 only)
    IndexSet predicted;      // T_t used for the solve
    IndexSet support;        // final support estimate
    IndexSet add_support;    // T_add,t (Algorithm 2 only)
    double alpha = 0.0;
    double alpha_add = 0.0;
    double alpha_del = 0.0;
    double xmin_hat = 0.0;
    bool solver_converged = true;
    std::size_t solver_iterations = 0;
    bool add_grid_degenerate = false; // sigma_min(A_T) < 0.4 even with no additions
};

/// Support-error sets against a known truth (Definitions of the misses/extras
/// bookkeeping; only meaningful in simulation).
struct FrameDiagnostics {
    IndexSet delta;        // N_t \ T_t
    IndexSet delta_e;      // T_t \ N_t
    IndexSet tilde_delta;  // N_t \ T~_t (misses)
    IndexSet tilde_delta_e;// T~_t \ N_t (extras)
    IndexSet delta_add;    // N_t \ T_add,t
    IndexSet delta_e_add;  // T_add,t \ N_t
};

inline FrameDiagnostics diagnose(const StepOutput& out, const Vector& truth) {
    IndexSet n_t = support_of(truth);
    FrameDiagnostics d;
    d.delta = n_t.set_difference(out.predicted);
    d.delta_e = out.predicted.set_difference(n_t);
    d.tilde_delta = n_t.set_difference(out.support);
    d.tilde_delta_e = out.support.set_difference(n_t);
    d.delta_add = n_t.set_difference(out.add_support);
    d.delta_e_add = out.add_support.set_difference(n_t);
    return d;
}

namespace detail {

inline std::vector<double> threshold_grid(const Vector& x, const IndexSet* restrict_to_comp) {
    std::vector<double> grid;
    grid.push_back(0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (restrict_to_comp && restrict_to_comp->contains(i)) continue;
        if (x[i] != 0.0) grid.push_back(std::abs(x[i]));
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

// The kept support shrinks as alpha grows, so both the minimum-magnitude
// clause and the sigma_min clause are monotone in alpha and the smallest
// passing grid point can be found by bisection.
template <class Pred>
inline double smallest_passing(const std::vector<double>& grid, Pred&& pass, bool* found = nullptr) {
    std::size_t lo = 0, hi = grid.size() - 1;
    if (pass(grid[lo])) {
        if (found) *found = true;
        return grid[lo];
    }
    if (!pass(grid[hi])) {
        if (found) *found = false;
        return grid[hi];
    }
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (pass(grid[mid]))
            hi = mid;
        else
            lo = mid;
    }
    if (found) *found = true;
    return grid[hi];
}

} // namespace detail

/// Smallest alpha whose kept set T~ = {i : |x_hat_i| > alpha} satisfies both
/// min_{j in T~} |x_hat_j| >= 0.5 * xmin_hat and sigma_min(A_T~) >= 0.4.
inline double auto_alpha(const Vector& x_hat_modcs, const DenseMatrix& a, double xmin_hat) {
    const auto grid = detail::threshold_grid(x_hat_modcs, nullptr);
    auto pass = [&](double alpha) {
        IndexSet kept = support_above(x_hat_modcs, alpha);
        if (kept.empty()) return true;
        if (kept.size() > a.rows()) return false;
        double mn = std::numeric_limits<double>::infinity();
        for (std::size_t i : kept) mn = std::min(mn, std::abs(x_hat_modcs[i]));
        if (mn < kMinMagnitudeFactor * xmin_hat) return false;
        return min_singular_value(columns(a, kept)) >= kSigmaMinTarget;
    };
    return detail::smallest_passing(grid, pass);
}

/// Smallest alpha_add such that sigma_min(A_{T u A-hat}) >= 0.4 for the induced
/// addition set A-hat = {i in T^c : |x_hat_i| > alpha_add}. Returns the largest
/// grid point (no additions) and sets *degenerate when even that fails.
inline double auto_alpha_add(const Vector& x_hat_modcs, const DenseMatrix& a, const IndexSet& t,
                             bool* degenerate = nullptr) {
    const auto grid = detail::threshold_grid(x_hat_modcs, &t);
    auto pass = [&](double alpha) {
        IndexSet t_add = t;
        for (std::size_t i = 0; i < x_hat_modcs.size(); ++i)
            if (!t.contains(i) && std::abs(x_hat_modcs[i]) > alpha) t_add.insert(i);
        if (t_add.size() > a.rows()) return false;
        return min_singular_value(columns(a, t_add)) >= kSigmaMinTarget;
    };
    bool found = false;
    const double alpha = detail::smallest_passing(grid, pass, &found);
    if (degenerate) *degenerate = !found;
    return alpha;
}

/// alpha_del = max(0, 0.7 * xmin_hat - ||A_Tadd' residual||_inf); the formula
/// can go negative, in which case deleting nothing is the conservative choice.
inline double auto_alpha_del(double xmin_hat, const DenseMatrix& a_tadd, const Vector& residual) {
    double corr = 0.0;
    if (a_tadd.cols() > 0) corr = norm_inf(a_tadd.tmul(residual));
    return std::max(0.0, kDeletionFactor * xmin_hat - corr);
}

namespace detail {

// First-frame bootstrap: with no window yet, split the sorted magnitude
// profile at its largest ratio gap and take the smallest magnitude kept.
// The raw smallest nonzero is solver noise and would poison the deletion
// threshold for the whole run.
inline double current_xmin(const TrackerState& state, const Vector& x_hat_modcs) {
    if (auto avg = state.xmin.average()) return *avg;
    std::vector<double> mags;
    for (double v : x_hat_modcs)
        if (v != 0.0) mags.push_back(std::abs(v));
    if (mags.empty()) return 0.0;
    std::sort(mags.rbegin(), mags.rend());
    std::size_t split = mags.size();
    double best_ratio = 1.0;
    for (std::size_t k = 0; k + 1 < mags.size(); ++k) {
        if (mags[k + 1] <= 0.0) break;
        const double ratio = mags[k] / mags[k + 1];
        if (ratio > best_ratio) {
            best_ratio = ratio;
            split = k + 1;
        }
    }
    return mags[split - 1];
}

inline Vector ls_on_support(const DenseMatrix& a, const Vector& y, const IndexSet& s) {
    Vector x(a.cols(), 0.0);
    if (s.empty()) return x;
    Vector coef = least_squares(columns(a, s), y);
    for (std::size_t k = 0; k < s.size(); ++k) x[s[k]] = coef[k];
    return x;
}

} // namespace detail

/// Algorithm 1 step: weighted l1 with T = previous support estimate, then a
/// single strict threshold. The output estimate is the l1 solution itself.
inline StepOutput modcs_step(TrackerState& state, const MeasurementFrame& frame,
                             const Wl1Solver& solver, const Thresholds& thr,
                             const SolverConfig& cfg = {}) {
    StepOutput out;
    out.t = frame.t;
    out.predicted = state.prev_support;

    SolverResult res = solver.solve(frame.y, frame.epsilon, out.predicted, cfg);
    out.x_hat_modcs = std::move(res.beta);
    out.solver_converged = res.converged;
    out.solver_iterations = res.iterations;

    out.xmin_hat = detail::current_xmin(state, out.x_hat_modcs);
    out.alpha = thr.alpha ? *thr.alpha : auto_alpha(out.x_hat_modcs, solver.matrix(), out.xmin_hat);
    out.support = support_above(out.x_hat_modcs, out.alpha);
    out.x_hat = out.x_hat_modcs;

    state.prev_support = out.support;
    update_xmin(state.xmin, out.support, out.x_hat);
    ++state.t;
    return out;
}

/// Algorithm 2 step: weighted l1, threshold-add, LS on the enlarged support,
/// threshold-delete, and a final LS on the kept support.
inline StepOutput addlsdel_step(TrackerState& state, const MeasurementFrame& frame,
                                const Wl1Solver& solver, const Thresholds& thr,
                                const SolverConfig& cfg = {}) {
    const DenseMatrix& a = solver.matrix();
    StepOutput out;
    out.t = frame.t;
    out.predicted = state.prev_support;

    SolverResult res = solver.solve(frame.y, frame.epsilon, out.predicted, cfg);
    out.x_hat_modcs = std::move(res.beta);
    out.solver_converged = res.converged;
    out.solver_iterations = res.iterations;
    out.xmin_hat = detail::current_xmin(state, out.x_hat_modcs);

    if (thr.alpha_add) {
        out.alpha_add = *thr.alpha_add;
    } else {
        out.alpha_add = auto_alpha_add(out.x_hat_modcs, a, out.predicted, &out.add_grid_degenerate);
    }

    IndexSet t_add = out.predicted;
    for (std::size_t i = 0; i < out.x_hat_modcs.size(); ++i)
        if (!out.predicted.contains(i) && std::abs(out.x_hat_modcs[i]) > out.alpha_add)
            t_add.insert(i);

    // Numerical-rank repair for the LS step: drop additions in increasing
    // |x_hat_modcs| order until A_Tadd is usable; only a degenerate predicted
    // support (|T| > n, exact collinearity) forces digging into T itself.
    // The 0.4 conditioning target governs the addition scan, never evictions:
    // a true support with sigma_min slightly below 0.4 still yields a sound LS.
    while (!t_add.empty()) {
        if (t_add.size() <= a.rows()) {
            auto sv = singular_values(columns(a, t_add));
            if (sv.back() > 1e-6 * sv.front()) break;
        }
        std::size_t worst = t_add[0];
        double worst_mag = std::numeric_limits<double>::infinity();
        bool worst_is_addition = false;
        for (std::size_t i : t_add) {
            const bool is_addition = !out.predicted.contains(i);
            if (is_addition && !worst_is_addition) {
                worst = i;
                worst_mag = std::abs(out.x_hat_modcs[i]);
                worst_is_addition = true;
                continue;
            }
            if (is_addition != worst_is_addition) continue;
            const double mag = std::abs(out.x_hat_modcs[i]);
            if (mag < worst_mag) {
                worst_mag = mag;
                worst = i;
            }
        }
        t_add.erase(worst);
    }
    out.add_support = t_add;
    out.x_hat_add = detail::ls_on_support(a, frame.y, t_add);

    if (thr.alpha_del) {
        out.alpha_del = *thr.alpha_del;
    } else {
        Vector resid = a.mul(out.x_hat_modcs);
        for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = frame.y[i] - resid[i];
        out.alpha_del = auto_alpha_del(out.xmin_hat, columns(a, t_add), resid);
        const double noise_floor =
            kDeletionNoiseFloor * frame.epsilon / std::sqrt(static_cast<double>(a.rows()));
        out.alpha_del = std::max(out.alpha_del, noise_floor);
    }

    IndexSet kept;
    for (std::size_t i : t_add)
        if (std::abs(out.x_hat_add[i]) > out.alpha_del) kept.insert(i);
    out.support = kept;
    out.x_hat = detail::ls_on_support(a, frame.y, kept);

    state.prev_support = out.support;
    update_xmin(state.xmin, out.support, out.x_hat);
    ++state.t;
    return out;
}

/// Non-recursive noisy l1 baseline: identical to modcs_step but the predicted
/// support is always empty (no feedback).
inline StepOutput noisy_l1_step(TrackerState& state, const MeasurementFrame& frame,
                                const Wl1Solver& solver, const Thresholds& thr,
                                const SolverConfig& cfg = {}) {
    state.prev_support = IndexSet{};
    return modcs_step(state, frame, solver, thr, cfg);
}

} // namespace modcs
