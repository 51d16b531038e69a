#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "modcs/signal_model.hpp"

namespace modcs {

/// Which signal-change assumptions a sequence is checked against.
enum class ModelId { assumptions1 = 1, assumptions2 = 2, assumptions3 = 3 };

/// Bounds to check against. Anything left unset is derived from the sequence
/// itself (the derived value then trivially satisfies its own clause, but the
/// structural clauses remain falsifiable).
struct DeclaredBounds {
    std::optional<std::size_t> S;
    std::optional<std::size_t> S_a;
    std::optional<std::size_t> b;
    std::optional<std::size_t> d_min;
    std::optional<double> r;   // model 1 rung height
    std::optional<std::size_t> d; // model 1 rung count
    std::optional<double> ell; // model 2/3 large-set threshold
};

struct ClauseVerdict {
    std::string id;
    std::string description;
    bool evaluated = true;
    bool pass = true;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct ModelReport {
    ModelId model = ModelId::assumptions2;
    std::size_t frames = 0;
    std::size_t dimension = 0;

    std::size_t max_support = 0;
    std::size_t max_additions = 0;
    std::size_t max_removals = 0;

    // addition statistics (episodes starting at t > 0)
    std::size_t addition_episodes = 0;
    double a_min_obs = 0.0, a_max_obs = 0.0;
    double rate_min_obs = 0.0, rate_max_obs = 0.0;
    std::size_t d_min_obs = 0, d_max_obs = 0;
    std::size_t removal_delay_obs = 0; // observed b

    std::vector<ClauseVerdict> clauses;

    bool pass() const {
        for (const auto& c : clauses)
            if (c.evaluated && !c.pass) return false;
        return true;
    }
};

namespace detail {

struct Episode {
    std::size_t index;
    std::size_t t_start;               // first frame in support
    std::size_t t_end;                 // last frame in support
    bool removed;                      // left the support before the trace ended
    double a = 0.0;                    // initial magnitude
    std::vector<double> increase_rates;// strictly positive leading increments
    std::size_t final_run_start = 0;   // first frame of the final decreasing run

    // the decreasing phase that counts toward the removal delay: frames of the
    // final run below the large-set threshold (large elements may drift down
    // without having left the large set)
    std::size_t sd_phase_start(const std::vector<Vector>& xs, double ell) const {
        std::size_t s = final_run_start;
        while (s <= t_end && std::abs(xs[s][index]) >= ell * (1.0 - 1e-12)) ++s;
        return s;
    }
};

inline std::vector<Episode> scan_episodes(const std::vector<Vector>& xs) {
    std::vector<Episode> eps;
    const std::size_t frames = xs.size();
    const std::size_t m = xs.front().size();
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t t = 0;
        while (t < frames) {
            if (xs[t][i] == 0.0) {
                ++t;
                continue;
            }
            Episode e;
            e.index = i;
            e.t_start = t;
            while (t + 1 < frames && xs[t + 1][i] != 0.0) ++t;
            e.t_end = t;
            e.removed = t + 1 < frames;
            e.a = std::abs(xs[e.t_start][i]);
            for (std::size_t tau = e.t_start + 1; tau <= e.t_end; ++tau) {
                const double inc = std::abs(xs[tau][i]) - std::abs(xs[tau - 1][i]);
                if (inc > 0.0)
                    e.increase_rates.push_back(inc);
                else
                    break;
            }
            // final decreasing run: walk back from the removal (or trace end)
            std::size_t run_start = e.t_end + 1; // the removal step itself
            std::size_t tau = e.t_end;
            while (tau > e.t_start && std::abs(xs[tau][i]) < std::abs(xs[tau - 1][i])) {
                run_start = tau;
                --tau;
            }
            e.final_run_start = run_start;
            eps.push_back(std::move(e));
            ++t;
        }
    }
    return eps;
}

} // namespace detail

/// Extracts support-change statistics from a sparse sequence and checks the
/// clauses of the requested signal-change assumptions against declared (or
/// derived) bounds.
inline ModelReport verify_assumptions(const std::vector<Vector>& xs, ModelId model,
                                      const DeclaredBounds& declared = {}) {
    if (xs.empty()) throw input_error("verify_assumptions: empty sequence");
    const std::size_t m = xs.front().size();
    for (const auto& x : xs)
        if (x.size() != m) throw input_error("verify_assumptions: inconsistent dimensions");

    ModelReport rep;
    rep.model = model;
    rep.frames = xs.size();
    rep.dimension = m;

    std::vector<IndexSet> supports(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) supports[t] = support_of(xs[t]);

    std::vector<std::size_t> adds(xs.size(), 0), removes(xs.size(), 0);
    for (std::size_t t = 0; t < xs.size(); ++t) {
        rep.max_support = std::max(rep.max_support, supports[t].size());
        if (t == 0) continue;
        adds[t] = supports[t].set_difference(supports[t - 1]).size();
        removes[t] = supports[t - 1].set_difference(supports[t]).size();
        rep.max_additions = std::max(rep.max_additions, adds[t]);
        rep.max_removals = std::max(rep.max_removals, removes[t]);
    }

    auto episodes = detail::scan_episodes(xs);

    double a_lo = std::numeric_limits<double>::infinity(), a_hi = 0.0;
    double r_lo = std::numeric_limits<double>::infinity(), r_hi = 0.0;
    std::size_t d_lo = std::numeric_limits<std::size_t>::max(), d_hi = 0;
    for (const auto& e : episodes) {
        if (e.t_start == 0) continue; // initial-time elements are not "additions"
        ++rep.addition_episodes;
        a_lo = std::min(a_lo, e.a);
        a_hi = std::max(a_hi, e.a);
        d_lo = std::min(d_lo, e.increase_rates.size());
        d_hi = std::max(d_hi, e.increase_rates.size());
        for (double r : e.increase_rates) {
            r_lo = std::min(r_lo, r);
            r_hi = std::max(r_hi, r);
        }
    }
    if (rep.addition_episodes > 0) {
        rep.a_min_obs = a_lo;
        rep.a_max_obs = a_hi;
        rep.d_min_obs = d_lo;
        rep.d_max_obs = d_hi;
        if (r_hi > 0.0) {
            rep.rate_min_obs = r_lo;
            rep.rate_max_obs = r_hi;
        }
    }
    const std::size_t S = declared.S.value_or(rep.max_support);
    const std::size_t Sa = declared.S_a.value_or(std::max(rep.max_additions, rep.max_removals));

    // the large-set threshold bounds which decreasing frames count as the
    // removal phase; without it the whole final decreasing run is used
    const std::size_t dmin_for_ell = declared.d_min.value_or(std::max<std::size_t>(1, rep.d_min_obs));
    const double ell = declared.ell.value_or(
        rep.addition_episodes > 0 && rep.rate_min_obs > 0.0
            ? rep.a_min_obs + static_cast<double>(dmin_for_ell) * rep.rate_min_obs
            : std::numeric_limits<double>::infinity());

    for (const auto& e : episodes) {
        if (!e.removed) continue;
        const std::size_t start =
            std::isfinite(ell) ? e.sd_phase_start(xs, ell) : e.final_run_start;
        const std::size_t delay = (e.t_end + 1) - start;
        rep.removal_delay_obs = std::max(rep.removal_delay_obs, delay);
    }

    const std::size_t b = declared.b.value_or(std::max<std::size_t>(1, rep.removal_delay_obs));

    auto clause = [&](std::string id, std::string desc, bool pass, double lhs, double rhs,
                      bool evaluated = true) {
        rep.clauses.push_back({std::move(id), std::move(desc), evaluated, pass, lhs, rhs});
    };

    // shared clauses
    {
        bool support_ok = true;
        for (const auto& s : supports) support_ok = support_ok && s.size() <= S;
        clause("support-size", "|N_t| <= S at every t", support_ok,
               static_cast<double>(rep.max_support), static_cast<double>(S));

        bool change_ok = true;
        for (std::size_t t = 1; t < xs.size(); ++t)
            change_ok = change_ok && adds[t] <= Sa && removes[t] <= Sa;
        clause("change-size", "|A_t| <= S_a and |R_t| <= S_a at every t", change_ok,
               static_cast<double>(std::max(rep.max_additions, rep.max_removals)),
               static_cast<double>(Sa));

        bool signs_ok = true;
        for (std::size_t t = 1; t < xs.size() && signs_ok; ++t)
            for (std::size_t i : supports[t]) {
                if (!supports[t - 1].contains(i)) continue;
                if ((xs[t][i] > 0) != (xs[t - 1][i] > 0)) { signs_ok = false; break; }
            }
        clause("sign-persistence", "signs never flip while an index stays in the support",
               signs_ok, signs_ok ? 0.0 : 1.0, 0.0);
    }

    if (model == ModelId::assumptions1) {
        const double r = declared.r.value_or([&] {
            double lo = std::numeric_limits<double>::infinity();
            for (const auto& x : xs)
                for (double v : x)
                    if (v != 0.0) lo = std::min(lo, std::abs(v));
            return std::isfinite(lo) ? lo : 1.0;
        }());
        double max_mag = 0.0;
        for (const auto& x : xs) max_mag = std::max(max_mag, norm_inf(x));
        const std::size_t d = declared.d.value_or(
            r > 0.0 ? static_cast<std::size_t>(std::llround(max_mag / r)) : 1);

        bool const_support = true;
        for (const auto& s : supports) const_support = const_support && s.size() == supports[0].size();
        clause("m1-constant-support", "support size is constant", const_support,
               static_cast<double>(rep.max_support), static_cast<double>(supports[0].size()));

        bool const_changes = true;
        for (std::size_t t = 1; t < xs.size(); ++t)
            const_changes = const_changes && adds[t] == Sa && removes[t] == Sa;
        clause("m1-exact-change", "exactly S_a additions and removals per step",
               xs.size() == 1 || const_changes,
               static_cast<double>(rep.max_additions), static_cast<double>(Sa));

        bool on_grid = true;
        bool ladder_ok = true;
        for (const auto& x : xs) {
            std::vector<std::size_t> count(d + 1, 0);
            for (double v : x) {
                if (v == 0.0) continue;
                const double lvl = std::abs(v) / r;
                const auto j = static_cast<std::size_t>(std::llround(lvl));
                if (j < 1 || j > d || std::abs(lvl - static_cast<double>(j)) > 1e-9) {
                    on_grid = false;
                    continue;
                }
                ++count[j];
            }
            for (std::size_t j = 1; j + 1 <= d && ladder_ok; ++j)
                ladder_ok = count[j] == 2 * Sa;
        }
        clause("m1-grid", "all magnitudes are rungs j*r with 1 <= j <= d", on_grid,
               on_grid ? 0.0 : 1.0, 0.0);
        clause("m1-ladder", "|{|x| = j r}| = 2 S_a for every 1 <= j < d", ladder_ok,
               ladder_ok ? 0.0 : 1.0, 0.0);
    } else {
        const std::size_t dmin = dmin_for_ell;

        clause("a2-removal-delay",
               "every removed element is deleted within b steps of its final decrease",
               rep.removal_delay_obs <= b, static_cast<double>(rep.removal_delay_obs),
               static_cast<double>(b));

        // reconstruct SD_t as "below ell, inside a final decreasing run"
        std::vector<std::size_t> sd_size(xs.size(), 0);
        for (const auto& e : episodes) {
            const std::size_t start =
                std::isfinite(ell) ? e.sd_phase_start(xs, ell) : e.final_run_start;
            if (start > e.t_end) continue; // removed without a visible decrease phase
            for (std::size_t t = start; t <= e.t_end; ++t) ++sd_size[t];
        }
        std::size_t sd_max = 0;
        for (auto v : sd_size) sd_max = std::max(sd_max, v);
        const double sd_bound = model == ModelId::assumptions3
                                    ? 0.5 * static_cast<double>((b + 1) * Sa)
                                    : static_cast<double>(b * Sa);
        clause("a2-sd-size",
               model == ModelId::assumptions3 ? "|SD_t| <= (b+1)/2 * S_a" : "|SD_t| <= b * S_a",
               static_cast<double>(sd_max) <= sd_bound, static_cast<double>(sd_max), sd_bound);

        // Remark 5.3 feasibility clauses (evaluated when ell is available)
        if (std::isfinite(ell)) {
            std::size_t l0 = 0;
            for (std::size_t i : supports[0])
                if (std::abs(xs[0][i]) >= ell * (1.0 - 1e-12)) ++l0;
            clause("r5.3-initial", "(d_min + b + 1) S_a <= |L_0| <= S_0 <= S",
                   (dmin + b + 1) * Sa <= l0 && l0 <= supports[0].size() && supports[0].size() <= S,
                   static_cast<double>((dmin + b + 1) * Sa), static_cast<double>(l0));

            // S_d,t = number of removal phases starting at t
            std::vector<std::size_t> sd_new(xs.size(), 0);
            for (const auto& e : episodes) {
                const std::size_t start = e.sd_phase_start(xs, ell);
                if (start <= e.t_end) ++sd_new[start];
            }
            bool cum_ok = true;
            std::size_t cum_a = 0;
            std::vector<std::size_t> cum_d(xs.size() + 1, 0);
            for (std::size_t t = 1; t < xs.size(); ++t) cum_d[t] = cum_d[t - 1] + sd_new[t];
            std::vector<std::size_t> cum_adds(xs.size() + 1, 0);
            for (std::size_t t = 1; t < xs.size(); ++t) cum_adds[t] = cum_adds[t - 1] + adds[t];
            for (std::size_t t = 1; t < xs.size(); ++t) {
                cum_a += adds[t];
                const std::size_t d_avail = t >= b ? cum_d[t - b] : 0;
                const std::size_t lead = (t >= b + dmin + 1) ? cum_adds[t - b - dmin - 1] : 0;
                if (!(cum_a <= d_avail && d_avail <= l0 + lead)) { cum_ok = false; break; }
            }
            clause("r5.3-cumulative",
                   "sum S_a,tau <= sum_{tau<=t-b} S_d,tau <= |L_0| + lagged additions", cum_ok,
                   cum_ok ? 0.0 : 1.0, 0.0);
        } else {
            clause("r5.3-initial", "(d_min + b + 1) S_a <= |L_0| <= S_0 <= S", true, 0.0, 0.0,
                   false);
            clause("r5.3-cumulative",
                   "sum S_a,tau <= sum_{tau<=t-b} S_d,tau <= |L_0| + lagged additions", true, 0.0,
                   0.0, false);
        }
    }
    return rep;
}

/// Convenience: collect the dense vectors of a generated state history.
inline std::vector<Vector> sequence_of(const std::vector<SparseSequenceState>& states) {
    std::vector<Vector> xs;
    xs.reserve(states.size());
    for (const auto& s : states) xs.push_back(s.x());
    return xs;
}

} // namespace modcs
