#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "modcs/index_set.hpp"
#include "modcs/matrix.hpp"
#include "modcs/rng.hpp"

namespace modcs {

inline std::size_t round_half_up(double x) {
    return static_cast<std::size_t>(std::floor(x + 0.5));
}

/// Ladder model: magnitudes live on the grid r, 2r, ..., dr; exactly S_a
/// additions and removals per step and S_a movements between adjacent rungs.
struct Model1Params {
    std::size_t S = 0;
    std::size_t S_a = 0;
    double r = 1.0;
    std::size_t d = 1; // M = d * r is the top magnitude
    std::size_t m = 0;

    void validate() const {
        if (S == 0 || S_a == 0 || d == 0 || m == 0) throw input_error("Model1Params: counts must be positive");
        if (!(r > 0.0)) throw input_error("Model1Params: r must be positive");
        if (S < (2 * d - 2) * S_a) throw input_error("Model1Params: S < (2d-2)*S_a, ladder infeasible");
        if (d >= 2 && S - (2 * d - 2) * S_a < S_a)
            throw input_error("Model1Params: top rung smaller than S_a, steps infeasible");
        if (S + S_a > m) throw input_error("Model1Params: S + S_a > m");
    }
};

/// Realistic model: additions at magnitude >= a_min, increase >= r_min for
/// d_min steps, decrease to removal within b steps of leaving the large set.
struct Model2Params {
    std::size_t S = 0;
    std::size_t S_a = 0;
    std::size_t d_min = 1;
    double a_min = 1.0;
    double r_min = 1.0;
    std::size_t b = 1;
    std::size_t m = 0;

    double ell() const { return a_min + static_cast<double>(d_min) * r_min; }

    void validate() const {
        if (S == 0 || S_a == 0 || d_min == 0 || b == 0 || m == 0)
            throw input_error("Model2Params: counts must be positive");
        if (!(a_min > 0.0) || !(r_min > 0.0))
            throw input_error("Model2Params: magnitudes must be positive");
        if ((d_min + b + 1) * S_a > S)
            throw input_error("Model2Params: (d_min+b+1)*S_a > S, infeasible");
        if (S + S_a > m) throw input_error("Model2Params: S + S_a > m");
    }
};

/// One addition episode: when the index entered, at what magnitude, and the
/// per-step increases recorded over its first d_min steps.
struct AddEvent {
    std::size_t index = 0;
    std::size_t t = 0;
    double a = 0.0;
    std::vector<double> rates;
};

constexpr std::size_t kNever = static_cast<std::size_t>(-1);

struct SparseSequenceState {
    std::size_t t = 0;
    std::size_t m = 0;
    Vector magnitudes;       // M_t, zero off support
    std::vector<int> signs;  // s_t in {-1, 0, +1}
    IndexSet support;        // N_t
    IndexSet added;          // A_t
    IndexSet removed;        // R_t
    IndexSet new_decreasing; // B_t
    IndexSet large;          // L_t
    IndexSet small_decreasing; // SD_t

    // traces (model 2/3): per-time prescribed counts and the addition log
    std::vector<std::size_t> sa_history; // S_a,tau for tau = 1..t
    std::vector<std::size_t> sd_history;
    std::vector<std::size_t> sr_history;
    std::vector<IndexSet> adds_by_time;  // A_tau for tau = 0..t
    std::vector<AddEvent> add_log;
    std::vector<std::size_t> entered_sd_at; // per index; kNever outside SD

    Vector x() const {
        Vector v(m, 0.0);
        for (std::size_t i : support) v[i] = magnitudes[i] * signs[i];
        return v;
    }
};

/// I_t: support members whose magnitude did not decrease since the last step.
inline IndexSet increasing_set(const SparseSequenceState& prev, const SparseSequenceState& cur) {
    IndexSet r;
    for (std::size_t i : cur.support)
        if (cur.magnitudes[i] >= prev.magnitudes[i]) r.insert(i);
    return r;
}

/// S_t(j) = {i : 0 < |x_i| < j r}.
inline IndexSet small_set(const SparseSequenceState& state, std::size_t j, const Model1Params& p) {
    if (j < 1 || j > p.d) throw input_error("small_set: level out of range");
    const double bound = static_cast<double>(j) * p.r;
    IndexSet r;
    for (std::size_t i : state.support)
        if (state.magnitudes[i] < bound * (1.0 - 1e-12)) r.insert(i);
    return r;
}

namespace detail {

inline std::vector<std::size_t> draw_without_replacement(std::vector<std::size_t> pool,
                                                         std::size_t k, Rng& rng) {
    // partial Fisher-Yates; pool order must be deterministic on entry
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_index(pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

inline std::size_t model1_level(double mag, double r) {
    return static_cast<std::size_t>(std::llround(mag / r));
}

} // namespace detail

inline SparseSequenceState gen_model1_initial(const Model1Params& p, std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    SparseSequenceState st;
    st.t = 0;
    st.m = p.m;
    st.magnitudes.assign(p.m, 0.0);
    st.signs.assign(p.m, 0);
    st.entered_sd_at.assign(p.m, kNever);

    std::vector<std::size_t> all(p.m);
    for (std::size_t i = 0; i < p.m; ++i) all[i] = i;
    auto chosen = detail::draw_without_replacement(all, p.S, rng);

    // magnitude multiset: 2 S_a of each rung r..(d-1)r, the rest at M = d r
    std::vector<double> mags;
    for (std::size_t j = 1; j + 1 <= p.d; ++j)
        for (std::size_t c = 0; c < 2 * p.S_a; ++c) mags.push_back(static_cast<double>(j) * p.r);
    while (mags.size() < p.S) mags.push_back(static_cast<double>(p.d) * p.r);
    // random pairing of index to rung
    for (std::size_t i = mags.size(); i-- > 1;) std::swap(mags[i], mags[rng.uniform_index(i + 1)]);

    for (std::size_t k = 0; k < p.S; ++k) {
        const std::size_t i = chosen[k];
        st.magnitudes[i] = mags[k];
        st.signs[i] = rng.sign();
        st.support.insert(i);
    }
    st.adds_by_time.push_back(IndexSet{});
    return st;
}

/// One Model-1 transition. Every rung-k element (k < d) either climbs or
/// descends; S_a of the top rung descend; S_a fresh indices join at r and the
/// S_a rung-1 descenders leave the support.
inline SparseSequenceState step_model1(const SparseSequenceState& prev, const Model1Params& p,
                                       Rng& rng) {
    // check the ladder invariant on input
    std::vector<std::vector<std::size_t>> level(p.d + 1);
    for (std::size_t i : prev.support) {
        const std::size_t j = detail::model1_level(prev.magnitudes[i], p.r);
        if (j < 1 || j > p.d || std::abs(prev.magnitudes[i] - j * p.r) > 1e-9 * p.r)
            throw model_error("step_model1: magnitudes are off the ladder grid");
        level[j].push_back(i);
    }
    for (std::size_t j = 1; j + 1 <= p.d; ++j)
        if (level[j].size() != 2 * p.S_a)
            throw model_error("step_model1: rung occupancy violates the ladder invariant");
    if (prev.support.size() != p.S) throw model_error("step_model1: support size != S");

    SparseSequenceState st = prev;
    st.t = prev.t + 1;
    st.added = IndexSet{};
    st.removed = IndexSet{};

    // movements, drawn uniformly among the eligible
    if (p.d == 1) {
        auto rem = detail::draw_without_replacement(level[1], p.S_a, rng);
        for (std::size_t i : rem) st.removed.insert(i);
    } else {
        for (std::size_t j = 1; j + 1 <= p.d; ++j) {
            auto climbers = detail::draw_without_replacement(level[j], p.S_a, rng);
            std::vector<char> is_climber_local(level[j].size(), 0);
            IndexSet climber_set(std::vector<std::size_t>(climbers.begin(), climbers.end()));
            for (std::size_t i : climbers) st.magnitudes[i] = static_cast<double>(j + 1) * p.r;
            for (std::size_t i : level[j]) {
                if (climber_set.contains(i)) continue;
                if (j == 1) {
                    st.removed.insert(i);
                } else {
                    st.magnitudes[i] = static_cast<double>(j - 1) * p.r;
                }
            }
        }
        auto sinkers = detail::draw_without_replacement(level[p.d], p.S_a, rng);
        for (std::size_t i : sinkers) st.magnitudes[i] = static_cast<double>(p.d - 1) * p.r;
    }

    for (std::size_t i : st.removed) {
        st.magnitudes[i] = 0.0;
        st.signs[i] = 0;
        st.support.erase(i);
    }

    std::vector<std::size_t> comp;
    {
        IndexSet outside = prev.support.complement(p.m);
        comp.assign(outside.begin(), outside.end());
    }
    auto joins = detail::draw_without_replacement(comp, p.S_a, rng);
    for (std::size_t i : joins) {
        st.added.insert(i);
        st.support.insert(i);
        st.magnitudes[i] = p.r;
        st.signs[i] = rng.sign();
        st.add_log.push_back({i, st.t, p.r, {}});
    }
    st.adds_by_time.push_back(st.added);
    st.sa_history.push_back(st.added.size());
    st.sd_history.push_back(0);
    st.sr_history.push_back(st.removed.size());
    return st;
}

inline SparseSequenceState gen_model2_initial(const Model2Params& p, std::uint64_t seed) {
    p.validate();
    Rng rng(seed);
    SparseSequenceState st;
    st.t = 0;
    st.m = p.m;
    st.magnitudes.assign(p.m, 0.0);
    st.signs.assign(p.m, 0);
    st.entered_sd_at.assign(p.m, kNever);

    const std::size_t s0 = std::max<std::size_t>(1, round_half_up(rng.uniform(0.9, 1.0) * p.S));
    std::vector<std::size_t> all(p.m);
    for (std::size_t i = 0; i < p.m; ++i) all[i] = i;
    auto chosen = detail::draw_without_replacement(all, s0, rng);

    // every initial element starts in the large set
    const double ell = p.ell();
    for (std::size_t i : chosen) {
        st.magnitudes[i] = ell * rng.uniform(1.0, 1.44);
        st.signs[i] = rng.sign();
        st.support.insert(i);
        st.large.insert(i);
    }
    st.adds_by_time.push_back(IndexSet{});
    return st;
}

/// One transition of the Assumptions-2/3 generative model. With
/// `proportional_removal` (Assumptions 3) every decrease cohort is trimmed to
/// its ceil(tau/b * S_d) early-removal quota each step.
inline SparseSequenceState step_model2(const SparseSequenceState& prev, const Model2Params& p,
                                       Rng& rng, bool proportional_removal = false) {
    const double ell = p.ell();
    const std::size_t t = prev.t + 1;

    SparseSequenceState st = prev;
    st.t = t;
    st.added = IndexSet{};
    st.removed = IndexSet{};
    st.new_decreasing = IndexSet{};

    auto hist_sum = [](const std::vector<std::size_t>& h, std::size_t upto) {
        // h[k] holds the value for time k+1
        std::size_t s = 0;
        for (std::size_t k = 0; k < h.size() && k + 1 <= upto; ++k) s += h[k];
        return s;
    };

    // prescribed counts
    std::size_t s_a_t, s_d_t, s_r_t;
    if (t <= p.b) {
        s_a_t = 0;
        s_d_t = p.S_a;
        s_r_t = 0;
    } else {
        const std::size_t sd_done = hist_sum(prev.sd_history, t - p.b);
        const std::size_t sa_done = hist_sum(prev.sa_history, t - 1);
        const double backlog = static_cast<double>(sd_done) - static_cast<double>(sa_done);
        const double mu2 = rng.uniform(0.9, 1.0);
        s_a_t = backlog <= 0.0 ? 0 : std::min<std::size_t>(p.S_a, round_half_up(mu2 * backlog));
        s_d_t = std::min<std::size_t>(p.S_a, static_cast<std::size_t>(std::ceil(rng.uniform(0.5, 1.0) * p.S_a)));
        s_r_t = prev.small_decreasing.empty()
                    ? 0
                    : static_cast<std::size_t>(std::ceil(rng.uniform(0.1, 0.3) * prev.small_decreasing.size()));
    }
    if (prev.large.size() < s_d_t)
        throw model_error("step_model2: large set too small for the requested decrease count");

    // new decreasing set B_t from L_{t-1}
    {
        std::vector<std::size_t> pool(prev.large.begin(), prev.large.end());
        for (std::size_t i : detail::draw_without_replacement(pool, s_d_t, rng))
            st.new_decreasing.insert(i);
    }

    // removal set R_t, at most S_a members per step. Removal demand comes from
    // three places, served in priority order so the b-step deadline always
    // wins: (1) members at their deadline (at most one cohort, <= S_a),
    // (2) members whose decay would cross zero and any Assumptions-3 cohort
    // quota, oldest cohort first, (3) the smallest remaining members up to the
    // mu_4 count. A zero-crosser that is skipped for capacity keeps a small
    // positive magnitude and is reconsidered next step, well before its
    // deadline (entry rate <= S_a keeps the queue feasible).
    std::vector<std::size_t> sd_members(prev.small_decreasing.begin(), prev.small_decreasing.end());
    std::vector<double> sd_decay(sd_members.size());
    for (std::size_t k = 0; k < sd_members.size(); ++k)
        sd_decay[k] = rng.uniform(1.0, 1.44) * ell / static_cast<double>(p.b);

    {
        auto by_age_then_magnitude = [&](std::size_t a, std::size_t b2) {
            if (prev.entered_sd_at[a] != prev.entered_sd_at[b2])
                return prev.entered_sd_at[a] < prev.entered_sd_at[b2];
            if (prev.magnitudes[a] != prev.magnitudes[b2])
                return prev.magnitudes[a] < prev.magnitudes[b2];
            return a < b2;
        };
        auto by_magnitude = [&](std::size_t a, std::size_t b2) {
            if (prev.magnitudes[a] != prev.magnitudes[b2])
                return prev.magnitudes[a] < prev.magnitudes[b2];
            return a < b2;
        };

        // (1) deadline
        for (std::size_t i : sd_members)
            if (t - prev.entered_sd_at[i] >= p.b) st.removed.insert(i);

        // (2) zero-crossers and cohort quotas
        std::vector<std::size_t> urgent;
        for (std::size_t k = 0; k < sd_members.size(); ++k) {
            const std::size_t i = sd_members[k];
            if (!st.removed.contains(i) && prev.magnitudes[i] - sd_decay[k] <= 0.0)
                urgent.push_back(i);
        }
        if (proportional_removal) {
            // by offset tau a cohort must have lost ceil(tau/b * S_d) members
            std::vector<std::size_t> cohorts;
            for (std::size_t i : sd_members)
                if (std::find(cohorts.begin(), cohorts.end(), prev.entered_sd_at[i]) == cohorts.end())
                    cohorts.push_back(prev.entered_sd_at[i]);
            for (std::size_t t0 : cohorts) {
                const std::size_t tau = t - t0;
                if (tau >= p.b || t0 == 0 || t0 > prev.sd_history.size()) continue;
                const std::size_t cohort_size = prev.sd_history[t0 - 1];
                std::vector<std::size_t> alive;
                for (std::size_t i : sd_members)
                    if (prev.entered_sd_at[i] == t0 && !st.removed.contains(i)) alive.push_back(i);
                const std::size_t gone = cohort_size - alive.size();
                const std::size_t required = (tau * cohort_size + p.b - 1) / p.b;
                std::size_t need = required > gone ? required - gone : 0;
                std::sort(alive.begin(), alive.end(), by_magnitude);
                for (std::size_t k = 0; k < std::min(need, alive.size()); ++k)
                    if (std::find(urgent.begin(), urgent.end(), alive[k]) == urgent.end())
                        urgent.push_back(alive[k]);
            }
        }
        std::sort(urgent.begin(), urgent.end(), by_age_then_magnitude);
        for (std::size_t i : urgent) {
            if (st.removed.size() >= p.S_a) break;
            st.removed.insert(i);
        }

        // (3) mu_4 filler
        std::vector<std::size_t> rest;
        for (std::size_t i : sd_members)
            if (!st.removed.contains(i)) rest.push_back(i);
        std::sort(rest.begin(), rest.end(), by_magnitude);
        for (std::size_t k = 0; k < rest.size() && st.removed.size() < std::min(s_r_t, p.S_a); ++k)
            st.removed.insert(rest[k]);
    }

    // additions from the current off-support pool
    {
        IndexSet outside = prev.support.complement(p.m);
        std::vector<std::size_t> pool(outside.begin(), outside.end());
        if (pool.size() < s_a_t) throw model_error("step_model2: no room for additions");
        for (std::size_t i : detail::draw_without_replacement(pool, s_a_t, rng)) st.added.insert(i);
    }

    // magnitude updates
    const std::size_t dmin = p.d_min;
    auto adds_at = [&](std::size_t tau) -> const IndexSet* {
        if (tau > prev.adds_by_time.size() - 1) return nullptr;
        return &prev.adds_by_time[tau];
    };

    for (std::size_t i : st.added) {
        st.magnitudes[i] = rng.uniform(1.0, 1.44) * p.a_min;
        st.signs[i] = rng.sign();
        st.support.insert(i);
        st.add_log.push_back({i, t, st.magnitudes[i], {}});
    }
    // forced increase window: added within the last d_min - 1 steps
    for (std::size_t back = 1; back + 1 <= dmin; ++back) {
        if (t < back) break;
        const IndexSet* a_tau = adds_at(t - back);
        if (!a_tau) continue;
        for (std::size_t i : *a_tau) {
            const double inc = rng.uniform(1.0, 1.44) * p.r_min;
            st.magnitudes[i] += inc;
            for (auto it = st.add_log.rbegin(); it != st.add_log.rend(); ++it)
                if (it->index == i && it->t == t - back) {
                    it->rates.push_back(inc);
                    break;
                }
        }
    }
    // graduating adds: the d_min-th increase must land them above ell
    if (t >= dmin) {
        if (const IndexSet* a_tau = adds_at(t - dmin)) {
            for (std::size_t i : *a_tau) {
                const double lo = std::max(0.0, ell - st.magnitudes[i]);
                const double hi = std::max(p.r_min, lo + p.r_min);
                const double u = 1.0 - rng.uniform(); // in (0, 1]
                const double inc = lo + (hi - lo) * u;
                st.magnitudes[i] += inc;
                for (auto it = st.add_log.rbegin(); it != st.add_log.rend(); ++it)
                    if (it->index == i && it->t == t - dmin) {
                        it->rates.push_back(inc);
                        break;
                    }
            }
        }
    }
    // veterans of the large set drift but never drop below ell
    for (std::size_t i : prev.large) {
        if (st.new_decreasing.contains(i)) continue;
        const double slack = prev.magnitudes[i] - ell;
        const double u = 1.0 - rng.uniform(); // in (0, 1]
        const double inc = -slack + (slack + p.r_min) * u;
        st.magnitudes[i] += inc;
    }
    // decreasing elements decay by about ell/b per step; a zero-crosser that
    // was not removed this step (removal capacity) stays positive and shrinking
    for (std::size_t k = 0; k < sd_members.size(); ++k) {
        const std::size_t i = sd_members[k];
        if (st.removed.contains(i)) continue;
        st.magnitudes[i] = std::max(prev.magnitudes[i] - sd_decay[k], 0.15 * prev.magnitudes[i]);
    }
    // new decreasing elements drop just below ell
    for (std::size_t i : st.new_decreasing) {
        const double drop = rng.uniform(1.0, 1.44) * (prev.magnitudes[i] - ell);
        double next = prev.magnitudes[i] - drop;
        if (next <= 0.0) next = rng.uniform(0.05, 0.25) * ell; // keep it positive and below ell
        st.magnitudes[i] = next;
        st.entered_sd_at[i] = t;
    }
    for (std::size_t i : st.removed) {
        st.magnitudes[i] = 0.0;
        st.signs[i] = 0;
        st.support.erase(i);
        st.entered_sd_at[i] = kNever;
    }

    // set bookkeeping
    IndexSet new_large;
    for (std::size_t i : prev.large)
        if (!st.new_decreasing.contains(i)) new_large.insert(i);
    if (t >= dmin)
        if (const IndexSet* a_tau = adds_at(t - dmin))
            for (std::size_t i : *a_tau) new_large.insert(i);
    st.large = new_large;

    IndexSet new_sd;
    for (std::size_t i : prev.small_decreasing)
        if (!st.removed.contains(i)) new_sd.insert(i);
    for (std::size_t i : st.new_decreasing)
        if (!st.removed.contains(i)) new_sd.insert(i);
    st.small_decreasing = new_sd;

    st.adds_by_time.push_back(st.added);
    st.sa_history.push_back(st.added.size());
    st.sd_history.push_back(st.new_decreasing.size());
    st.sr_history.push_back(st.removed.size());

    if (st.support.size() > p.S)
        throw model_error("step_model2: support size exceeded S");
    return st;
}

} // namespace modcs
