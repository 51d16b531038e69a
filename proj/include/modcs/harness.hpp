#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "modcs/analysis.hpp"
#include "modcs/model_check.hpp"
#include "modcs/sensing.hpp"
#include "modcs/signal_model.hpp"
#include "modcs/trackers.hpp"

namespace modcs {

enum class Algorithm { noisy_l1, modcs, addlsdel };

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::noisy_l1: return "noisy_l1";
        case Algorithm::modcs: return "modcs";
        case Algorithm::addlsdel: return "addlsdel";
    }
    return "?";
}

inline std::optional<Algorithm> algorithm_from_name(const std::string& s) {
    if (s == "noisy_l1" || s == "cs" || s == "l1") return Algorithm::noisy_l1;
    if (s == "modcs") return Algorithm::modcs;
    if (s == "addlsdel" || s == "modcs_addlsdel") return Algorithm::addlsdel;
    return std::nullopt;
}

struct ExperimentConfig {
    ModelId model = ModelId::assumptions2;
    Model1Params model1;
    Model2Params model2;
    std::size_t n0 = 0;   // measurements at t = 0
    std::size_t n = 0;    // measurements at t > 0
    double c0 = 0.0;      // noise half-width at t = 0
    double c = 0.0;       // noise half-width at t > 0
    std::size_t t_max = 1;
    std::size_t realizations = 1;
    std::vector<Algorithm> algorithms{Algorithm::noisy_l1, Algorithm::modcs, Algorithm::addlsdel};
    bool fixed_matrix = true; // A_t = A for all t >= 1
    std::uint64_t master_seed = 1;
    Thresholds thresholds;    // all unset = automatic rules
    bool invariant_checks = true;
    SolverConfig solver{20000, 1e-6, 1e-6, 1.0};
    std::size_t threads = 0;  // 0 = hardware concurrency

    std::size_t dimension() const {
        return model == ModelId::assumptions1 ? model1.m : model2.m;
    }

    void validate() const {
        if (t_max < 1) throw input_error("ExperimentConfig: at least one frame required");
        if (realizations < 1) throw input_error("ExperimentConfig: realizations must be >= 1");
        if (algorithms.empty()) throw input_error("ExperimentConfig: algorithm list is empty");
        if (n0 == 0 || n == 0) throw input_error("ExperimentConfig: measurement counts missing");
        if (c0 < 0 || c < 0) throw input_error("ExperimentConfig: negative noise half-width");
        if (model == ModelId::assumptions1)
            model1.validate();
        else
            model2.validate();
    }
};

struct AlgoSeries {
    // sums over realizations, indexed by t
    std::vector<double> err_sq;
    std::vector<double> sig_sq;
    std::vector<double> extras;
    std::vector<double> misses;
    std::vector<double> support;
    std::vector<std::uint64_t> violations;
    std::vector<std::uint64_t> nonconverged;

    void resize(std::size_t t_max) {
        err_sq.assign(t_max, 0.0);
        sig_sq.assign(t_max, 0.0);
        extras.assign(t_max, 0.0);
        misses.assign(t_max, 0.0);
        support.assign(t_max, 0.0);
        violations.assign(t_max, 0);
        nonconverged.assign(t_max, 0);
    }
};

struct MetricsSeries {
    std::size_t t_max = 0;
    std::size_t realizations = 0;
    std::vector<Algorithm> algorithms;
    std::vector<AlgoSeries> series; // parallel to algorithms
    double zeta_m_ratio = 0.0;      // max ||e||_inf/||e||_2 of the mod-CS error
    double zeta_l_ratio = 0.0;      // same for the LS-step error on T_add

    std::optional<double> nmse(std::size_t algo, std::size_t t) const {
        if (series[algo].sig_sq[t] == 0.0) return std::nullopt;
        return series[algo].err_sq[t] / series[algo].sig_sq[t];
    }
    std::optional<double> extras(std::size_t algo, std::size_t t) const {
        if (series[algo].support[t] == 0.0) return std::nullopt;
        return series[algo].extras[t] / series[algo].support[t];
    }
    std::optional<double> misses(std::size_t algo, std::size_t t) const {
        if (series[algo].support[t] == 0.0) return std::nullopt;
        return series[algo].misses[t] / series[algo].support[t];
    }

    std::uint64_t total_violations() const {
        std::uint64_t v = 0;
        for (const auto& s : series)
            for (auto x : s.violations) v += x;
        return v;
    }

    double mean_nmse(std::size_t algo, std::size_t t_from, std::size_t t_to) const {
        double s = 0.0;
        std::size_t k = 0;
        for (std::size_t t = t_from; t < std::min(t_to, t_max); ++t)
            if (auto v = nmse(algo, t)) {
                s += *v;
                ++k;
            }
        return k ? s / static_cast<double>(k) : 0.0;
    }
    double mean_misses(std::size_t algo, std::size_t t_from, std::size_t t_to) const {
        double s = 0.0;
        std::size_t k = 0;
        for (std::size_t t = t_from; t < std::min(t_to, t_max); ++t)
            if (auto v = misses(algo, t)) {
                s += *v;
                ++k;
            }
        return k ? s / static_cast<double>(k) : 0.0;
    }
};

/// NMSE as the ratio of means over realizations:
/// E||x_t - x^_t||^2 / E||x_t||^2, per time index. Inputs are indexed
/// [realization][time]. All-zero truth at some t gives a missing value.
inline std::vector<std::optional<double>> nmse(const std::vector<std::vector<Vector>>& truth,
                                               const std::vector<std::vector<Vector>>& est) {
    if (truth.empty() || truth.size() != est.size()) throw input_error("nmse: shape mismatch");
    const std::size_t t_max = truth[0].size();
    std::vector<double> num(t_max, 0.0), den(t_max, 0.0);
    for (std::size_t r = 0; r < truth.size(); ++r) {
        if (truth[r].size() != t_max || est[r].size() != t_max)
            throw input_error("nmse: ragged sequences");
        for (std::size_t t = 0; t < t_max; ++t) {
            const Vector& x = truth[r][t];
            const Vector& xh = est[r][t];
            if (x.size() != xh.size()) throw input_error("nmse: dimension mismatch");
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - xh[i];
                num[t] += d * d;
                den[t] += x[i] * x[i];
            }
        }
    }
    std::vector<std::optional<double>> out(t_max);
    for (std::size_t t = 0; t < t_max; ++t)
        if (den[t] > 0.0) out[t] = num[t] / den[t];
    return out;
}

/// (extras, misses) normalized by the true support size; missing when empty.
inline std::optional<std::pair<double, double>> support_errors(const IndexSet& truth,
                                                               const IndexSet& estimate) {
    if (truth.empty()) return std::nullopt;
    const double n = static_cast<double>(truth.size());
    const double extras = static_cast<double>(estimate.set_difference(truth).size());
    const double misses = static_cast<double>(truth.set_difference(estimate).size());
    return std::make_pair(extras / n, misses / n);
}

namespace detail {

// Per-frame realizations of Proposition 3.1 / Proposition A.1, the LS-step
// error identity, and the support-set bookkeeping identities. Returns the
// number of violated assertions. The propositions' strict inequalities become
// exact ties when the thresholds land on grid points, so every comparison
// carries a small guard against floating-point coin flips.
inline std::size_t check_frame_invariants(Algorithm algo, const StepOutput& out, const Vector& x,
                                          const Vector& w, const DenseMatrix& a) {
    std::size_t bad = 0;
    IndexSet n_t = support_of(x);
    auto tie = [](double v) { return 1e-9 * std::max(1.0, std::abs(v)); };

    Vector err_modcs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) err_modcs[i] = x[i] - out.x_hat_modcs[i];
    const double modcs_inf = norm_inf(err_modcs);

    // N_t = T_t u Delta_t \ Delta_e,t
    {
        FrameDiagnostics d = diagnose(out, x);
        IndexSet rebuilt = out.predicted.set_union(d.delta).set_difference(d.delta_e);
        if (rebuilt != n_t) ++bad;
    }

    if (algo == Algorithm::addlsdel) {
        // A.1-1: comfortably-large entries enter T_add
        for (std::size_t i : n_t)
            if (std::abs(x[i]) > out.alpha_add + modcs_inf + tie(x[i]) &&
                !out.add_support.contains(i))
                ++bad;

        Vector err_add(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) err_add[i] = x[i] - out.x_hat_add[i];
        const double add_inf = norm_inf(err_add);

        // A.1-2: entries above alpha_del + the LS error survive deletion
        for (std::size_t i : out.add_support)
            if (std::abs(x[i]) > out.alpha_del + add_inf + tie(x[i]) && !out.support.contains(i))
                ++bad;

        // A.1-3: with alpha_del >= ||x - x^_add||_inf every extra is deleted
        if (out.alpha_del >= add_inf + tie(add_inf)) {
            IndexSet extras_add = out.add_support.set_difference(n_t);
            for (std::size_t i : extras_add)
                if (out.support.contains(i)) ++bad;
        }

        // LS-step error identity on T_add (signs follow the algebra:
        // (x - x^_add)_Tadd = -(B'B)^{-1} [B'w + B'A_Delta x_Delta])
        if (!out.add_support.empty()) {
            IndexSet delta_add = n_t.set_difference(out.add_support);
            DenseMatrix b = columns(a, out.add_support);
            Vector rhs = b.tmul(w);
            if (!delta_add.empty()) {
                DenseMatrix ad = columns(a, delta_add);
                Vector xd = subvector(x, delta_add);
                Vector adxd = ad.mul(xd);
                Vector b_adxd = b.tmul(adxd);
                for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] += b_adxd[k];
            }
            try {
                Cholesky ch;
                ch.factor(gram(b));
                Vector z = ch.solve(rhs);
                double worst = 0.0;
                for (std::size_t k = 0; k < out.add_support.size(); ++k) {
                    const double lhs = x[out.add_support[k]] - out.x_hat_add[out.add_support[k]];
                    worst = std::max(worst, std::abs(lhs + z[k]));
                }
                if (worst > 1e-8 * std::max(1.0, norm_inf(x))) ++bad;
            } catch (const singular_error&) {
                ++bad; // T_add was supposed to be well conditioned
            }
        }
    } else {
        // Proposition 3.1 for the single-threshold step
        for (std::size_t i : n_t)
            if (std::abs(x[i]) > out.alpha + modcs_inf + tie(x[i]) && !out.support.contains(i))
                ++bad;
        if (out.alpha >= modcs_inf + tie(modcs_inf)) {
            IndexSet extras = out.support.set_difference(n_t);
            if (!extras.empty()) ++bad;
        }
    }
    return bad;
}

struct RealizationResult {
    std::vector<AlgoSeries> series;
    double zeta_m_ratio = 0.0;
    double zeta_l_ratio = 0.0;
};

inline RealizationResult run_realization(const ExperimentConfig& cfg, std::size_t r) {
    const std::size_t m = cfg.dimension();
    RealizationResult out;
    out.series.resize(cfg.algorithms.size());
    for (auto& s : out.series) s.resize(cfg.t_max);

    // ground-truth sequence
    std::vector<SparseSequenceState> states;
    states.reserve(cfg.t_max);
    if (cfg.model == ModelId::assumptions1) {
        states.push_back(gen_model1_initial(cfg.model1, derive_seed(cfg.master_seed, r, 0,
                                                                    (std::uint64_t)StreamTag::signal)));
        Rng rng(derive_seed(cfg.master_seed, r, 1, (std::uint64_t)StreamTag::signal));
        for (std::size_t t = 1; t < cfg.t_max; ++t)
            states.push_back(step_model1(states.back(), cfg.model1, rng));
    } else {
        states.push_back(gen_model2_initial(cfg.model2, derive_seed(cfg.master_seed, r, 0,
                                                                    (std::uint64_t)StreamTag::signal)));
        Rng rng(derive_seed(cfg.master_seed, r, 1, (std::uint64_t)StreamTag::signal));
        const bool prop = cfg.model == ModelId::assumptions3;
        for (std::size_t t = 1; t < cfg.t_max; ++t)
            states.push_back(step_model2(states.back(), cfg.model2, rng, prop));
    }

    DenseMatrix a0 = gen_gaussian_unit_columns(cfg.n0, m,
                                               derive_seed(cfg.master_seed, r, 0,
                                                           (std::uint64_t)StreamTag::matrix));
    std::optional<Wl1Solver> solver0{Wl1Solver(a0)};
    std::optional<DenseMatrix> a_fixed;
    std::optional<Wl1Solver> solver_fixed;
    if (cfg.fixed_matrix) {
        a_fixed = gen_gaussian_unit_columns(cfg.n, m, derive_seed(cfg.master_seed, r, 1,
                                                                  (std::uint64_t)StreamTag::matrix));
        solver_fixed.emplace(*a_fixed);
    }

    std::vector<TrackerState> trackers(cfg.algorithms.size());

    std::optional<DenseMatrix> a_varying;
    std::optional<Wl1Solver> solver_varying;
    for (std::size_t t = 0; t < cfg.t_max; ++t) {
        const Vector x = states[t].x();
        const NoiseSpec spec(t == 0 ? cfg.c0 : cfg.c);
        const DenseMatrix* a;
        const Wl1Solver* solver;
        if (t == 0) {
            a = &a0;
            solver = &*solver0;
        } else if (cfg.fixed_matrix) {
            a = &*a_fixed;
            solver = &*solver_fixed;
        } else {
            a_varying = gen_gaussian_unit_columns(cfg.n, m, derive_seed(cfg.master_seed, r, t,
                                                                        (std::uint64_t)StreamTag::matrix));
            solver_varying.emplace(*a_varying);
            a = &*a_varying;
            solver = &*solver_varying;
        }
        Vector w = gen_bounded_uniform_noise(a->rows(), spec,
                                             derive_seed(cfg.master_seed, r, t,
                                                         (std::uint64_t)StreamTag::noise));
        MeasurementFrame frame = measure(*a, x, w, spec, t);
        IndexSet n_t = support_of(x);

        for (std::size_t k = 0; k < cfg.algorithms.size(); ++k) {
            const Algorithm algo = cfg.algorithms[k];
            StepOutput step;
            switch (algo) {
                case Algorithm::noisy_l1:
                    step = noisy_l1_step(trackers[k], frame, *solver, cfg.thresholds, cfg.solver);
                    break;
                case Algorithm::modcs:
                    step = modcs_step(trackers[k], frame, *solver, cfg.thresholds, cfg.solver);
                    break;
                case Algorithm::addlsdel:
                    step = addlsdel_step(trackers[k], frame, *solver, cfg.thresholds, cfg.solver);
                    break;
            }
            AlgoSeries& s = out.series[k];
            double esq = 0.0, xsq = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double d = x[i] - step.x_hat[i];
                esq += d * d;
                xsq += x[i] * x[i];
            }
            s.err_sq[t] += esq;
            s.sig_sq[t] += xsq;
            s.support[t] += static_cast<double>(n_t.size());
            s.extras[t] += static_cast<double>(step.support.set_difference(n_t).size());
            s.misses[t] += static_cast<double>(n_t.set_difference(step.support).size());
            if (!step.solver_converged) ++s.nonconverged[t];
            if (cfg.invariant_checks)
                s.violations[t] += detail::check_frame_invariants(algo, step, x, w, *a);

            // spread-constant samples
            if (algo == Algorithm::modcs) {
                Vector e(m);
                for (std::size_t i = 0; i < m; ++i) e[i] = x[i] - step.x_hat_modcs[i];
                const double n2 = norm2(e);
                if (n2 > 0.0) out.zeta_m_ratio = std::max(out.zeta_m_ratio, norm_inf(e) / n2);
            } else if (algo == Algorithm::addlsdel && !step.add_support.empty()) {
                Vector e = subvector(x, step.add_support);
                for (std::size_t j = 0; j < e.size(); ++j) e[j] -= step.x_hat_add[step.add_support[j]];
                const double n2 = norm2(e);
                if (n2 > 0.0) out.zeta_l_ratio = std::max(out.zeta_l_ratio, norm_inf(e) / n2);
            }
        }
    }
    return out;
}

} // namespace detail

/// Runs the full Monte-Carlo experiment. Realizations execute on a small
/// thread pool; the reduction is sequential in realization order, so results
/// are bit-identical for a given master seed regardless of thread count.
inline MetricsSeries run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();

    std::vector<detail::RealizationResult> partial(cfg.realizations);
    std::size_t n_threads = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
    if (n_threads == 0) n_threads = 1;
    n_threads = std::min<std::size_t>(n_threads, cfg.realizations);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t r = next.fetch_add(1);
            if (r >= cfg.realizations) break;
            partial[r] = detail::run_realization(cfg, r);
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    MetricsSeries series;
    series.t_max = cfg.t_max;
    series.realizations = cfg.realizations;
    series.algorithms = cfg.algorithms;
    series.series.resize(cfg.algorithms.size());
    for (auto& s : series.series) s.resize(cfg.t_max);
    for (std::size_t r = 0; r < cfg.realizations; ++r) {
        for (std::size_t k = 0; k < cfg.algorithms.size(); ++k) {
            AlgoSeries& acc = series.series[k];
            const AlgoSeries& p = partial[r].series[k];
            for (std::size_t t = 0; t < cfg.t_max; ++t) {
                acc.err_sq[t] += p.err_sq[t];
                acc.sig_sq[t] += p.sig_sq[t];
                acc.extras[t] += p.extras[t];
                acc.misses[t] += p.misses[t];
                acc.support[t] += p.support[t];
                acc.violations[t] += p.violations[t];
                acc.nonconverged[t] += p.nonconverged[t];
            }
        }
        series.zeta_m_ratio = std::max(series.zeta_m_ratio, partial[r].zeta_m_ratio);
        series.zeta_l_ratio = std::max(series.zeta_l_ratio, partial[r].zeta_l_ratio);
    }
    return series;
}

} // namespace modcs
