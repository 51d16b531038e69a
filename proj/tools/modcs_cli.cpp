// Command line driver: generate sparse sequences, run Monte-Carlo experiments,
// certify theorem conditions against a concrete matrix, and analyze external
// sparse sequences. Exit codes: 0 success/PASS, 1 FAIL verdict, 2 usage or
// config error, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "modcs/analysis.hpp"
#include "modcs/config.hpp"
#include "modcs/export.hpp"
#include "modcs/harness.hpp"
#include "modcs/model_check.hpp"
#include "modcs/sequence_io.hpp"

using namespace modcs;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

json condition_report_to_json(const ConditionReport& rep) {
    json j;
    j["theorem"] = rep.theorem;
    j["pass"] = rep.pass();
    j["complete"] = rep.complete;
    j["rip_provenance"] = rep.rip_verified ? "brute_force" : "asserted";
    j["conditions"] = json::array();
    for (const auto& c : rep.conditions) {
        json cj;
        cj["id"] = c.id;
        cj["description"] = c.description;
        cj["evaluated"] = c.evaluated;
        cj["verdict"] = !c.evaluated ? "UNEVALUATED" : (c.pass ? "PASS" : "FAIL");
        cj["lhs"] = c.lhs;
        cj["rhs"] = c.rhs;
        if (!c.note.empty()) cj["note"] = c.note;
        j["conditions"].push_back(std::move(cj));
    }
    j["derived"] = json::object();
    for (const auto& [k, v] : rep.derived) j["derived"][k] = v;
    j["conclusions"] = rep.conclusions;
    return j;
}

void print_condition_report(const ConditionReport& rep) {
    std::printf("%s: %s%s\n", rep.theorem.c_str(), rep.pass() ? "PASS" : "FAIL",
                rep.rip_verified ? " (brute-force RIP)" : " (asserted RIP bounds)");
    for (const auto& c : rep.conditions) {
        const char* verdict = !c.evaluated ? "----" : (c.pass ? "pass" : "FAIL");
        std::printf("  [%s] %-4s %s  (lhs=%.6g rhs=%.6g)%s%s\n", c.id.c_str(), verdict,
                    c.description.c_str(), c.lhs, c.rhs, c.note.empty() ? "" : "  # ",
                    c.note.c_str());
    }
    if (!rep.derived.empty()) {
        std::printf("  derived:");
        for (const auto& [k, v] : rep.derived) std::printf(" %s=%.6g", k.c_str(), v);
        std::printf("\n");
    }
    for (const auto& c : rep.conclusions) std::printf("  => %s\n", c.c_str());
}

json model_report_to_json(const ModelReport& rep) {
    json j;
    j["model"] = static_cast<int>(rep.model);
    j["pass"] = rep.pass();
    j["frames"] = rep.frames;
    j["dimension"] = rep.dimension;
    j["max_support"] = rep.max_support;
    j["max_additions"] = rep.max_additions;
    j["max_removals"] = rep.max_removals;
    j["addition_episodes"] = rep.addition_episodes;
    if (rep.addition_episodes > 0) {
        j["a_range"] = {rep.a_min_obs, rep.a_max_obs};
        j["rate_range"] = {rep.rate_min_obs, rep.rate_max_obs};
        j["increase_duration_range"] = {rep.d_min_obs, rep.d_max_obs};
    }
    j["removal_delay"] = rep.removal_delay_obs;
    j["clauses"] = json::array();
    for (const auto& c : rep.clauses) {
        json cj;
        cj["id"] = c.id;
        cj["description"] = c.description;
        cj["verdict"] = !c.evaluated ? "UNEVALUATED" : (c.pass ? "PASS" : "FAIL");
        cj["lhs"] = c.lhs;
        cj["rhs"] = c.rhs;
        j["clauses"].push_back(std::move(cj));
    }
    return j;
}

void print_model_report(const ModelReport& rep) {
    std::printf("sequence: %zu frames, dimension %zu\n", rep.frames, rep.dimension);
    std::printf("  max |N_t| = %zu, max additions = %zu, max removals = %zu\n", rep.max_support,
                rep.max_additions, rep.max_removals);
    if (rep.addition_episodes > 0) {
        std::printf("  additions: %zu episodes, a in [%.4g, %.4g], r in [%.4g, %.4g], d in [%zu, %zu]\n",
                    rep.addition_episodes, rep.a_min_obs, rep.a_max_obs, rep.rate_min_obs,
                    rep.rate_max_obs, rep.d_min_obs, rep.d_max_obs);
    }
    std::printf("  observed removal delay b = %zu\n", rep.removal_delay_obs);
    for (const auto& c : rep.clauses) {
        const char* verdict = !c.evaluated ? "----" : (c.pass ? "pass" : "FAIL");
        std::printf("  [%s] %-4s %s (lhs=%.6g rhs=%.6g)\n", c.id.c_str(), verdict,
                    c.description.c_str(), c.lhs, c.rhs);
    }
    std::printf("overall: %s\n", rep.pass() ? "PASS" : "FAIL");
}

DenseMatrix load_matrix(const std::string& source) {
    // either "gaussian:n,m,seed" or a whitespace matrix file
    if (source.rfind("gaussian:", 0) == 0) {
        std::size_t n = 0, m = 0;
        unsigned long long seed = 0;
        if (std::sscanf(source.c_str() + 9, "%zu,%zu,%llu", &n, &m, &seed) != 3)
            throw input_error("matrix source: expected gaussian:n,m,seed");
        return gen_gaussian_unit_columns(n, m, seed);
    }
    std::ifstream in(source);
    if (!in) throw io_error("cannot open matrix file " + source);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (!row.empty()) rows.push_back(std::move(row));
    }
    if (rows.empty()) throw io_error("matrix file is empty: " + source);
    DenseMatrix a(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows[0].size()) throw io_error("ragged matrix file: " + source);
        for (std::size_t c = 0; c < rows[0].size(); ++c) a(r, c) = rows[r][c];
    }
    return a;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Recursive sparse-sequence recovery: tracking, certification, experiments"};
    app.require_subcommand(1);

    // ---- generate ----------------------------------------------------------
    auto* gen = app.add_subcommand("generate", "Generate a sparse signal sequence file");
    std::string gen_config, gen_out = "sequence.txt";
    std::uint64_t gen_seed = 1;
    std::size_t gen_frames = 0;
    gen->add_option("--config", gen_config, "model config file")->required();
    gen->add_option("--out", gen_out, "output sequence path");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--frames", gen_frames, "frame count (overrides config)");

    // ---- run ----------------------------------------------------------------
    auto* run = app.add_subcommand("run", "Run a Monte-Carlo experiment");
    std::string run_config, run_out = ".";
    std::size_t run_realizations = 0;
    bool run_paper_scale = false, run_svg = false, run_json_flag = false;
    std::uint64_t run_seed = 0;
    run->add_option("--config", run_config, "experiment config file")->required();
    run->add_option("--out", run_out, "output directory");
    run->add_option("--realizations", run_realizations, "override realization count");
    run->add_flag("--paper-scale", run_paper_scale, "use the full 500-realization protocol");
    run->add_flag("--svg", run_svg, "also write an NMSE chart");
    run->add_flag("--json", run_json_flag, "print the summary as JSON");
    run->add_option("--seed", run_seed, "override master seed");

    // ---- certify ------------------------------------------------------------
    auto* cert = app.add_subcommand("certify", "Check a stability theorem's conditions");
    std::string cert_matrix, cert_theorem;
    bool cert_json = false;
    std::size_t cert_budget = kDefaultSubsetBudget;
    TheoremParams tp;
    std::vector<std::string> cert_assert_delta;
    std::string cert_trace;
    bool cert_assumptions2 = false;
    cert->add_option("--theorem", cert_theorem, "one of 3.2 3.3 4.3 4.8 5.5 5.9")->required();
    cert->add_option("--matrix", cert_matrix, "matrix file or gaussian:n,m,seed");
    cert->add_option("--assert-delta", cert_assert_delta,
                     "asserted bound ORDER:VALUE (repeatable, used when no matrix is given)");
    cert->add_option("--budget", cert_budget, "subset enumeration budget");
    cert->add_option("--S", tp.S, "support size bound")->required();
    cert->add_option("--Sa", tp.S_a, "support change bound")->required();
    cert->add_option("--eps", tp.epsilon, "noise norm bound");
    cert->add_option("--alpha", tp.alpha, "support threshold (default: theorem rule)");
    cert->add_option("--alpha-add", tp.alpha_add, "addition threshold");
    cert->add_option("--alpha-del", tp.alpha_del, "deletion threshold (default: theorem rule)");
    cert->add_option("--f", tp.f, "false-addition budget");
    cert->add_option("--zeta-m", tp.zeta_m, "spread constant for the l1 error");
    cert->add_option("--zeta-l", tp.zeta_l, "spread constant for the LS error");
    cert->add_option("--d0", tp.d0, "detection delay parameter");
    cert->add_option("--r", tp.r, "ladder step / rate");
    cert->add_option("--d", tp.d, "ladder height (model 1)");
    cert->add_option("--b", tp.b, "removal delay bound (model 2/3)");
    cert->add_option("--d-min", tp.d_min, "minimum increase duration (model 2/3)");
    cert->add_option("--a-min", tp.a_min, "minimum initial magnitude (model 2/3)");
    cert->add_option("--r-min", tp.r_min, "minimum increase rate (model 2/3)");
    cert->add_flag("--assumptions2", cert_assumptions2,
                   "use the Corollary 5.6 variant (Assumptions 2 instead of 3)");
    cert->add_option("--trace", cert_trace, "sequence file for the exact small-entries checks");
    cert->add_flag("--json", cert_json, "JSON report on stdout");

    // ---- analyze -------------------------------------------------------------
    auto* ana = app.add_subcommand("analyze", "Check a sparse sequence against a signal model");
    std::string ana_file;
    int ana_model = 2;
    bool ana_json = false;
    DeclaredBounds bounds;
    std::size_t dsS = 0, dsSa = 0, dsB = 0, dsDmin = 0, dsD = 0;
    double dsR = 0.0, dsEll = 0.0;
    ana->add_option("file", ana_file, "sequence file (header 'm <dim>', then 't index value')")
        ->required();
    ana->add_option("--model", ana_model, "1, 2 or 3");
    ana->add_option("--S", dsS, "declared support bound");
    ana->add_option("--Sa", dsSa, "declared change bound");
    ana->add_option("--b", dsB, "declared removal delay");
    ana->add_option("--d-min", dsDmin, "declared minimum increase duration");
    ana->add_option("--d", dsD, "declared ladder height (model 1)");
    ana->add_option("--r", dsR, "declared ladder step (model 1)");
    ana->add_option("--ell", dsEll, "declared large-set threshold (model 2/3)");
    ana->add_flag("--json", ana_json, "JSON report on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            ConfigFile f = ConfigFile::parse_file(gen_config);
            ExperimentConfig cfg = experiment_from_config(f); // model-only configs are fine here
            const std::size_t frames = gen->count("--frames") ? gen_frames : cfg.t_max;
            if (frames == 0) {
                std::fprintf(stderr, "error: at least one frame required\n");
                return kExitUsage;
            }
            std::vector<SparseSequenceState> states;
            if (cfg.model == ModelId::assumptions1) {
                cfg.model1.validate();
                states.push_back(gen_model1_initial(cfg.model1, derive_seed(gen_seed, 0, 0, 3)));
                Rng rng(derive_seed(gen_seed, 0, 1, 3));
                for (std::size_t t = 1; t < frames; ++t)
                    states.push_back(step_model1(states.back(), cfg.model1, rng));
            } else {
                cfg.model2.validate();
                states.push_back(gen_model2_initial(cfg.model2, derive_seed(gen_seed, 0, 0, 3)));
                Rng rng(derive_seed(gen_seed, 0, 1, 3));
                const bool prop = cfg.model == ModelId::assumptions3;
                for (std::size_t t = 1; t < frames; ++t)
                    states.push_back(step_model2(states.back(), cfg.model2, rng, prop));
            }
            auto xs = sequence_of(states);
            write_sequence(xs, gen_out);
            std::size_t max_support = 0, max_adds = 0;
            for (std::size_t t = 0; t < states.size(); ++t) {
                max_support = std::max(max_support, states[t].support.size());
                max_adds = std::max(max_adds, states[t].added.size());
            }
            std::printf("wrote %zu frames to %s (max |N_t| = %zu, max |A_t| = %zu)\n", frames,
                        gen_out.c_str(), max_support, max_adds);
            return kExitPass;
        }

        if (run->parsed()) {
            ConfigFile f = ConfigFile::parse_file(run_config);
            ExperimentConfig cfg = experiment_from_config(f);
            if (run_paper_scale) cfg.realizations = 500;
            if (run_realizations) cfg.realizations = run_realizations;
            if (run->count("--seed")) cfg.master_seed = run_seed;
            cfg.validate();

            MetricsSeries series = run_experiment(cfg);

            std::filesystem::create_directories(run_out);
            const std::string csv = run_out + "/metrics.csv";
            const std::string jsn = run_out + "/metrics.json";
            export_csv(series, csv);
            export_json(series, jsn);
            if (run_svg) export_svg(series, run_out + "/metrics.svg");

            // steady state starts at t = 20; shorter runs report their last half
            const std::size_t burn_in = cfg.t_max > 40 ? 20 : cfg.t_max / 2;
            json summary;
            summary["realizations"] = cfg.realizations;
            summary["steady_state_from"] = burn_in;
            for (std::size_t k = 0; k < cfg.algorithms.size(); ++k) {
                json a;
                a["mean_nmse"] = series.mean_nmse(k, burn_in, cfg.t_max);
                a["mean_misses"] = series.mean_misses(k, burn_in, cfg.t_max);
                std::uint64_t viol = 0, nonconv = 0;
                for (std::size_t t = 0; t < cfg.t_max; ++t) {
                    viol += series.series[k].violations[t];
                    nonconv += series.series[k].nonconverged[t];
                }
                a["violations"] = viol;
                a["nonconverged"] = nonconv;
                summary[algorithm_name(cfg.algorithms[k])] = std::move(a);
            }
            if (run_json_flag) {
                std::printf("%s\n", summary.dump(2).c_str());
            } else {
                std::printf("wrote %s and %s\n", csv.c_str(), jsn.c_str());
                for (std::size_t k = 0; k < cfg.algorithms.size(); ++k)
                    std::printf("  %-9s steady-state NMSE %.4f, misses %.4f\n",
                                algorithm_name(cfg.algorithms[k]),
                                series.mean_nmse(k, burn_in, cfg.t_max),
                                series.mean_misses(k, burn_in, cfg.t_max));
            }
            return kExitPass;
        }

        if (cert->parsed()) {
            std::optional<DenseMatrix> matrix;
            RipAccess rip = [&] {
                if (!cert_matrix.empty()) {
                    matrix = load_matrix(cert_matrix);
                    return RipAccess::exact(*matrix, cert_budget);
                }
                std::map<std::size_t, double> deltas;
                for (const auto& s : cert_assert_delta) {
                    std::size_t order = 0;
                    double value = 0.0;
                    if (std::sscanf(s.c_str(), "%zu:%lf", &order, &value) != 2)
                        throw input_error("--assert-delta expects ORDER:VALUE");
                    deltas[order] = value;
                }
                if (deltas.empty())
                    throw input_error("certify needs --matrix or at least one --assert-delta");
                return RipAccess::asserted(std::move(deltas));
            }();

            std::optional<std::vector<Vector>> trace;
            if (!cert_trace.empty()) trace = read_sequence(cert_trace);
            tp.assumptions3 = !cert_assumptions2;

            ConditionReport rep;
            if (cert_theorem == "3.2" || cert_theorem == "3.3")
                rep = check_theorem_general(cert_theorem, tp, rip, trace ? &*trace : nullptr);
            else if (cert_theorem == "4.3" || cert_theorem == "4.8")
                rep = check_theorem_model1(cert_theorem, tp, rip);
            else if (cert_theorem == "5.5" || cert_theorem == "5.9")
                rep = check_theorem_model2(cert_theorem, tp, rip);
            else
                throw input_error("unknown theorem id " + cert_theorem);

            if (cert_json)
                std::printf("%s\n", condition_report_to_json(rep).dump(2).c_str());
            else
                print_condition_report(rep);
            return rep.pass() ? kExitPass : kExitFail;
        }

        if (ana->parsed()) {
            auto xs = read_sequence(ana_file);
            if (dsS) bounds.S = dsS;
            if (dsSa) bounds.S_a = dsSa;
            if (dsB) bounds.b = dsB;
            if (dsDmin) bounds.d_min = dsDmin;
            if (dsD) bounds.d = dsD;
            if (dsR > 0) bounds.r = dsR;
            if (dsEll > 0) bounds.ell = dsEll;
            ModelId id = ana_model == 1 ? ModelId::assumptions1
                                        : (ana_model == 3 ? ModelId::assumptions3
                                                          : ModelId::assumptions2);
            ModelReport rep = verify_assumptions(xs, id, bounds);
            if (ana_json)
                std::printf("%s\n", model_report_to_json(rep).dump(2).c_str());
            else
                print_model_report(rep);
            return rep.pass() ? kExitPass : kExitFail;
        }
    } catch (const input_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const budget_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    } catch (const io_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitUsage;
}
