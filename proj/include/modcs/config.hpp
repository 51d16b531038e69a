#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "modcs/harness.hpp"

namespace modcs {

/// Flat key-value config with [section] headers; '#' starts a comment.
/// Keys are addressed as "section.key".
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw io_error("config: cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    static ConfigFile parse(const std::string& text) {
        ConfigFile cfg;
        std::istringstream in(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw io_error("config: expected key = value at line " + std::to_string(lineno));
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw io_error("config: empty key at line " + std::to_string(lineno));
            cfg.values_[section.empty() ? key : section + "." + key] = value;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double real(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return std::stod(it->second);
    }

    std::size_t count(const std::string& key, std::size_t fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return static_cast<std::size_t>(std::stoull(it->second));
    }

    bool flag(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        return it->second == "1" || it->second == "true" || it->second == "on" ||
               it->second == "yes";
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
};

/// Builds an ExperimentConfig from the [model]/[sensing]/[run] sections.
inline ExperimentConfig experiment_from_config(const ConfigFile& f) {
    ExperimentConfig cfg;
    const std::string model = f.str("model.type", "assumptions2");
    if (model == "assumptions1")
        cfg.model = ModelId::assumptions1;
    else if (model == "assumptions2")
        cfg.model = ModelId::assumptions2;
    else if (model == "assumptions3")
        cfg.model = ModelId::assumptions3;
    else
        throw input_error("config: unknown model.type " + model);

    if (cfg.model == ModelId::assumptions1) {
        cfg.model1.S = f.count("model.S", 0);
        cfg.model1.S_a = f.count("model.S_a", 0);
        cfg.model1.r = f.real("model.r", 1.0);
        cfg.model1.d = f.count("model.d", 1);
        cfg.model1.m = f.count("model.m", 0);
    } else {
        cfg.model2.S = f.count("model.S", 0);
        cfg.model2.S_a = f.count("model.S_a", 0);
        cfg.model2.d_min = f.count("model.d_min", 1);
        cfg.model2.b = f.count("model.b", 1);
        cfg.model2.a_min = f.real("model.a_min", f.real("model.r", 1.0));
        cfg.model2.r_min = f.real("model.r_min", f.real("model.r", 1.0));
        cfg.model2.m = f.count("model.m", 0);
    }

    cfg.n0 = f.count("sensing.n0", 0);
    cfg.n = f.count("sensing.n", 0);
    cfg.c0 = f.real("sensing.c0", 0.0);
    cfg.c = f.real("sensing.c", 0.0);
    cfg.fixed_matrix = f.str("sensing.matrix", "fixed") != "varying";

    cfg.t_max = f.count("run.t_max", 1);
    cfg.realizations = f.count("run.realizations", 1);
    cfg.master_seed = f.count("run.seed", 1);
    cfg.invariant_checks = f.flag("run.invariant_checks", true);
    cfg.threads = f.count("run.threads", 0);

    cfg.algorithms.clear();
    std::istringstream algos(f.str("run.algorithms", "noisy_l1,modcs,addlsdel"));
    std::string name;
    while (std::getline(algos, name, ',')) {
        auto a = algorithm_from_name(name);
        if (!a) throw input_error("config: unknown algorithm " + name);
        cfg.algorithms.push_back(*a);
    }

    if (f.has("thresholds.alpha")) cfg.thresholds.alpha = f.real("thresholds.alpha", 0.0);
    if (f.has("thresholds.alpha_add")) cfg.thresholds.alpha_add = f.real("thresholds.alpha_add", 0.0);
    if (f.has("thresholds.alpha_del")) cfg.thresholds.alpha_del = f.real("thresholds.alpha_del", 0.0);

    cfg.solver.max_iterations = f.count("solver.max_iterations", cfg.solver.max_iterations);
    cfg.solver.primal_tol = f.real("solver.primal_tol", cfg.solver.primal_tol);
    cfg.solver.dual_tol = f.real("solver.dual_tol", cfg.solver.dual_tol);
    cfg.solver.penalty = f.real("solver.penalty", cfg.solver.penalty);
    return cfg;
}

} // namespace modcs
