#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "modcs/harness.hpp"

namespace modcs {

namespace detail {

inline std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

/// Columns: t,algorithm,nmse,extras,misses,violations,nonconverged.
/// Missing metrics (all-zero truth) serialize as empty cells.
inline void export_csv(const MetricsSeries& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("export_csv: cannot write " + path);
    out << "t,algorithm,nmse,extras,misses,violations,nonconverged\n";
    for (std::size_t t = 0; t < s.t_max; ++t) {
        for (std::size_t k = 0; k < s.algorithms.size(); ++k) {
            out << t << ',' << algorithm_name(s.algorithms[k]) << ',';
            if (auto v = s.nmse(k, t)) out << detail::format_full(*v);
            out << ',';
            if (auto v = s.extras(k, t)) out << detail::format_full(*v);
            out << ',';
            if (auto v = s.misses(k, t)) out << detail::format_full(*v);
            out << ',' << s.series[k].violations[t] << ',' << s.series[k].nonconverged[t] << '\n';
        }
    }
    if (!out) throw io_error("export_csv: write failed for " + path);
}

inline nlohmann::json metrics_to_json(const MetricsSeries& s) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t t = 0; t < s.t_max; ++t) {
        for (std::size_t k = 0; k < s.algorithms.size(); ++k) {
            nlohmann::json row;
            row["t"] = t;
            row["algorithm"] = algorithm_name(s.algorithms[k]);
            if (auto v = s.nmse(k, t)) row["nmse"] = *v; else row["nmse"] = nullptr;
            if (auto v = s.extras(k, t)) row["extras"] = *v; else row["extras"] = nullptr;
            if (auto v = s.misses(k, t)) row["misses"] = *v; else row["misses"] = nullptr;
            row["violations"] = s.series[k].violations[t];
            row["nonconverged"] = s.series[k].nonconverged[t];
            rows.push_back(std::move(row));
        }
    }
    nlohmann::json j;
    j["t_max"] = s.t_max;
    j["realizations"] = s.realizations;
    j["zeta_m_ratio"] = s.zeta_m_ratio;
    j["zeta_l_ratio"] = s.zeta_l_ratio;
    j["rows"] = std::move(rows);
    return j;
}

inline void export_json(const MetricsSeries& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("export_json: cannot write " + path);
    out << metrics_to_json(s).dump(2) << '\n';
    if (!out) throw io_error("export_json: write failed for " + path);
}

/// Static line charts of the three metric series (NMSE, normalized extras,
/// normalized misses) over time, one polyline per algorithm per panel.
inline void export_svg(const MetricsSeries& s, const std::string& path) {
    const int width = 760, panel = 230, gap = 34, left = 60, right = 20;
    const int height = 3 * (panel + gap) + 10;
    const char* colors[] = {"#c0392b", "#2980b9", "#27ae60", "#8e44ad"};
    const char* titles[] = {"NMSE", "normalized extras", "normalized misses"};

    std::ofstream out(path);
    if (!out) throw io_error("export_svg: cannot write " + path);
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";

    auto value = [&](int metric, std::size_t k, std::size_t t) -> std::optional<double> {
        if (metric == 0) return s.nmse(k, t);
        if (metric == 1) return s.extras(k, t);
        return s.misses(k, t);
    };

    const double px = static_cast<double>(width - left - right);
    for (int metric = 0; metric < 3; ++metric) {
        const int top = 24 + metric * (panel + gap);
        double ymax = 0.0;
        for (std::size_t k = 0; k < s.algorithms.size(); ++k)
            for (std::size_t t = 0; t < s.t_max; ++t)
                if (auto v = value(metric, k, t)) ymax = std::max(ymax, *v);
        if (ymax <= 0.0) ymax = 1.0;

        out << "<line x1='" << left << "' y1='" << top + panel << "' x2='" << width - right
            << "' y2='" << top + panel << "' stroke='black'/>\n";
        out << "<line x1='" << left << "' y1='" << top << "' x2='" << left << "' y2='"
            << top + panel << "' stroke='black'/>\n";
        out << "<text x='" << left << "' y='" << top - 6 << "' font-size='12'>" << titles[metric]
            << " (max " << detail::format_full(ymax) << ")</text>\n";
        for (std::size_t k = 0; k < s.algorithms.size(); ++k) {
            out << "<polyline fill='none' stroke='" << colors[k % 4]
                << "' stroke-width='1.5' points='";
            for (std::size_t t = 0; t < s.t_max; ++t) {
                if (auto v = value(metric, k, t)) {
                    const double x = left + px * static_cast<double>(t) /
                                                static_cast<double>(std::max<std::size_t>(1, s.t_max - 1));
                    const double y = top + panel - panel * (*v / ymax);
                    out << x << ',' << y << ' ';
                }
            }
            out << "'/>\n";
            if (metric == 0)
                out << "<text x='" << width - right - 120 << "' y='" << top + 14 + 15 * k
                    << "' font-size='12' fill='" << colors[k % 4] << "'>"
                    << algorithm_name(s.algorithms[k]) << "</text>\n";
        }
    }
    out << "</svg>\n";
    if (!out) throw io_error("export_svg: write failed for " + path);
}

} // namespace modcs
