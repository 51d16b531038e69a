#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "modcs/matrix.hpp"

namespace modcs {

/// Sparse-sequence file: a header line "m <dimension>" followed by one
/// "t index value" triple per nonzero, whitespace separated, t ascending.
inline void write_sequence(const std::vector<Vector>& xs, const std::string& path) {
    if (xs.empty()) throw input_error("write_sequence: empty sequence");
    std::ofstream out(path);
    if (!out) throw io_error("write_sequence: cannot write " + path);
    out << "m " << xs.front().size() << '\n';
    char buf[40];
    for (std::size_t t = 0; t < xs.size(); ++t) {
        for (std::size_t i = 0; i < xs[t].size(); ++i) {
            if (xs[t][i] == 0.0) continue;
            std::snprintf(buf, sizeof buf, "%.17g", xs[t][i]);
            out << t << ' ' << i << ' ' << buf << '\n';
        }
    }
    if (!out) throw io_error("write_sequence: write failed for " + path);
}

inline std::vector<Vector> read_sequence(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("read_sequence: cannot open " + path);
    std::string line;
    std::size_t m = 0;
    std::vector<Vector> xs;
    bool header_seen = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ss(line);
        if (!header_seen) {
            std::string tag;
            if (!(ss >> tag >> m) || tag != "m" || m == 0)
                throw io_error("read_sequence: bad header at line " + std::to_string(lineno));
            header_seen = true;
            continue;
        }
        std::size_t t, i;
        double v;
        if (line.empty()) continue;
        if (!(ss >> t >> i >> v))
            throw io_error("read_sequence: bad triple at line " + std::to_string(lineno));
        if (i >= m) throw io_error("read_sequence: index out of range at line " + std::to_string(lineno));
        if (t >= xs.size()) xs.resize(t + 1, Vector(m, 0.0));
        xs[t][i] = v;
    }
    if (!header_seen || xs.empty()) throw io_error("read_sequence: no data in " + path);
    return xs;
}

} // namespace modcs
