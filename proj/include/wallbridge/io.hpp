#pragma once

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "mc_sim.hpp"

namespace wallbridge::io {

/// 17 significant digits: enough to read back the same double.
inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
    out << '\n';
    for (const auto& r : rows) {
        if (r.size() != header.size()) throw DomainError(detail::cat("write_csv: row of ", r.size(), " values for ", header.size(), " columns"));
        for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << num(r[c]);
        out << '\n';
    }
}

inline void write_histogram_csv(std::ostream& out, const Histogram& h) {
    std::vector<std::vector<double>> rows;
    for (std::size_t b = 0; b < h.density.size(); ++b)
        rows.push_back({h.lo + b * h.width(), h.lo + (b + 1) * h.width(), h.density[b], h.stderr_[b]});
    write_csv(out, {"lo", "hi", "density", "stderr"}, rows);
}

}  // namespace wallbridge::io
