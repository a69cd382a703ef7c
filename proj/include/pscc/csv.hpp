#pragma once

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "pscc/harness.hpp"

namespace pscc {

/// Shortest round-trip decimal representation, 17 significant digits.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void write_samples_csv(const std::string& path, const RunLog& log) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("csv: cannot open '" + path + "'");
    f << "t,iref_alpha,iref_beta,iref_x,iref_y,i_alpha,i_beta,i_x,i_y,u_index,sc,cost\n";
    for (const auto& r : log.samples) {
        f << format_double(r.t) << ',' << format_double(r.ref.al) << ','
          << format_double(r.ref.be) << ',' << format_double(r.ref.x) << ','
          << format_double(r.ref.y) << ',' << format_double(r.is.al) << ','
          << format_double(r.is.be) << ',' << format_double(r.is.x) << ','
          << format_double(r.is.y) << ',' << r.u_index << ',' << r.sc << ','
          << format_double(r.J) << '\n';
    }
}

inline void write_blocks_csv(const std::string& path, const RunLog& log) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("csv: cannot open '" + path + "'");
    f << "t,gamma1,gamma2,gamma3,lambda_xy,lambda_sc,omega,sw_per_sec\n";
    for (const auto& b : log.blocks) {
        f << format_double(b.t_end) << ',' << format_double(b.gamma1) << ','
          << format_double(b.gamma2) << ',' << format_double(b.gamma3) << ','
          << format_double(b.lambda_xy) << ',' << format_double(b.lambda_sc) << ','
          << format_double(b.omega) << ',' << format_double(b.sw_per_sec) << '\n';
    }
}

inline void write_pareto_csv(const std::string& path, const std::vector<ParetoRow>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("csv: cannot open '" + path + "'");
    f << "lambda_xy,lambda_sc,gamma1,gamma2,gamma3\n";
    for (const auto& r : rows) {
        f << format_double(r.w.lambda_xy) << ',' << format_double(r.w.lambda_sc) << ','
          << format_double(r.gamma.gamma1) << ',' << format_double(r.gamma.gamma2) << ','
          << format_double(r.gamma.gamma3) << '\n';
    }
}

} // namespace pscc
