#pragma once

#include <cmath>
#include <stdexcept>

#include "pscc/machine.hpp"

namespace pscc {

/// One finalized window of performance indices.
struct MetricsBlock {
    double gamma1{0.0};   // RMS alpha-beta current error, A
    double gamma2{0.0};   // RMS x-y current error, A
    double gamma3{0.0};   // switching-frequency estimate, literal formula units
    double sw_per_sec{0.0}; // plain commutations-per-leg-pair rate, 1/s
    double t_end{0.0};
    double omega{0.0};    // mechanical speed at window end, rad/s
    double lambda_xy{0.0};
    double lambda_sc{0.0};
};

/// Accumulates squared current errors and switch changes over non-overlapping
/// blocks of N control periods.
class MetricsAccumulator {
public:
    MetricsAccumulator(int N, double Ts) : N_(N), Ts_(Ts) {
        if (N < 1) throw std::invalid_argument("metrics: N must be >= 1");
        if (Ts <= 0) throw std::invalid_argument("metrics: Ts must be positive");
    }

    void accumulate(Vec2 e_ab, Vec2 e_xy, int sc, double omega_e) {
        if (count_ >= N_) throw std::logic_error("metrics: window already full, finalize first");
        sum_sq_ab_ += norm_sq(e_ab);
        sum_sq_xy_ += norm_sq(e_xy);
        sum_sc_ += sc;
        sum_omega_e_ += omega_e;
        ++count_;
    }

    bool full() const { return count_ == N_; }
    int count() const { return count_; }
    int window_length() const { return N_; }

    /// gamma1 = sqrt(sum_sq_ab/N), gamma2 = sqrt(sum_sq_xy/N),
    /// gamma3 = (2*pi / (N*Ts*|omega_e_avg|)) * sum_sc/6.
    /// Resets the accumulator. omega_e_avg is floored at 1e-3 rad/s so a
    /// zero-crossing window stays finite.
    MetricsBlock finalize() {
        if (count_ != N_) throw std::logic_error("metrics: incomplete window");
        MetricsBlock b;
        b.gamma1 = std::sqrt(sum_sq_ab_ / N_);
        b.gamma2 = std::sqrt(sum_sq_xy_ / N_);
        double omega_e_avg = std::max(std::abs(sum_omega_e_ / N_), 1e-3);
        b.gamma3 = (two_pi / (N_ * Ts_ * omega_e_avg)) * (sum_sc_ / 6.0);
        b.sw_per_sec = sum_sc_ / (6.0 * N_ * Ts_);
        sum_sq_ab_ = sum_sq_xy_ = sum_omega_e_ = 0.0;
        sum_sc_ = 0;
        count_ = 0;
        return b;
    }

private:
    int N_;
    double Ts_;
    double sum_sq_ab_{0.0};
    double sum_sq_xy_{0.0};
    long sum_sc_{0};
    double sum_omega_e_{0.0};
    int count_{0};
};

} // namespace pscc
