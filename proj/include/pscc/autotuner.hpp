#pragma once

#include <stdexcept>

#include "pscc/cost_selector.hpp"
#include "pscc/metrics.hpp"
#include "pscc/outer_loop.hpp"

namespace pscc {

/// Gains and references of the two weighting-factor feedback loops:
/// C_G2 drives gamma2 to gamma2_ref via lambda_xy, C_G3 drives gamma3 to
/// gamma3_ref via lambda_sc. Updated once per metrics block.
struct TunerConfig {
    double gamma2_ref{0.050};
    double gamma3_ref{200.0};
    double g_p2{-1.0};
    double g_i2{-2.8};
    double g_p3{-4.5e-8};
    double g_i3{-1e-7};
    double lambda_xy_min{0.0};
    double lambda_xy_max{5.0};
    double lambda_sc_min{0.0};
    double lambda_sc_max{0.01};
    double dt_block{720 * 30e-6};

    void validate() const {
        if (gamma2_ref < 0 || gamma3_ref < 0)
            throw std::invalid_argument("tuner: references must be non-negative");
        if (lambda_xy_min < 0 || lambda_xy_min > lambda_xy_max ||
            lambda_sc_min < 0 || lambda_sc_min > lambda_sc_max)
            throw std::invalid_argument("tuner: weight bounds must be non-negative and ordered");
        if (dt_block <= 0) throw std::invalid_argument("tuner: dt_block must be positive");
    }
};

/// The two PI controllers mapping Gamma-errors to weighting factors.
class Autotuner {
public:
    Autotuner(const TunerConfig& cfg, const WeightVector& initial) : cfg_(cfg) {
        cfg.validate();
        pi2_ = {cfg.g_p2, cfg.g_i2, 0.0, cfg.lambda_xy_min, cfg.lambda_xy_max, cfg.dt_block};
        pi3_ = {cfg.g_p3, cfg.g_i3, 0.0, cfg.lambda_sc_min, cfg.lambda_sc_max, cfg.dt_block};
        // Integral preloading: the first zero-error update reproduces `initial`.
        if (cfg.g_i2 != 0.0) pi2_.integ = initial.lambda_xy / cfg.g_i2;
        if (cfg.g_i3 != 0.0) pi3_.integ = initial.lambda_sc / cfg.g_i3;
    }

    /// One update per finalized metrics block; returns the weights to apply
    /// from the next control period on.
    WeightVector step(const MetricsBlock& block) {
        auto r2 = pi_step(pi2_, cfg_.gamma2_ref - block.gamma2, true);
        auto r3 = pi_step(pi3_, cfg_.gamma3_ref - block.gamma3, true);
        pi2_ = r2.state;
        pi3_ = r3.state;
        return {r2.out, r3.out};
    }

    /// Swap references at a block boundary; integrators are preserved.
    void set_references(double gamma2_ref, double gamma3_ref) {
        if (gamma2_ref < 0 || gamma3_ref < 0)
            throw std::invalid_argument("tuner: references must be non-negative");
        cfg_.gamma2_ref = gamma2_ref;
        cfg_.gamma3_ref = gamma3_ref;
    }

    const TunerConfig& config() const { return cfg_; }

private:
    TunerConfig cfg_;
    PiState pi2_{};
    PiState pi3_{};
};

} // namespace pscc
