#pragma once

#include "pscc/machine.hpp"
#include "pscc/predictor.hpp"
#include "pscc/vsi.hpp"

namespace pscc {

/// Cost-function weights Lambda = (lambda_xy, lambda_sc).
struct WeightVector {
    double lambda_xy{0.0};
    double lambda_sc{0.0};
};

struct SelectionResult {
    VsiState u_opt{};
    double J_opt{0.0};
    int sc{0};
};

/// J = ||e_ab||^2 + lambda_xy*||e_xy||^2 + lambda_sc*SC
inline double cost(Vec2 e_ab_pred, Vec2 e_xy_pred, int sc, const WeightVector& w) {
    return norm_sq(e_ab_pred) + w.lambda_xy * norm_sq(e_xy_pred) + w.lambda_sc * sc;
}

/// Exhaustive argmin over the 32 inverter states; ties go to the lower
/// state index (the enumeration order).
inline SelectionResult select(const Currents& ref_k2, const Currents& is_k,
                              const VsiState& u_applied, const DiscreteModel& m,
                              const CorrectionTerm& corr, const WeightVector& w) {
    SelectionResult best;
    bool first = true;
    for (const auto& cand : enumerate_states()) {
        Currents pred = predict_two_step(is_k, u_applied, cand, m, corr);
        Currents e = ref_k2 - pred;
        int sc = switch_changes(u_applied, cand);
        double J = cost({e.al, e.be}, {e.x, e.y}, sc, w);
        if (first || J < best.J_opt) {
            best = {cand, J, sc};
            first = false;
        }
    }
    return best;
}

} // namespace pscc
