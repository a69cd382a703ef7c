#pragma once

#include "pscc/machine.hpp"
#include "pscc/vsi.hpp"

namespace pscc {

/// Controller-side discrete model of the stator currents,
///   i(k+1) = Phi(omega) * i(k) + Psi * v(u(k)),
/// forward-Euler discretized at Ts. The alpha-beta block carries the speed
/// coupling; the x-y block is a plain R-L circuit and is speed independent.
struct DiscreteModel {
    // Phi alpha-beta 2x2 block, row major.
    double phi_ab[2][2]{};
    // Phi x-y block is diag(phi_xy).
    double phi_xy{0.0};
    // Psi blocks are scalar gains on the plane voltages.
    double psi_ab{0.0};
    double psi_xy{0.0};
    double Vdc{0.0};
    double omega_cached{0.0};
};

/// Residual vector G compensating the unmeasured rotor currents.
struct CorrectionTerm {
    Currents G{};
};

inline DiscreteModel build_discrete_model(double omega, const MachineParams& p) {
    const double Ls = p.Ls(), Lr = p.Lr();
    const double sigma = Ls * Lr - p.LM * p.LM;
    const double w_e = p.P * omega;

    // Continuous reduced model (rotor currents at zero):
    //   dis/dt = (Lr/sigma)*(v - Rs*is) - (LM^2*w_e/sigma)*J*is
    // with J the 90-degree rotation.
    const double a_diag = -p.Rs * Lr / sigma;
    const double a_cross = p.LM * p.LM * w_e / sigma;

    DiscreteModel m;
    m.phi_ab[0][0] = 1.0 + p.Ts * a_diag;
    m.phi_ab[0][1] = p.Ts * a_cross;
    m.phi_ab[1][0] = -p.Ts * a_cross;
    m.phi_ab[1][1] = 1.0 + p.Ts * a_diag;
    m.phi_xy = 1.0 - p.Ts * p.Rs / p.Lls;
    m.psi_ab = p.Ts * Lr / sigma;
    m.psi_xy = p.Ts / p.Lls;
    m.Vdc = p.Vdc;
    m.omega_cached = omega;
    return m;
}

/// One application of the discrete map, Eq-style i(k+1) = Phi*i + Psi*v(u).
inline Currents predict_one_step(const Currents& is_k, const VsiState& u_k,
                                 const DiscreteModel& m) {
    auto v = state_voltages(u_k, m.Vdc);
    Currents out;
    out.al = m.phi_ab[0][0] * is_k.al + m.phi_ab[0][1] * is_k.be + m.psi_ab * v.ab.a;
    out.be = m.phi_ab[1][0] * is_k.al + m.phi_ab[1][1] * is_k.be + m.psi_ab * v.ab.b;
    out.x = m.phi_xy * is_k.x + m.psi_xy * v.xy.a;
    out.y = m.phi_xy * is_k.y + m.psi_xy * v.xy.b;
    return out;
}

/// Backtracked residual G(k) = i_s(k) - i_s_hat(k).
inline CorrectionTerm update_correction(const Currents& is_meas_k, const Currents& is_pred_k) {
    return {is_meas_k - is_pred_k};
}

/// Delay-compensated prediction for k+2: the committed action u(k) takes the
/// state to k+1, the candidate to k+2, and G is added once at the second step.
inline Currents predict_two_step(const Currents& is_k, const VsiState& u_k_applied,
                                 const VsiState& u_candidate, const DiscreteModel& m,
                                 const CorrectionTerm& corr) {
    Currents i1 = predict_one_step(is_k, u_k_applied, m);
    return predict_one_step(i1, u_candidate, m) + corr.G;
}

} // namespace pscc
