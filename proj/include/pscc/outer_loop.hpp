#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pscc/machine.hpp"

namespace pscc {

/// Discrete PI controller state with output clamp and conditional integration.
struct PiState {
    double kp{0.0};
    double ki{0.0};
    double integ{0.0};
    double u_min{-1e300};
    double u_max{1e300};
    double dt{0.0};
};

struct PiOutput {
    double out{0.0};
    PiState state{};
};

/// One PI update: out = clamp(kp*e + ki*integ'), integ' = integ + e*dt.
/// With anti_windup the integrator is frozen when the unclamped output is
/// saturated and the error pushes further into the clamp.
inline PiOutput pi_step(const PiState& s, double e, bool anti_windup) {
    if (s.dt <= 0.0) throw std::invalid_argument("pi_step: dt must be positive");
    PiState next = s;
    next.integ = s.integ + e * s.dt;
    double raw = s.kp * e + s.ki * next.integ;
    double out = std::clamp(raw, s.u_min, s.u_max);
    if (anti_windup && raw != out && (raw - out) * (s.ki * e) > 0.0) {
        next.integ = s.integ; // freeze
        out = std::clamp(s.kp * e + s.ki * next.integ, s.u_min, s.u_max);
    }
    return {out, next};
}

/// IFOC reference state for one control period. theta_a is the phase fed to
/// the reference sinusoids; ref_phase_rate is its time derivative, so the
/// phase n control periods ahead is theta_a + n*ref_phase_rate*Ts.
struct ReferenceFrame {
    double ids_ref{0.0};
    double iqs_ref{0.0};
    double omega_e{0.0};        // electrical frequency, rad/s
    double theta_a{0.0};        // reference phase, rad
    double ref_phase_rate{0.0}; // d(theta_a)/dt, rad/s
    double I_star() const { return std::hypot(ids_ref, iqs_ref); }
};

/// Slip relation: omega_sl = (iqs*/ids*) / tau_r_hat.
inline double slip_frequency(double iqs_ref, double ids_ref, double tau_r_hat) {
    if (ids_ref == 0.0) throw std::invalid_argument("slip_frequency: degenerate reference, ids_ref = 0");
    if (tau_r_hat <= 0.0) throw std::invalid_argument("slip_frequency: tau_r_hat must be positive");
    return (iqs_ref / ids_ref) / tau_r_hat;
}

/// theta_a accumulation, wrapped to [0, 2*pi).
inline double advance_flux_angle(double theta_a, double omega_e, double dt) {
    return wrap_angle(theta_a + omega_e * dt);
}

/// Stator-current references: i*_alpha = I* sin(theta), i*_beta = I* cos(theta),
/// x-y references identically zero. The sin/cos assignment is the one phase
/// convention of the whole artifact; change it only here.
inline Currents current_references(const ReferenceFrame& frame) {
    double I = frame.I_star();
    return {I * std::sin(frame.theta_a), I * std::cos(frame.theta_a), 0.0, 0.0};
}

struct OuterLoopConfig {
    double kp{0.5};        // speed PI proportional gain, A s/rad
    double ki{2.0};        // speed PI integral gain, A/rad
    double iqs_limit{3.0}; // clamp on the torque-current reference, A
    double ids_ref{1.0};   // constant magnetizing reference, A
    double tau_r_mult{1.0}; // rotor-time-constant estimation error multiplier
    int decimation{10};    // speed PI runs every `decimation` control periods
};

/// Outer control loop: speed PI (decimated), slip/flux-angle estimation,
/// reference frame bookkeeping. One instance per simulation run.
class OuterLoop {
public:
    OuterLoop(const OuterLoopConfig& cfg, const MachineParams& p) : cfg_(cfg) {
        if (cfg.decimation < 1) throw std::invalid_argument("outer loop: decimation must be >= 1");
        if (cfg.ids_ref == 0.0) throw std::invalid_argument("outer loop: ids_ref must be nonzero");
        tau_r_hat_ = p.tau_r() * cfg.tau_r_mult;
        pole_pairs_ = p.P;
        Ts_ = p.Ts;
        pi_ = {cfg.kp, cfg.ki, 0.0, -cfg.iqs_limit, cfg.iqs_limit, Ts_ * cfg.decimation};
        frame_.ids_ref = cfg.ids_ref;
    }

    /// Advance one control period: update the speed PI on its decimated
    /// schedule, refresh omega_e, and integrate the flux angle.
    ///
    /// Phase convention (the one place it lives): the machine model's
    /// alpha-beta orientation makes the torque-producing field rotate with a
    /// phase of load angle minus flux angle, so the sinusoid phase handed to
    /// current_references is atan2(ids*, iqs*) - theta_flux.
    const ReferenceFrame& step(double omega_ref, double omega_meas) {
        if (tick_ % cfg_.decimation == 0) {
            auto r = pi_step(pi_, omega_ref - omega_meas, true);
            frame_.iqs_ref = r.out;
            pi_ = r.state;
        }
        ++tick_;
        frame_.omega_e = slip_frequency(frame_.iqs_ref, frame_.ids_ref, tau_r_hat_) +
                         pole_pairs_ * omega_meas;
        theta_flux_ = advance_flux_angle(theta_flux_, frame_.omega_e, Ts_);
        frame_.theta_a = wrap_angle(std::atan2(frame_.ids_ref, frame_.iqs_ref) - theta_flux_);
        frame_.ref_phase_rate = -frame_.omega_e;
        return frame_;
    }

    double flux_angle() const { return theta_flux_; }

    const ReferenceFrame& frame() const { return frame_; }

private:
    OuterLoopConfig cfg_;
    PiState pi_{};
    ReferenceFrame frame_{};
    double theta_flux_{0.0};
    double tau_r_hat_{0.0};
    int pole_pairs_{1};
    double Ts_{0.0};
    long tick_{0};
};

} // namespace pscc
