#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pscc {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Wrap an angle to [0, 2*pi).
inline double wrap_angle(double theta) {
    double w = std::fmod(theta, two_pi);
    if (w < 0.0) w += two_pi;
    return w;
}

struct Vec2 {
    double a{0.0};
    double b{0.0};
};

inline Vec2 operator+(Vec2 u, Vec2 v) { return {u.a + v.a, u.b + v.b}; }
inline Vec2 operator-(Vec2 u, Vec2 v) { return {u.a - v.a, u.b - v.b}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.a, s * v.b}; }
inline double norm_sq(Vec2 v) { return v.a * v.a + v.b * v.b; }

/// Stator currents (or current errors) in both planes: alpha, beta, x, y.
struct Currents {
    double al{0.0};
    double be{0.0};
    double x{0.0};
    double y{0.0};
};

inline Currents operator+(const Currents& u, const Currents& v) {
    return {u.al + v.al, u.be + v.be, u.x + v.x, u.y + v.y};
}
inline Currents operator-(const Currents& u, const Currents& v) {
    return {u.al - v.al, u.be - v.be, u.x - v.x, u.y - v.y};
}
inline Currents operator*(double s, const Currents& v) {
    return {s * v.al, s * v.be, s * v.x, s * v.y};
}

/// Electrical and mechanical constants of the five-phase induction machine.
struct MachineParams {
    double Rs = 12.85;     // stator resistance, ohm
    double Rr = 4.80;      // rotor resistance, ohm
    double Lls = 79.93e-3; // stator leakage inductance, H
    double Llr = 79.93e-3; // rotor leakage inductance, H
    double LM = 681.7e-3;  // mutual inductance, H
    double Jm = 0.02;      // rotational inertia, kg m^2
    int P = 3;             // pole pairs
    double Vdc = 300.0;    // DC-link voltage, V
    double Ts = 30e-6;     // control sampling period, s
    double B = 0.0;        // viscous friction, N m s/rad

    double Ls() const { return Lls + LM; }
    double Lr() const { return Llr + LM; }
    double tau_r() const { return Lr() / Rr; }

    void validate() const {
        if (Rs <= 0 || Rr <= 0 || Lls <= 0 || Llr <= 0 || LM <= 0)
            throw std::invalid_argument("machine: resistances and inductances must be positive");
        if (P < 1) throw std::invalid_argument("machine: pole-pair count must be >= 1");
        if (Ts <= 0) throw std::invalid_argument("machine: Ts must be positive");
        if (Vdc <= 0) throw std::invalid_argument("machine: Vdc must be positive");
        if (Jm <= 0) throw std::invalid_argument("machine: Jm must be positive");
        if (B < 0) throw std::invalid_argument("machine: B must be non-negative");
    }
};

/// Continuous-truth plant state. theta_a is the flux-angle estimate kept by
/// the outer loop; the integrator leaves it untouched.
struct PlantState {
    Vec2 is_ab{};
    Vec2 is_xy{};
    Vec2 ir_ab{};
    double omega{0.0};
    double theta_a{0.0};
    double t{0.0};

    Currents stator() const { return {is_ab.a, is_ab.b, is_xy.a, is_xy.b}; }

    bool finite() const {
        return std::isfinite(is_ab.a) && std::isfinite(is_ab.b) &&
               std::isfinite(is_xy.a) && std::isfinite(is_xy.b) &&
               std::isfinite(ir_ab.a) && std::isfinite(ir_ab.b) &&
               std::isfinite(omega) && std::isfinite(theta_a);
    }
};

/// Per-phase values ordered a, b, c, d, e.
using PhaseQuantities = std::array<double, 5>;

struct PlaneDecomposition {
    Vec2 ab{};
    Vec2 xy{};
    double zero{0.0};
};

/// Amplitude-invariant five-phase Clarke transform (factor 2/5).
/// Alpha-beta rows use angle k*2*pi/5, x-y rows k*4*pi/5, zero row is the mean.
inline PlaneDecomposition clarke_5(const PhaseQuantities& ph) {
    constexpr double step1 = two_pi / 5.0;
    constexpr double step2 = 2.0 * two_pi / 5.0;
    PlaneDecomposition d;
    for (int k = 0; k < 5; ++k) {
        d.ab.a += ph[k] * std::cos(k * step1);
        d.ab.b += ph[k] * std::sin(k * step1);
        d.xy.a += ph[k] * std::cos(k * step2);
        d.xy.b += ph[k] * std::sin(k * step2);
        d.zero += ph[k];
    }
    d.ab = (2.0 / 5.0) * d.ab;
    d.xy = (2.0 / 5.0) * d.xy;
    d.zero /= 5.0;
    return d;
}

/// Exact inverse of clarke_5.
inline PhaseQuantities inverse_clarke_5(const PlaneDecomposition& d) {
    constexpr double step1 = two_pi / 5.0;
    constexpr double step2 = 2.0 * two_pi / 5.0;
    PhaseQuantities ph{};
    for (int k = 0; k < 5; ++k) {
        ph[k] = d.ab.a * std::cos(k * step1) + d.ab.b * std::sin(k * step1) +
                d.xy.a * std::cos(k * step2) + d.xy.b * std::sin(k * step2) + d.zero;
    }
    return ph;
}

/// Rotation D(theta) applied to a d-q pair:
///   [ cos  sin; -sin  cos ] * (d, q)
inline Vec2 park(Vec2 dq, double theta_a) {
    double c = std::cos(theta_a), s = std::sin(theta_a);
    return {c * dq.a + s * dq.b, -s * dq.a + c * dq.b};
}

/// Time derivative of the integrated plant states (6 currents + speed).
struct PlantDerivative {
    Vec2 dis_ab{};
    Vec2 dis_xy{};
    Vec2 dir_ab{};
    double domega{0.0};
};

/// Electromagnetic torque of the two-axis model, 5-phase scaling.
inline double torque(const PlantState& s, const MachineParams& p) {
    return 2.5 * p.P * p.LM * (s.is_ab.b * s.ir_ab.a - s.is_ab.a * s.ir_ab.b);
}

/// Full-order continuous dynamics. Alpha-beta plane: coupled 4th-order
/// stator/rotor current model in the stationary frame; x-y plane: series
/// R-L circuit on the stator leakage; mechanics: Jm*domega = Te - T_load - B*omega.
///
/// When rotor_branch is false the rotor currents are pinned to zero and the
/// stator alpha-beta derivative is evaluated with ir = 0 (reduced model).
inline PlantDerivative plant_derivative(const PlantState& s, Vec2 v_ab, Vec2 v_xy,
                                        const MachineParams& p, double T_load,
                                        bool rotor_branch = true) {
    const double Ls = p.Ls(), Lr = p.Lr();
    const double sigma = Ls * Lr - p.LM * p.LM;
    const double w_e = p.P * s.omega; // electrical rotor speed

    Vec2 ir = rotor_branch ? s.ir_ab : Vec2{};

    // Flux-linkage derivatives. Stator: v - Rs*i. Rotor (short-circuited,
    // stationary frame): -Rr*ir + j*w_e*psi_r, with j the 90-degree rotation.
    Vec2 psi_r{p.LM * s.is_ab.a + Lr * ir.a, p.LM * s.is_ab.b + Lr * ir.b};
    Vec2 dpsi_s = v_ab - p.Rs * s.is_ab;
    Vec2 dpsi_r{-p.Rr * ir.a - w_e * psi_r.b, -p.Rr * ir.b + w_e * psi_r.a};

    PlantDerivative d;
    // Solve [Ls LM; LM Lr] * [dis; dir] = [dpsi_s; dpsi_r] per axis.
    d.dis_ab = (1.0 / sigma) * (Lr * dpsi_s - p.LM * dpsi_r);
    if (rotor_branch) {
        d.dir_ab = (1.0 / sigma) * (Ls * dpsi_r - p.LM * dpsi_s);
    }

    d.dis_xy = (1.0 / p.Lls) * (v_xy - p.Rs * s.is_xy);

    double Te = rotor_branch ? torque(s, p) : 0.0;
    d.domega = (Te - T_load - p.B * s.omega) / p.Jm;
    return d;
}

namespace detail {

inline PlantState apply_derivative(const PlantState& s, const PlantDerivative& d, double h) {
    PlantState r = s;
    r.is_ab = s.is_ab + h * d.dis_ab;
    r.is_xy = s.is_xy + h * d.dis_xy;
    r.ir_ab = s.ir_ab + h * d.dir_ab;
    r.omega = s.omega + h * d.domega;
    return r;
}

} // namespace detail

/// Classic RK4 integration of one control period split into `substeps`
/// sub-intervals, with the applied voltages held constant.
inline PlantState plant_step(const PlantState& s, Vec2 v_ab, Vec2 v_xy,
                             const MachineParams& p, double T_load,
                             double dt, int substeps, bool rotor_branch = true) {
    if (dt <= 0.0) throw std::invalid_argument("plant_step: dt must be positive");
    if (substeps < 1) throw std::invalid_argument("plant_step: substeps must be >= 1");

    PlantState cur = s;
    const double h = dt / substeps;
    for (int n = 0; n < substeps; ++n) {
        auto k1 = plant_derivative(cur, v_ab, v_xy, p, T_load, rotor_branch);
        auto k2 = plant_derivative(detail::apply_derivative(cur, k1, 0.5 * h), v_ab, v_xy, p, T_load, rotor_branch);
        auto k3 = plant_derivative(detail::apply_derivative(cur, k2, 0.5 * h), v_ab, v_xy, p, T_load, rotor_branch);
        auto k4 = plant_derivative(detail::apply_derivative(cur, k3, h), v_ab, v_xy, p, T_load, rotor_branch);
        PlantDerivative sum;
        sum.dis_ab = (1.0 / 6.0) * (k1.dis_ab + 2.0 * k2.dis_ab + 2.0 * k3.dis_ab + k4.dis_ab);
        sum.dis_xy = (1.0 / 6.0) * (k1.dis_xy + 2.0 * k2.dis_xy + 2.0 * k3.dis_xy + k4.dis_xy);
        sum.dir_ab = (1.0 / 6.0) * (k1.dir_ab + 2.0 * k2.dir_ab + 2.0 * k3.dir_ab + k4.dir_ab);
        sum.domega = (1.0 / 6.0) * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega);
        cur = detail::apply_derivative(cur, sum, h);
    }
    cur.t = s.t + dt;
    if (!cur.finite()) throw std::runtime_error("plant_step: integration fault, non-finite state");
    return cur;
}

} // namespace pscc
