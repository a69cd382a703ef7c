#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "pscc/machine.hpp"

namespace pscc {

/// Two-level five-phase inverter leg-switch vector u = (Ka..Ke).
struct VsiState {
    std::array<std::uint8_t, 5> K{};

    /// Binary encoding, Ka least significant. Range 0..31.
    int index() const {
        int i = 0;
        for (int b = 0; b < 5; ++b) i |= (K[b] & 1) << b;
        return i;
    }

    static VsiState from_index(int i) {
        if (i < 0 || i > 31) throw std::out_of_range("VsiState: index must be 0..31");
        VsiState s;
        for (int b = 0; b < 5; ++b) s.K[b] = static_cast<std::uint8_t>((i >> b) & 1);
        return s;
    }

    bool operator==(const VsiState&) const = default;
};

/// All 32 states, ordered by binary index (fixed ordering, tie-break depends on it).
inline const std::array<VsiState, 32>& enumerate_states() {
    static const std::array<VsiState, 32> states = [] {
        std::array<VsiState, 32> a{};
        for (int i = 0; i < 32; ++i) a[i] = VsiState::from_index(i);
        return a;
    }();
    return states;
}

struct PlaneVoltages {
    Vec2 ab{};
    Vec2 xy{};
};

/// Plane voltages for a switching state. Star-connected load: phase voltage
/// is Vdc*(K_ph - mean(K)), so the zero sequence is exactly zero.
inline PlaneVoltages state_voltages(const VsiState& u, double Vdc) {
    double mean = 0.0;
    for (auto k : u.K) mean += k;
    mean /= 5.0;
    PhaseQuantities ph;
    for (int i = 0; i < 5; ++i) ph[i] = Vdc * (u.K[i] - mean);
    auto d = clarke_5(ph);
    return {d.ab, d.xy};
}

/// Hamming distance between leg vectors, range 0..5.
inline int switch_changes(const VsiState& u_prev, const VsiState& u_next) {
    int sc = 0;
    for (int i = 0; i < 5; ++i) sc += (u_prev.K[i] != u_next.K[i]) ? 1 : 0;
    return sc;
}

} // namespace pscc
