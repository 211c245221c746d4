// oracles.hpp — independent closed-form references used by the test suites.
// Everything here is derived from textbook solutions, never from the library
// code paths it is used to check.
#pragma once

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracles {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Two-level exchange (vacuum Rabi) with coupling kappa and qubit-mode
// detuning delta, both ordinary MHz. Probability that the excitation has
// swapped after t microseconds:
//   P_swap(t) = g^2/(g^2 + (d/2)^2) * sin^2( sqrt(g^2 + (d/2)^2) t ),
// g = 2*pi*kappa, d = 2*pi*delta.
inline double rabi_swap_probability(double kappa_mhz, double delta_mhz, double t_us) {
    const double g = two_pi * kappa_mhz;
    const double d = two_pi * delta_mhz;
    const double omega = std::sqrt(g * g + 0.25 * d * d);
    if (omega == 0.0) return 0.0;
    const double s = std::sin(omega * t_us);
    return (g * g) / (omega * omega) * s * s;
}

// Full-swap time of the resonant two-level exchange: 1/(4*kappa).
inline double rabi_full_swap_time_us(double kappa_mhz) { return 1.0 / (4.0 * kappa_mhz); }

// Uniform infinite tight-binding chain with hopping magnitude g (MHz),
// excitation starting on site 0: population on site m after t microseconds is
// J_m(2 * 2*pi*g * t)^2 (Bessel solution; independent of the hopping sign).
inline double bessel_chain_population(int m, double g_mhz, double t_us) {
    const double z = 2.0 * two_pi * g_mhz * t_us;
    const double j = std::cyl_bessel_j(std::abs(m), z);
    return j * j; // |J_{-m}| = |J_m|
}

// Wannier-Stark breathing argument for the tilted nearest-neighbor chain:
// C_m(t) = J_m(zeta(t)) up to phases, zeta(t) = (4g/delta) sin(pi delta t).
inline double wannier_stark_breathing_argument(double g_mhz, double delta_mhz, double t_us) {
    return 4.0 * g_mhz / delta_mhz * std::sin(3.14159265358979323846 * delta_mhz * t_us);
}

// Band energy of the untilted chain, summed independently from drive
// parameters (duplicated on purpose so analysis checks do not reuse the
// library formula).
struct HoppingTerm {
    int order;
    double g_mhz;
    double phase_rad;
};
inline double band_energy_mhz(const std::vector<HoppingTerm>& terms, double k) {
    double e = 0.0;
    for (const auto& h : terms) {
        const double sign = h.order % 2 == 0 ? 1.0 : -1.0;
        e += 2.0 * sign * h.g_mhz * std::cos(h.order * k + h.phase_rad);
    }
    return e;
}

// Deterministic RNG for property-style tests.
inline std::mt19937_64 rng(unsigned seed = 0x5eed) { return std::mt19937_64(seed); }

} // namespace oracles
