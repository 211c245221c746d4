// model.hpp — physical configuration types and single-excitation Hamiltonian builders
//
// Unit conventions used across the library:
//   * configuration values are ordinary frequencies in MHz and times in us
//   * Hamiltonian matrix entries are angular, rad/us (i.e. 2*pi * MHz value)
//   * phases are radians, quasimomentum k is radians per lattice site
#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "freqlat/errors.hpp"

namespace freqlat {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.1415926535897932384626433832795;

enum class Frame { lab, rotating };
enum class Boundary { open, ring };
enum class CouplerScaling { flat, sqrt_omega };

// Finite ladder of evenly spaced standing-wave modes. Site indices m are
// relative to the mode relabeled as 0; base_abs_index is that mode's absolute
// mode number, kept as configuration because it fixes the physical parity
// bookkeeping of the modulated couplings.
struct ModeLattice {
    int base_abs_index = 592;
    int n_left = 16;
    int n_right = 16;
    double omega0_mhz = 4320.0;
    double fsr_mhz = 7.33;

    int site_count() const { return n_left + n_right + 1; }
    bool contains(int m) const { return m >= -n_left && m <= n_right; }
    int row(int m) const;       // site index -> matrix row
    int site(int r) const;      // matrix row -> site index
    double mode_frequency_mhz(int m) const;
    void validate() const;
};

// One parametric drive tone: couples modes spaced by `order` sites when its
// frequency sits near order * (fsr + delta).
struct DriveTone {
    int order = 1;
    double freq_mhz = 7.33;
    double phase_rad = 0.0;
    double strength_mhz = 0.0;  // g_l

    double detuning_mhz(double fsr_mhz) const { return freq_mhz / order - fsr_mhz; }
    void validate() const;
    std::vector<std::string> warnings(double fsr_mhz) const;
};

// Convenience: tone resonant with hopping of the given order at global
// detuning delta, i.e. freq = order * (fsr + delta).
DriveTone make_resonant_tone(const ModeLattice& lattice, int order, double delta_mhz,
                             double g_mhz, double phase_rad);

// Exchange coupling between the qubit and every mode.
struct QubitCoupler {
    double omega_q_mhz = 4320.0;
    double kappa_mhz = 0.36;
    CouplerScaling scaling = CouplerScaling::flat;

    void validate() const;
    std::vector<std::string> warnings() const;
    double kappa_for_mode_mhz(double omega_m_mhz) const;
};

// Hermitian matrix over {qubit (+) modes} or modes alone, entries in rad/us.
struct HamiltonianMatrix {
    Eigen::MatrixXcd values;
    Frame frame = Frame::rotating;
    bool includes_qubit = false;

    int dimension() const { return static_cast<int>(values.rows()); }
    double hermiticity_defect() const;
};

// Lab-frame Hamiltonian at instant t. Diagonal entries are referenced to the
// frequency of mode 0 so they stay numerically small; only differences matter
// in the single-excitation subspace. Every mode pair (m, n), m != n, carries
// every tone with the parity factor (-1)^{(m+m0)+(n+n0)}, m0 = n0 =
// base_abs_index.
HamiltonianMatrix build_lab_hamiltonian(const ModeLattice& lattice,
                                        const std::vector<DriveTone>& tones,
                                        const std::optional<QubitCoupler>& coupler,
                                        double t_us);

// Rotating-frame Hamiltonian after the rotating-wave approximation: static,
// qubit excluded. Diagonal -m * 2*pi*delta, hopping from m to m+order equal to
// (-1)^order * 2*pi*g * exp(i*phase) on the upper triangle. Each tone must be
// consistent with the global detuning to within freq_tol_mhz, else ConfigError.
// Boundary::ring wraps the hops (delta must be 0) and exists for validation
// against closed-form dispersion.
HamiltonianMatrix build_rwa_hamiltonian(const ModeLattice& lattice,
                                        const std::vector<DriveTone>& tones,
                                        double delta_mhz,
                                        Boundary boundary = Boundary::open,
                                        double freq_tol_mhz = 1e-3);

// Gauge flux per triangular plaquette of simultaneous order-1/order-2 drives.
struct EffectiveFlux {
    double raw_rad;        // 2*phi1 - phi2
    double canonical_rad;  // reduced to (-pi, pi]
};
EffectiveFlux effective_flux(double phi1_rad, double phi2_rad);

// Wrap an angle into (-pi, pi].
double wrap_angle(double x);

// Band energy of the untilted infinite chain at quasimomentum k:
//   sum_l 2 * (-1)^l * g_l * cos(l*k + phi_l)   [MHz]
double dispersion_mhz(const std::vector<DriveTone>& tones, double k);

// Analytic d(dispersion)/dk in MHz per (rad/site). Group velocity in sites/us
// is 2*pi times this value.
double dispersion_derivative_mhz(const std::vector<DriveTone>& tones, double k);

} // namespace freqlat
