// protocols.hpp — end-to-end experiment recipes: state preparation, drive
// programs, qubit reset, mode-resolved readout, and quadrature probes.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "freqlat/evolve.hpp"

namespace freqlat {

// Drive programs for the modulation stage. A tone of order l runs at
// l * (fsr + delta); the reversal program flips the detuning sign every
// half_period_us.
struct SingleToneProgram {
    int order = 1;
    double delta_mhz = 0.0;
    double g_mhz = 0.5;
    double phase_rad = kPi;
};
struct DoubleToneProgram {
    double delta_mhz = 0.0;
    double g1_mhz = 0.5;
    double phi1_rad = kPi;
    double g2_mhz = 0.25;
    double phi2_rad = kPi;
};
struct ReversalProgram {
    int order = 1;
    double delta_mhz = -0.2;
    double g_mhz = 0.5;
    double phase_rad = kPi;
    double half_period_us = 2.5;
};
using DriveProgram = std::variant<SingleToneProgram, DoubleToneProgram, ReversalProgram>;

enum class PrepKind { single_site, wave_packet };

struct ReadoutGrid {
    double step_us = 0.05;
    std::vector<int> sites; // empty = every lattice site
};

struct ExperimentConfig {
    ModeLattice lattice;
    QubitCoupler coupler;          // preparation coupler (omega_q, kappa, scaling)
    double readout_kappa_mhz = 0.36; // weak swap used for mode-resolved readout
    PrepKind prep = PrepKind::single_site;
    int prep_site = 0;
    double emission_cap_us = 3.0; // wave-packet emission time limit
    DriveProgram drive = SingleToneProgram{};
    double total_time_us = 10.0;
    ReadoutGrid readout;
    DecoherenceParams deco;

    void validate() const;
    double drive_delta_mhz() const;
    std::vector<DriveTone> drive_tones(double delta_mhz) const;
    Schedule modulation_schedule() const;
};

struct PrepResult {
    SingleExcitationState state;
    double duration_us = 0.0;  // swap or emission time
    double residual_p1 = 0.0;  // qubit population left behind
    std::string warning;       // empty when clean
};

// Swap the excitation from the qubit into mode m through the exchange
// coupling, with the interaction time found by minimizing the qubit
// population near 1/(4 kappa). Lossless fidelity below 0.95 is an error.
PrepResult prepare_single_site(const ExperimentConfig& config, int m);

// Multimode emission at strong coupling: the excited qubit radiates into the
// mode ladder until its population falls below 1% (or the 3 us cap, which
// attaches a warning at >= 5% residual); the qubit is then reset.
PrepResult prepare_wave_packet(const ExperimentConfig& config);

// Interaction time of the full qubit<->mode swap, found numerically.
double calibrate_swap_time_us(const ModeLattice& lattice, const QubitCoupler& coupler, int m);

// Reverse swap of mode m onto the (reset) qubit; returns the readout P1.
double readout_mode(const SingleExcitationState& state, const ModeLattice& lattice,
                    const QubitCoupler& readout_coupler, int m);

// (<X_m>, <Y_m>) = (2 Re(c_vac* c_m), 2 Im(c_vac* c_m)).
std::pair<double, double> measure_quadratures(const SingleExcitationState& state, int row);

// Mode populations and simulated readout over the readout grid.
struct PopulationMap {
    std::vector<double> times_us;
    std::vector<int> sites;
    Eigen::MatrixXd p;           // [time x site], ideal |C_m|^2
    Eigen::MatrixXd p1_readout;  // [time x site], reverse-swap readout
};

struct ExperimentRecord {
    PopulationMap map;
    Eigen::MatrixXcd psi;        // [time x all lattice sites], amplitude record
    std::vector<int> psi_sites;
    double prep_duration_us = 0.0;
    std::vector<std::string> warnings;
};

// Full pulse sequence: preparation, modulation sampled on the readout grid,
// qubit reset, then per-mode reverse-swap readout at every sample. The
// idealized amplitude record C_m(t) is exposed alongside. Deterministic given
// the config.
ExperimentRecord run_experiment(const ExperimentConfig& config);

// Band probe: prepares the photon state, superposes it with vacuum at equal
// weight, evolves under the modulation program, and reconstructs the
// amplitude record from mode quadratures. The populations in the returned map
// are those of the probe state (photon sector weight 1/2).
ExperimentRecord run_band_measurement(const ExperimentConfig& config);

// Qubit spectroscopy map: P1(t) while the qubit, prepared excited, exchanges
// with the ladder at a fixed coupler setting, for each qubit frequency on a
// grid spanning the requested window. The frequency axis is reported as the
// fractional mode coordinate (omega_q - omega_0)/fsr.
struct RabiScan {
    std::vector<double> times_us;
    std::vector<double> mode_coordinate; // (omega_q - omega_0) / fsr
    Eigen::MatrixXd p1;                  // [time x frequency]
};
RabiScan rabi_scan(const ExperimentConfig& config, double span_sites, double step_sites,
                   double t_max_us, double dt_us);

} // namespace freqlat
