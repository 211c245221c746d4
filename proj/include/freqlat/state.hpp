// state.hpp — the single-excitation simulation state
#pragma once

#include <complex>

#include <Eigen/Dense>

#include "freqlat/model.hpp"

namespace freqlat {

// Complex amplitudes over {vacuum, qubit, modes} plus the population removed
// by decoherence or reset. Invariant:
//   |c_vac|^2 + |c_q|^2 + sum |c_m|^2 + p_lost = 1  (within 1e-9)
struct SingleExcitationState {
    std::complex<double> c_vac{0.0, 0.0};
    std::complex<double> c_q{0.0, 0.0};
    Eigen::VectorXcd c_modes;
    double p_lost = 0.0;

    int mode_count() const { return static_cast<int>(c_modes.size()); }
    double qubit_population() const { return std::norm(c_q); }
    double vacuum_population() const { return std::norm(c_vac); }
    double mode_population(int r) const { return std::norm(c_modes(r)); }
    Eigen::VectorXd mode_populations() const { return c_modes.cwiseAbs2(); }
    double total_probability() const {
        return std::norm(c_vac) + std::norm(c_q) + c_modes.squaredNorm() + p_lost;
    }

    static SingleExcitationState vacuum(int n_modes);
    static SingleExcitationState excited_qubit(int n_modes);
    static SingleExcitationState single_mode(const ModeLattice& lattice, int m);
};

// Instantaneous perfect reset: the qubit amplitude is dropped and its
// population booked into p_lost; all other amplitudes keep their phases.
SingleExcitationState reset_qubit(const SingleExcitationState& state);

} // namespace freqlat
