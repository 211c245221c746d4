// evolve.hpp — time evolution under static, piecewise-constant, or fully
// time-dependent Hamiltonians, with optional deterministic decoherence
// envelopes in the single-excitation subspace.
#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "freqlat/model.hpp"
#include "freqlat/state.hpp"

namespace freqlat {

// state <- exp(-i H duration) state, via eigendecomposition of the Hermitian
// matrix. If H excludes the qubit it acts on the mode amplitudes only.
SingleExcitationState evolve_static(const SingleExcitationState& state,
                                    const HamiltonianMatrix& h, double duration_us);

// Full lab-frame propagation with midpoint-sampled matrix exponentials
// exp(-i H(t + dt/2) dt). dt_us <= 0 requests the default
// min(1/(50 f_max), duration/100); any step is further subdivided until
// max|H| * dt < 0.1 rad.
SingleExcitationState evolve_time_dependent(const SingleExcitationState& state,
                                            const ModeLattice& lattice,
                                            const std::vector<DriveTone>& tones,
                                            const std::optional<QubitCoupler>& coupler,
                                            double t0_us, double duration_us,
                                            double dt_us = 0.0);

// One piecewise-constant stage of a pulse sequence.
struct RwaStage {
    std::vector<DriveTone> tones;
    double delta_mhz = 0.0;
};
struct LabStage {
    std::vector<DriveTone> tones;
    std::optional<QubitCoupler> coupler;
};

struct Segment {
    double duration_us = 0.0;
    std::variant<RwaStage, LabStage> stage;
    std::string label;
};

struct Schedule {
    std::vector<Segment> segments;
    double sample_dt_us = 0.05;

    double total_duration_us() const;
    void validate() const;
};

struct DecoherenceParams {
    bool enabled = false;
    double t1_mode_us = 29.1;
    double t2_mode_us = 57.9;
    double t1_qubit_us = 29.1;

    void validate() const;
    std::vector<std::string> warnings() const;
};

struct TrajectoryPoint {
    double t_us = 0.0;
    SingleExcitationState state;
};
using Trajectory = std::vector<TrajectoryPoint>;

// Applies each segment in order, sampling the state every sample_dt_us (the
// endpoint is always included). With decoherence enabled, mode and qubit
// amplitudes acquire per-step damping factors and the removed population is
// booked into p_lost.
Trajectory run_schedule(const SingleExcitationState& initial, const ModeLattice& lattice,
                        const Schedule& schedule, const DecoherenceParams& deco = {});

} // namespace freqlat
