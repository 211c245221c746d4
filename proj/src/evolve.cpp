#include "freqlat/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace freqlat {

namespace {

constexpr double kTimeEps = 1e-9;          // us; merging tolerance for event times
constexpr double kMaxPhasePerStep = 0.1;   // rad; midpoint-exponential step contract
constexpr long kMaxSteps = 50'000'000;     // subdivision limit per evolution call

Eigen::VectorXcd pack_vector(const SingleExcitationState& state, bool with_qubit) {
    if (!with_qubit) return state.c_modes;
    Eigen::VectorXcd v(state.mode_count() + 1);
    v(0) = state.c_q;
    v.tail(state.mode_count()) = state.c_modes;
    return v;
}

void unpack_vector(const Eigen::VectorXcd& v, bool with_qubit, SingleExcitationState& state) {
    if (!with_qubit) {
        state.c_modes = v;
    } else {
        state.c_q = v(0);
        state.c_modes = v.tail(v.size() - 1);
    }
}

// Eigendecomposition cached for repeated propagation under one static H.
struct Propagator {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
    bool with_qubit = false;

    explicit Propagator(const HamiltonianMatrix& h) : with_qubit(h.includes_qubit) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.values);
        if (solver.info() != Eigen::Success)
            throw NumericalError("eigendecomposition failed");
        eigenvalues = solver.eigenvalues();
        eigenvectors = solver.eigenvectors();
    }

    void advance(Eigen::VectorXcd& psi, double dt_us) const {
        Eigen::VectorXcd coeff = eigenvectors.adjoint() * psi;
        for (Eigen::Index i = 0; i < coeff.size(); ++i)
            coeff(i) *= std::exp(std::complex<double>(0.0, -eigenvalues(i) * dt_us));
        psi = eigenvectors * coeff;
    }
};

} // namespace

SingleExcitationState evolve_static(const SingleExcitationState& state,
                                    const HamiltonianMatrix& h, double duration_us) {
    const int expected = state.mode_count() + (h.includes_qubit ? 1 : 0);
    if (h.dimension() != expected) {
        std::ostringstream os;
        os << "evolve_static: Hamiltonian dimension " << h.dimension()
           << " does not match state dimension " << expected;
        throw DomainError(os.str());
    }
    if (duration_us < 0.0)
        throw DomainError("evolve_static: duration >= 0 required");

    Propagator prop(h);
    Eigen::VectorXcd psi = pack_vector(state, h.includes_qubit);
    prop.advance(psi, duration_us);
    SingleExcitationState out = state;
    unpack_vector(psi, h.includes_qubit, out);
    return out;
}

SingleExcitationState evolve_time_dependent(const SingleExcitationState& state,
                                            const ModeLattice& lattice,
                                            const std::vector<DriveTone>& tones,
                                            const std::optional<QubitCoupler>& coupler,
                                            double t0_us, double duration_us,
                                            double dt_us) {
    lattice.validate();
    if (duration_us < 0.0 || t0_us < 0.0)
        throw DomainError("evolve_time_dependent: t0 >= 0 and duration >= 0 required");
    const int n = lattice.site_count();
    if (state.mode_count() != n)
        throw DomainError("evolve_time_dependent: state does not match lattice");
    if (duration_us == 0.0) return state;

    // H(t) = S + a(t) P with a scalar drive amplitude a(t); only the scalar is
    // time dependent, so S and the parity pattern P are built once.
    const HamiltonianMatrix h_static = build_lab_hamiltonian(lattice, {}, coupler, 0.0);
    const bool with_qubit = h_static.includes_qubit;
    const int offset = with_qubit ? 1 : 0;
    const int dim = h_static.dimension();

    Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(dim, dim);
    for (int r1 = 0; r1 < n; ++r1) {
        const long abs1 = lattice.site(r1) + lattice.base_abs_index;
        for (int r2 = r1 + 1; r2 < n; ++r2) {
            const long abs2 = lattice.site(r2) + lattice.base_abs_index;
            const double sign = ((abs1 + abs2) % 2 + 2) % 2 == 0 ? 1.0 : -1.0;
            pattern(offset + r1, offset + r2) = sign;
            pattern(offset + r2, offset + r1) = sign;
        }
    }
    const auto drive_amplitude = [&](double t) {
        double a = 0.0;
        for (const auto& tone : tones)
            a += 2.0 * tone.strength_mhz * std::cos(kTwoPi * tone.freq_mhz * t + tone.phase_rad);
        return kTwoPi * a;
    };

    // Frequency scales in MHz for the default step, plus an infinity-norm
    // bound on H for the phase-per-step contract.
    double f_max = 0.0;
    for (int r = 0; r < dim; ++r) f_max = std::max(f_max, std::abs(h_static.values(r, r).real()) / kTwoPi);
    for (const auto& tone : tones) {
        tone.validate();
        f_max = std::max(f_max, tone.freq_mhz);
        f_max = std::max(f_max, 2.0 * tone.strength_mhz);
    }
    if (coupler) f_max = std::max(f_max, coupler->kappa_mhz);

    double a_max = 0.0;
    for (const auto& tone : tones) a_max += kTwoPi * 2.0 * tone.strength_mhz;
    double norm_bound = a_max * pattern.cwiseAbs().rowwise().sum().maxCoeff();
    norm_bound += h_static.values.cwiseAbs().rowwise().sum().maxCoeff();

    double step = dt_us > 0.0 ? dt_us : std::min(f_max > 0.0 ? 1.0 / (50.0 * f_max) : duration_us,
                                                 duration_us / 100.0);
    step = std::min(step, duration_us);
    if (norm_bound * step > kMaxPhasePerStep)
        step = kMaxPhasePerStep / norm_bound;
    const double n_steps_real = std::ceil(duration_us / step);
    if (!(n_steps_real < double(kMaxSteps))) {
        std::ostringstream os;
        os << "evolve_time_dependent: " << n_steps_real
           << " steps needed to satisfy max|H|*dt < " << kMaxPhasePerStep
           << " rad exceeds the subdivision limit " << kMaxSteps;
        throw NumericalError(os.str());
    }
    const long n_steps = long(n_steps_real);
    const double dt = duration_us / double(n_steps);

    Eigen::VectorXcd psi = pack_vector(state, with_qubit);
    Eigen::MatrixXcd h(dim, dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
    for (long k = 0; k < n_steps; ++k) {
        const double tm = t0_us + (double(k) + 0.5) * dt;
        h = h_static.values + drive_amplitude(tm) * pattern;
        solver.compute(h);
        if (solver.info() != Eigen::Success)
            throw NumericalError("eigendecomposition failed inside time-dependent evolution");
        Eigen::VectorXcd coeff = solver.eigenvectors().adjoint() * psi;
        for (Eigen::Index i = 0; i < coeff.size(); ++i)
            coeff(i) *= std::exp(std::complex<double>(0.0, -solver.eigenvalues()(i) * dt));
        psi = solver.eigenvectors() * coeff;
    }

    SingleExcitationState out = state;
    unpack_vector(psi, with_qubit, out);
    return out;
}

double Schedule::total_duration_us() const {
    double total = 0.0;
    for (const auto& seg : segments) total += seg.duration_us;
    return total;
}

void Schedule::validate() const {
    if (!(sample_dt_us > 0.0))
        throw ConfigError("schedule invariant violated: sample_dt > 0 required");
    for (const auto& seg : segments)
        if (seg.duration_us < 0.0)
            throw ConfigError("schedule invariant violated: segment duration >= 0 required");
}

void DecoherenceParams::validate() const {
    if (!enabled) return;
    if (!(t1_mode_us > 0.0) || !(t2_mode_us > 0.0) || !(t1_qubit_us > 0.0))
        throw ConfigError("decoherence invariant violated: T1, T2 > 0 required when enabled");
}

std::vector<std::string> DecoherenceParams::warnings() const {
    std::vector<std::string> out;
    if (enabled && t2_mode_us > 2.0 * t1_mode_us + 1e-12) {
        std::ostringstream os;
        os << "T2 " << t2_mode_us << " us exceeds 2*T1 = " << 2.0 * t1_mode_us << " us";
        out.push_back(os.str());
    }
    return out;
}

namespace {

// Amplitude damping over one slice. The T2 excess over 1/(2*T1) is treated as
// additional amplitude decay so the bookkeeping stays a pure state; removed
// population accumulates in p_lost.
void apply_decoherence(SingleExcitationState& state, const DecoherenceParams& deco, double dt_us) {
    if (!deco.enabled || dt_us <= 0.0) return;
    const double gamma_phi = std::max(0.0, 1.0 / deco.t2_mode_us - 0.5 / deco.t1_mode_us);
    const double f_mode = std::exp(-dt_us * (0.5 / deco.t1_mode_us + gamma_phi));
    const double f_qubit = std::exp(-dt_us * 0.5 / deco.t1_qubit_us);
    const double before = state.c_modes.squaredNorm() + std::norm(state.c_q);
    state.c_modes *= f_mode;
    state.c_q *= f_qubit;
    const double after = state.c_modes.squaredNorm() + std::norm(state.c_q);
    state.p_lost += before - after;
}

struct Event {
    double t_us;
    bool is_sample;
};

std::vector<Event> build_events(const Schedule& schedule) {
    const double total = schedule.total_duration_us();
    std::vector<Event> events;
    const double sdt = schedule.sample_dt_us;
    for (long k = 1; double(k) * sdt < total + kTimeEps; ++k)
        events.push_back({double(k) * sdt, true});
    double boundary = 0.0;
    for (const auto& seg : schedule.segments) {
        boundary += seg.duration_us;
        events.push_back({boundary, false});
    }
    events.push_back({total, true}); // endpoint always recorded
    std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
    std::vector<Event> merged;
    for (const auto& e : events) {
        if (!merged.empty() && std::abs(merged.back().t_us - e.t_us) < kTimeEps) {
            merged.back().is_sample = merged.back().is_sample || e.is_sample;
        } else {
            merged.push_back(e);
        }
    }
    return merged;
}

} // namespace

Trajectory run_schedule(const SingleExcitationState& initial, const ModeLattice& lattice,
                        const Schedule& schedule, const DecoherenceParams& deco) {
    schedule.validate();
    deco.validate();

    Trajectory out;
    SingleExcitationState state = initial;
    out.push_back({0.0, state});
    if (schedule.segments.empty()) return out;

    const auto events = build_events(schedule);

    std::size_t seg_index = 0;
    double seg_start = 0.0;
    double seg_local = 0.0;
    std::optional<Propagator> prop; // for the current RWA stage
    auto enter_segment = [&](std::size_t i) {
        seg_index = i;
        seg_local = 0.0;
        prop.reset();
        const auto& seg = schedule.segments[i];
        if (const auto* rwa = std::get_if<RwaStage>(&seg.stage))
            prop.emplace(build_rwa_hamiltonian(lattice, rwa->tones, rwa->delta_mhz));
    };
    enter_segment(0);

    double t = 0.0;
    for (const auto& event : events) {
        double remaining = event.t_us - t;
        while (remaining > kTimeEps) {
            // skip zero-length segments
            while (seg_local >= schedule.segments[seg_index].duration_us - kTimeEps &&
                   seg_index + 1 < schedule.segments.size()) {
                seg_start += schedule.segments[seg_index].duration_us;
                enter_segment(seg_index + 1);
            }
            const auto& seg = schedule.segments[seg_index];
            const double step = std::min(remaining, seg.duration_us - seg_local);
            if (step <= kTimeEps) break;
            if (prop) {
                Eigen::VectorXcd psi = state.c_modes;
                prop->advance(psi, step);
                state.c_modes = psi;
            } else {
                const auto& lab = std::get<LabStage>(seg.stage);
                state = evolve_time_dependent(state, lattice, lab.tones, lab.coupler,
                                              seg_local, step);
            }
            apply_decoherence(state, deco, step);
            seg_local += step;
            t += step;
            remaining = event.t_us - t;
        }
        t = event.t_us;
        if (event.is_sample) out.push_back({event.t_us, state});
    }
    return out;
}

} // namespace freqlat
