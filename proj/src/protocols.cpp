#include "freqlat/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace freqlat {

namespace {

constexpr double kMinKappaMhz = 1e-6;
constexpr double kEmissionScanDtUs = 0.002;
constexpr double kEmissionTargetP1 = 0.01;
constexpr double kEmissionWarnP1 = 0.05;
constexpr double kSwapFidelityFloor = 0.95;

// Eigendecomposition of the static exchange Hamiltonian with the qubit tuned
// to mode m, plus the weights needed for fast P1(t) evaluation from the
// excited-qubit start.
struct TunedExchange {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
    Eigen::VectorXd qubit_weights; // |V(0,k)|^2

    TunedExchange(const ModeLattice& lattice, const QubitCoupler& coupler) {
        const auto h = build_lab_hamiltonian(lattice, {}, coupler, 0.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.values);
        if (solver.info() != Eigen::Success)
            throw NumericalError("exchange eigendecomposition failed");
        eigenvalues = solver.eigenvalues();
        eigenvectors = solver.eigenvectors();
        qubit_weights = eigenvectors.row(0).cwiseAbs2().transpose();
    }

    // P1(t) for the excited-qubit initial state
    double qubit_population(double t_us) const {
        std::complex<double> amp(0.0, 0.0);
        for (Eigen::Index k = 0; k < eigenvalues.size(); ++k)
            amp += qubit_weights(k) *
                   std::exp(std::complex<double>(0.0, -eigenvalues(k) * t_us));
        return std::norm(amp);
    }

    // full propagator applied to a packed (qubit, modes) vector
    Eigen::VectorXcd propagate(const Eigen::VectorXcd& psi, double t_us) const {
        Eigen::VectorXcd coeff = eigenvectors.adjoint() * psi;
        for (Eigen::Index k = 0; k < coeff.size(); ++k)
            coeff(k) *= std::exp(std::complex<double>(0.0, -eigenvalues(k) * t_us));
        return eigenvectors * coeff;
    }
};

QubitCoupler tuned_to_mode(const ModeLattice& lattice, const QubitCoupler& coupler, int m) {
    QubitCoupler tuned = coupler;
    tuned.omega_q_mhz = lattice.mode_frequency_mhz(m);
    return tuned;
}

double golden_minimize(const std::function<double(double)>& f, double lo, double hi) {
    const double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a);
    double x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 80 && (b - a) > 1e-10 * std::max(1.0, std::abs(b)); ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

std::vector<int> all_sites(const ModeLattice& lattice) {
    std::vector<int> sites;
    sites.reserve(lattice.site_count());
    for (int r = 0; r < lattice.site_count(); ++r) sites.push_back(lattice.site(r));
    return sites;
}

} // namespace

void ExperimentConfig::validate() const {
    lattice.validate();
    coupler.validate();
    deco.validate();
    if (!(total_time_us > 0.0))
        throw ConfigError("experiment invariant violated: total_time > 0 required");
    if (!(readout.step_us > 0.0))
        throw ConfigError("experiment invariant violated: readout step > 0 required");
    if (!(readout_kappa_mhz > 0.0))
        throw ConfigError("experiment invariant violated: readout kappa > 0 required");
    for (int m : readout.sites)
        if (!lattice.contains(m)) {
            std::ostringstream os;
            os << "experiment invariant violated: readout mode " << m
               << " outside the lattice span [" << -lattice.n_left << ", " << lattice.n_right << "]";
            throw ConfigError(os.str());
        }
    if (prep == PrepKind::single_site && !lattice.contains(prep_site))
        throw ConfigError("experiment invariant violated: preparation site outside the lattice");
    if (const auto* rev = std::get_if<ReversalProgram>(&drive))
        if (!(rev->half_period_us > 0.0))
            throw ConfigError("experiment invariant violated: reversal half period > 0 required");
}

double ExperimentConfig::drive_delta_mhz() const {
    return std::visit([](const auto& p) { return p.delta_mhz; }, drive);
}

std::vector<DriveTone> ExperimentConfig::drive_tones(double delta_mhz) const {
    std::vector<DriveTone> tones;
    if (const auto* single = std::get_if<SingleToneProgram>(&drive)) {
        tones.push_back(make_resonant_tone(lattice, single->order, delta_mhz,
                                           single->g_mhz, single->phase_rad));
    } else if (const auto* dbl = std::get_if<DoubleToneProgram>(&drive)) {
        tones.push_back(make_resonant_tone(lattice, 1, delta_mhz, dbl->g1_mhz, dbl->phi1_rad));
        tones.push_back(make_resonant_tone(lattice, 2, delta_mhz, dbl->g2_mhz, dbl->phi2_rad));
    } else {
        const auto& rev = std::get<ReversalProgram>(drive);
        tones.push_back(make_resonant_tone(lattice, rev.order, delta_mhz, rev.g_mhz,
                                           rev.phase_rad));
    }
    return tones;
}

Schedule ExperimentConfig::modulation_schedule() const {
    Schedule schedule;
    schedule.sample_dt_us = readout.step_us;
    if (const auto* rev = std::get_if<ReversalProgram>(&drive)) {
        double remaining = total_time_us;
        double delta = rev->delta_mhz;
        int half = 0;
        while (remaining > 1e-12) {
            const double span = std::min(rev->half_period_us, remaining);
            schedule.segments.push_back({span, RwaStage{drive_tones(delta), delta},
                                         half % 2 == 0 ? "forward" : "reversed"});
            remaining -= span;
            delta = -delta;
            ++half;
        }
    } else {
        const double delta = drive_delta_mhz();
        schedule.segments.push_back({total_time_us, RwaStage{drive_tones(delta), delta},
                                     "modulation"});
    }
    return schedule;
}

double calibrate_swap_time_us(const ModeLattice& lattice, const QubitCoupler& coupler, int m) {
    if (coupler.kappa_mhz < kMinKappaMhz)
        throw ProtocolError("swap calibration: no swap possible with kappa = 0");
    const TunedExchange exchange(lattice, tuned_to_mode(lattice, coupler, m));
    const double guess = 1.0 / (4.0 * coupler.kappa_mhz);
    return golden_minimize([&](double t) { return exchange.qubit_population(t); },
                           0.5 * guess, 1.5 * guess);
}

PrepResult prepare_single_site(const ExperimentConfig& config, int m) {
    const QubitCoupler tuned = tuned_to_mode(config.lattice, config.coupler, m);
    if (tuned.kappa_mhz < kMinKappaMhz)
        throw ProtocolError("prepare_single_site: no swap possible with kappa = 0");
    const double swap_us = calibrate_swap_time_us(config.lattice, config.coupler, m);
    const auto h = build_lab_hamiltonian(config.lattice, {}, tuned, 0.0);
    const auto state = evolve_static(
        SingleExcitationState::excited_qubit(config.lattice.site_count()), h, swap_us);
    const double residual = state.qubit_population();
    const double fidelity = state.mode_population(config.lattice.row(m));
    if (fidelity < kSwapFidelityFloor) {
        std::ostringstream os;
        os << "prepare_single_site: swap fidelity " << fidelity << " below "
           << kSwapFidelityFloor << " (residual P1 = " << residual << ")";
        throw ProtocolError(os.str());
    }
    return PrepResult{state, swap_us, residual, {}};
}

PrepResult prepare_wave_packet(const ExperimentConfig& config) {
    if (config.coupler.kappa_mhz < kMinKappaMhz)
        throw ProtocolError("prepare_wave_packet: no emission possible with kappa = 0");
    if (!(config.emission_cap_us > 0.0))
        throw ConfigError("prepare_wave_packet: emission cap > 0 required");
    const TunedExchange exchange(config.lattice, config.coupler);

    const double cap = config.emission_cap_us;
    double t_emit = cap;
    bool reached_target = false;
    for (double t = kEmissionScanDtUs; t <= cap + 1e-12; t += kEmissionScanDtUs) {
        if (exchange.qubit_population(t) < kEmissionTargetP1) {
            t_emit = t;
            reached_target = true;
            break;
        }
    }

    const auto h = build_lab_hamiltonian(config.lattice, {}, config.coupler, 0.0);
    auto state = evolve_static(
        SingleExcitationState::excited_qubit(config.lattice.site_count()), h, t_emit);
    const double residual = state.qubit_population();
    std::string warning;
    if (!reached_target && residual >= kEmissionWarnP1) {
        std::ostringstream os;
        os << "prepare_wave_packet: emission cap " << cap
           << " us hit with residual P1 = " << residual;
        warning = os.str();
    }
    state = reset_qubit(state);

    // Hold the packet until a cable round-trip boundary before handing it to
    // the modulation stage. The packet's quasimomentum tracks the photon's
    // position along the round trip (free evolution advances every mode phase
    // by 2 pi m fsr t), so without this alignment the band origin seen by the
    // drive would depend on the emission duration.
    const double round_trip = 1.0 / config.lattice.fsr_mhz;
    const double hold = std::ceil(t_emit / round_trip - 1e-12) * round_trip - t_emit;
    for (int r = 0; r < config.lattice.site_count(); ++r)
        state.c_modes(r) *= std::exp(std::complex<double>(
            0.0, -kTwoPi * config.lattice.site(r) * config.lattice.fsr_mhz * hold));
    return PrepResult{state, t_emit + hold, residual, warning};
}

double readout_mode(const SingleExcitationState& state, const ModeLattice& lattice,
                    const QubitCoupler& readout_coupler, int m) {
    const auto cleared = reset_qubit(state);
    const double swap_us = calibrate_swap_time_us(lattice, readout_coupler, m);
    const TunedExchange exchange(lattice, tuned_to_mode(lattice, readout_coupler, m));
    Eigen::VectorXcd psi(lattice.site_count() + 1);
    psi(0) = 0.0;
    psi.tail(lattice.site_count()) = cleared.c_modes;
    return std::norm(exchange.propagate(psi, swap_us)(0));
}

std::pair<double, double> measure_quadratures(const SingleExcitationState& state, int row) {
    if (row < 0 || row >= state.mode_count())
        throw DomainError("measure_quadratures: mode row out of range");
    const std::complex<double> overlap = std::conj(state.c_vac) * state.c_modes(row);
    return {2.0 * overlap.real(), 2.0 * overlap.imag()};
}

namespace {

// Per-site reverse-swap readout reduced to one row vector: with the qubit
// amplitude cleared beforehand, P1 = |r . c_modes|^2.
struct ReadoutBank {
    std::vector<Eigen::RowVectorXcd> rows;
    std::vector<int> sites;

    ReadoutBank(const ModeLattice& lattice, const QubitCoupler& readout_coupler,
                const std::vector<int>& wanted) {
        sites = wanted;
        rows.reserve(sites.size());
        for (int m : sites) {
            const double swap_us = calibrate_swap_time_us(lattice, readout_coupler, m);
            const TunedExchange exchange(lattice, tuned_to_mode(lattice, readout_coupler, m));
            Eigen::RowVectorXcd full = Eigen::RowVectorXcd::Zero(lattice.site_count() + 1);
            for (Eigen::Index k = 0; k < exchange.eigenvalues.size(); ++k)
                full += exchange.eigenvectors(0, k) *
                        std::exp(std::complex<double>(0.0, -exchange.eigenvalues(k) * swap_us)) *
                        exchange.eigenvectors.col(k).adjoint();
            rows.push_back(full.tail(lattice.site_count()));
        }
    }

    double p1(std::size_t idx, const Eigen::VectorXcd& c_modes) const {
        return std::norm((rows[idx] * c_modes)(0));
    }
};

PrepResult prepare(const ExperimentConfig& config) {
    if (config.prep == PrepKind::single_site)
        return prepare_single_site(config, config.prep_site);
    return prepare_wave_packet(config);
}

ExperimentRecord assemble_record(const ExperimentConfig& config, const PrepResult& prep,
                                 const Trajectory& traj, bool psi_from_quadratures) {
    const auto& lattice = config.lattice;
    ExperimentRecord record;
    record.prep_duration_us = prep.duration_us;
    if (!prep.warning.empty()) record.warnings.push_back(prep.warning);
    for (const auto& w : config.coupler.warnings()) record.warnings.push_back(w);
    for (const auto& tone : config.drive_tones(config.drive_delta_mhz()))
        for (const auto& w : tone.warnings(lattice.fsr_mhz)) record.warnings.push_back(w);
    for (const auto& w : config.deco.warnings()) record.warnings.push_back(w);

    const std::vector<int> readout_sites =
        config.readout.sites.empty() ? all_sites(lattice) : config.readout.sites;
    QubitCoupler readout_coupler = config.coupler;
    readout_coupler.kappa_mhz = config.readout_kappa_mhz;
    const ReadoutBank bank(lattice, readout_coupler, readout_sites);

    const Eigen::Index n_t = Eigen::Index(traj.size());
    const Eigen::Index n_r = Eigen::Index(readout_sites.size());
    record.map.sites = readout_sites;
    record.map.times_us.reserve(traj.size());
    record.map.p.resize(n_t, n_r);
    record.map.p1_readout.resize(n_t, n_r);
    record.psi.resize(n_t, lattice.site_count());
    record.psi_sites = all_sites(lattice);

    for (Eigen::Index i = 0; i < n_t; ++i) {
        const auto& point = traj[std::size_t(i)];
        record.map.times_us.push_back(point.t_us);
        const auto cleared = reset_qubit(point.state);
        for (Eigen::Index j = 0; j < n_r; ++j) {
            record.map.p(i, j) = point.state.mode_population(lattice.row(readout_sites[std::size_t(j)]));
            record.map.p1_readout(i, j) = bank.p1(std::size_t(j), cleared.c_modes);
        }
        if (psi_from_quadratures) {
            for (int r = 0; r < lattice.site_count(); ++r) {
                const auto [x, y] = measure_quadratures(point.state, r);
                record.psi(i, r) =
                    std::complex<double>(x, y) / (2.0 * std::conj(point.state.c_vac));
            }
        } else {
            record.psi.row(i) = point.state.c_modes.transpose();
        }
    }
    return record;
}

} // namespace

ExperimentRecord run_experiment(const ExperimentConfig& config) {
    config.validate();
    const PrepResult prep = prepare(config);
    const auto traj = run_schedule(prep.state, config.lattice, config.modulation_schedule(),
                                   config.deco);
    return assemble_record(config, prep, traj, false);
}

ExperimentRecord run_band_measurement(const ExperimentConfig& config) {
    config.validate();
    PrepResult prep = prepare(config);
    // equal-weight vacuum reference for interferometric quadrature readout
    prep.state.c_vac = 1.0 / std::sqrt(2.0);
    prep.state.c_q /= std::sqrt(2.0);
    prep.state.c_modes /= std::sqrt(2.0);
    prep.state.p_lost /= 2.0;
    const auto traj = run_schedule(prep.state, config.lattice, config.modulation_schedule(),
                                   config.deco);
    return assemble_record(config, prep, traj, true);
}

RabiScan rabi_scan(const ExperimentConfig& config, double span_sites, double step_sites,
                   double t_max_us, double dt_us) {
    config.lattice.validate();
    config.coupler.validate();
    if (!(span_sites > 0.0) || !(step_sites > 0.0) || !(t_max_us > 0.0) || !(dt_us > 0.0))
        throw ConfigError("rabi_scan: span, step, t_max and dt must be positive");

    RabiScan scan;
    for (double x = -span_sites; x <= span_sites + 1e-12; x += step_sites)
        scan.mode_coordinate.push_back(x);
    for (double t = 0.0; t <= t_max_us + 1e-12; t += dt_us) scan.times_us.push_back(t);

    scan.p1.resize(Eigen::Index(scan.times_us.size()), Eigen::Index(scan.mode_coordinate.size()));
    for (std::size_t j = 0; j < scan.mode_coordinate.size(); ++j) {
        QubitCoupler coupler = config.coupler;
        coupler.omega_q_mhz =
            config.lattice.omega0_mhz + scan.mode_coordinate[j] * config.lattice.fsr_mhz;
        const TunedExchange exchange(config.lattice, coupler);
        for (std::size_t i = 0; i < scan.times_us.size(); ++i)
            scan.p1(Eigen::Index(i), Eigen::Index(j)) = exchange.qubit_population(scan.times_us[i]);
    }
    return scan;
}

} // namespace freqlat
