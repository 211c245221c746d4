#include "freqlat/model.hpp"

#include <cmath>
#include <sstream>

namespace freqlat {

namespace {

int parity_sign(long exponent) {
    // (-1)^exponent with a safe modulo for negative exponents
    return (exponent % 2 + 2) % 2 == 0 ? 1 : -1;
}

} // namespace

int ModeLattice::row(int m) const {
    if (!contains(m)) {
        std::ostringstream os;
        os << "mode index " << m << " outside valid span [" << -n_left << ", " << n_right << "]";
        throw DomainError(os.str());
    }
    return m + n_left;
}

int ModeLattice::site(int r) const {
    if (r < 0 || r >= site_count()) {
        std::ostringstream os;
        os << "matrix row " << r << " outside [0, " << site_count() - 1 << "]";
        throw DomainError(os.str());
    }
    return r - n_left;
}

double ModeLattice::mode_frequency_mhz(int m) const {
    row(m); // range check
    return omega0_mhz + m * fsr_mhz;
}

void ModeLattice::validate() const {
    if (!(fsr_mhz > 0.0))
        throw ConfigError("lattice invariant violated: fsr > 0 required");
    if (n_left < 0 || n_right < 0)
        throw ConfigError("lattice invariant violated: n_left >= 0 and n_right >= 0 required");
    if (site_count() < 2)
        throw ConfigError("lattice invariant violated: at least 2 modes required");
}

void DriveTone::validate() const {
    if (order < 1)
        throw ConfigError("drive tone invariant violated: order >= 1 required");
    if (strength_mhz < 0.0)
        throw ConfigError("drive tone invariant violated: strength >= 0 required");
    if (!std::isfinite(freq_mhz) || !std::isfinite(phase_rad) || !std::isfinite(strength_mhz))
        throw ConfigError("drive tone invariant violated: finite freq, phase, strength required");
}

std::vector<std::string> DriveTone::warnings(double fsr_mhz) const {
    std::vector<std::string> out;
    const double delta = detuning_mhz(fsr_mhz);
    if (std::abs(delta) > 0.2 * fsr_mhz) {
        std::ostringstream os;
        os << "tone order " << order << ": |detuning| " << std::abs(delta)
           << " MHz is not small against the FSR " << fsr_mhz << " MHz";
        out.push_back(os.str());
    }
    return out;
}

DriveTone make_resonant_tone(const ModeLattice& lattice, int order, double delta_mhz,
                             double g_mhz, double phase_rad) {
    DriveTone tone;
    tone.order = order;
    tone.freq_mhz = order * (lattice.fsr_mhz + delta_mhz);
    tone.phase_rad = phase_rad;
    tone.strength_mhz = g_mhz;
    tone.validate();
    return tone;
}

void QubitCoupler::validate() const {
    if (kappa_mhz < 0.0)
        throw ConfigError("coupler invariant violated: kappa >= 0 required");
    if (!(omega_q_mhz > 0.0))
        throw ConfigError("coupler invariant violated: omega_q > 0 required");
}

std::vector<std::string> QubitCoupler::warnings() const {
    std::vector<std::string> out;
    if (kappa_mhz > 7.4) {
        std::ostringstream os;
        os << "kappa " << kappa_mhz << " MHz exceeds the 0..7.4 MHz coupler tuning range";
        out.push_back(os.str());
    }
    return out;
}

double QubitCoupler::kappa_for_mode_mhz(double omega_m_mhz) const {
    if (scaling == CouplerScaling::sqrt_omega)
        return kappa_mhz * std::sqrt(omega_m_mhz / omega_q_mhz);
    return kappa_mhz;
}

double HamiltonianMatrix::hermiticity_defect() const {
    return (values - values.adjoint()).cwiseAbs().maxCoeff();
}

HamiltonianMatrix build_lab_hamiltonian(const ModeLattice& lattice,
                                        const std::vector<DriveTone>& tones,
                                        const std::optional<QubitCoupler>& coupler,
                                        double t_us) {
    lattice.validate();
    for (const auto& tone : tones) tone.validate();
    if (coupler) coupler->validate();
    if (t_us < 0.0)
        throw DomainError("build_lab_hamiltonian: t >= 0 required");

    const int n = lattice.site_count();
    const int offset = coupler ? 1 : 0;
    const int dim = n + offset;
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);

    for (int r = 0; r < n; ++r) {
        const int m = lattice.site(r);
        h(offset + r, offset + r) = kTwoPi * (lattice.mode_frequency_mhz(m) - lattice.omega0_mhz);
    }

    if (coupler) {
        h(0, 0) = kTwoPi * (coupler->omega_q_mhz - lattice.omega0_mhz);
        for (int r = 0; r < n; ++r) {
            const int m = lattice.site(r);
            const double kappa = coupler->kappa_for_mode_mhz(lattice.mode_frequency_mhz(m));
            h(0, offset + r) = kTwoPi * kappa;
            h(offset + r, 0) = kTwoPi * kappa;
        }
    }

    // All mode pairs see every tone; the rotating-frame resonance condition is
    // what later selects the order-l spaced pairs.
    double drive_sum = 0.0;
    for (const auto& tone : tones)
        drive_sum += 2.0 * tone.strength_mhz * std::cos(kTwoPi * tone.freq_mhz * t_us + tone.phase_rad);
    if (drive_sum != 0.0) {
        for (int r1 = 0; r1 < n; ++r1) {
            const long abs1 = lattice.site(r1) + lattice.base_abs_index;
            for (int r2 = r1 + 1; r2 < n; ++r2) {
                const long abs2 = lattice.site(r2) + lattice.base_abs_index;
                const double entry = parity_sign(abs1 + abs2) * kTwoPi * drive_sum;
                h(offset + r1, offset + r2) = entry;
                h(offset + r2, offset + r1) = entry;
            }
        }
    }

    return HamiltonianMatrix{std::move(h), Frame::lab, coupler.has_value()};
}

HamiltonianMatrix build_rwa_hamiltonian(const ModeLattice& lattice,
                                        const std::vector<DriveTone>& tones,
                                        double delta_mhz,
                                        Boundary boundary,
                                        double freq_tol_mhz) {
    lattice.validate();
    if (boundary == Boundary::ring && delta_mhz != 0.0)
        throw ConfigError("build_rwa_hamiltonian: ring boundary requires delta = 0");

    const int n = lattice.site_count();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);

    for (int r = 0; r < n; ++r)
        h(r, r) = -kTwoPi * lattice.site(r) * delta_mhz;

    for (const auto& tone : tones) {
        tone.validate();
        const double mismatch = std::abs(tone.freq_mhz / tone.order - (lattice.fsr_mhz + delta_mhz));
        if (mismatch > freq_tol_mhz) {
            std::ostringstream os;
            os << "tone order " << tone.order << " at " << tone.freq_mhz
               << " MHz is inconsistent with detuning " << delta_mhz
               << " MHz (per-order mismatch " << mismatch << " MHz exceeds tolerance "
               << freq_tol_mhz << " MHz)";
            throw ConfigError(os.str());
        }
        const std::complex<double> hop =
            double(tone.order % 2 == 0 ? 1 : -1) * kTwoPi * tone.strength_mhz *
            std::exp(std::complex<double>(0.0, tone.phase_rad));
        if (boundary == Boundary::open) {
            for (int r = 0; r + tone.order < n; ++r) {
                h(r, r + tone.order) += hop;
                h(r + tone.order, r) += std::conj(hop);
            }
        } else {
            for (int r = 0; r < n; ++r) {
                const int r2 = (r + tone.order) % n;
                if (r2 == r) continue;
                h(r, r2) += hop;
                h(r2, r) += std::conj(hop);
            }
        }
    }

    return HamiltonianMatrix{std::move(h), Frame::rotating, false};
}

double wrap_angle(double x) {
    double r = x - kTwoPi * std::floor(x / kTwoPi + 0.5); // [-pi, pi)
    if (r <= -kPi) r += kTwoPi;
    if (r > kPi) r -= kTwoPi;
    return r;
}

EffectiveFlux effective_flux(double phi1_rad, double phi2_rad) {
    const double raw = 2.0 * phi1_rad - phi2_rad;
    return EffectiveFlux{raw, wrap_angle(raw)};
}

double dispersion_mhz(const std::vector<DriveTone>& tones, double k) {
    double e = 0.0;
    for (const auto& tone : tones) {
        const double sign = tone.order % 2 == 0 ? 1.0 : -1.0;
        e += 2.0 * sign * tone.strength_mhz * std::cos(tone.order * k + tone.phase_rad);
    }
    return e;
}

double dispersion_derivative_mhz(const std::vector<DriveTone>& tones, double k) {
    double v = 0.0;
    for (const auto& tone : tones) {
        const double sign = tone.order % 2 == 0 ? 1.0 : -1.0;
        v -= 2.0 * sign * tone.strength_mhz * tone.order * std::sin(tone.order * k + tone.phase_rad);
    }
    return v;
}

} // namespace freqlat
