#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "freqlat/model.hpp"
#include "oracles.hpp"

using namespace freqlat;

namespace {

ModeLattice paper_lattice() {
    ModeLattice lat;
    lat.base_abs_index = 592;
    lat.n_left = 16;
    lat.n_right = 16;
    lat.omega0_mhz = 4320.0;
    lat.fsr_mhz = 7.33;
    return lat;
}

std::vector<double> sorted_eigenvalues_mhz(const HamiltonianMatrix& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.values);
    std::vector<double> ev(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + solver.eigenvalues().size());
    for (auto& e : ev) e /= kTwoPi;
    std::sort(ev.begin(), ev.end());
    return ev;
}

} // namespace

TEST_CASE("mode_frequency follows the even ladder") {
    ModeLattice lat = paper_lattice();
    CHECK(lat.mode_frequency_mhz(0) == doctest::Approx(4320.0).epsilon(1e-12));
    CHECK(lat.mode_frequency_mhz(1) == doctest::Approx(4327.33).epsilon(1e-12));
    CHECK(lat.mode_frequency_mhz(-2) == doctest::Approx(4305.34).epsilon(1e-12));
    // strictly increasing in m
    for (int m = -lat.n_left; m < lat.n_right; ++m)
        CHECK(lat.mode_frequency_mhz(m + 1) > lat.mode_frequency_mhz(m));
}

TEST_CASE("mode_frequency rejects out-of-range indices naming the span") {
    ModeLattice lat = paper_lattice();
    CHECK_THROWS_WITH_AS(lat.mode_frequency_mhz(17),
                         doctest::Contains("[-16, 16]"), DomainError);
    CHECK_THROWS_AS(lat.mode_frequency_mhz(-17), DomainError);
}

TEST_CASE("lattice invariants rejected on construction") {
    ModeLattice lat = paper_lattice();
    lat.fsr_mhz = -1.0;
    CHECK_THROWS_AS(lat.validate(), ConfigError);
    lat = paper_lattice();
    lat.n_left = 0;
    lat.n_right = 0; // single mode
    CHECK_THROWS_AS(lat.validate(), ConfigError);
}

TEST_CASE("lab Hamiltonian: free ladder is diagonal in referenced detunings") {
    ModeLattice lat = paper_lattice();
    const auto h = build_lab_hamiltonian(lat, {}, std::nullopt, 0.37);
    CHECK(h.frame == Frame::lab);
    CHECK(h.dimension() == 33);
    for (int r = 0; r < 33; ++r)
        CHECK(h.values(r, r).real() ==
              doctest::Approx(kTwoPi * lat.site(r) * lat.fsr_mhz).epsilon(1e-12));
    CHECK(h.values.cwiseAbs().sum() ==
          doctest::Approx(h.values.diagonal().cwiseAbs().sum()));
}

TEST_CASE("lab Hamiltonian: modulated entry sign algebra on an even/odd pair") {
    ModeLattice lat;
    lat.base_abs_index = 592; // site 0 -> abs 592 (even), site 1 -> abs 593 (odd)
    lat.n_left = 0;
    lat.n_right = 1;
    lat.omega0_mhz = 4320.0;
    lat.fsr_mhz = 7.33;
    DriveTone tone = make_resonant_tone(lat, 1, 0.0, 0.1, 0.0);
    const auto h = build_lab_hamiltonian(lat, {tone}, std::nullopt, 0.0);
    CHECK(h.values(0, 1).real() == doctest::Approx(-2.0 * kTwoPi * 0.1).epsilon(1e-12));
    CHECK(h.values(0, 1).imag() == 0.0);
}

TEST_CASE("lab Hamiltonian: sqrt-omega coupler scaling") {
    ModeLattice lat = paper_lattice();
    QubitCoupler coupler;
    coupler.omega_q_mhz = lat.mode_frequency_mhz(0);
    coupler.kappa_mhz = 0.36;
    coupler.scaling = CouplerScaling::sqrt_omega;
    const auto h = build_lab_hamiltonian(lat, {}, coupler, 0.0);
    CHECK(h.includes_qubit);
    CHECK(h.dimension() == 34);
    for (int r = 0; r < 33; ++r) {
        const double omega_m = lat.mode_frequency_mhz(lat.site(r));
        const double expected = kTwoPi * 0.36 * std::sqrt(omega_m / coupler.omega_q_mhz);
        CHECK(h.values(0, 1 + r).real() == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("lab Hamiltonian: hermitian to 1e-12 for random configurations") {
    auto gen = oracles::rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        ModeLattice lat = paper_lattice();
        lat.base_abs_index = 590 + int(u(gen) * 6);
        std::vector<DriveTone> tones;
        const int n_tones = 1 + int(u(gen) * 3);
        for (int i = 0; i < n_tones; ++i)
            tones.push_back(make_resonant_tone(lat, 1 + int(u(gen) * 3), u(gen) - 0.5,
                                               u(gen), u(gen) * kTwoPi));
        QubitCoupler coupler;
        coupler.omega_q_mhz = lat.mode_frequency_mhz(0) + (u(gen) - 0.5) * lat.fsr_mhz;
        coupler.kappa_mhz = 7.0 * u(gen);
        coupler.scaling = u(gen) < 0.5 ? CouplerScaling::flat : CouplerScaling::sqrt_omega;
        const auto h = build_lab_hamiltonian(lat, tones, coupler, 10.0 * u(gen));
        CHECK(h.hermiticity_defect() < 1e-12);
    }
}

// The pair parity factor (-1)^{(m+m0)+(n+n0)} with m0 = n0 depends only on
// m+n: the two base offsets always sum to an even number. Shifting
// base_abs_index therefore never changes the matrix, whether by 1 or by 2.
TEST_CASE("lab Hamiltonian: base-index shifts leave the matrix unchanged") {
    ModeLattice lat = paper_lattice();
    std::vector<DriveTone> tones = {make_resonant_tone(lat, 1, -0.1, 0.4, 1.1),
                                    make_resonant_tone(lat, 2, -0.1, 0.2, 2.2)};
    const auto h0 = build_lab_hamiltonian(lat, tones, std::nullopt, 0.21);
    ModeLattice lat1 = lat;
    lat1.base_abs_index += 1;
    ModeLattice lat2 = lat;
    lat2.base_abs_index += 2;
    const auto h1 = build_lab_hamiltonian(lat1, tones, std::nullopt, 0.21);
    const auto h2 = build_lab_hamiltonian(lat2, tones, std::nullopt, 0.21);
    CHECK((h1.values - h0.values).cwiseAbs().maxCoeff() == 0.0);
    CHECK((h2.values - h0.values).cwiseAbs().maxCoeff() == 0.0);
    // and the realized sign pattern is (-1)^{m+n} in relative indices: every
    // off-diagonal entry equals the shared drive scalar times that parity
    const double drive_scalar = h0.values(lat.row(0), lat.row(2)).real(); // even pair
    for (int r1 = 0; r1 < lat.site_count(); ++r1)
        for (int r2 = r1 + 1; r2 < lat.site_count(); ++r2) {
            const int m = lat.site(r1), n = lat.site(r2);
            const double sign = ((m + n) % 2 + 2) % 2 == 0 ? 1.0 : -1.0;
            CHECK(h0.values(r1, r2).real() ==
                  doctest::Approx(sign * drive_scalar).epsilon(1e-12));
        }
}

TEST_CASE("RWA Hamiltonian: uniform nearest-neighbor hopping at phi = pi") {
    ModeLattice lat = paper_lattice();
    std::vector<DriveTone> tones = {make_resonant_tone(lat, 1, 0.0, 0.5, kPi)};
    const auto h = build_rwa_hamiltonian(lat, tones, 0.0);
    CHECK(h.frame == Frame::rotating);
    CHECK_FALSE(h.includes_qubit);
    CHECK(h.hermiticity_defect() < 1e-12);
    for (int r = 0; r < 32; ++r) {
        CHECK(h.values(r, r + 1).real() == doctest::Approx(kTwoPi * 0.5).epsilon(1e-12));
        CHECK(std::abs(h.values(r, r + 1).imag()) < 1e-15);
    }
    CHECK(h.values.diagonal().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("RWA Hamiltonian: detuning tilts the diagonal") {
    ModeLattice lat = paper_lattice();
    std::vector<DriveTone> tones = {make_resonant_tone(lat, 1, -0.2, 0.5, kPi)};
    const auto h = build_rwa_hamiltonian(lat, tones, -0.2);
    for (int r = 0; r < h.dimension(); ++r)
        CHECK(h.values(r, r).real() ==
              doctest::Approx(lat.site(r) * kTwoPi * 0.2).epsilon(1e-12));
}

TEST_CASE("RWA Hamiltonian: two tones carry their own phases") {
    ModeLattice lat = paper_lattice();
    std::vector<DriveTone> tones = {make_resonant_tone(lat, 1, 0.0, 0.5, kPi),
                                    make_resonant_tone(lat, 2, 0.0, 0.25, 0.5 * kPi)};
    const auto h = build_rwa_hamiltonian(lat, tones, 0.0);
    const auto nn = h.values(5, 6);
    const auto nnn = h.values(5, 7);
    const std::complex<double> expected_nn =
        -kTwoPi * 0.5 * std::exp(std::complex<double>(0.0, kPi));
    const std::complex<double> expected_nnn =
        kTwoPi * 0.25 * std::exp(std::complex<double>(0.0, 0.5 * kPi));
    CHECK(std::abs(nn - expected_nn) < 1e-12);
    CHECK(std::abs(nnn - expected_nnn) < 1e-12);
}

TEST_CASE("RWA Hamiltonian: tone inconsistent with the detuning is rejected") {
    ModeLattice lat = paper_lattice();
    DriveTone off = make_resonant_tone(lat, 1, -0.2, 0.5, kPi);
    CHECK_THROWS_AS(build_rwa_hamiltonian(lat, {off}, 0.0), ConfigError);
    CHECK_NOTHROW(build_rwa_hamiltonian(lat, {off}, -0.2));
}

// RWA consistency oracle: diagonalize the single-tone matrix on a 64-site ring
// and compare with the closed-form band at the quantized momenta.
TEST_CASE("RWA ring eigenvalues match the analytic dispersion") {
    ModeLattice lat = paper_lattice();
    lat.n_left = 31;
    lat.n_right = 32; // 64 sites
    const int n = lat.site_count();
    for (int order : {1, 2}) {
        std::vector<DriveTone> tones = {make_resonant_tone(lat, order, 0.0, 0.5, kPi)};
        const auto h = build_rwa_hamiltonian(lat, tones, 0.0, Boundary::ring);
        auto ev = sorted_eigenvalues_mhz(h);
        std::vector<double> expected;
        for (int j = 0; j < n; ++j) {
            double k = kTwoPi * j / n;
            if (k > kPi) k -= kTwoPi;
            expected.push_back(dispersion_mhz(tones, k));
        }
        std::sort(expected.begin(), expected.end());
        for (int j = 0; j < n; ++j)
            CHECK(std::abs(ev[j] - expected[j]) < 1e-9);
    }
}

TEST_CASE("gauge transform shifts drive phases but not the flux or the spectrum") {
    ModeLattice lat = paper_lattice();
    lat.n_left = 31;
    lat.n_right = 32;
    const int n = lat.site_count();
    const double phi1 = kPi, phi2 = 0.5 * kPi;
    const double theta = kTwoPi * 5.0 / n; // single-valued on the ring
    std::vector<DriveTone> tones = {make_resonant_tone(lat, 1, 0.0, 0.5, phi1),
                                    make_resonant_tone(lat, 2, 0.0, 0.25, phi2)};
    std::vector<DriveTone> gauged = {make_resonant_tone(lat, 1, 0.0, 0.5, phi1 + theta),
                                     make_resonant_tone(lat, 2, 0.0, 0.25, phi2 + 2.0 * theta)};
    CHECK(effective_flux(phi1, phi2).canonical_rad ==
          doctest::Approx(effective_flux(phi1 + theta, phi2 + 2.0 * theta).canonical_rad)
              .epsilon(1e-12));
    const auto ev_a = sorted_eigenvalues_mhz(build_rwa_hamiltonian(lat, tones, 0.0, Boundary::ring));
    const auto ev_b = sorted_eigenvalues_mhz(build_rwa_hamiltonian(lat, gauged, 0.0, Boundary::ring));
    for (int j = 0; j < n; ++j)
        CHECK(std::abs(ev_a[j] - ev_b[j]) < 1e-9);
}

TEST_CASE("effective flux values and canonicalization") {
    CHECK(effective_flux(kPi, kPi).raw_rad == doctest::Approx(kPi));
    CHECK(effective_flux(kPi, kPi).canonical_rad == doctest::Approx(kPi));
    CHECK(effective_flux(kPi, 0.5 * kPi).raw_rad == doctest::Approx(1.5 * kPi));
    CHECK(effective_flux(kPi, 0.5 * kPi).canonical_rad == doctest::Approx(-0.5 * kPi));
    CHECK(effective_flux(0.0, 0.0).raw_rad == 0.0);
    CHECK(effective_flux(0.0, 0.0).canonical_rad == 0.0);
}

TEST_CASE("dispersion closed form and derivative") {
    ModeLattice lat = paper_lattice();
    std::vector<DriveTone> nn = {make_resonant_tone(lat, 1, 0.0, 0.5, kPi)};
    CHECK(dispersion_mhz(nn, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(dispersion_mhz(nn, kPi / 2.0)) < 1e-12);

    // derivative against central finite differences (independent route)
    std::vector<DriveTone> two = {make_resonant_tone(lat, 1, 0.0, 0.5, kPi),
                                  make_resonant_tone(lat, 2, 0.0, 0.25, 0.5 * kPi)};
    const double hstep = 1e-6;
    for (double k : {-2.5, -1.0, 0.3, 1.7, 3.0}) {
        const double fd = (dispersion_mhz(two, k + hstep) - dispersion_mhz(two, k - hstep)) / (2.0 * hstep);
        CHECK(dispersion_derivative_mhz(two, k) == doctest::Approx(fd).epsilon(1e-6));
    }

    // flux 1.5*pi breaks k -> -k symmetry
    double max_asym = 0.0;
    for (double k = 0.05; k < kPi; k += 0.05)
        max_asym = std::max(max_asym, std::abs(dispersion_mhz(two, k) - dispersion_mhz(two, -k)));
    CHECK(max_asym > 0.2);
}

TEST_CASE("drive tone invariants and warnings") {
    DriveTone tone;
    tone.order = 0;
    CHECK_THROWS_AS(tone.validate(), ConfigError);
    tone.order = 1;
    tone.strength_mhz = -0.1;
    CHECK_THROWS_AS(tone.validate(), ConfigError);

    DriveTone far;
    far.order = 1;
    far.freq_mhz = 10.0; // detuning 2.67 MHz against fsr 7.33
    far.strength_mhz = 0.1;
    CHECK_FALSE(far.warnings(7.33).empty());
    DriveTone near_res = make_resonant_tone(paper_lattice(), 1, -0.2, 0.5, 0.0);
    CHECK(near_res.warnings(7.33).empty());
}

TEST_CASE("coupler warns above the tuning range but does not reject") {
    QubitCoupler coupler;
    coupler.kappa_mhz = 8.0;
    CHECK_NOTHROW(coupler.validate());
    CHECK_FALSE(coupler.warnings().empty());
    coupler.kappa_mhz = -0.1;
    CHECK_THROWS_AS(coupler.validate(), ConfigError);
}
