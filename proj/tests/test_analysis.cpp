#include "doctest.h"

#include <cmath>
#include <complex>
#include <vector>

#include "freqlat/analysis.hpp"
#include "freqlat/evolve.hpp"
#include "oracles.hpp"

using namespace freqlat;

namespace {

Eigen::MatrixXcd plane_wave(int n_t, int n_m, double k0, double f0_mhz, double dt_us) {
    Eigen::MatrixXcd psi(n_t, n_m);
    for (int i = 0; i < n_t; ++i)
        for (int j = 0; j < n_m; ++j)
            psi(i, j) = std::exp(std::complex<double>(
                0.0, k0 * j - oracles::two_pi * f0_mhz * dt_us * i));
    return psi;
}

std::pair<double, double> band_peak(const BandMap& band) {
    Eigen::Index bk = 0, ba = 0;
    band.intensity.maxCoeff(&bk, &ba);
    return {band.k_grid(bk), band.omega_grid_mhz(ba)};
}

} // namespace

TEST_CASE("band map: plane wave peaks at its (k, f)") {
    const double dt = 0.05;
    const double k0 = 0.7854, f0 = 0.83;
    const auto psi = plane_wave(64, 17, k0, f0, dt);
    const auto band = band_from_wavefunction(psi, dt);
    CHECK(band.intensity.maxCoeff() == doctest::Approx(1.0));
    CHECK(band.intensity.minCoeff() >= 0.0);
    const auto [kp, fp] = band_peak(band);
    CHECK(std::abs(kp - k0) < oracles::two_pi / 17.0);          // one k cell
    CHECK(std::abs(fp - f0) < 1.0 / (64.0 * 4.0 * dt) + 1e-12); // one omega cell
    // interpolated ridge at the peak column is tighter than the grid
    CHECK(std::abs(band.ridge_omega_at(kp) - f0) < 0.05);
}

TEST_CASE("band map: invariant under global phase, shifted by e^{i k0 m}") {
    const double dt = 0.1;
    auto gen = oracles::rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXcd psi(32, 16);
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 16; ++j) psi(i, j) = std::complex<double>(u(gen), u(gen));

    const auto base = band_from_wavefunction(psi, dt);
    const auto rotated = band_from_wavefunction(
        psi * std::exp(std::complex<double>(0.0, 1.234)), dt);
    CHECK((base.intensity - rotated.intensity).cwiseAbs().maxCoeff() < 1e-9);

    // multiply by e^{i k0 m} with k0 exactly one k grid cell: intensity rows rotate
    const double k0 = oracles::two_pi / 16.0;
    Eigen::MatrixXcd shifted = psi;
    for (int j = 0; j < 16; ++j)
        shifted.col(j) *= std::exp(std::complex<double>(0.0, k0 * j));
    const auto moved = band_from_wavefunction(shifted, dt);
    Eigen::Index bk0 = 0, ba0 = 0, bk1 = 0, ba1 = 0;
    base.intensity.maxCoeff(&bk0, &ba0);
    moved.intensity.maxCoeff(&bk1, &ba1);
    CHECK(ba1 == ba0);
    const double expected_k = wrap_angle(base.k_grid(bk0) + k0);
    CHECK(moved.k_grid(bk1) == doctest::Approx(expected_k).epsilon(1e-9));
}

TEST_CASE("band map: single-site evolution ridge matches the analytic band") {
    ModeLattice lat;
    lat.n_left = 16;
    lat.n_right = 16;
    std::vector<DriveTone> tones = {make_resonant_tone(lat, 1, 0.0, 0.5, kPi)};
    const auto h = build_rwa_hamiltonian(lat, tones, 0.0);
    auto st = SingleExcitationState::single_mode(lat, 0);
    const double dt = 0.05;
    const int n_t = 48; // 2.4 us, inside the light cone for 33 modes
    Eigen::MatrixXcd psi(n_t, lat.site_count());
    for (int i = 0; i < n_t; ++i) {
        psi.row(i) = st.c_modes.transpose();
        st = evolve_static(st, h, dt);
    }
    const auto band = band_from_wavefunction(psi, dt);
    const double cell = 1.0 / (n_t * 4.0 * dt);
    double rms = 0.0;
    for (const auto& [k, omega] : band.ridge) {
        const double analytic = dispersion_mhz(tones, k);
        rms += (omega - analytic) * (omega - analytic);
    }
    rms = std::sqrt(rms / double(band.ridge.size()));
    CHECK(rms < std::max(0.1, cell));
}

TEST_CASE("band map: sampling preconditions") {
    Eigen::MatrixXcd tiny = Eigen::MatrixXcd::Ones(4, 4);
    CHECK_THROWS_AS(band_from_wavefunction(tiny, 0.1), DomainError);
    Eigen::MatrixXcd ok = Eigen::MatrixXcd::Ones(16, 8);
    CHECK_THROWS_AS(band_from_wavefunction(ok, 0.0), DomainError);
    std::vector<double> bad_times(16);
    for (int i = 0; i < 16; ++i) bad_times[i] = 0.1 * i;
    bad_times[7] += 0.02;
    CHECK_THROWS_AS(band_from_wavefunction(ok, bad_times), DomainError);
    std::vector<double> good_times(16);
    for (int i = 0; i < 16; ++i) good_times[i] = 0.1 * i;
    CHECK_NOTHROW(band_from_wavefunction(ok, good_times));
}

TEST_CASE("lorentzian fit: exact samples recovered to 1e-6 relative") {
    const double a_true = 0.27, fwhm_mhz = 31.0, spacing = 7.33, x0_true = 0.0;
    const double gamma = 0.5 * fwhm_mhz / spacing;
    std::vector<double> sites, pops;
    for (int m = -16; m <= 16; ++m) {
        sites.push_back(m);
        const double dx = m - x0_true;
        pops.push_back(a_true * gamma * gamma / (dx * dx + gamma * gamma));
    }
    const auto fit = lorentzian_fit(sites, pops, spacing);
    CHECK(fit.peak == doctest::Approx(a_true).epsilon(1e-6));
    CHECK(fit.fwhm_mhz == doctest::Approx(fwhm_mhz).epsilon(1e-6));
    CHECK(std::abs(fit.center_site - x0_true) < 1e-6);
    CHECK(fit.residual_rms < 1e-9);
}

TEST_CASE("lorentzian fit: degenerate inputs are fit errors") {
    std::vector<double> sites = {-2, -1, 0, 1, 2};
    std::vector<double> single = {0, 0, 0.5, 0, 0};
    CHECK_THROWS_AS(lorentzian_fit(sites, single, 7.33), FitError);
    std::vector<double> few_sites = {0, 1};
    std::vector<double> few = {0.1, 0.2};
    CHECK_THROWS_AS(lorentzian_fit(few_sites, few, 7.33), FitError);
}

TEST_CASE("lorentzian fit: scale equivariance") {
    std::vector<double> sites, pops, scaled;
    auto gen = oracles::rng(11);
    std::uniform_real_distribution<double> noise(-1e-3, 1e-3);
    for (int m = -10; m <= 10; ++m) {
        sites.push_back(m);
        const double d = m - 0.4;
        const double v = 0.3 * 2.25 / (d * d + 2.25) + noise(gen);
        pops.push_back(std::max(v, 0.0));
    }
    const double c = 3.7;
    for (double v : pops) scaled.push_back(c * v);
    const auto f1 = lorentzian_fit(sites, pops, 7.33);
    const auto f2 = lorentzian_fit(sites, scaled, 7.33);
    CHECK(f2.peak / f1.peak == doctest::Approx(c).epsilon(1e-9));
    CHECK(f2.center_site == doctest::Approx(f1.center_site).epsilon(1e-9));
    CHECK(f2.fwhm_mhz == doctest::Approx(f1.fwhm_mhz).epsilon(1e-9));
}

TEST_CASE("center of mass: values, renormalization, translation equivariance") {
    std::vector<double> sites = {0, 1, 2, 3, 4, 5, 6};
    std::vector<double> pops = {0, 0, 0, 1.0, 0, 0, 0};
    CHECK(center_of_mass(sites, pops) == doctest::Approx(3.0));

    std::vector<double> sym_sites = {-1, 0, 1};
    std::vector<double> sym = {0.5, 0.0, 0.5};
    CHECK(center_of_mass(sym_sites, sym) == doctest::Approx(0.0));
    CHECK(center_of_mass(sym_sites, sym, false) == doctest::Approx(0.0));

    std::vector<double> zero = {0, 0, 0};
    CHECK_THROWS_AS(center_of_mass(sym_sites, zero), DomainError);

    // shift all sites by s: COM shifts by s
    auto gen = oracles::rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> rs, rp, rs_shift;
    for (int m = 0; m < 9; ++m) {
        rs.push_back(m);
        rs_shift.push_back(m + 5);
        rp.push_back(u(gen));
    }
    CHECK(center_of_mass(rs_shift, rp) ==
          doctest::Approx(center_of_mass(rs, rp) + 5.0).epsilon(1e-12));
}

TEST_CASE("bloch period estimate: synthetic sinusoid and degenerate input") {
    std::vector<double> times, values, flat;
    for (int i = 0; i * 0.05 <= 15.0; ++i) {
        const double t = 0.05 * i;
        times.push_back(t);
        values.push_back(2.0 + 0.7 * std::sin(oracles::two_pi * t / 5.0 + 0.3));
        flat.push_back(1.3);
    }
    const double period = bloch_period_estimate_us(times, values);
    CHECK(period == doctest::Approx(5.0).epsilon(0.02));
    CHECK_THROWS_AS(bloch_period_estimate_us(times, flat), EstimationError);

    // offset invariance
    std::vector<double> offset = values;
    for (auto& v : offset) v += 11.0;
    CHECK(bloch_period_estimate_us(times, offset) == doctest::Approx(period).epsilon(1e-9));
}

TEST_CASE("asymmetry metric: mirror-symmetric map scores zero") {
    std::vector<int> sites = {-2, -1, 0, 1, 2};
    Eigen::MatrixXd p(3, 5);
    p << 0.0, 0.2, 0.6, 0.2, 0.0,
         0.1, 0.2, 0.4, 0.2, 0.1,
         0.2, 0.1, 0.4, 0.1, 0.2;
    CHECK(asymmetry_metric(p, sites) == doctest::Approx(0.0));

    Eigen::MatrixXd q = p;
    q(1, 3) += 0.1; // break the mirror
    CHECK(asymmetry_metric(q, sites) > 0.0);
}

TEST_CASE("asymmetry metric: lopsided window is a domain error") {
    std::vector<int> sites = {-1, 0, 1, 2};
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 4);
    p(0, 1) = 1.0; // start at site 0; site -2 missing for mirror of 2
    p(1, 1) = 1.0;
    CHECK_THROWS_AS(asymmetry_metric(p, sites), DomainError);
}
