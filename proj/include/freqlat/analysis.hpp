// analysis.hpp — trajectory and distribution post-processing: band maps with
// ridge extraction, Lorentzian envelope fits, center-of-mass and oscillation
// metrics.
#pragma once

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "freqlat/errors.hpp"

namespace freqlat {

// Spectral density over (quasimomentum, rotating-frame energy) with the ridge
// of per-column intensity maxima.
struct BandMap {
    Eigen::VectorXd k_grid;          // rad/site, ascending, spanning (-pi, pi]
    Eigen::VectorXd omega_grid_mhz;  // ascending, MHz
    Eigen::MatrixXd intensity;       // [k x omega], max-normalized to 1
    std::vector<std::pair<double, double>> ridge; // (k, omega_peak_mhz) per k

    double ridge_omega_at(double k) const; // nearest-k lookup
};

// 2D discrete transform of the amplitude record psi[time, mode]. A Hann
// window is applied in time (none in mode index), the time axis is evaluated
// on a pad_factor-times denser frequency grid (equivalent to zero padding),
// and the ridge is the sub-bin interpolated intensity argmax per k column.
// Conventions: psi(m,t) ~ e^{i(k m - 2 pi f t)} peaks at (k, f).
BandMap band_from_wavefunction(const Eigen::MatrixXcd& psi, double dt_us,
                               int pad_factor = 4);

// Overload validating an explicit, uniformly spaced time grid.
BandMap band_from_wavefunction(const Eigen::MatrixXcd& psi,
                               std::span<const double> times_us,
                               int pad_factor = 4);

struct LorentzianFit {
    double center_site = 0.0;   // mode index, real-valued
    double fwhm_mhz = 0.0;
    double peak = 0.0;          // population at the center
    double residual_rms = 0.0;
    int iterations = 0;
};

// Least-squares fit of A * (G/2)^2 / ((x - x0)^2 + (G/2)^2) against the mode
// populations, initialized from the empirical peak and half-maximum
// crossings. site_spacing_mhz converts the width to MHz.
LorentzianFit lorentzian_fit(std::span<const double> sites,
                             std::span<const double> populations,
                             double site_spacing_mhz);

// sum(m p_m) / sum(p_m) when renormalize, else sum(m p_m).
double center_of_mass(std::span<const double> sites,
                      std::span<const double> populations,
                      bool renormalize = true);

// Dominant-frequency period estimate of a scalar time series: discrete
// transform of the mean-subtracted series on a padded frequency grid with
// quadratic peak interpolation. Throws EstimationError when the spectrum has
// no significant peak (below 3x the spectral median).
double bloch_period_estimate_us(std::span<const double> times_us,
                                std::span<const double> values);

// Mirror-asymmetry of a population map about the initial center of mass:
//   sum_{m,t} |p(m,t) - p(m',t)| / sum_{m,t} p(m,t),  m' the mirror site.
// The site window must be symmetric around the initial center.
double asymmetry_metric(const Eigen::MatrixXd& populations /*[t x m]*/,
                        std::span<const int> sites);

} // namespace freqlat
