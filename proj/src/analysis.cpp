#include "freqlat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>

#include "freqlat/model.hpp"

namespace freqlat {

namespace {

// Quadratic sub-bin interpolation of a peak at index i of y; returns the
// fractional offset in (-0.5, 0.5).
double parabolic_offset(const Eigen::VectorXd& y, Eigen::Index i) {
    if (i <= 0 || i + 1 >= y.size()) return 0.0;
    const double den = y(i - 1) - 2.0 * y(i) + y(i + 1);
    if (den == 0.0) return 0.0;
    double d = 0.5 * (y(i - 1) - y(i + 1)) / den;
    return std::clamp(d, -0.5, 0.5);
}

Eigen::VectorXd hann_window(Eigen::Index n) {
    Eigen::VectorXd w(n);
    for (Eigen::Index j = 0; j < n; ++j)
        w(j) = n > 1 ? 0.5 * (1.0 - std::cos(kTwoPi * double(j) / double(n - 1))) : 1.0;
    return w;
}

} // namespace

double BandMap::ridge_omega_at(double k) const {
    if (ridge.empty()) throw DomainError("band map has no ridge");
    auto best = ridge.front();
    for (const auto& r : ridge)
        if (std::abs(r.first - k) < std::abs(best.first - k)) best = r;
    return best.second;
}

BandMap band_from_wavefunction(const Eigen::MatrixXcd& psi, double dt_us, int pad_factor) {
    const Eigen::Index n_t = psi.rows();
    const Eigen::Index n_m = psi.cols();
    if (n_m < 8) throw DomainError("band_from_wavefunction: at least 8 modes required");
    if (n_t < 16) throw DomainError("band_from_wavefunction: at least 16 time samples required");
    if (!(dt_us > 0.0)) throw DomainError("band_from_wavefunction: dt > 0 required");
    if (pad_factor < 1) throw DomainError("band_from_wavefunction: pad factor >= 1 required");

    const Eigen::Index n_f = n_t * pad_factor;
    const Eigen::VectorXd window = hann_window(n_t);

    // frequency grid (MHz), ascending; evaluating the windowed sum on this
    // denser grid is identical to zero padding by pad_factor
    Eigen::VectorXd omega(n_f);
    for (Eigen::Index a = 0; a < n_f; ++a)
        omega(a) = double(a - (n_f - 1) / 2) / (double(n_f) * dt_us);

    // quasimomentum grid (rad/site), ascending over (-pi, pi]
    Eigen::VectorXd kgrid(n_m);
    for (Eigen::Index b = 0; b < n_m; ++b)
        kgrid(b) = kTwoPi * double(b - (n_m - 1) / 2) / double(n_m);

    // psi(m, t) ~ e^{i(k m - w t)}: transform with e^{+i w t} over time and
    // e^{-i k m} over mode index
    Eigen::MatrixXcd ft(n_f, n_t);
    for (Eigen::Index a = 0; a < n_f; ++a)
        for (Eigen::Index j = 0; j < n_t; ++j)
            ft(a, j) = window(j) *
                       std::exp(std::complex<double>(0.0, kTwoPi * omega(a) * dt_us * double(j)));
    Eigen::MatrixXcd fm(n_m, n_m); // [k x m]
    for (Eigen::Index b = 0; b < n_m; ++b)
        for (Eigen::Index c = 0; c < n_m; ++c)
            fm(b, c) = std::exp(std::complex<double>(0.0, -kgrid(b) * double(c)));

    const Eigen::MatrixXcd spectrum = ft * psi * fm.transpose(); // [omega x k]

    BandMap out;
    out.k_grid = kgrid;
    out.omega_grid_mhz = omega;
    out.intensity = spectrum.cwiseAbs2().transpose(); // [k x omega]
    const double peak = out.intensity.maxCoeff();
    if (peak > 0.0) out.intensity /= peak;

    out.ridge.reserve(n_m);
    const double domega = 1.0 / (double(n_f) * dt_us);
    for (Eigen::Index b = 0; b < n_m; ++b) {
        Eigen::Index a_star = 0;
        out.intensity.row(b).maxCoeff(&a_star);
        const Eigen::VectorXd column = out.intensity.row(b).transpose();
        const double offset = parabolic_offset(column, a_star);
        out.ridge.emplace_back(kgrid(b), omega(a_star) + offset * domega);
    }
    return out;
}

BandMap band_from_wavefunction(const Eigen::MatrixXcd& psi,
                               std::span<const double> times_us, int pad_factor) {
    if (static_cast<Eigen::Index>(times_us.size()) != psi.rows())
        throw DomainError("band_from_wavefunction: time grid does not match the record");
    if (times_us.size() < 2)
        throw DomainError("band_from_wavefunction: at least 2 time samples required");
    const double dt = times_us[1] - times_us[0];
    for (std::size_t j = 1; j < times_us.size(); ++j) {
        const double step = times_us[j] - times_us[j - 1];
        if (std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw DomainError("band_from_wavefunction: non-uniform time sampling");
    }
    return band_from_wavefunction(psi, dt, pad_factor);
}

LorentzianFit lorentzian_fit(std::span<const double> sites,
                             std::span<const double> populations,
                             double site_spacing_mhz) {
    const std::size_t n = populations.size();
    if (sites.size() != n)
        throw DomainError("lorentzian_fit: sites and populations differ in length");
    if (n < 5) throw FitError("lorentzian_fit: at least 5 points required");
    if (!(site_spacing_mhz > 0.0))
        throw DomainError("lorentzian_fit: site spacing must be positive");

    std::size_t i_peak = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (populations[i] > populations[i_peak]) i_peak = i;
    const double peak = populations[i_peak];
    if (!(peak > 0.0)) throw FitError("lorentzian_fit: no positive peak");
    std::size_t support = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (populations[i] > 1e-12 * peak) ++support;
    if (support < 3) throw FitError("lorentzian_fit: insufficient support around the peak");

    // initialization: empirical peak plus half-maximum crossings
    const double half = 0.5 * peak;
    double left = sites[i_peak], right = sites[i_peak];
    bool has_left = false, has_right = false;
    for (std::size_t i = i_peak; i-- > 0;) {
        if (populations[i] < half) {
            const double f = (half - populations[i]) / (populations[i + 1] - populations[i]);
            left = sites[i] + f * (sites[i + 1] - sites[i]);
            has_left = true;
            break;
        }
    }
    for (std::size_t i = i_peak + 1; i < n; ++i) {
        if (populations[i] < half) {
            const double f = (populations[i - 1] - half) / (populations[i - 1] - populations[i]);
            right = sites[i - 1] + f * (sites[i] - sites[i - 1]);
            has_right = true;
            break;
        }
    }
    double gamma; // half width at half maximum, site units
    if (has_left && has_right) gamma = 0.5 * (right - left);
    else if (has_left) gamma = sites[i_peak] - left;
    else if (has_right) gamma = right - sites[i_peak];
    else gamma = 0.25 * (sites[n - 1] - sites[0]);
    gamma = std::max(gamma, 0.25);

    double a = peak;
    double x0 = sites[i_peak];

    const auto cost_of = [&](double A, double X, double G) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = (sites[i] - X) * (sites[i] - X) + G * G;
            const double r = A * G * G / d - populations[i];
            c += r * r;
        }
        return c;
    };

    // Levenberg-Marquardt on (A, x0, gamma)
    double lambda = 1e-3;
    double cost = cost_of(a, x0, gamma);
    int iterations = 0;
    bool converged = false;
    for (; iterations < 200 && !converged; ++iterations) {
        Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
        Eigen::Vector3d jtr = Eigen::Vector3d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = sites[i] - x0;
            const double den = dx * dx + gamma * gamma;
            const double f = a * gamma * gamma / den;
            const double r = f - populations[i];
            Eigen::Vector3d j;
            j(0) = gamma * gamma / den;
            j(1) = 2.0 * a * gamma * gamma * dx / (den * den);
            j(2) = 2.0 * a * gamma * dx * dx / (den * den);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        bool accepted = false;
        for (int attempt = 0; attempt < 16 && !accepted; ++attempt) {
            Eigen::Matrix3d damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal();
            const Eigen::Vector3d step = damped.ldlt().solve(-jtr);
            const double a_new = a + step(0);
            const double x_new = x0 + step(1);
            const double g_new = std::abs(gamma + step(2));
            const double c_new = g_new > 0.0 ? cost_of(a_new, x_new, g_new)
                                             : std::numeric_limits<double>::infinity();
            if (c_new <= cost) {
                const double rel = std::max({std::abs(step(0)) / std::max(1e-300, std::abs(a_new)),
                                             std::abs(step(1)) / std::max(1.0, std::abs(x_new)),
                                             std::abs(step(2)) / std::max(1e-300, g_new)});
                a = a_new;
                x0 = x_new;
                gamma = g_new;
                cost = c_new;
                lambda = std::max(lambda / 3.0, 1e-12);
                accepted = true;
                if (rel < 1e-10) converged = true;
            } else {
                lambda *= 5.0;
            }
        }
        if (!accepted) {
            converged = true; // stalled at the current minimum
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "lorentzian_fit: no convergence after " << iterations
           << " iterations (cost " << cost << ", center " << x0 << ", hwhm " << gamma << ")";
        throw FitError(os.str());
    }

    LorentzianFit out;
    out.center_site = x0;
    out.fwhm_mhz = 2.0 * gamma * site_spacing_mhz;
    out.peak = a;
    out.residual_rms = std::sqrt(cost / double(n));
    out.iterations = iterations;
    return out;
}

double center_of_mass(std::span<const double> sites, std::span<const double> populations,
                      bool renormalize) {
    if (sites.size() != populations.size())
        throw DomainError("center_of_mass: sites and populations differ in length");
    double total = 0.0, first = 0.0;
    for (std::size_t i = 0; i < sites.size(); ++i) {
        total += populations[i];
        first += sites[i] * populations[i];
    }
    if (!renormalize) return first;
    if (!(total > 0.0)) throw DomainError("center_of_mass: zero total population");
    return first / total;
}

double bloch_period_estimate_us(std::span<const double> times_us,
                                std::span<const double> values) {
    const std::size_t n = times_us.size();
    if (values.size() != n)
        throw DomainError("bloch_period_estimate: times and values differ in length");
    if (n < 8) throw DomainError("bloch_period_estimate: at least 8 samples required");
    const double dt = times_us[1] - times_us[0];
    if (!(dt > 0.0)) throw DomainError("bloch_period_estimate: increasing time grid required");
    for (std::size_t j = 1; j < n; ++j)
        if (std::abs(times_us[j] - times_us[j - 1] - dt) > 1e-9 * std::max(1.0, dt))
            throw DomainError("bloch_period_estimate: non-uniform time sampling");

    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / double(n);
    double rms = 0.0;
    for (double v : values) rms += (v - mean) * (v - mean);
    rms = std::sqrt(rms / double(n));
    if (rms < 1e-12 * std::max(1.0, std::abs(mean)))
        throw EstimationError("bloch_period_estimate: constant series has no oscillation");

    const int pad = 8;
    const std::size_t n_f = n * pad / 2; // positive frequencies only
    Eigen::VectorXd magnitude(n_f - 1);
    const double df = 1.0 / (double(n * pad) * dt);
    for (std::size_t a = 1; a < n_f; ++a) {
        std::complex<double> acc(0.0, 0.0);
        const double f = double(a) * df;
        for (std::size_t j = 0; j < n; ++j)
            acc += (values[j] - mean) *
                   std::exp(std::complex<double>(0.0, -kTwoPi * f * times_us[j]));
        magnitude(a - 1) = std::abs(acc);
    }

    Eigen::Index a_star = 0;
    magnitude.maxCoeff(&a_star);
    Eigen::VectorXd sorted = magnitude;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    const double median = sorted(sorted.size() / 2);
    if (!(magnitude(a_star) > 3.0 * median) || !(magnitude(a_star) > 1e-300))
        throw EstimationError("bloch_period_estimate: no significant spectral peak");

    const double offset = parabolic_offset(magnitude, a_star);
    const double f_peak = (double(a_star + 1) + offset) * df;
    const double period = 1.0 / f_peak;
    // the series must span at least 1.5 periods for the peak to describe a
    // real oscillation rather than a drift (an untilted run has no period)
    const double span = times_us[n - 1] - times_us[0];
    if (period > span / 1.5) {
        std::ostringstream os;
        os << "bloch_period_estimate: dominant period " << period
           << " us is not resolved by the " << span << " us trajectory";
        throw EstimationError(os.str());
    }
    return period;
}

double asymmetry_metric(const Eigen::MatrixXd& populations, std::span<const int> sites) {
    if (static_cast<Eigen::Index>(sites.size()) != populations.cols())
        throw DomainError("asymmetry_metric: site list does not match the map");
    if (populations.rows() < 1)
        throw DomainError("asymmetry_metric: empty map");

    std::vector<double> site_values(sites.begin(), sites.end());
    std::vector<double> first_row(populations.cols());
    for (Eigen::Index j = 0; j < populations.cols(); ++j) first_row[j] = populations(0, j);
    const double c0 = center_of_mass(site_values, first_row);
    const long footprint = std::lround(2.0 * c0);
    if (std::abs(2.0 * c0 - double(footprint)) > 0.1)
        throw DomainError("asymmetry_metric: initial center of mass is not on the half-site grid");

    std::vector<Eigen::Index> mirror(sites.size());
    for (std::size_t j = 0; j < sites.size(); ++j) {
        const long partner = footprint - sites[j];
        auto it = std::find(sites.begin(), sites.end(), int(partner));
        if (it == sites.end())
            throw DomainError("asymmetry_metric: site window is not symmetric around the initial center");
        mirror[j] = std::distance(sites.begin(), it);
    }

    double diff = 0.0, total = 0.0;
    for (Eigen::Index i = 0; i < populations.rows(); ++i)
        for (std::size_t j = 0; j < sites.size(); ++j) {
            diff += std::abs(populations(i, Eigen::Index(j)) - populations(i, mirror[j]));
            total += populations(i, Eigen::Index(j));
        }
    if (!(total > 0.0)) throw DomainError("asymmetry_metric: zero total population");
    return diff / total;
}

} // namespace freqlat
