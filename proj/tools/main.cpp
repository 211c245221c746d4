// freqlat — configuration-driven CLI for synthetic frequency-lattice
// single-photon dynamics: runs the experiment protocols and serializes
// populations, band maps, fits and run manifests.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <thread>

#include "CLI11.hpp"

#include "freqlat/analysis.hpp"
#include "freqlat/config.hpp"
#include "freqlat/output.hpp"
#include "freqlat/protocols.hpp"

namespace fs = std::filesystem;
using namespace freqlat;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "freqlat 0.1.0";

struct Common {
    std::string config_path;
    std::string out_dir;
    bool svg = false;
    long seed = 0;
    long shots = 0;
};

std::string default_out_dir() {
    if (const char* env = std::getenv("FREQLAT_OUT"); env && *env) return env;
    return "out";
}

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config_path, "experiment config file (INI format)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", c.out_dir, "output directory (default: $FREQLAT_OUT or ./out)");
    cmd->add_flag("--svg", c.svg, "also render SVG heatmaps");
    cmd->add_option("--seed", c.seed, "random seed for shot-sampled readout");
    cmd->add_option("--shots", c.shots, "Bernoulli readout shots per point (0 = amplitude mode)");
}

fs::path prepare_out_dir(const Common& c) {
    const fs::path dir = c.out_dir.empty() ? fs::path(default_out_dir()) : fs::path(c.out_dir);
    fs::create_directories(dir);
    return dir;
}

// Replace amplitude-level readout with the mean of `shots` Bernoulli draws.
void apply_shot_sampling(PopulationMap& map, long shots, long seed) {
    if (shots <= 0) return;
    std::mt19937_64 gen(static_cast<std::uint64_t>(seed));
    for (Eigen::Index i = 0; i < map.p1_readout.rows(); ++i)
        for (Eigen::Index j = 0; j < map.p1_readout.cols(); ++j) {
            const double p = std::clamp(map.p1_readout(i, j), 0.0, 1.0);
            std::binomial_distribution<long> draw(shots, p);
            map.p1_readout(i, j) = double(draw(gen)) / double(shots);
        }
}

RunManifest make_manifest(const ResolvedConfig& resolved, const Common& c) {
    RunManifest manifest;
    manifest.config_digest = resolved.digest_hex;
    manifest.seed = c.seed;
    manifest.tool_version = kToolVersion;
    manifest.defaults_applied = resolved.defaults_applied;
    manifest.warnings = resolved.warnings;
    return manifest;
}

void finish_manifest(RunManifest manifest, const ExperimentRecord* record, const fs::path& dir) {
    if (record)
        for (const auto& w : record->warnings) manifest.warnings.push_back(w);
    const fs::path path = dir / "manifest.json";
    manifest.outputs.emplace_back("manifest_json", path.string());
    write_json(path.string(), manifest.to_json());
}

std::vector<double> site_values(const std::vector<int>& sites) {
    return {sites.begin(), sites.end()};
}

// scalar series for period estimation: center of mass for wave packets,
// second moment about the initial center for single-site runs (whose center
// of mass stays put by symmetry)
std::vector<double> oscillation_series(const PopulationMap& map, PrepKind prep) {
    const auto sites = site_values(map.sites);
    std::vector<double> series;
    series.reserve(map.times_us.size());
    std::vector<double> row(map.sites.size());
    const auto fill_row = [&](Eigen::Index i) {
        for (std::size_t j = 0; j < row.size(); ++j) row[j] = map.p(i, Eigen::Index(j));
    };
    fill_row(0);
    const double c0 = center_of_mass(sites, row);
    for (Eigen::Index i = 0; i < Eigen::Index(map.times_us.size()); ++i) {
        fill_row(i);
        if (prep == PrepKind::wave_packet) {
            series.push_back(center_of_mass(sites, row));
        } else {
            double total = 0.0, second = 0.0;
            for (std::size_t j = 0; j < row.size(); ++j) {
                total += row[j];
                second += (sites[j] - c0) * (sites[j] - c0) * row[j];
            }
            series.push_back(second / total);
        }
    }
    return series;
}

json packet_fit_json(const ExperimentRecord& record, const ExperimentConfig& cfg) {
    std::vector<double> sites = site_values(record.psi_sites);
    std::vector<double> pops(record.psi_sites.size());
    for (std::size_t j = 0; j < pops.size(); ++j) pops[j] = std::norm(record.psi(0, Eigen::Index(j)));
    const auto fit = lorentzian_fit(sites, pops, cfg.lattice.fsr_mhz);
    const double kappa = cfg.coupler.kappa_mhz;
    json j;
    j["center_site"] = fit.center_site;
    j["fwhm_mhz"] = fit.fwhm_mhz;
    j["peak"] = fit.peak;
    j["residual_rms"] = fit.residual_rms;
    j["iterations"] = fit.iterations;
    j["golden_rule_fwhm_mhz"] = kTwoPi * kappa * kappa / cfg.lattice.fsr_mhz;
    return j;
}

void write_population_products(const ExperimentRecord& record, const ResolvedConfig& resolved,
                               const Common& c, const fs::path& dir, RunManifest& manifest) {
    PopulationMap map = record.map;
    apply_shot_sampling(map, c.shots, c.seed);
    const fs::path csv = dir / "populations.csv";
    write_population_csv(csv.string(), map);
    manifest.outputs.emplace_back("populations_csv", csv.string());
    if (c.svg || resolved.svg) {
        const fs::path svg = dir / "populations.svg";
        HeatmapSpec spec;
        spec.title = "mode populations";
        spec.x_label = "t (us)";
        spec.y_label = "mode index";
        spec.x_min = map.times_us.front();
        spec.x_max = map.times_us.back();
        spec.y_min = map.sites.front();
        spec.y_max = map.sites.back();
        write_heatmap_svg(svg.string(), map.p.transpose(), spec);
        manifest.outputs.emplace_back("heatmap_svg", svg.string());
    }
}

// ---------------------------------------------------------------- commands

void cmd_walk(const Common& c) {
    const auto resolved = parse_config(c.config_path);
    const fs::path dir = prepare_out_dir(c);
    const auto record = run_experiment(resolved.experiment);
    RunManifest manifest = make_manifest(resolved, c);
    write_population_products(record, resolved, c, dir, manifest);

    json metrics;
    metrics["prep_duration_us"] = record.prep_duration_us;
    if (resolved.experiment.prep == PrepKind::wave_packet)
        metrics["initial_fit"] = packet_fit_json(record, resolved.experiment);
    const fs::path fit_path = dir / "fit.json";
    write_json(fit_path.string(), metrics);
    manifest.outputs.emplace_back("fit_json", fit_path.string());
    finish_manifest(std::move(manifest), &record, dir);
}

json bloch_metrics(const ExperimentRecord& record, const ExperimentConfig& cfg) {
    json metrics;
    const double delta = cfg.drive_delta_mhz();
    metrics["delta_mhz"] = delta;
    metrics["series"] = cfg.prep == PrepKind::wave_packet ? "center_of_mass" : "variance";
    metrics["prep_duration_us"] = record.prep_duration_us;
    if (delta != 0.0) metrics["theory_period_us"] = 1.0 / std::abs(delta);
    if (cfg.prep == PrepKind::wave_packet) metrics["initial_fit"] = packet_fit_json(record, cfg);
    try {
        const auto series = oscillation_series(record.map, cfg.prep);
        metrics["period_us"] = bloch_period_estimate_us(record.map.times_us, series);
    } catch (const EstimationError& e) {
        metrics["error"] = e.what(); // recorded, not fatal: e.g. the untilted case
    }
    return metrics;
}

void cmd_bloch(const Common& c) {
    const auto resolved = parse_config(c.config_path);
    const fs::path dir = prepare_out_dir(c);
    const auto record = run_experiment(resolved.experiment);
    RunManifest manifest = make_manifest(resolved, c);
    write_population_products(record, resolved, c, dir, manifest);
    const fs::path fit_path = dir / "fit.json";
    write_json(fit_path.string(), bloch_metrics(record, resolved.experiment));
    manifest.outputs.emplace_back("fit_json", fit_path.string());
    finish_manifest(std::move(manifest), &record, dir);
}

void cmd_band(const Common& c) {
    const auto resolved = parse_config(c.config_path);
    const auto& cfg = resolved.experiment;
    if (std::abs(cfg.drive_delta_mhz()) > 1e-9)
        throw ConfigError("band subcommand requires an untilted lattice (drive delta = 0)");
    const fs::path dir = prepare_out_dir(c);
    const auto record = run_band_measurement(cfg);
    const auto band = band_from_wavefunction(record.psi, record.map.times_us);
    RunManifest manifest = make_manifest(resolved, c);

    const fs::path csv = dir / "band.csv";
    write_band_csv(csv.string(), band);
    manifest.outputs.emplace_back("band_csv", csv.string());
    if (c.svg || resolved.svg) {
        const fs::path svg = dir / "band.svg";
        HeatmapSpec spec;
        spec.title = "band intensity";
        spec.x_label = "k (rad/site)";
        spec.y_label = "omega (MHz)";
        spec.x_min = band.k_grid(0);
        spec.x_max = band.k_grid(band.k_grid.size() - 1);
        spec.y_min = band.omega_grid_mhz(0);
        spec.y_max = band.omega_grid_mhz(band.omega_grid_mhz.size() - 1);
        write_heatmap_svg(svg.string(), band.intensity.transpose(), spec);
        manifest.outputs.emplace_back("heatmap_svg", svg.string());
    }

    const auto tones = cfg.drive_tones(0.0);
    double rms = 0.0;
    double max_asym = 0.0;
    for (const auto& [k, omega] : band.ridge) {
        const double d = omega - dispersion_mhz(tones, k);
        rms += d * d;
        max_asym = std::max(max_asym, std::abs(omega - band.ridge_omega_at(-k)));
    }
    rms = std::sqrt(rms / double(band.ridge.size()));

    json metrics;
    metrics["ridge_rms_vs_analytic_mhz"] = rms;
    metrics["ridge_max_asymmetry_mhz"] = max_asym;
    metrics["omega_cell_mhz"] = band.omega_grid_mhz(1) - band.omega_grid_mhz(0);
    if (const auto* dbl = std::get_if<DoubleToneProgram>(&cfg.drive)) {
        const auto flux = effective_flux(dbl->phi1_rad, dbl->phi2_rad);
        metrics["flux_raw_rad"] = flux.raw_rad;
        metrics["flux_canonical_rad"] = flux.canonical_rad;
    }
    const fs::path fit_path = dir / "fit.json";
    write_json(fit_path.string(), metrics);
    manifest.outputs.emplace_back("fit_json", fit_path.string());
    finish_manifest(std::move(manifest), &record, dir);
}

void cmd_flux(const Common& c) {
    const auto resolved = parse_config(c.config_path);
    const auto& cfg = resolved.experiment;
    const auto* dbl = std::get_if<DoubleToneProgram>(&cfg.drive);
    if (!dbl)
        throw ConfigError("flux subcommand requires drive.kind = double_tone");
    const fs::path dir = prepare_out_dir(c);
    const auto record = run_experiment(cfg);
    RunManifest manifest = make_manifest(resolved, c);
    write_population_products(record, resolved, c, dir, manifest);

    const auto flux = effective_flux(dbl->phi1_rad, dbl->phi2_rad);
    json metrics;
    metrics["phi1_rad"] = dbl->phi1_rad;
    metrics["phi2_rad"] = dbl->phi2_rad;
    metrics["flux_raw_rad"] = flux.raw_rad;
    metrics["flux_canonical_rad"] = flux.canonical_rad;
    metrics["asymmetry"] = asymmetry_metric(record.map.p, record.map.sites);
    if (cfg.prep == PrepKind::wave_packet) metrics["initial_fit"] = packet_fit_json(record, cfg);
    const fs::path fit_path = dir / "fit.json";
    write_json(fit_path.string(), metrics);
    manifest.outputs.emplace_back("fit_json", fit_path.string());
    finish_manifest(std::move(manifest), &record, dir);
}

void cmd_unidir(const Common& c) {
    const auto resolved = parse_config(c.config_path);
    const auto& cfg = resolved.experiment;
    const auto* rev = std::get_if<ReversalProgram>(&cfg.drive);
    if (!rev)
        throw ConfigError("unidir subcommand requires drive.kind = reversal");
    const fs::path dir = prepare_out_dir(c);
    const auto record = run_experiment(cfg);
    RunManifest manifest = make_manifest(resolved, c);
    write_population_products(record, resolved, c, dir, manifest);

    // center of mass at every detuning-reversal boundary
    const auto sites = site_values(record.map.sites);
    std::vector<double> boundary_times, boundary_com;
    std::vector<double> row(record.map.sites.size());
    for (double tb = 0.0; tb <= cfg.total_time_us + 1e-9; tb += rev->half_period_us) {
        std::size_t nearest = 0;
        for (std::size_t i = 1; i < record.map.times_us.size(); ++i)
            if (std::abs(record.map.times_us[i] - tb) <
                std::abs(record.map.times_us[nearest] - tb))
                nearest = i;
        for (std::size_t j = 0; j < row.size(); ++j)
            row[j] = record.map.p(Eigen::Index(nearest), Eigen::Index(j));
        boundary_times.push_back(record.map.times_us[nearest]);
        boundary_com.push_back(center_of_mass(sites, row));
    }
    bool monotone = true;
    const double direction = boundary_com.back() >= boundary_com.front() ? 1.0 : -1.0;
    for (std::size_t i = 0; i + 1 < boundary_com.size(); ++i)
        if (direction * (boundary_com[i + 1] - boundary_com[i]) < -1e-9) monotone = false;

    json metrics;
    metrics["half_period_us"] = rev->half_period_us;
    metrics["start_delta_mhz"] = rev->delta_mhz;
    metrics["boundary_times_us"] = boundary_times;
    metrics["boundary_com_sites"] = boundary_com;
    metrics["total_drift_sites"] = boundary_com.back() - boundary_com.front();
    metrics["monotone_across_boundaries"] = monotone;
    if (cfg.prep == PrepKind::wave_packet) metrics["initial_fit"] = packet_fit_json(record, cfg);
    const fs::path fit_path = dir / "fit.json";
    write_json(fit_path.string(), metrics);
    manifest.outputs.emplace_back("fit_json", fit_path.string());
    finish_manifest(std::move(manifest), &record, dir);
}

struct RabiOptions {
    double span_sites = 2.5;
    double step_sites = 0.05;
    double t_max_us = 2.0;
    double dt_us = 0.02;
};

void cmd_rabi(const Common& c, const RabiOptions& opts) {
    const auto resolved = parse_config(c.config_path);
    const fs::path dir = prepare_out_dir(c);
    const auto scan = rabi_scan(resolved.experiment, opts.span_sites, opts.step_sites,
                                opts.t_max_us, opts.dt_us);
    RunManifest manifest = make_manifest(resolved, c);
    const fs::path csv = dir / "populations.csv";
    write_rabi_csv(csv.string(), scan);
    manifest.outputs.emplace_back("populations_csv", csv.string());
    if (c.svg || resolved.svg) {
        const fs::path svg = dir / "populations.svg";
        HeatmapSpec spec;
        spec.title = "vacuum-Rabi spectroscopy";
        spec.x_label = "t (us)";
        spec.y_label = "(omega_q - omega_0)/fsr";
        spec.x_min = scan.times_us.front();
        spec.x_max = scan.times_us.back();
        spec.y_min = scan.mode_coordinate.front();
        spec.y_max = scan.mode_coordinate.back();
        write_heatmap_svg(svg.string(), scan.p1.transpose(), spec);
        manifest.outputs.emplace_back("heatmap_svg", svg.string());
    }
    json metrics;
    const double kappa = resolved.experiment.coupler.kappa_mhz;
    metrics["kappa_mhz"] = kappa;
    metrics["swap_time_us"] =
        calibrate_swap_time_us(resolved.experiment.lattice, resolved.experiment.coupler, 0);
    metrics["two_level_swap_time_us"] = 1.0 / (4.0 * kappa);
    const fs::path fit_path = dir / "fit.json";
    write_json(fit_path.string(), metrics);
    manifest.outputs.emplace_back("fit_json", fit_path.string());
    finish_manifest(std::move(manifest), nullptr, dir);
}

struct SweepOptions {
    double from = -0.3;
    double to = 0.3;
    double step = 0.1;
    int jobs = 1;
};

void set_drive_delta(ExperimentConfig& cfg, double delta) {
    if (auto* s = std::get_if<SingleToneProgram>(&cfg.drive)) s->delta_mhz = delta;
    else if (auto* d = std::get_if<DoubleToneProgram>(&cfg.drive)) d->delta_mhz = delta;
    else std::get<ReversalProgram>(cfg.drive).delta_mhz = delta;
}

void cmd_sweep(const Common& c, const SweepOptions& opts) {
    if (!(opts.step > 0.0))
        throw ConfigError("sweep requires --step > 0");
    const auto resolved = parse_config(c.config_path);
    const fs::path dir = prepare_out_dir(c);

    std::vector<double> deltas;
    for (double d = opts.from; d <= opts.to + 1e-12; d += opts.step) deltas.push_back(d);
    if (deltas.empty())
        throw ConfigError("sweep range is empty");

    std::vector<json> point_results(deltas.size());
    std::atomic<std::size_t> next{0};
    const int jobs = std::max(1, opts.jobs);
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= deltas.size()) return;
            char name[32];
            std::snprintf(name, sizeof(name), "point_%02zu", i);
            const fs::path point_dir = dir / name;
            fs::create_directories(point_dir);
            json result;
            result["delta_mhz"] = deltas[i];
            result["dir"] = point_dir.string();
            try {
                ResolvedConfig point = resolved;
                set_drive_delta(point.experiment, deltas[i]);
                const auto record = run_experiment(point.experiment);
                RunManifest manifest = make_manifest(point, c);
                write_population_products(record, point, c, point_dir, manifest);
                const json metrics = bloch_metrics(record, point.experiment);
                const fs::path fit_path = point_dir / "fit.json";
                write_json(fit_path.string(), metrics);
                manifest.outputs.emplace_back("fit_json", fit_path.string());
                finish_manifest(std::move(manifest), &record, point_dir);
                if (metrics.contains("period_us")) result["period_us"] = metrics["period_us"];
                if (metrics.contains("error")) result["error"] = metrics["error"];
            } catch (const std::exception& e) {
                result["error"] = e.what();
            }
            point_results[i] = std::move(result);
        }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    json summary;
    summary["points"] = point_results;
    const fs::path summary_path = dir / "sweep.json";
    write_json(summary_path.string(), summary);
    RunManifest manifest = make_manifest(resolved, c);
    manifest.outputs.emplace_back("sweep_json", summary_path.string());
    finish_manifest(std::move(manifest), nullptr, dir);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-photon dynamics in a synthetic frequency lattice"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Common walk_c, bloch_c, band_c, flux_c, unidir_c, rabi_c, sweep_c;
    RabiOptions rabi_opts;
    SweepOptions sweep_opts;

    auto* walk = app.add_subcommand("walk", "random walk of a prepared excitation");
    add_common(walk, walk_c);
    auto* bloch = app.add_subcommand("bloch", "tilted-lattice run with period estimation");
    add_common(bloch, bloch_c);
    auto* band = app.add_subcommand("band", "band-structure measurement via quadrature record");
    add_common(band, band_c);
    auto* flux = app.add_subcommand("flux", "double-drive run with gauge-flux asymmetry metrics");
    add_common(flux, flux_c);
    auto* unidir = app.add_subcommand("unidir", "detuning-reversal run with drift metrics");
    add_common(unidir, unidir_c);
    auto* rabi = app.add_subcommand("rabi", "vacuum-Rabi spectroscopy of the mode ladder");
    add_common(rabi, rabi_c);
    rabi->add_option("--span", rabi_opts.span_sites, "frequency span in sites around mode 0");
    rabi->add_option("--step-sites", rabi_opts.step_sites, "frequency grid step in sites");
    rabi->add_option("--tmax", rabi_opts.t_max_us, "interaction time span (us)");
    rabi->add_option("--dt", rabi_opts.dt_us, "interaction time step (us)");
    auto* sweep = app.add_subcommand("sweep", "detuning sweep with per-point outputs");
    add_common(sweep, sweep_c);
    sweep->add_option("--from", sweep_opts.from, "first detuning (MHz)")->required();
    sweep->add_option("--to", sweep_opts.to, "last detuning (MHz)")->required();
    sweep->add_option("--step", sweep_opts.step, "detuning step (MHz)")->required();
    sweep->add_option("--jobs", sweep_opts.jobs, "concurrent sweep points");

    CLI11_PARSE(app, argc, argv);

    try {
        if (walk->parsed()) cmd_walk(walk_c);
        else if (bloch->parsed()) cmd_bloch(bloch_c);
        else if (band->parsed()) cmd_band(band_c);
        else if (flux->parsed()) cmd_flux(flux_c);
        else if (unidir->parsed()) cmd_unidir(unidir_c);
        else if (rabi->parsed()) cmd_rabi(rabi_c, rabi_opts);
        else if (sweep->parsed()) cmd_sweep(sweep_c, sweep_opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
