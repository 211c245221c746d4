// output.hpp — serialization of populations, band maps, scalar results, run
// manifests and SVG heatmaps. Numeric fields are written with a fixed
// 12-significant-digit format so identical runs are byte-identical.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "freqlat/analysis.hpp"
#include "freqlat/protocols.hpp"

namespace freqlat {

std::string format_g12(double x);

struct RunManifest {
    std::string config_digest;
    long seed = 0;
    std::string tool_version;
    std::vector<std::pair<std::string, std::string>> outputs; // (kind, path)
    std::vector<std::string> defaults_applied;
    std::vector<std::string> warnings;

    nlohmann::json to_json() const;
};

// CSV columns: t_us, mode, population, p1_readout (time-major row order).
void write_population_csv(const std::string& path, const PopulationMap& map);

// Same schema for the qubit spectroscopy map; the mode column carries the
// fractional coordinate (omega_q - omega_0)/fsr and both population columns
// hold P1.
void write_rabi_csv(const std::string& path, const RabiScan& scan);

// CSV columns: k, omega_MHz, intensity, is_ridge (k-major row order; is_ridge
// marks the intensity argmax bin of each k column).
void write_band_csv(const std::string& path, const BandMap& band);

void write_json(const std::string& path, const nlohmann::json& j);

// Heatmap rendering with the pinned 256-entry colormap. values are laid out
// [row = y, col = x] and drawn bottom-up (row 0 at the bottom edge).
struct HeatmapSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    double x_min = 0.0, x_max = 1.0;
    double y_min = 0.0, y_max = 1.0;
};
void write_heatmap_svg(const std::string& path, const Eigen::MatrixXd& values,
                       const HeatmapSpec& spec);

} // namespace freqlat
