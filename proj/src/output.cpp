#include "freqlat/output.hpp"

#include <cstdio>
#include <fstream>

#include "freqlat/colormap.hpp"

namespace freqlat {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // fixed newlines on every platform
    if (!out) throw ConfigError("cannot open output file '" + path + "'");
    return out;
}

} // namespace

std::string format_g12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["config_digest"] = config_digest;
    j["seed"] = seed;
    j["tool_version"] = tool_version;
    j["outputs"] = nlohmann::json::array();
    for (const auto& [kind, path] : outputs)
        j["outputs"].push_back({{"kind", kind}, {"path", path}});
    j["defaults_applied"] = defaults_applied;
    j["warnings"] = warnings;
    return j;
}

void write_population_csv(const std::string& path, const PopulationMap& map) {
    auto out = open_out(path);
    out << "t_us,mode,population,p1_readout\n";
    for (std::size_t i = 0; i < map.times_us.size(); ++i)
        for (std::size_t j = 0; j < map.sites.size(); ++j)
            out << format_g12(map.times_us[i]) << ',' << map.sites[j] << ','
                << format_g12(map.p(Eigen::Index(i), Eigen::Index(j))) << ','
                << format_g12(map.p1_readout(Eigen::Index(i), Eigen::Index(j))) << '\n';
}

void write_rabi_csv(const std::string& path, const RabiScan& scan) {
    auto out = open_out(path);
    out << "t_us,mode,population,p1_readout\n";
    for (std::size_t i = 0; i < scan.times_us.size(); ++i)
        for (std::size_t j = 0; j < scan.mode_coordinate.size(); ++j) {
            const std::string p1 = format_g12(scan.p1(Eigen::Index(i), Eigen::Index(j)));
            out << format_g12(scan.times_us[i]) << ',' << format_g12(scan.mode_coordinate[j])
                << ',' << p1 << ',' << p1 << '\n';
        }
}

void write_band_csv(const std::string& path, const BandMap& band) {
    auto out = open_out(path);
    out << "k,omega_MHz,intensity,is_ridge\n";
    for (Eigen::Index b = 0; b < band.k_grid.size(); ++b) {
        Eigen::Index ridge_bin = 0;
        band.intensity.row(b).maxCoeff(&ridge_bin);
        for (Eigen::Index a = 0; a < band.omega_grid_mhz.size(); ++a)
            out << format_g12(band.k_grid(b)) << ',' << format_g12(band.omega_grid_mhz(a)) << ','
                << format_g12(band.intensity(b, a)) << ',' << (a == ridge_bin ? 1 : 0) << '\n';
    }
}

void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = open_out(path);
    out << j.dump(2) << '\n';
}

void write_heatmap_svg(const std::string& path, const Eigen::MatrixXd& values,
                       const HeatmapSpec& spec) {
    if (values.size() == 0) throw DomainError("write_heatmap_svg: empty value matrix");
    const int margin_l = 70, margin_r = 20, margin_t = 30, margin_b = 50;
    const int plot_w = 640, plot_h = 420;
    const int width = margin_l + plot_w + margin_r;
    const int height = margin_t + plot_h + margin_b;
    const Eigen::Index rows = values.rows(), cols = values.cols();
    const double vmax = values.maxCoeff();
    const auto& table = viridis_table();

    auto out = open_out(path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    if (!spec.title.empty())
        out << "<text x=\"" << margin_l + plot_w / 2 << "\" y=\"20\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"14\">" << spec.title << "</text>\n";

    const double cell_w = double(plot_w) / double(cols);
    const double cell_h = double(plot_h) / double(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            const double v = vmax > 0.0 ? values(r, c) / vmax : 0.0;
            const int idx = std::min(255, std::max(0, int(v * 255.0 + 0.5)));
            const Rgb& rgb = table[std::size_t(idx)];
            char color[8];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", rgb.r, rgb.g, rgb.b);
            const double x = margin_l + double(c) * cell_w;
            const double y = margin_t + plot_h - double(r + 1) * cell_h; // row 0 at bottom
            out << "<rect x=\"" << format_g12(x) << "\" y=\"" << format_g12(y) << "\" width=\""
                << format_g12(cell_w + 0.5) << "\" height=\"" << format_g12(cell_h + 0.5)
                << "\" fill=\"" << color << "\"/>\n";
        }
    }

    out << "<rect x=\"" << margin_l << "\" y=\"" << margin_t << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"black\"/>\n";

    const int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double f = double(i) / n_ticks;
        const double xv = spec.x_min + f * (spec.x_max - spec.x_min);
        const double yv = spec.y_min + f * (spec.y_max - spec.y_min);
        const double xp = margin_l + f * plot_w;
        const double yp = margin_t + plot_h - f * plot_h;
        out << "<line x1=\"" << format_g12(xp) << "\" y1=\"" << margin_t + plot_h << "\" x2=\""
            << format_g12(xp) << "\" y2=\"" << margin_t + plot_h + 5 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << format_g12(xp) << "\" y=\"" << margin_t + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">"
            << format_g12(xv) << "</text>\n";
        out << "<line x1=\"" << margin_l - 5 << "\" y1=\"" << format_g12(yp) << "\" x2=\""
            << margin_l << "\" y2=\"" << format_g12(yp) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << margin_l - 8 << "\" y=\"" << format_g12(yp + 3)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
            << format_g12(yv) << "</text>\n";
    }
    out << "<text x=\"" << margin_l + plot_w / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << spec.x_label
        << "</text>\n";
    out << "<text x=\"16\" y=\"" << margin_t + plot_h / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 "
        << margin_t + plot_h / 2 << ")\">" << spec.y_label << "</text>\n";
    out << "</svg>\n";
}

} // namespace freqlat
