#include "freqlat/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace freqlat {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

std::string nearest(const std::string& key, const std::vector<std::string>& candidates) {
    std::string best;
    std::size_t best_d = std::string::npos;
    for (const auto& c : candidates) {
        const std::size_t d = levenshtein(key, c);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}

const std::map<std::string, std::vector<std::string>>& schema() {
    static const std::map<std::string, std::vector<std::string>> s = {
        {"lattice", {"fsr", "omega0", "n_left", "n_right", "base_abs_index"}},
        {"coupler", {"kappa", "omega_q", "scaling", "readout_kappa"}},
        {"prep", {"kind", "site", "emission_cap"}},
        {"drive", {"kind", "l", "g", "phi", "delta", "freq", "g1", "phi1", "g2", "phi2", "half_period"}},
        {"schedule", {"total_time", "readout_step", "readout_modes"}},
        {"decoherence", {"enabled", "t1", "t2", "t1_qubit"}},
        {"output", {"svg"}},
    };
    return s;
}

using Section = std::map<std::string, std::string>;
using Raw = std::map<std::string, Section>;

Raw read_ini(std::istream& in) {
    Raw raw;
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config line " + std::to_string(line_no) +
                                  ": unterminated section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (!schema().count(section)) {
                std::vector<std::string> names;
                for (const auto& [name, _] : schema()) names.push_back(name);
                throw ConfigError("unknown config section '" + section + "'; nearest valid section is '" +
                                  nearest(section, names) + "'");
            }
            raw[section]; // section may legitimately stay empty
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        if (section.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": key outside any section");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        const auto& valid = schema().at(section);
        if (std::find(valid.begin(), valid.end(), key) == valid.end())
            throw ConfigError("unknown key '" + key + "' in section [" + section +
                              "]; nearest valid key is '" + nearest(key, valid) + "'");
        if (raw[section].count(key))
            throw ConfigError("duplicate key '" + key + "' in section [" + section + "]");
        raw[section][key] = value;
    }
    return raw;
}

double parse_number(const std::string& section, const std::string& key, const std::string& value) {
    const std::string v = lower(trim(value));
    const auto fail = [&]() -> double {
        throw ConfigError("value '" + value + "' for " + section + "." + key + " is not a number");
    };
    if (v.size() >= 2 && v.substr(v.size() - 2) == "pi") {
        const std::string head = trim(v.substr(0, v.size() - 2));
        if (head.empty()) return kPi;
        if (head == "-") return -kPi;
        try {
            std::size_t used = 0;
            const double f = std::stod(head, &used);
            if (used != head.size()) return fail();
            return f * kPi;
        } catch (const std::exception&) {
            return fail();
        }
    }
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) return fail();
        return x;
    } catch (const std::exception&) {
        return fail();
    }
}

int parse_int(const std::string& section, const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const int x = std::stoi(trim(value), &used);
        if (used != trim(value).size())
            throw ConfigError("");
        return x;
    } catch (const std::exception&) {
        throw ConfigError("value '" + value + "' for " + section + "." + key +
                          " is not an integer");
    }
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& value) {
    const std::string v = lower(trim(value));
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw ConfigError("value '" + value + "' for " + section + "." + key + " is not a boolean");
}

std::string g12(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

// Pulls keys out of one raw section, recording defaults for absent ones.
class Fields {
public:
    Fields(const Raw& raw, std::string section, std::vector<std::string>& defaults)
        : section_(std::move(section)), defaults_(defaults) {
        if (auto it = raw.find(section_); it != raw.end()) values_ = it->second;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return record(key, g12(fallback)), fallback;
        return parse_number(section_, key, values_.at(key));
    }
    int integer(const std::string& key, int fallback) {
        if (!has(key)) return record(key, std::to_string(fallback)), fallback;
        return parse_int(section_, key, values_.at(key));
    }
    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return record(key, fallback ? "true" : "false"), fallback;
        return parse_bool(section_, key, values_.at(key));
    }
    std::string text(const std::string& key, const std::string& fallback) {
        if (!has(key)) return record(key, fallback), fallback;
        return lower(trim(values_.at(key)));
    }
    double number_required_or(const std::string& key) const {
        return parse_number(section_, key, values_.at(key));
    }
    void forbid(const std::string& key, const std::string& reason) const {
        if (has(key))
            throw ConfigError("key '" + key + "' in section [" + section_ + "] " + reason);
    }

private:
    void record(const std::string& key, const std::string& value) {
        defaults_.push_back(section_ + "." + key + " = " + value + " (default)");
    }
    std::string section_;
    Section values_;
    std::vector<std::string>& defaults_;
};

// delta/freq reconciliation: freq resolves as delta = freq/order - fsr
double resolve_delta(Fields& drive, int order, double fsr, double fallback,
                     std::vector<std::string>& defaults) {
    const bool has_delta = drive.has("delta");
    const bool has_freq = drive.has("freq");
    if (has_freq) {
        const double freq = drive.number_required_or("freq");
        const double from_freq = freq / order - fsr;
        if (has_delta) {
            const double delta = drive.number_required_or("delta");
            if (std::abs(delta - from_freq) > 1e-6) {
                std::ostringstream os;
                os << "drive.delta = " << delta << " MHz disagrees with drive.freq = " << freq
                   << " MHz (which implies delta = " << from_freq << " MHz)";
                throw ConfigError(os.str());
            }
            return delta;
        }
        return from_freq;
    }
    if (has_delta) return drive.number_required_or("delta");
    defaults.push_back("drive.delta = " + g12(fallback) + " (default)");
    return fallback;
}

ResolvedConfig resolve(const Raw& raw) {
    ResolvedConfig out;
    auto& cfg = out.experiment;
    auto& defaults = out.defaults_applied;

    Fields lattice(raw, "lattice", defaults);
    cfg.lattice.fsr_mhz = lattice.number("fsr", 7.33);
    cfg.lattice.omega0_mhz = lattice.number("omega0", 4320.0);
    cfg.lattice.n_left = lattice.integer("n_left", 16);
    cfg.lattice.n_right = lattice.integer("n_right", 16);
    cfg.lattice.base_abs_index = lattice.integer("base_abs_index", 592);

    Fields prep(raw, "prep", defaults);
    const std::string prep_kind = prep.text("kind", "single_site");
    if (prep_kind == "single_site") cfg.prep = PrepKind::single_site;
    else if (prep_kind == "wave_packet") cfg.prep = PrepKind::wave_packet;
    else throw ConfigError("prep.kind must be single_site or wave_packet, got '" + prep_kind + "'");
    cfg.prep_site = prep.integer("site", 0);
    cfg.emission_cap_us = prep.number("emission_cap", 3.0);

    Fields coupler(raw, "coupler", defaults);
    const double kappa_default = cfg.prep == PrepKind::wave_packet ? 4.0 : 0.36;
    cfg.coupler.kappa_mhz = coupler.number("kappa", kappa_default);
    cfg.coupler.omega_q_mhz = coupler.number("omega_q", cfg.lattice.omega0_mhz);
    const std::string scaling = coupler.text("scaling", "flat");
    if (scaling == "flat") cfg.coupler.scaling = CouplerScaling::flat;
    else if (scaling == "sqrt_omega") cfg.coupler.scaling = CouplerScaling::sqrt_omega;
    else throw ConfigError("coupler.scaling must be flat or sqrt_omega, got '" + scaling + "'");
    cfg.readout_kappa_mhz = coupler.number("readout_kappa", 0.36);

    Fields drive(raw, "drive", defaults);
    const std::string drive_kind = drive.text("kind", "single_tone");
    if (drive_kind == "single_tone") {
        drive.forbid("g1", "applies to double_tone only");
        drive.forbid("g2", "applies to double_tone only");
        drive.forbid("phi1", "applies to double_tone only");
        drive.forbid("phi2", "applies to double_tone only");
        drive.forbid("half_period", "applies to reversal only");
        SingleToneProgram p;
        p.order = drive.integer("l", 1);
        p.g_mhz = drive.number("g", 0.5);
        p.phase_rad = drive.number("phi", kPi);
        p.delta_mhz = resolve_delta(drive, p.order, cfg.lattice.fsr_mhz, 0.0, defaults);
        cfg.drive = p;
    } else if (drive_kind == "double_tone") {
        drive.forbid("l", "applies to single_tone and reversal only");
        drive.forbid("g", "applies to single_tone and reversal only");
        drive.forbid("phi", "applies to single_tone and reversal only");
        drive.forbid("half_period", "applies to reversal only");
        DoubleToneProgram p;
        p.g1_mhz = drive.number("g1", 0.5);
        p.phi1_rad = drive.number("phi1", kPi);
        p.g2_mhz = drive.number("g2", 0.25);
        p.phi2_rad = drive.number("phi2", kPi);
        p.delta_mhz = resolve_delta(drive, 1, cfg.lattice.fsr_mhz, 0.0, defaults);
        cfg.drive = p;
    } else if (drive_kind == "reversal") {
        drive.forbid("g1", "applies to double_tone only");
        drive.forbid("g2", "applies to double_tone only");
        drive.forbid("phi1", "applies to double_tone only");
        drive.forbid("phi2", "applies to double_tone only");
        ReversalProgram p;
        p.order = drive.integer("l", 1);
        p.g_mhz = drive.number("g", 0.5);
        p.phase_rad = drive.number("phi", kPi);
        p.delta_mhz = resolve_delta(drive, p.order, cfg.lattice.fsr_mhz, -0.2, defaults);
        p.half_period_us = drive.number("half_period", 2.5);
        cfg.drive = p;
    } else {
        throw ConfigError("drive.kind must be single_tone, double_tone or reversal, got '" +
                          drive_kind + "'");
    }

    Fields schedule(raw, "schedule", defaults);
    cfg.total_time_us = schedule.number("total_time", 10.0);
    cfg.readout.step_us = schedule.number("readout_step", 0.05);
    const std::string modes = schedule.text("readout_modes", "all");
    if (modes != "all") {
        std::stringstream ss(modes);
        std::string item;
        while (std::getline(ss, item, ','))
            cfg.readout.sites.push_back(parse_int("schedule", "readout_modes", item));
        if (cfg.readout.sites.empty())
            throw ConfigError("schedule.readout_modes must be 'all' or a comma-separated list");
    }

    Fields deco(raw, "decoherence", defaults);
    cfg.deco.enabled = deco.boolean("enabled", false);
    cfg.deco.t1_mode_us = deco.number("t1", 29.1);
    cfg.deco.t2_mode_us = deco.number("t2", 57.9);
    cfg.deco.t1_qubit_us = deco.number("t1_qubit", 29.1);

    Fields output(raw, "output", defaults);
    out.svg = output.boolean("svg", false);

    cfg.validate();

    for (const auto& w : cfg.coupler.warnings()) out.warnings.push_back(w);
    for (const auto& tone : cfg.drive_tones(cfg.drive_delta_mhz()))
        for (const auto& w : tone.warnings(cfg.lattice.fsr_mhz)) out.warnings.push_back(w);
    for (const auto& w : cfg.deco.warnings()) out.warnings.push_back(w);

    // canonical rendering of every resolved value, fixed order
    std::ostringstream os;
    os << "lattice.fsr = " << g12(cfg.lattice.fsr_mhz) << "\n"
       << "lattice.omega0 = " << g12(cfg.lattice.omega0_mhz) << "\n"
       << "lattice.n_left = " << cfg.lattice.n_left << "\n"
       << "lattice.n_right = " << cfg.lattice.n_right << "\n"
       << "lattice.base_abs_index = " << cfg.lattice.base_abs_index << "\n"
       << "coupler.kappa = " << g12(cfg.coupler.kappa_mhz) << "\n"
       << "coupler.omega_q = " << g12(cfg.coupler.omega_q_mhz) << "\n"
       << "coupler.scaling = " << (cfg.coupler.scaling == CouplerScaling::flat ? "flat" : "sqrt_omega") << "\n"
       << "coupler.readout_kappa = " << g12(cfg.readout_kappa_mhz) << "\n"
       << "prep.kind = " << (cfg.prep == PrepKind::single_site ? "single_site" : "wave_packet") << "\n"
       << "prep.site = " << cfg.prep_site << "\n"
       << "prep.emission_cap = " << g12(cfg.emission_cap_us) << "\n";
    if (const auto* s = std::get_if<SingleToneProgram>(&cfg.drive)) {
        os << "drive.kind = single_tone\n"
           << "drive.l = " << s->order << "\n"
           << "drive.g = " << g12(s->g_mhz) << "\n"
           << "drive.phi = " << g12(s->phase_rad) << "\n"
           << "drive.delta = " << g12(s->delta_mhz) << "\n";
    } else if (const auto* d = std::get_if<DoubleToneProgram>(&cfg.drive)) {
        os << "drive.kind = double_tone\n"
           << "drive.g1 = " << g12(d->g1_mhz) << "\n"
           << "drive.phi1 = " << g12(d->phi1_rad) << "\n"
           << "drive.g2 = " << g12(d->g2_mhz) << "\n"
           << "drive.phi2 = " << g12(d->phi2_rad) << "\n"
           << "drive.delta = " << g12(d->delta_mhz) << "\n";
    } else {
        const auto& r = std::get<ReversalProgram>(cfg.drive);
        os << "drive.kind = reversal\n"
           << "drive.l = " << r.order << "\n"
           << "drive.g = " << g12(r.g_mhz) << "\n"
           << "drive.phi = " << g12(r.phase_rad) << "\n"
           << "drive.delta = " << g12(r.delta_mhz) << "\n"
           << "drive.half_period = " << g12(r.half_period_us) << "\n";
    }
    os << "schedule.total_time = " << g12(cfg.total_time_us) << "\n"
       << "schedule.readout_step = " << g12(cfg.readout.step_us) << "\n"
       << "schedule.readout_modes = ";
    if (cfg.readout.sites.empty()) {
        os << "all";
    } else {
        for (std::size_t i = 0; i < cfg.readout.sites.size(); ++i)
            os << (i ? "," : "") << cfg.readout.sites[i];
    }
    os << "\n"
       << "decoherence.enabled = " << (cfg.deco.enabled ? "true" : "false") << "\n"
       << "decoherence.t1 = " << g12(cfg.deco.t1_mode_us) << "\n"
       << "decoherence.t2 = " << g12(cfg.deco.t2_mode_us) << "\n"
       << "decoherence.t1_qubit = " << g12(cfg.deco.t1_qubit_us) << "\n"
       << "output.svg = " << (out.svg ? "true" : "false") << "\n";
    out.canonical_text = os.str();
    out.digest_hex = fnv1a64_hex(out.canonical_text);
    return out;
}

} // namespace

std::string fnv1a64_hex(const std::string& text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

ResolvedConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return resolve(read_ini(in));
}

ResolvedConfig parse_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("config file '" + path + "' cannot be opened");
    return resolve(read_ini(in));
}

} // namespace freqlat
