// config.hpp — experiment configuration files: an INI-style key/value format
// with sections lattice, coupler, prep, drive, schedule, decoherence, output.
#pragma once

#include <string>
#include <vector>

#include "freqlat/protocols.hpp"

namespace freqlat {

// A fully resolved configuration: every omitted key filled with its default
// and recorded, plus a canonical text rendering and its content digest.
struct ResolvedConfig {
    ExperimentConfig experiment;
    bool svg = false;
    std::vector<std::string> defaults_applied;
    std::vector<std::string> warnings;
    std::string canonical_text;
    std::string digest_hex;
};

// Parse a config file. Unknown keys raise ConfigError naming the key and the
// nearest valid one; invariant violations raise ConfigError citing the
// invariant. The drive detuning may be given directly (delta) or through the
// tone frequency (freq), which resolves as delta = freq/l - fsr.
ResolvedConfig parse_config(const std::string& path);

// Parse from an in-memory string (same semantics; used by tests).
ResolvedConfig parse_config_text(const std::string& text);

// FNV-1a 64-bit content hash, rendered as 16 hex digits.
std::string fnv1a64_hex(const std::string& text);

} // namespace freqlat
