#pragma once

#include "interneuron/harness/experiment.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace interneuron::config {

/// A config problem anchored to a source position (1-based; 0 = unknown).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string source, int line, int column, const std::string& msg);

    const std::string& source() const { return source_; }
    int line() const { return line_; }
    int column() const { return column_; }

private:
    std::string source_;
    int line_;
    int column_;
};

/// Parses YAML text into a validated config. `source` names the text in
/// diagnostics ("fig5_ramp", a file path, ...).
harness::ExperimentConfig parse_config(const std::string& text, const std::string& source);
harness::ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Bundled presets, addressable by name from the CLI.
const std::vector<std::string>& preset_names();
/// Throws std::invalid_argument for an unknown name.
const std::string& preset_text(const std::string& name);
harness::ExperimentConfig load_preset(const std::string& name);

/// Profiles "4g" and "5g": base latency at the measured minimum, lognormal
/// jitter matching the measured mean and standard deviation.
sim::LatencyProfile builtin_profile(const std::string& name);

}  // namespace interneuron::config
