#pragma once

#include "interneuron/harness/experiment.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace interneuron::harness {

/// Malformed trace or summary file; `line` is 1-based, 0 if not line-specific.
class TraceParseError : public std::runtime_error {
public:
    TraceParseError(std::size_t line, const std::string& what)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// One JSON object, no trailing newline. Durations are integer µs (`*_us`),
/// ratios are integer parts-per-million (`*_ppm`) with a decimal copy for
/// readability; absent checkpoints serialize as null.
std::string trace_line(const RoundTrace& t);
RoundTrace parse_trace_line(const std::string& line);

void write_trace(const std::filesystem::path& path, const std::vector<RoundTrace>& traces);
std::vector<RoundTrace> read_trace(const std::filesystem::path& path);

std::string summary_header();
std::string summary_row(const Summary& s);
void write_summary(const std::filesystem::path& path, const Summary& s);
/// Reads every data row of a summary CSV (header required).
std::vector<Summary> read_summaries(const std::filesystem::path& path);

}  // namespace interneuron::harness
