#include "interneuron/harness/trace_io.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace interneuron::harness {

namespace {

using json = nlohmann::ordered_json;

json dur(const std::optional<Elapsed>& d) {
    return d ? json(d->count()) : json(nullptr);
}

void put_ratio(json& j, const std::string& key, const std::optional<Ratio>& r) {
    if (r) {
        j[key + "_ppm"] = r->micros();
        j[key] = r->to_double();
    } else {
        j[key + "_ppm"] = nullptr;
        j[key] = nullptr;
    }
}

const json& field(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw TraceParseError(0, fmt::format("missing field '{}'", key));
    }
    return *it;
}

std::optional<Elapsed> get_dur(const json& j, const char* key) {
    const auto& v = field(j, key);
    if (v.is_null()) return std::nullopt;
    return Elapsed(v.get<std::int64_t>());
}

std::optional<Ratio> get_ratio(const json& j, const std::string& key) {
    const auto& v = field(j, (key + "_ppm").c_str());
    if (v.is_null()) return std::nullopt;
    return Ratio::from_micros(v.get<std::int64_t>());
}

}  // namespace

std::string trace_line(const RoundTrace& t) {
    json j;
    j["round_id"] = t.round_id;
    j["controller"] = t.controller;
    j["warmup"] = t.warmup;
    j["t0_us"] = t.t0_us;
    j["theta1_us"] = dur(t.theta1);
    j["theta2_us"] = dur(t.theta2);
    j["theta3_us"] = dur(t.theta3);
    j["d1_us"] = dur(t.d1);
    j["d2_us"] = dur(t.d2);
    j["d3_us"] = dur(t.d3);
    j["num1_us"] = dur(t.num1);
    j["num2_us"] = dur(t.num2);
    j["num3_us"] = dur(t.num3);
    j["state1"] = t.state1;
    j["state2"] = t.state2;
    put_ratio(j, "rho1", t.rho1);
    put_ratio(j, "rho2", t.rho2);
    j["quality"] = t.quality ? json(*t.quality) : json(nullptr);
    j["transmit_mode"] = t.transmit_mode;
    j["return_mode"] = t.return_mode;
    j["frame_kind"] = t.frame_kind;
    j["single_nic"] = t.single_nic;
    j["force_sampled"] = t.force_sampled;
    put_ratio(j, "x", t.x);
    put_ratio(j, "x_before", t.x_before);
    put_ratio(j, "x_after", t.x_after);
    j["indicator"] = t.indicator;
    j["timeout"] = t.timeout;
    j["backup_enabled"] = t.backup_enabled;
    j["result_source"] = t.result_source;
    j["payload_kind"] = t.payload_kind;
    j["ap"] = t.ap;
    j["ar"] = t.ar;
    j["delivered_at_us"] = dur(t.delivered_at);
    j["backup_done_us"] = dur(t.backup_done);
    j["remote_theta3_us"] = dur(t.remote_theta3);
    j["late_result_us"] = dur(t.late_result);
    j["stale"] = t.stale;
    j["duplicates"] = t.duplicates;
    return j.dump();
}

RoundTrace parse_trace_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw TraceParseError(0, e.what());
    }
    if (!j.is_object()) {
        throw TraceParseError(0, "record is not a JSON object");
    }
    RoundTrace t;
    try {
        t.round_id = field(j, "round_id").get<std::uint64_t>();
        t.controller = field(j, "controller").get<std::string>();
        t.warmup = field(j, "warmup").get<bool>();
        t.t0_us = field(j, "t0_us").get<std::int64_t>();
        t.theta1 = get_dur(j, "theta1_us");
        t.theta2 = get_dur(j, "theta2_us");
        t.theta3 = get_dur(j, "theta3_us");
        t.d1 = get_dur(j, "d1_us");
        t.d2 = get_dur(j, "d2_us");
        t.d3 = get_dur(j, "d3_us");
        t.num1 = get_dur(j, "num1_us");
        t.num2 = get_dur(j, "num2_us");
        t.num3 = get_dur(j, "num3_us");
        t.state1 = field(j, "state1").get<std::string>();
        t.state2 = field(j, "state2").get<std::string>();
        t.rho1 = get_ratio(j, "rho1");
        t.rho2 = get_ratio(j, "rho2");
        if (const auto& q = field(j, "quality"); !q.is_null()) {
            t.quality = q.get<std::size_t>();
        }
        t.transmit_mode = field(j, "transmit_mode").get<std::string>();
        t.return_mode = field(j, "return_mode").get<std::string>();
        t.frame_kind = field(j, "frame_kind").get<std::string>();
        t.single_nic = field(j, "single_nic").get<bool>();
        t.force_sampled = field(j, "force_sampled").get<bool>();
        t.x = get_ratio(j, "x");
        t.x_before = get_ratio(j, "x_before");
        t.x_after = get_ratio(j, "x_after");
        t.indicator = field(j, "indicator").get<bool>();
        t.timeout = field(j, "timeout").get<bool>();
        t.backup_enabled = field(j, "backup_enabled").get<bool>();
        t.result_source = field(j, "result_source").get<std::string>();
        t.payload_kind = field(j, "payload_kind").get<std::string>();
        t.ap = field(j, "ap").get<double>();
        t.ar = field(j, "ar").get<double>();
        t.delivered_at = get_dur(j, "delivered_at_us");
        t.backup_done = get_dur(j, "backup_done_us");
        t.remote_theta3 = get_dur(j, "remote_theta3_us");
        t.late_result = get_dur(j, "late_result_us");
        t.stale = field(j, "stale").get<std::uint64_t>();
        t.duplicates = field(j, "duplicates").get<std::uint64_t>();
    } catch (const json::type_error& e) {
        throw TraceParseError(0, e.what());
    }
    return t;
}

void write_trace(const std::filesystem::path& path, const std::vector<RoundTrace>& traces) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    for (const auto& t : traces) {
        out << trace_line(t) << '\n';
    }
    if (!out.flush()) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

std::vector<RoundTrace> read_trace(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (!content.empty() && content.back() != '\n') {
        // A writer always terminates records; a missing newline means a cut file.
        const auto lines = static_cast<std::size_t>(std::count(content.begin(), content.end(), '\n')) + 1;
        throw TraceParseError(lines, "truncated record (no trailing newline)");
    }
    std::vector<RoundTrace> out;
    std::istringstream ss(content);
    std::string line;
    std::size_t n = 0;
    while (std::getline(ss, line)) {
        ++n;
        if (line.empty()) {
            throw TraceParseError(n, "empty line");
        }
        try {
            out.push_back(parse_trace_line(line));
        } catch (const TraceParseError& e) {
            throw TraceParseError(n, e.what());
        }
    }
    return out;
}

std::string summary_header() {
    return "run_id,controller,seed,rounds,timeouts,consec_timeouts,mean_e2e_us,mean_ap,mean_ar,scenario";
}

std::string summary_row(const Summary& s) {
    return fmt::format("{},{},{},{},{},{},{:.3f},{:.6f},{:.6f},{}", s.run_id, s.controller, s.seed, s.rounds,
                       s.timeouts, s.consec_timeouts, s.mean_e2e_us, s.mean_ap, s.mean_ar, s.scenario);
}

void write_summary(const std::filesystem::path& path, const Summary& s) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << summary_header() << '\n' << summary_row(s) << '\n';
    if (!out.flush()) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

std::vector<Summary> read_summaries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    if (!std::getline(in, line) || line != summary_header()) {
        throw TraceParseError(1, "unexpected summary header");
    }
    std::vector<Summary> out;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        if (cols.size() != 10) {
            throw TraceParseError(n, fmt::format("expected 10 columns, got {}", cols.size()));
        }
        Summary s;
        try {
            s.run_id = cols[0];
            s.controller = cols[1];
            s.seed = std::stoull(cols[2]);
            s.rounds = std::stoull(cols[3]);
            s.timeouts = std::stoull(cols[4]);
            s.consec_timeouts = std::stoull(cols[5]);
            s.mean_e2e_us = std::stod(cols[6]);
            s.mean_ap = std::stod(cols[7]);
            s.mean_ar = std::stod(cols[8]);
            s.scenario = cols[9];
        } catch (const std::logic_error& e) {
            throw TraceParseError(n, std::string("bad number: ") + e.what());
        }
        out.push_back(std::move(s));
    }
    if (out.empty()) {
        throw TraceParseError(n, "no summary rows");
    }
    return out;
}

}  // namespace interneuron::harness
