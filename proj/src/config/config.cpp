#include "interneuron/config/config.hpp"

#include <charconv>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <yaml-cpp/yaml.h>

namespace interneuron::config {

using harness::ExperimentConfig;

ConfigError::ConfigError(std::string source, int line, int column, const std::string& msg)
    : std::runtime_error(line > 0 ? fmt::format("{}:{}:{}: {}", source, line, column, msg)
                                  : fmt::format("{}: {}", source, msg)),
      source_(std::move(source)),
      line_(line),
      column_(column) {}

sim::LatencyProfile builtin_profile(const std::string& name) {
    sim::LatencyProfile p;
    p.name = name;
    if (name == "4g") {
        p.base_latency = ms(23);
        p.jitter = sim::LogNormal::from_moments(ms(150), ms(258));
        p.capacity = 2'500'000;
    } else if (name == "5g") {
        p.base_latency = ms(19);
        p.jitter = sim::LogNormal::from_moments(ms(7), ms(12));
        p.capacity = 25'000'000;
    } else {
        throw std::invalid_argument("no builtin profile '" + name + "'");
    }
    return p;
}

namespace {

class Reader {
public:
    explicit Reader(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
        const auto m = at.Mark();
        if (m.is_null()) {
            throw ConfigError(source_, 0, 0, msg);
        }
        throw ConfigError(source_, m.line + 1, m.column + 1, msg);
    }

    void expect_map(const YAML::Node& n, const std::string& where) const {
        if (!n.IsMap()) fail(n, where + " must be a mapping");
    }

    void allow(const YAML::Node& n, const std::string& where, std::initializer_list<std::string_view> keys) const {
        expect_map(n, where);
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                fail(kv.first, fmt::format("unknown key '{}' in {}", key, where));
            }
        }
    }

    std::string scalar(const YAML::Node& n, const std::string& what) const {
        if (!n.IsScalar()) fail(n, what + " must be a scalar");
        return n.Scalar();
    }

    std::string str(const YAML::Node& n, const std::string& what) const { return scalar(n, what); }

    std::int64_t integer(const YAML::Node& n, const std::string& what) const {
        const auto s = scalar(n, what);
        std::int64_t v = 0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || p != s.data() + s.size()) fail(n, fmt::format("{}: '{}' is not an integer", what, s));
        return v;
    }

    std::uint64_t count(const YAML::Node& n, const std::string& what) const {
        const auto v = integer(n, what);
        if (v < 0) fail(n, what + " must be >= 0");
        return static_cast<std::uint64_t>(v);
    }

    double real(const YAML::Node& n, const std::string& what) const {
        const auto s = scalar(n, what);
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            fail(n, fmt::format("{}: '{}' is not a number", what, s));
        }
    }

    bool boolean(const YAML::Node& n, const std::string& what) const {
        const auto s = scalar(n, what);
        if (s == "true") return true;
        if (s == "false") return false;
        fail(n, fmt::format("{}: '{}' is not true/false", what, s));
    }

    Ratio ratio(const YAML::Node& n, const std::string& what) const {
        const auto s = scalar(n, what);
        try {
            return Ratio::parse(s);
        } catch (const std::exception& e) {
            fail(n, fmt::format("{}: {}", what, e.what()));
        }
    }

    /// Decimal milliseconds with at most microsecond precision.
    Elapsed millis(const YAML::Node& n, const std::string& what) const {
        const Ratio r = ratio(n, what);
        if (r.micros() % 1000 != 0) fail(n, what + ": finer than 1 microsecond");
        return Elapsed(r.micros() / 1000);
    }

    Elapsed positive_millis(const YAML::Node& n, const std::string& what) const {
        const Elapsed v = millis(n, what);
        if (v <= Elapsed::zero()) fail(n, what + " must be > 0");
        return v;
    }

private:
    std::string source_;
};

void read_rtguard(const Reader& r, const YAML::Node& n, harness::RtConfig& rt) {
    r.allow(n, "rtguard", {"k", "beta", "d3_ms", "rho1", "warmup_rounds", "initial_x", "deadline_form"});
    if (n["k"]) {
        rt.k = r.ratio(n["k"], "rtguard.k");
        if (rt.k < Ratio{} || rt.k > ratio_one()) r.fail(n["k"], "rtguard.k must lie in [0, 1]");
    }
    if (n["beta"]) rt.beta = r.ratio(n["beta"], "rtguard.beta");
    if (n["d3_ms"]) rt.d3 = r.positive_millis(n["d3_ms"], "rtguard.d3_ms");
    if (n["rho1"]) {
        rt.rho1 = r.ratio(n["rho1"], "rtguard.rho1");
        if (rt.rho1 < Ratio{}) r.fail(n["rho1"], "rtguard.rho1 must be >= 0");
    }
    if (n["warmup_rounds"]) rt.warmup_rounds = r.count(n["warmup_rounds"], "rtguard.warmup_rounds");
    if (n["initial_x"]) {
        rt.initial_x = r.ratio(n["initial_x"], "rtguard.initial_x");
        if (rt.initial_x < Ratio::from_micros(-1'000'000)) r.fail(n["initial_x"], "rtguard.initial_x must be >= -1");
    }
    if (n["deadline_form"]) {
        try {
            rt.deadline_form = rt::deadline_form_from_string(r.str(n["deadline_form"], "rtguard.deadline_form"));
        } catch (const std::invalid_argument& e) {
            r.fail(n["deadline_form"], e.what());
        }
    }
}

void read_resilience(const Reader& r, const YAML::Node& n, harness::ResilienceConfig& c) {
    r.allow(n, "resilience", {"timeout_handler", "backup", "recovery_step", "backup_service_ms"});
    if (n["timeout_handler"]) c.timeout_handler = r.boolean(n["timeout_handler"], "resilience.timeout_handler");
    if (n["backup"]) c.backup = r.boolean(n["backup"], "resilience.backup");
    if (n["recovery_step"]) {
        c.recovery_step = r.ratio(n["recovery_step"], "resilience.recovery_step");
        if (c.recovery_step <= Ratio{}) r.fail(n["recovery_step"], "resilience.recovery_step must be > 0");
    }
    if (n["backup_service_ms"]) {
        c.backup_service_time = r.positive_millis(n["backup_service_ms"], "resilience.backup_service_ms");
    }
}

void read_policy(const Reader& r, const YAML::Node& n, ExperimentConfig& cfg) {
    r.allow(n, "policy", {"name", "sampling_ratio", "accuracy_penalty"});
    if (n["name"]) {
        cfg.policy_name = r.str(n["name"], "policy.name");
        if (cfg.policy_name != "down_sampling" && cfg.policy_name != "passthrough") {
            r.fail(n["name"], "policy.name must be down_sampling or passthrough");
        }
    }
    auto unit_interval = [&](const char* key, Ratio& out) {
        if (!n[key]) return;
        out = r.ratio(n[key], std::string("policy.") + key);
        if (out <= Ratio{} || out > ratio_one()) r.fail(n[key], std::string("policy.") + key + " must lie in (0, 1]");
    };
    unit_interval("sampling_ratio", cfg.policy.sampling_ratio);
    unit_interval("accuracy_penalty", cfg.policy.accuracy_penalty);
}

sim::LatencyProfile read_profile(const Reader& r, const YAML::Node& n) {
    r.allow(n, "profile", {"name", "base_ms", "jitter", "loss", "capacity_bps"});
    if (!n["name"]) r.fail(n, "profile needs a name");
    sim::LatencyProfile p;
    p.name = r.str(n["name"], "profile.name");
    const std::string where = "profile '" + p.name + "'";
    if (!n["base_ms"]) r.fail(n, where + " needs base_ms");
    p.base_latency = r.millis(n["base_ms"], where + ".base_ms");
    if (!n["capacity_bps"]) r.fail(n, where + " needs capacity_bps");
    p.capacity = r.integer(n["capacity_bps"], where + ".capacity_bps");
    if (n["loss"]) p.loss_rate = r.real(n["loss"], where + ".loss");
    if (const auto j = n["jitter"]) {
        r.expect_map(j, where + ".jitter");
        const auto model = j["model"] ? r.str(j["model"], "jitter.model") : std::string("none");
        if (model == "none") {
            r.allow(j, where + ".jitter", {"model"});
            p.jitter = sim::NoJitter{};
        } else if (model == "lognormal") {
            r.allow(j, where + ".jitter", {"model", "mean_ms", "stddev_ms"});
            if (!j["mean_ms"] || !j["stddev_ms"]) r.fail(j, "lognormal jitter needs mean_ms and stddev_ms");
            const Elapsed mean = r.positive_millis(j["mean_ms"], "jitter.mean_ms");
            const Elapsed sd = r.millis(j["stddev_ms"], "jitter.stddev_ms");
            if (sd < Elapsed::zero()) r.fail(j["stddev_ms"], "jitter.stddev_ms must be >= 0");
            p.jitter = sim::LogNormal::from_moments(mean, sd);
        } else if (model == "spike") {
            r.allow(j, where + ".jitter", {"model", "period", "magnitude_ms"});
            if (!j["period"] || !j["magnitude_ms"]) r.fail(j, "spike jitter needs period and magnitude_ms");
            sim::SpikeTrain s;
            s.period = r.count(j["period"], "jitter.period");
            s.magnitude = r.millis(j["magnitude_ms"], "jitter.magnitude_ms");
            p.jitter = s;
        } else {
            r.fail(j["model"], "jitter.model must be none, lognormal or spike");
        }
    }
    try {
        p.validate();
    } catch (const ContractError& e) {
        r.fail(n, e.what());
    }
    return p;
}

harness::NicSpec read_nic(const Reader& r, const YAML::Node& n) {
    r.allow(n, "nic", {"id", "profile", "capacity_bps", "security", "overrides"});
    if (!n["id"] || !n["profile"]) r.fail(n, "nic needs id and profile");
    harness::NicSpec s;
    s.id = r.str(n["id"], "nic.id");
    s.profile = r.str(n["profile"], "nic.profile");
    if (n["capacity_bps"]) {
        s.capacity = r.integer(n["capacity_bps"], "nic.capacity_bps");
        if (*s.capacity <= 0) r.fail(n["capacity_bps"], "nic.capacity_bps must be > 0");
    }
    if (n["security"]) s.security = r.real(n["security"], "nic.security");
    if (const auto o = n["overrides"]) {
        r.allow(o, "nic.overrides", {"delay", "bandwidth", "reliability", "security"});
        auto opt = [&](const char* key, std::optional<double>& out) {
            if (o[key]) out = r.real(o[key], std::string("overrides.") + key);
        };
        opt("delay", s.overrides.delay);
        opt("bandwidth", s.overrides.bandwidth);
        opt("reliability", s.overrides.reliability);
        opt("security", s.overrides.security);
    }
    return s;
}

harness::QualityLevel read_level(const Reader& r, const YAML::Node& n) {
    r.allow(n, "quality level", {"name", "service_ms", "ap", "ar", "label"});
    if (!n["name"] || !n["service_ms"] || !n["ap"] || !n["ar"]) {
        r.fail(n, "quality level needs name, service_ms, ap and ar");
    }
    harness::QualityLevel l;
    l.name = r.str(n["name"], "level.name");
    l.service_time = r.positive_millis(n["service_ms"], "level.service_ms");
    l.ap = r.real(n["ap"], "level.ap");
    l.ar = r.real(n["ar"], "level.ar");
    if (n["label"]) l.param_label = r.str(n["label"], "level.label");
    return l;
}

std::optional<sim::Direction> read_direction(const Reader& r, const YAML::Node& n) {
    const auto d = r.str(n, "direction");
    if (d == "up") return sim::Direction::Uplink;
    if (d == "down") return sim::Direction::Downlink;
    if (d != "both") r.fail(n, "direction must be up, down or both");
    return std::nullopt;
}

harness::ScenarioEvent read_event(const Reader& r, const YAML::Node& n) {
    r.expect_map(n, "scenario event");
    if (!n["round"] || !n["action"]) r.fail(n, "scenario event needs round and action");
    harness::ScenarioEvent ev;
    ev.at_round = r.count(n["round"], "scenario.round");
    const auto action = r.str(n["action"], "scenario.action");
    const auto need = [&](const char* key) {
        if (!n[key]) r.fail(n, fmt::format("action {} needs '{}'", action, key));
        return n[key];
    };
    if (action == "set_base_latency") {
        r.allow(n, "set_base_latency", {"round", "action", "nic", "ms"});
        ev.action = harness::SetBaseLatency{r.str(need("nic"), "nic"), r.millis(need("ms"), "ms")};
    } else if (action == "add_spike") {
        r.allow(n, "add_spike", {"round", "action", "nic", "ms", "duration", "direction"});
        harness::AddSpike a{r.str(need("nic"), "nic"), r.millis(need("ms"), "ms"), 1, std::nullopt};
        if (n["direction"]) a.direction = read_direction(r, n["direction"]);
        if (n["duration"]) a.duration_rounds = r.count(n["duration"], "duration");
        if (a.duration_rounds == 0) r.fail(n["duration"], "duration must be >= 1");
        ev.action = a;
    } else if (action == "set_loss") {
        r.allow(n, "set_loss", {"round", "action", "nic", "rate"});
        harness::SetLoss a{r.str(need("nic"), "nic"), std::nullopt};
        const auto rate = need("rate");
        if (!(rate.IsScalar() && rate.Scalar() == "restore")) {
            a.rate = r.real(rate, "rate");
            if (*a.rate < 0.0 || *a.rate > 1.0) r.fail(rate, "loss rate must lie in [0, 1]");
        }
        ev.action = a;
    } else if (action == "set_offset") {
        r.allow(n, "set_offset", {"round", "action", "node", "ms"});
        ev.action = harness::SetOffset{r.str(need("node"), "node"), r.millis(need("ms"), "ms")};
    } else if (action == "add_compute_delay") {
        r.allow(n, "add_compute_delay", {"round", "action", "ms", "duration"});
        harness::AddComputeDelay a{r.millis(need("ms"), "ms"), 1};
        if (n["duration"]) a.duration_rounds = r.count(n["duration"], "duration");
        if (a.duration_rounds == 0) r.fail(n["duration"], "duration must be >= 1");
        ev.action = a;
    } else {
        r.fail(n["action"], "unknown action '" + action + "'");
    }
    return ev;
}

void read_random(const Reader& r, const YAML::Node& n, harness::RandomInjection& inj) {
    r.allow(n, "random",
            {"nic_episode_rate", "nic_spike_min_ms", "nic_spike_max_ms", "nic_mean_rounds", "nic_loss_rate",
             "nic_exclusive", "nic_direction", "compute_episode_rate", "compute_delay_min_ms", "compute_delay_max_ms", "compute_mean_rounds"});
    auto prob = [&](const char* key, double& out) {
        if (!n[key]) return;
        out = r.real(n[key], key);
        if (out < 0.0 || out > 1.0) r.fail(n[key], std::string(key) + " must lie in [0, 1]");
    };
    auto mean = [&](const char* key, double& out) {
        if (!n[key]) return;
        out = r.real(n[key], key);
        if (out < 1.0) r.fail(n[key], std::string(key) + " must be >= 1");
    };
    auto dur = [&](const char* key, Elapsed& out) {
        if (n[key]) out = r.millis(n[key], key);
    };
    prob("nic_episode_rate", inj.nic_episode_rate);
    dur("nic_spike_min_ms", inj.nic_spike_min);
    dur("nic_spike_max_ms", inj.nic_spike_max);
    mean("nic_mean_rounds", inj.nic_mean_rounds);
    prob("nic_loss_rate", inj.nic_loss_rate);
    if (n["nic_exclusive"]) inj.nic_exclusive = r.boolean(n["nic_exclusive"], "nic_exclusive");
    if (n["nic_direction"]) inj.nic_direction = read_direction(r, n["nic_direction"]);
    prob("compute_episode_rate", inj.compute_episode_rate);
    dur("compute_delay_min_ms", inj.compute_delay_min);
    dur("compute_delay_max_ms", inj.compute_delay_max);
    mean("compute_mean_rounds", inj.compute_mean_rounds);
    if (inj.nic_spike_max < inj.nic_spike_min) r.fail(n, "nic_spike_max_ms < nic_spike_min_ms");
    if (inj.compute_delay_max < inj.compute_delay_min) r.fail(n, "compute_delay_max_ms < compute_delay_min_ms");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
    const Reader r(source);
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
    if (!root.IsMap()) {
        throw ConfigError(source, 1, 1, "config must be a mapping");
    }
    r.allow(root, "config",
            {"name", "rounds", "seed", "controller", "frame_period_ms", "rtguard", "resilience", "policy", "payload",
             "qos", "netlayer", "clocks", "profiles", "nics", "baseline", "quality_table", "scenario", "random",
             "output"});

    ExperimentConfig cfg;
    cfg.profiles = {builtin_profile("4g"), builtin_profile("5g")};

    if (root["name"]) cfg.scenario_name = r.str(root["name"], "name");
    if (root["rounds"]) {
        cfg.rounds = r.count(root["rounds"], "rounds");
        if (cfg.rounds == 0) r.fail(root["rounds"], "rounds must be >= 1");
    }
    if (root["seed"]) cfg.seed = r.count(root["seed"], "seed");
    if (root["controller"]) {
        try {
            cfg.controller = harness::controller_from_string(r.str(root["controller"], "controller"));
        } catch (const std::invalid_argument& e) {
            r.fail(root["controller"], e.what());
        }
    }
    if (root["frame_period_ms"]) cfg.frame_period = r.positive_millis(root["frame_period_ms"], "frame_period_ms");
    if (root["rtguard"]) read_rtguard(r, root["rtguard"], cfg.rt);
    if (root["resilience"]) read_resilience(r, root["resilience"], cfg.resilience);
    if (root["policy"]) read_policy(r, root["policy"], cfg);
    if (const auto p = root["payload"]) {
        r.allow(p, "payload", {"raw_bytes", "result_bytes", "header_overhead_bytes"});
        if (p["raw_bytes"]) cfg.raw_frame_bytes = r.integer(p["raw_bytes"], "payload.raw_bytes");
        if (p["result_bytes"]) cfg.result_bytes = r.integer(p["result_bytes"], "payload.result_bytes");
        if (p["header_overhead_bytes"]) {
            cfg.header_overhead_bytes = r.integer(p["header_overhead_bytes"], "payload.header_overhead_bytes");
        }
    }
    if (const auto q = root["qos"]) {
        r.allow(q, "qos", {"min_bandwidth_bps", "security_floor", "reliability_floor"});
        if (q["min_bandwidth_bps"]) cfg.qos.min_bandwidth = r.integer(q["min_bandwidth_bps"], "qos.min_bandwidth_bps");
        if (q["security_floor"]) cfg.qos.security_floor = r.real(q["security_floor"], "qos.security_floor");
        if (q["reliability_floor"]) cfg.qos.reliability_floor = r.real(q["reliability_floor"], "qos.reliability_floor");
    }
    if (const auto nl = root["netlayer"]) {
        r.allow(nl, "netlayer", {"window"});
        if (nl["window"]) cfg.nature_window = r.count(nl["window"], "netlayer.window");
    }
    if (const auto c = root["clocks"]) {
        r.allow(c, "clocks", {"origin_offset_ms", "remote_offset_ms", "remote_drift"});
        if (c["origin_offset_ms"]) cfg.origin_offset = r.millis(c["origin_offset_ms"], "clocks.origin_offset_ms");
        if (c["remote_offset_ms"]) cfg.remote_offset = r.millis(c["remote_offset_ms"], "clocks.remote_offset_ms");
        if (c["remote_drift"]) cfg.remote_drift = r.ratio(c["remote_drift"], "clocks.remote_drift");
    }
    if (const auto ps = root["profiles"]) {
        if (!ps.IsSequence()) r.fail(ps, "profiles must be a list");
        std::set<std::string> seen;
        for (const auto& pn : ps) {
            auto p = read_profile(r, pn);
            if (!seen.insert(p.name).second) r.fail(pn, "duplicate profile '" + p.name + "'");
            std::erase_if(cfg.profiles, [&](const sim::LatencyProfile& b) { return b.name == p.name; });
            cfg.profiles.push_back(std::move(p));
        }
    }
    std::map<std::string, YAML::Node> nic_nodes;
    if (const auto ns = root["nics"]) {
        if (!ns.IsSequence()) r.fail(ns, "nics must be a list");
        for (const auto& nn : ns) {
            auto s = read_nic(r, nn);
            if (!nic_nodes.emplace(s.id, nn).second) r.fail(nn, "duplicate NIC id '" + s.id + "'");
            const bool known = std::any_of(cfg.profiles.begin(), cfg.profiles.end(),
                                           [&](const sim::LatencyProfile& p) { return p.name == s.profile; });
            if (!known) r.fail(nn["profile"], "unknown profile '" + s.profile + "'");
            cfg.nics.push_back(std::move(s));
        }
    }
    if (cfg.nics.empty()) r.fail(root, "at least one NIC is required under 'nics'");
    if (const auto b = root["baseline"]) {
        r.allow(b, "baseline", {"nic"});
        if (b["nic"]) {
            cfg.baseline_nic = r.str(b["nic"], "baseline.nic");
            if (!nic_nodes.contains(*cfg.baseline_nic)) r.fail(b["nic"], "baseline.nic is not a configured NIC");
        }
    }
    if (const auto qt = root["quality_table"]) {
        if (!qt.IsSequence() || qt.size() == 0) r.fail(qt, "quality_table must be a non-empty list");
        cfg.quality_table.clear();
        for (const auto& ln : qt) cfg.quality_table.push_back(read_level(r, ln));
        try {
            harness::validate_quality_table(cfg.quality_table);
        } catch (const ContractError& e) {
            r.fail(qt, e.what());
        }
    }
    if (const auto sc = root["scenario"]) {
        if (!sc.IsSequence()) r.fail(sc, "scenario must be a list");
        for (const auto& en : sc) {
            auto ev = read_event(r, en);
            std::visit(
                [&](const auto& a) {
                    using T = std::decay_t<decltype(a)>;
                    if constexpr (std::is_same_v<T, harness::SetOffset>) {
                        if (a.node != harness::kOriginNode && a.node != harness::kRemoteNode) {
                            r.fail(en["node"], "node must be sov or sor");
                        }
                    } else if constexpr (!std::is_same_v<T, harness::AddComputeDelay>) {
                        if (!nic_nodes.contains(a.nic)) r.fail(en["nic"], "unknown NIC '" + a.nic + "'");
                    }
                },
                ev.action);
            cfg.scenario.push_back(std::move(ev));
        }
    }
    if (root["random"]) read_random(r, root["random"], cfg.random);
    if (const auto o = root["output"]) {
        r.allow(o, "output", {"dir", "event_log"});
        if (o["dir"]) cfg.out_dir = r.str(o["dir"], "output.dir");
        if (o["event_log"]) cfg.record_event_log = r.boolean(o["event_log"], "output.event_log");
    }

    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        r.fail(root, e.what());
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), 0, 0, "cannot open config file");
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

harness::ExperimentConfig load_preset(const std::string& name) {
    return parse_config(preset_text(name), name);
}

}  // namespace interneuron::config
