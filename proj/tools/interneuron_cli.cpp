// interneuron: run pipeline experiments, compare summaries, validate traces.
//
// Precedence: built-in defaults < preset or --config file < command-line flags.

#include "interneuron/config/config.hpp"
#include "interneuron/harness/compare.hpp"
#include "interneuron/harness/experiment.hpp"
#include "interneuron/harness/trace_io.hpp"
#include "interneuron/harness/validate.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;
using namespace interneuron;

namespace {

struct RunOptions {
    std::string config_path;
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::uint64_t seeds = 1;
    std::optional<std::uint64_t> rounds;
    std::optional<std::string> controller;
    std::optional<std::string> out;
    std::optional<std::string> timeout_handler;
    unsigned jobs = 1;
};

void setup_logging() {
    spdlog::set_level(spdlog::level::warn);
    if (const char* lvl = std::getenv("INTERNEURON_LOG")) {
        spdlog::set_level(spdlog::level::from_str(lvl));
    }
}

int cmd_run(const RunOptions& o) {
    harness::ExperimentConfig base;
    try {
        if (!o.config_path.empty()) {
            base = config::load_config_file(o.config_path);
        } else {
            base = config::load_preset(o.scenario.empty() ? "fig5_ramp" : o.scenario);
        }
        if (o.seed) base.seed = *o.seed;
        if (o.rounds) base.rounds = *o.rounds;
        if (o.controller) base.controller = harness::controller_from_string(*o.controller);
        if (o.out) base.out_dir = *o.out;
        if (o.timeout_handler) base.resilience.timeout_handler = *o.timeout_handler == "on";
        base.validate();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    std::error_code ec;
    fs::create_directories(base.out_dir, ec);
    if (ec) {
        std::cerr << "error: cannot create " << base.out_dir << ": " << ec.message() << '\n';
        return 3;
    }

    std::vector<harness::ExperimentConfig> runs;
    for (std::uint64_t i = 0; i < o.seeds; ++i) {
        auto c = base;
        c.seed = base.seed + i;
        runs.push_back(std::move(c));
    }
    std::vector<std::optional<harness::Summary>> summaries(runs.size());
    std::vector<std::string> errors(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < runs.size(); i = next++) {
            try {
                const auto res = harness::run_experiment(runs[i]);
                const fs::path dir(runs[i].out_dir);
                const auto id = runs[i].run_id();
                harness::write_trace(dir / (id + ".trace.jsonl"), res.traces);
                harness::write_summary(dir / (id + ".summary.csv"), res.summary);
                if (runs[i].record_event_log) {
                    std::ofstream log(dir / (id + ".events.log"));
                    for (const auto& line : res.event_log) log << line << '\n';
                    if (!log) throw std::runtime_error("cannot write event log in " + dir.string());
                }
                summaries[i] = res.summary;
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const unsigned n = std::max(1u, std::min<unsigned>(o.jobs, static_cast<unsigned>(runs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    int rc = 0;
    std::cout << harness::summary_header() << '\n';
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (summaries[i]) {
            std::cout << harness::summary_row(*summaries[i]) << '\n';
        } else {
            std::cerr << "error: " << runs[i].run_id() << ": " << errors[i] << '\n';
            rc = 3;
        }
    }
    return rc;
}

int cmd_compare(const std::string& a, const std::string& b) {
    try {
        const auto report = harness::compare_summaries(harness::read_summaries(a), harness::read_summaries(b));
        std::cout << harness::format_report(report);
        return 0;
    } catch (const harness::CompareError& e) {
        std::cerr << "refusing to compare: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

int cmd_validate(const std::vector<std::string>& paths) {
    int rc = 0;
    for (const auto& p : paths) {
        std::vector<harness::RoundTrace> traces;
        try {
            traces = harness::read_trace(p);
        } catch (const std::exception& e) {
            std::cerr << p << ": parse error: " << e.what() << '\n';
            rc = 5;
            continue;
        }
        const auto violations = harness::validate_trace(traces);
        for (const auto& v : violations) {
            std::cerr << p << ": " << harness::format_violation(v) << '\n';
        }
        if (!violations.empty()) {
            rc = rc ? rc : 1;
        } else {
            std::cout << p << ": ok (" << traces.size() << " rounds)\n";
        }
    }
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Multi-network pipeline middleware simulator"};
    app.require_subcommand(1);

    RunOptions ro;
    auto* run = app.add_subcommand("run", "Run an experiment and write trace + summary");
    auto* cfg_opt = run->add_option("--config", ro.config_path, "Experiment config file (YAML)")->check(CLI::ExistingFile);
    run->add_option("--scenario", ro.scenario, "Bundled preset to run")->excludes(cfg_opt);
    run->add_option("--seed", ro.seed, "Override the seed");
    run->add_option("--seeds", ro.seeds, "Run this many consecutive seeds starting at --seed")->check(CLI::PositiveNumber);
    run->add_option("--rounds", ro.rounds, "Override the round count")->check(CLI::PositiveNumber);
    run->add_option("--controller", ro.controller, "interneuron | compute_only | static");
    run->add_option("--out", ro.out, "Output directory");
    run->add_option("--timeout-handler", ro.timeout_handler, "Override the timeout handler")
        ->check(CLI::IsMember({"on", "off"}));
    run->add_option("--jobs", ro.jobs, "Seeds run concurrently")->check(CLI::PositiveNumber);

    std::string sum_a, sum_b;
    auto* cmp = app.add_subcommand("compare", "Compare a candidate summary against a reference");
    cmp->add_option("candidate", sum_a, "Summary CSV of the candidate")->required();
    cmp->add_option("reference", sum_b, "Summary CSV of the reference")->required();

    std::vector<std::string> traces;
    auto* val = app.add_subcommand("validate", "Check trace invariants");
    val->add_option("traces", traces, "Trace JSONL files")->required();

    std::string show;
    auto* pre = app.add_subcommand("presets", "List bundled presets or print one");
    pre->add_option("--show", show, "Preset to print");

    CLI11_PARSE(app, argc, argv);

    if (*run) return cmd_run(ro);
    if (*cmp) return cmd_compare(sum_a, sum_b);
    if (*val) return cmd_validate(traces);
    if (*pre) {
        try {
            if (show.empty()) {
                for (const auto& n : config::preset_names()) std::cout << n << '\n';
            } else {
                std::cout << config::preset_text(show);
            }
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return 2;
        }
    }
    return 0;
}
