// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

// anchorkv: run streaming schedules, audit traces, compare switch strategies.
//
// Exit codes: 0 ok, 2 input error, 3 invariant breach / audit failure.

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anchorkv/compare.hpp"
#include "anchorkv/engine.hpp"
#include "anchorkv/errors.hpp"
#include "anchorkv/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInvariant = 3;

struct RunFlags {
    std::string schedule;
    std::string strategy = "anchor";
    std::string rope_mode = "tri";
    int sink = 3;
    int junction = 3;
    int window = 9;
    int pmax = 21;
    std::uint64_t seed = 0;
    std::uint64_t weight_seed = 0;
    bool checked = false;
    std::string out = "-";
};

const std::map<std::string, std::string> kStrategies{{"baseline", "baseline"}, {"flush", "flush"}, {"anchor", "anchor"}};
const std::map<std::string, std::string> kRopeModes{{"tri", "tri"}, {"bounded", "bounded"}, {"unbounded", "unbounded"}};

void add_config_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--schedule", f.schedule, "Schedule JSON file")->required()->envname("ANCHORKV_SCHEDULE");
    cmd->add_option("--rope-mode", f.rope_mode, "Position assignment")
        ->transform(CLI::CheckedTransformer(kRopeModes))
        ->envname("ANCHORKV_ROPE_MODE");
    cmd->add_option("--sink", f.sink, "Sink frames N_S")->check(CLI::NonNegativeNumber)->envname("ANCHORKV_SINK");
    cmd->add_option("--junction", f.junction, "Junction frames N_J")
        ->check(CLI::NonNegativeNumber)
        ->envname("ANCHORKV_JUNCTION");
    cmd->add_option("--window", f.window, "Local window W")->check(CLI::PositiveNumber)->envname("ANCHORKV_WINDOW");
    cmd->add_option("--pmax", f.pmax, "Position bound P_max")->check(CLI::PositiveNumber)->envname("ANCHORKV_PMAX");
    cmd->add_option("--seed", f.seed, "Noise seed")->envname("ANCHORKV_SEED");
    cmd->add_option("--weight-seed", f.weight_seed, "Model weight seed")->envname("ANCHORKV_WEIGHT_SEED");
    cmd->add_flag("--checked", f.checked, "Abort on invariant breach (exit 3)")->envname("ANCHORKV_CHECKED");
    cmd->add_option("--out", f.out, "Output path, '-' for stdout")->envname("ANCHORKV_OUT");
}

anchorkv::PromptSchedule load_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw anchorkv::ValidationError(path, "cannot open schedule file");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw anchorkv::ValidationError(path, std::string("invalid JSON: ") + ex.what());
    }
    return anchorkv::schedule_from_json(doc);
}

anchorkv::EngineConfig make_config(const RunFlags& f, int d_model) {
    auto cfg = anchorkv::EngineConfig::for_d_model(d_model);
    cfg.cache = {f.sink, f.junction, f.window};
    cfg.rope.p_max = f.pmax;
    cfg.model.weight_seed = f.weight_seed;
    cfg.noise_seed = f.seed;
    cfg.checked = f.checked;
    cfg.strategy = anchorkv::strategy_from_string(f.strategy);
    cfg.rope_mode = anchorkv::rope_mode_from_string(f.rope_mode);
    try {
        cfg.validate();
    } catch (const std::exception& ex) {
        throw anchorkv::ValidationError("config", ex.what());
    }
    return cfg;
}

/// Output stream for `path`; stdout when path is "-".
class Output {
public:
    explicit Output(const std::string& path) {
        if (path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_) throw anchorkv::ValidationError(path, "cannot open output file");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

int cmd_run(const RunFlags& f) {
    const auto sched = load_schedule(f.schedule);
    const auto cfg = make_config(f, sched.d_model());
    for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << '\n';

    Output out(f.out);
    anchorkv::write_trace_header(out.stream(), sched, cfg);
    anchorkv::Engine engine(sched, cfg);
    while (!engine.done()) anchorkv::write_trace_record(out.stream(), engine.step());
    out.stream().flush();
    return kExitOk;
}

int cmd_check(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw anchorkv::ValidationError(path, "cannot open trace file");
    const auto report = anchorkv::check_trace(in);
    std::cout << report.to_text();
    return report.all_pass() ? kExitOk : kExitInvariant;
}

int cmd_compare(const RunFlags& f, const std::vector<std::string>& names, std::vector<int> offsets, bool json) {
    const auto sched = load_schedule(f.schedule);
    const auto cfg = make_config(f, sched.d_model());
    std::vector<anchorkv::StrategyId> strategies;
    for (const auto& n : names) strategies.push_back(anchorkv::strategy_from_string(n));
    if (strategies.size() < 2) throw anchorkv::ValidationError("--strategies", "need at least two strategies");
    if (offsets.empty()) offsets.push_back(cfg.cache.window + cfg.cache.junction + 5);

    const auto report = anchorkv::compare_strategies(sched, cfg, strategies, offsets);
    Output out(f.out);
    if (json) {
        out.stream() << report.to_json().dump(2) << '\n';
    } else {
        out.stream() << report.to_text();
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Streaming anchor-memory KV-cache engine"};
    app.require_subcommand(1);

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "Generate a schedule and write a JSON-lines trace");
    add_config_flags(run, run_flags);
    run->add_option("--strategy", run_flags.strategy, "Prompt-switch strategy")
        ->transform(CLI::CheckedTransformer(kStrategies))
        ->envname("ANCHORKV_STRATEGY");

    std::string trace_path;
    auto* check = app.add_subcommand("check", "Audit a trace file");
    check->add_option("trace", trace_path, "Trace file")->required();

    RunFlags cmp_flags;
    std::vector<std::string> cmp_strategies{"anchor", "baseline", "flush"};
    std::vector<int> probe_offsets;
    bool cmp_json = false;
    auto* compare = app.add_subcommand("compare", "Run several strategies with identical seeds and compare");
    add_config_flags(compare, cmp_flags);
    compare->add_option("--strategies", cmp_strategies, "Strategies to compare")
        ->delimiter(',')
        ->transform(CLI::CheckedTransformer(kStrategies))
        ->envname("ANCHORKV_STRATEGIES");
    compare->add_option("--probe-offset", probe_offsets, "Probe frame offset from each boundary (default W+N_J+5)")
        ->delimiter(',');
    compare->add_flag("--json", cmp_json, "Emit JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*run) return cmd_run(run_flags);
        if (*check) return cmd_check(trace_path);
        if (*compare) return cmd_compare(cmp_flags, cmp_strategies, probe_offsets, cmp_json);
    } catch (const anchorkv::InvariantError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const anchorkv::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const anchorkv::TraceParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
