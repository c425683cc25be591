// Copyright 2026 The AnchorKV Authors
// SPDX-License-Identifier: Apache-2.0

#include "anchorkv/compare.hpp"

#include <algorithm>
#include <future>
#include <sstream>

namespace anchorkv {

const StrategyRun& ComparisonReport::run(StrategyId s) const {
    for (const auto& r : runs) {
        if (r.strategy == s) return r;
    }
    throw std::out_of_range("strategy not in report: " + std::string(to_string(s)));
}

std::optional<int> ComparisonReport::divergence(StrategyId a, StrategyId b) const {
    for (const auto& d : divergences) {
        if ((d.a == a && d.b == b) || (d.a == b && d.b == a)) return d.frame;
    }
    throw std::out_of_range("strategy pair not in report");
}

nlohmann::json ComparisonReport::to_json() const {
    nlohmann::json jr = nlohmann::json::array();
    for (const auto& r : runs) {
        nlohmann::json ret = nlohmann::json::array();
        for (const auto& p : r.retention) {
            ret.push_back({{"boundary", p.boundary}, {"probe_frame", p.probe_frame}, {"retained", p.retained}});
        }
        nlohmann::json occ = nlohmann::json::array();
        for (const auto& o : r.occupancy) {
            occ.push_back({{"t", o.t}, {"sink", o.sink}, {"junction", o.junction}, {"local", o.local}});
        }
        jr.push_back({{"strategy", to_string(r.strategy)},
                      {"max_position", r.max_position},
                      {"retention", ret},
                      {"occupancy", occ}});
    }
    nlohmann::json jd = nlohmann::json::array();
    for (const auto& d : divergences) {
        jd.push_back({{"a", to_string(d.a)},
                      {"b", to_string(d.b)},
                      {"frame", d.frame ? nlohmann::json(*d.frame) : nlohmann::json(nullptr)}});
    }
    return {{"runs", jr}, {"divergences", jd}};
}

std::string ComparisonReport::to_text() const {
    std::ostringstream os;
    for (const auto& r : runs) {
        os << to_string(r.strategy) << ": max_position=" << r.max_position;
        for (const auto& p : r.retention) {
            os << " retained@" << p.probe_frame << "(f=" << p.boundary << ")=" << p.retained;
        }
        os << '\n';
    }
    for (const auto& d : divergences) {
        os << "divergence " << to_string(d.a) << " vs " << to_string(d.b) << ": "
           << (d.frame ? std::to_string(*d.frame) : std::string("none")) << '\n';
    }
    return os.str();
}

namespace {

StrategyRun summarise(StrategyId strategy, std::vector<FrameTrace> traces, const PromptSchedule& sched,
                      const CacheConfig& cache, std::span<const int> probe_offsets) {
    StrategyRun run;
    run.strategy = strategy;
    for (const auto& tr : traces) {
        Occupancy occ{tr.t, 0, 0, 0};
        run.max_position = std::max(run.max_position, tr.query_pos);
        for (const auto& e : tr.entries) {
            run.max_position = std::max(run.max_position, e.pos);
            ++(e.region == Region::Sink ? occ.sink : e.region == Region::Junction ? occ.junction : occ.local);
        }
        run.occupancy.push_back(occ);
    }
    for (int f : sched.boundaries()) {
        for (int offset : probe_offsets) {
            const int probe = f + offset;
            if (probe < 0 || probe >= static_cast<int>(traces.size())) continue;
            int retained = 0;
            for (const auto& e : traces[probe].entries) {
                if (e.frame >= f && e.frame < f + cache.junction) ++retained;
            }
            run.retention.push_back({f, probe, retained});
        }
    }
    run.traces = std::move(traces);
    return run;
}

}  // namespace

ComparisonReport compare_strategies(const PromptSchedule& sched, const EngineConfig& base,
                                    std::span<const StrategyId> strategies, std::span<const int> probe_offsets) {
    if (strategies.size() < 2) throw std::invalid_argument("compare needs at least two strategies");

    std::vector<std::future<std::vector<FrameTrace>>> jobs;
    for (StrategyId s : strategies) {
        EngineConfig cfg = base;
        cfg.strategy = s;
        cfg.record_history = false;
        jobs.push_back(std::async(std::launch::async, [&sched, cfg] { return run(sched, cfg); }));
    }

    ComparisonReport report;
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        report.runs.push_back(summarise(strategies[i], jobs[i].get(), sched, base.cache, probe_offsets));
    }
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        for (std::size_t j = i + 1; j < report.runs.size(); ++j) {
            const auto& a = report.runs[i].traces;
            const auto& b = report.runs[j].traces;
            Divergence d{report.runs[i].strategy, report.runs[j].strategy, std::nullopt};
            for (std::size_t t = 0; t < std::min(a.size(), b.size()); ++t) {
                if (a[t].latent_checksum != b[t].latent_checksum) {
                    d.frame = static_cast<int>(t);
                    break;
                }
            }
            report.divergences.push_back(d);
        }
    }
    return report;
}

}  // namespace anchorkv
