#pragma once

#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hifd/config.hpp"
#include "hifd/identify.hpp"
#include "hifd/types.hpp"

namespace hifd {

inline constexpr int kReportSchemaVersion = 1;

// ---------------------------------------------------------------------------
// End-to-end run: slope pipeline per channel, per-feeder detection, and, on
// trigger, feeder identification over the window.
// ---------------------------------------------------------------------------

struct FeederDetection {
    std::string feeder_id;
    std::optional<long> triggered_at;  ///< sample-time cycle ordinal
    std::vector<char> cycle_faulty;    ///< per analyzed cycle pair
    std::vector<char> half_cycle_m;    ///< per half-cycle M verdict
};

struct RunReport {
    int schema_version = kReportSchemaVersion;
    PipelineConfig config;
    std::uint64_t input_digest = 0;
    NeutralType neutral = NeutralType::Resonant;
    std::vector<FeederDetection> detection;
    std::optional<long> trigger_cycle;          ///< earliest trigger
    std::optional<std::string> detecting_feeder;
    std::optional<IdentificationReport> identification;
    bool short_record = false;

    const FeederDetection* find_detection(const std::string& id) const {
        for (const auto& d : detection)
            if (d.feeder_id == id) return &d;
        return nullptr;
    }
};

namespace detail {

inline FeederDetection detect_feeder(const ChannelAnalysis& ca, int trigger_threshold) {
    FeederDetection det;
    det.feeder_id = ca.id;
    for (const auto& f : ca.features) det.half_cycle_m.push_back(f.is_m_shape);
    DetectionState st;
    st.trigger_threshold = trigger_threshold;
    long last_ordinal = -1;
    for (std::size_t h = 0; h + 1 < ca.features.size(); h += 2) {
        const bool faulty = cycle_is_faulty(ca.features[h], ca.features[h + 1]);
        det.cycle_faulty.push_back(faulty);
        // the cycle completes where its second half-cycle ends
        long ordinal = ca.features[h + 1].n1 / ca.iss.n_t;
        if (ordinal <= last_ordinal) ordinal = last_ordinal + 1;
        st = update_detection(st, faulty, ordinal);
        last_ordinal = ordinal;
    }
    det.triggered_at = st.triggered_at;
    return det;
}

}  // namespace detail

inline RunReport run_pipeline(const SynchronizedRecord& record, const PipelineConfig& cfg) {
    cfg.validate();
    record.validate();
    record.u0b.require_cycles(2);

    RunReport rep;
    rep.config = cfg;
    rep.input_digest = record_digest(record);
    rep.neutral = record.neutral;

    // per-channel analyses run independently; spread them over a small pool
    std::vector<std::future<ChannelAnalysis>> jobs;
    jobs.reserve(record.feeders.size() + 1);
    for (const auto& [id, s] : record.feeders)
        jobs.push_back(std::async(std::launch::async,
                                  [&s, &id, &cfg] { return analyze_channel(s, id, cfg); }));
    const ChannelAnalysis u0b = analyze_channel(record.u0b, "u0b", cfg);
    std::vector<ChannelAnalysis> channels;
    channels.reserve(jobs.size());
    for (auto& j : jobs) channels.push_back(j.get());

    for (const auto& ca : channels) {
        rep.detection.push_back(detail::detect_feeder(ca, cfg.trigger_threshold));
        const auto& t = rep.detection.back().triggered_at;
        if (t && (!rep.trigger_cycle || *t < *rep.trigger_cycle)) {
            rep.trigger_cycle = *t;
            rep.detecting_feeder = ca.id;
        }
    }

    if (rep.trigger_cycle) {
        const long total_cycles = static_cast<long>(record.length()) / record.samples_per_cycle();
        rep.short_record = *rep.trigger_cycle + cfg.window_post >= total_cycles;
        rep.identification = identify_from_analyses(channels, u0b, record.neutral,
                                                    *rep.trigger_cycle, cfg);
    }
    return rep;
}

}  // namespace hifd
