#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "hifd/corpus.hpp"
#include "hifd/csv.hpp"
#include "hifd/identify.hpp"
#include "hifd/pipeline.hpp"

namespace hifd {

using nlohmann::json;

// ---------------------------------------------------------------------------
// JSON (de)serialization of configs, reports and manifests. The structured
// report is schema-versioned and field-complete: parsing it back yields the
// run verbatim.
// ---------------------------------------------------------------------------

inline json to_json(const PipelineConfig& c) {
    return json{{"fs", c.fs},
                {"f0", c.f0},
                {"fc", c.fc},
                {"l", c.l},
                {"d", c.d},
                {"trigger_threshold", c.trigger_threshold},
                {"window_pre", c.window_pre},
                {"window_post", c.window_post},
                {"rho", c.rho},
                {"epsilon_m", c.epsilon_m},
                {"grubbs_rlrs", c.grubbs_rlrs},
                {"seed", c.seed}};
}

inline PipelineConfig config_from_json(const json& j) {
    PipelineConfig c;
    c.fs = j.value("fs", c.fs);
    c.f0 = j.value("f0", c.f0);
    c.fc = j.value("fc", c.fc);
    c.l = j.value("l", c.l);
    c.d = j.value("d", c.d);
    c.trigger_threshold = j.value("trigger_threshold", c.trigger_threshold);
    c.window_pre = j.value("window_pre", c.window_pre);
    c.window_post = j.value("window_post", c.window_post);
    c.rho = j.value("rho", c.rho);
    c.epsilon_m = j.value("epsilon_m", c.epsilon_m);
    c.grubbs_rlrs = j.value("grubbs_rlrs", c.grubbs_rlrs);
    c.seed = j.value("seed", c.seed);
    return c;
}

inline const char* variant_key(CdirVariant v) {
    switch (v) {
        case CdirVariant::SlopeDerivative:    return "slope_derivative";
        case CdirVariant::NegSlopeDerivative: return "neg_slope_derivative";
        case CdirVariant::NegSlope:           return "neg_slope";
    }
    return "?";
}

inline CdirVariant variant_from_key(const std::string& s) {
    if (s == "slope_derivative") return CdirVariant::SlopeDerivative;
    if (s == "neg_slope_derivative") return CdirVariant::NegSlopeDerivative;
    if (s == "neg_slope") return CdirVariant::NegSlope;
    throw parameter_error("unknown c_dir variant key: " + s);
}

inline json to_json(const IdentificationReport& r) {
    json feeders = json::array();
    for (const auto& [id, means] : r.mean_index) {
        json m;
        for (const auto& [v, x] : means) m[variant_key(v)] = x;
        feeders.push_back(json{{"feeder", id}, {"mean_index", m}});
    }
    json samples = json::array();
    for (const auto& s : r.samples)
        samples.push_back(json{{"feeder", s.feeder_id},
                               {"half_cycle", s.half_cycle_index},
                               {"value", s.index_value},
                               {"variant", variant_key(s.c_dir_variant)},
                               {"n0", s.n0},
                               {"n1", s.n1}});
    json j{{"window_start_cycle", r.window_start_cycle},
           {"window_end_cycle", r.window_end_cycle},
           {"short_window", r.short_window},
           {"feeders", feeders},
           {"chosen_variant", variant_key(r.chosen_variant)},
           {"index_samples", samples}};
    if (r.chosen_feeder) j["chosen_feeder"] = *r.chosen_feeder;
    return j;
}

inline IdentificationReport identification_from_json(const json& j) {
    IdentificationReport r;
    r.window_start_cycle = j.at("window_start_cycle").get<long>();
    r.window_end_cycle = j.at("window_end_cycle").get<long>();
    r.short_window = j.at("short_window").get<bool>();
    for (const auto& f : j.at("feeders")) {
        std::map<CdirVariant, double> m;
        for (const auto& [k, v] : f.at("mean_index").items())
            m[variant_from_key(k)] = v.get<double>();
        r.mean_index.emplace_back(f.at("feeder").get<std::string>(), std::move(m));
    }
    r.chosen_variant = variant_from_key(j.at("chosen_variant").get<std::string>());
    if (j.contains("chosen_feeder")) r.chosen_feeder = j["chosen_feeder"].get<std::string>();
    for (const auto& s : j.at("index_samples")) {
        IndexSample is;
        is.feeder_id = s.at("feeder").get<std::string>();
        is.half_cycle_index = s.at("half_cycle").get<long>();
        is.index_value = s.at("value").get<double>();
        is.c_dir_variant = variant_from_key(s.at("variant").get<std::string>());
        is.n0 = s.at("n0").get<long>();
        is.n1 = s.at("n1").get<long>();
        r.samples.push_back(std::move(is));
    }
    return r;
}

inline json to_json(const RunReport& r) {
    json det = json::array();
    for (const auto& d : r.detection) {
        json jd{{"feeder", d.feeder_id},
                {"cycle_faulty", std::vector<int>(d.cycle_faulty.begin(), d.cycle_faulty.end())},
                {"half_cycle_m", std::vector<int>(d.half_cycle_m.begin(), d.half_cycle_m.end())}};
        if (d.triggered_at) jd["triggered_at"] = *d.triggered_at;
        det.push_back(std::move(jd));
    }
    json j{{"schema_version", r.schema_version},
           {"config", to_json(r.config)},
           {"input_digest", r.input_digest},
           {"neutral", to_string(r.neutral)},
           {"detection", det},
           {"short_record", r.short_record}};
    if (r.trigger_cycle) j["trigger_cycle"] = *r.trigger_cycle;
    if (r.detecting_feeder) j["detecting_feeder"] = *r.detecting_feeder;
    if (r.identification) j["identification"] = to_json(*r.identification);
    return j;
}

inline RunReport report_from_json(const json& j) {
    RunReport r;
    r.schema_version = j.at("schema_version").get<int>();
    if (r.schema_version != kReportSchemaVersion)
        throw parameter_error("unsupported report schema version " +
                              std::to_string(r.schema_version));
    r.config = config_from_json(j.at("config"));
    r.input_digest = j.at("input_digest").get<std::uint64_t>();
    r.neutral = neutral_from_string(j.at("neutral").get<std::string>());
    for (const auto& d : j.at("detection")) {
        FeederDetection fd;
        fd.feeder_id = d.at("feeder").get<std::string>();
        for (int x : d.at("cycle_faulty").get<std::vector<int>>())
            fd.cycle_faulty.push_back(static_cast<char>(x));
        for (int x : d.at("half_cycle_m").get<std::vector<int>>())
            fd.half_cycle_m.push_back(static_cast<char>(x));
        if (d.contains("triggered_at")) fd.triggered_at = d["triggered_at"].get<long>();
        r.detection.push_back(std::move(fd));
    }
    r.short_record = j.at("short_record").get<bool>();
    if (j.contains("trigger_cycle")) r.trigger_cycle = j["trigger_cycle"].get<long>();
    if (j.contains("detecting_feeder"))
        r.detecting_feeder = j["detecting_feeder"].get<std::string>();
    if (j.contains("identification"))
        r.identification = identification_from_json(j["identification"]);
    return r;
}

// ---------------------------------------------------------------------------
// Manifest serialization.
// ---------------------------------------------------------------------------

inline json to_json(const ScenarioSpec& s) {
    json j{{"id", s.id},
           {"neutral", to_string(s.neutral)},
           {"c0", s.c0},
           {"c0l", s.c0l},
           {"faulty_feeder", s.faulty_feeder},
           {"i_fm", s.i_fm},
           {"band_r", s.band_r},
           {"tau", s.tau},
           {"offset_delta", s.offset_delta},
           {"phi", s.phi},
           {"impulse_rate", s.impulse_rate},
           {"impulse_gain", s.impulse_gain},
           {"cycles", s.cycles},
           {"seed", s.seed}};
    if (s.neutral == NeutralType::Resonant) j["v"] = s.v;
    if (s.neutral == NeutralType::LowResistor) j["r_n"] = s.r_n;
    if (std::isfinite(s.snr_db)) j["snr_db"] = s.snr_db;
    return j;
}

inline ScenarioSpec scenario_from_json(const json& j) {
    ScenarioSpec s;
    try {
        s.id = j.at("id").get<std::string>();
        s.neutral = neutral_from_string(j.at("neutral").get<std::string>());
        s.c0 = j.at("c0").get<std::vector<double>>();
        s.c0l = j.value("c0l", 0.0);
        s.faulty_feeder = j.at("faulty_feeder").get<int>();
        s.i_fm = j.at("i_fm").get<double>();
        s.band_r = j.value("band_r", s.band_r);
        s.tau = j.value("tau", s.tau);
        s.offset_delta = j.value("offset_delta", s.offset_delta);
        s.phi = j.value("phi", s.phi);
        s.v = j.value("v", s.v);
        s.r_n = j.value("r_n", s.r_n);
        s.snr_db = j.contains("snr_db") ? j["snr_db"].get<double>() : kNoiselessSnr;
        s.impulse_rate = j.value("impulse_rate", 0.0);
        s.impulse_gain = j.value("impulse_gain", s.impulse_gain);
        s.cycles = j.value("cycles", s.cycles);
        s.seed = j.value("seed", s.seed);
    } catch (const json::exception& e) {
        throw parameter_error(std::string("manifest schema violation: ") + e.what());
    }
    return s;
}

inline json to_json(const Manifest& m) {
    json arr = json::array();
    for (const auto& s : m.scenarios) arr.push_back(to_json(s));
    return json{{"scenarios", arr}};
}

inline Manifest manifest_from_json(const json& j) {
    Manifest m;
    if (!j.contains("scenarios") || !j["scenarios"].is_array())
        throw parameter_error("manifest schema violation: missing 'scenarios' array");
    for (const auto& s : j["scenarios"]) m.scenarios.push_back(scenario_from_json(s));
    return m;
}

inline Manifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ingestion_error("cannot open manifest '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw parameter_error(std::string("manifest is not valid JSON: ") + e.what());
    }
    return manifest_from_json(j);
}

// ---------------------------------------------------------------------------
// Report emission.
// ---------------------------------------------------------------------------

enum class ReportFormat { Structured, HumanSummary };

inline std::string human_summary(const RunReport& r) {
    std::ostringstream os;
    os << "neutral: " << to_string(r.neutral) << '\n';
    if (r.trigger_cycle) {
        os << "detection: triggered at cycle " << *r.trigger_cycle << " by feeder "
           << (r.detecting_feeder ? *r.detecting_feeder : std::string("?")) << '\n';
    } else {
        os << "detection: no trigger\n";
    }
    if (r.identification) {
        const auto& idr = *r.identification;
        os << "identification window: cycles " << idr.window_start_cycle << ".."
           << idr.window_end_cycle << (idr.short_window ? " (short)" : "") << '\n';
        os << "variant: " << to_string(idr.chosen_variant) << '\n';
        for (const auto& [id, means] : idr.mean_index)
            os << "  mean INDEX " << id << " = " << means.at(idr.chosen_variant) << '\n';
        if (idr.chosen_feeder)
            os << "faulty feeder: " << *idr.chosen_feeder << '\n';
        else
            os << "faulty feeder: none identified (possible bus-side fault)\n";
    }
    return os.str();
}

inline void emit_report(const RunReport& r, const std::string& path, ReportFormat fmt) {
    std::ofstream out(path);
    if (!out) throw ingestion_error("cannot write report '" + path + "'");
    if (fmt == ReportFormat::Structured)
        out << to_json(r).dump(2) << '\n';
    else
        out << human_summary(r);
    if (!out) throw ingestion_error("write failed for '" + path + "'");
}

inline RunReport parse_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ingestion_error("cannot open report '" + path + "'");
    json j;
    in >> j;
    return report_from_json(j);
}

// ---------------------------------------------------------------------------
// Plot data: per-channel column files, one row per sample, ready for any
// plotting tool. Slope columns align sample-for-sample with the waveform.
// ---------------------------------------------------------------------------

inline void emit_plot_data(const RunReport& rep, const SynchronizedRecord& record,
                           const std::string& dir) {
    namespace fs = std::filesystem;
    if (rep.input_digest != record_digest(record))
        throw parameter_error("emit_plot_data: report was produced from a different record");
    fs::create_directories(dir);
    PipelineConfig cfg = rep.config;

    auto write_channel = [&](const std::string& id, const SampleSeries& s) {
        ChannelAnalysis with = analyze_channel(s, id, cfg);
        PipelineConfig raw_cfg = cfg;
        raw_cfg.grubbs_rlrs = false;
        ChannelAnalysis without = analyze_channel(s, id, raw_cfg);

        // per-sample INDEX stream and M flag from the report
        std::vector<double> index(s.values.size(), 0.0);
        std::vector<int> mflag(s.values.size(), 0);
        if (rep.identification)
            for (const auto& ix : rep.identification->samples)
                if (ix.feeder_id == id)
                    for (long n = ix.n0; n < ix.n1 && n < static_cast<long>(index.size()); ++n)
                        index[n] = ix.index_value;
        for (std::size_t h = 0; h < with.features.size(); ++h)
            if (with.features[h].is_m_shape)
                for (long n = with.features[h].n0;
                     n <= with.features[h].n1 && n < static_cast<long>(mflag.size()); ++n)
                    mflag[n] = 1;

        std::ofstream out(fs::path(dir) / (id + ".tsv"));
        if (!out) throw ingestion_error("cannot write plot data for '" + id + "'");
        out << "n\ttime\traw\tslope_refit\tslope_raw\tindex\tm_flag\n";
        for (std::size_t n = 0; n < s.values.size(); ++n) {
            out << n << '\t' << detail::format_double(s.t0 + n / s.fs) << '\t'
                << detail::format_double(s.values[n]) << '\t'
                << detail::format_double(with.iss.slopes[n]) << '\t'
                << detail::format_double(without.iss.slopes[n]) << '\t'
                << detail::format_double(index[n]) << '\t' << mflag[n] << '\n';
        }
    };

    write_channel("u0b", record.u0b);
    for (const auto& [id, s] : record.feeders) write_channel(id, s);
}

}  // namespace hifd
