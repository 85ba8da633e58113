#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hifd/config.hpp"
#include "hifd/detect.hpp"
#include "hifd/interval_slope.hpp"
#include "hifd/types.hpp"

namespace hifd {

// ---------------------------------------------------------------------------
// Feeder discriminant: per half-cycle INDEX built from the channel's own
// slope extrema and a direction coefficient taken from the bus-voltage slope.
// ---------------------------------------------------------------------------

/// The three forms of the direction coefficient. The resonant neutral uses
/// SlopeDerivative and, as an alternate, NegSlope; isolated uses
/// NegSlopeDerivative; the low-resistor neutral uses NegSlope.
enum class CdirVariant { SlopeDerivative, NegSlopeDerivative, NegSlope };

inline const char* to_string(CdirVariant v) {
    switch (v) {
        case CdirVariant::SlopeDerivative:    return "dIS/dn";
        case CdirVariant::NegSlopeDerivative: return "-dIS/dn";
        case CdirVariant::NegSlope:           return "-IS";
    }
    return "?";
}

inline std::vector<CdirVariant> cdir_variants(NeutralType neutral) {
    switch (neutral) {
        case NeutralType::Resonant:
            return {CdirVariant::SlopeDerivative, CdirVariant::NegSlope};
        case NeutralType::Isolated:
            return {CdirVariant::NegSlopeDerivative};
        case NeutralType::LowResistor:
            return {CdirVariant::NegSlope};
    }
    return {};
}

namespace detail {

/// Raw (unnormalized) direction quantity at sample n. Derivative forms use a
/// two-sided central first difference on the refit slope series.
inline double cdir_raw(const IntervalSlopeSeries& u0b_iss, long n, CdirVariant v) {
    switch (v) {
        case CdirVariant::SlopeDerivative:
        case CdirVariant::NegSlopeDerivative: {
            if (!u0b_iss.defined(n - 1) || !u0b_iss.defined(n + 1))
                throw range_error("c_dir: derivative undefined at index " + std::to_string(n));
            const double d = 0.5 * (u0b_iss.slopes[n + 1] - u0b_iss.slopes[n - 1]);
            return v == CdirVariant::SlopeDerivative ? d : -d;
        }
        case CdirVariant::NegSlope:
            return -u0b_iss.at(n);
    }
    return 0.0;
}

/// Per-unit normalization denominator: max |quantity| over [begin, end).
inline double cdir_norm(const IntervalSlopeSeries& u0b_iss, CdirVariant v, long begin,
                        long end) {
    begin = std::max(begin, u0b_iss.defined_begin + 1);
    end = std::min(end, u0b_iss.defined_end - 1);
    double mx = 0.0;
    for (long n = begin; n < end; ++n) mx = std::max(mx, std::abs(cdir_raw(u0b_iss, n, v)));
    return mx;
}

}  // namespace detail

/// Direction coefficient at n_min, normalized per-unit by the maximum
/// magnitude of the same quantity over [window_begin, window_end) so the
/// result lies in [-1, 1]. Window defaults to the defined slope region.
inline double c_dir(const IntervalSlopeSeries& u0b_iss, long n_min, CdirVariant variant,
                    long window_begin = -1, long window_end = -1) {
    if (window_begin < 0) window_begin = u0b_iss.defined_begin;
    if (window_end < 0) window_end = u0b_iss.defined_end;
    const double raw = detail::cdir_raw(u0b_iss, n_min, variant);
    const double norm = detail::cdir_norm(u0b_iss, variant, window_begin, window_end);
    return norm > 0.0 ? raw / norm : 0.0;
}

/// Neutral-type convenience overload returning the primary form.
inline double c_dir(const IntervalSlopeSeries& u0b_iss, long n_min, NeutralType neutral,
                    long window_begin = -1, long window_end = -1) {
    return c_dir(u0b_iss, n_min, cdir_variants(neutral).front(), window_begin, window_end);
}

/// INDEX of one half-cycle: cdir * (mean(IS at maxima) - IS(n_min)) / |mean|.
/// Zero when the feature is not an M shape or the denominator degenerates.
inline double compute_index(const IntervalSlopeSeries& iss, const HalfCycleFeature& feature,
                            double cdir) {
    if (!feature.is_m_shape) return 0.0;
    const double mean_max = 0.5 * (iss.at(feature.n_max1) + iss.at(feature.n_max2));
    double peak = 0.0;
    for (long n = iss.defined_begin; n < iss.defined_end; ++n)
        peak = std::max(peak, std::abs(iss.slopes[n]));
    if (std::abs(mean_max) < 1e-12 * peak) return 0.0;
    return cdir * (mean_max - iss.at(feature.n_min)) / std::abs(mean_max);
}

struct IndexSample {
    std::string feeder_id;
    long half_cycle_index = 0;  ///< ordinal within the feeder's half-cycle stream
    double index_value = 0.0;
    CdirVariant c_dir_variant = CdirVariant::SlopeDerivative;
    long n0 = 0, n1 = 0;        ///< half-cycle span in samples
};

struct IdentificationReport {
    long window_start_cycle = 0;
    long window_end_cycle = 0;      ///< inclusive
    bool short_window = false;
    /// feeder -> mean INDEX under each variant evaluated for the neutral
    std::vector<std::pair<std::string, std::map<CdirVariant, double>>> mean_index;
    std::optional<std::string> chosen_feeder;
    CdirVariant chosen_variant = CdirVariant::SlopeDerivative;
    std::vector<IndexSample> samples;  ///< streams under the chosen variant

    double mean_for(const std::string& id, CdirVariant v) const {
        for (const auto& [fid, m] : mean_index)
            if (fid == id) {
                auto it = m.find(v);
                return it == m.end() ? 0.0 : it->second;
            }
        throw range_error("no mean for feeder '" + id + "'");
    }
};

// ---------------------------------------------------------------------------
// Per-channel analysis shared by detection and identification.
// ---------------------------------------------------------------------------

struct ChannelAnalysis {
    std::string id;
    IntervalSlopeSeries iss;
    std::vector<HalfCycleFeature> features;  ///< one per half-cycle window
    std::vector<char> pair_faulty;           ///< per feature: its cycle is faulty

    long half_cycle_mid(std::size_t h) const {
        return (features[h].n0 + features[h].n1) / 2;
    }
    /// Sample-time cycle ordinal of half-cycle h (comparable across feeders).
    long cycle_ordinal(std::size_t h) const { return half_cycle_mid(h) / iss.n_t; }
};

inline ChannelAnalysis analyze_channel(const SampleSeries& s, const std::string& id,
                                       const PipelineConfig& cfg) {
    ChannelAnalysis ca;
    ca.id = id;
    ca.iss = interval_slope_series(s, cfg.slope_options(), id);
    const auto& zc = ca.iss.zero_crossings;
    const MShapeOptions mo = cfg.mshape_options();
    for (std::size_t i = 0; i + 1 < zc.size(); ++i)
        ca.features.push_back(m_shape_half_cycle(ca.iss, zc[i], zc[i + 1], mo));
    ca.pair_faulty.assign(ca.features.size(), 0);
    for (std::size_t i = 0; i + 1 < ca.features.size(); i += 2) {
        const bool faulty = cycle_is_faulty(ca.features[i], ca.features[i + 1]);
        ca.pair_faulty[i] = ca.pair_faulty[i + 1] = faulty;
    }
    return ca;
}

// ---------------------------------------------------------------------------
// identify — aggregate INDEX over the identification window and name the
// faulty feeder.
// ---------------------------------------------------------------------------

inline IdentificationReport identify_from_analyses(
    const std::vector<ChannelAnalysis>& channels, const ChannelAnalysis& u0b,
    NeutralType neutral, long trigger_cycle, const PipelineConfig& cfg) {
    IdentificationReport rep;
    const long total_cycles = u0b.iss.defined_end / u0b.iss.n_t;
    rep.window_start_cycle = std::max<long>(0, trigger_cycle - cfg.window_pre);
    rep.window_end_cycle = trigger_cycle + cfg.window_post;
    if (rep.window_end_cycle >= total_cycles) {
        rep.window_end_cycle = total_cycles - 1;
        rep.short_window = true;
    }

    const long wbegin = rep.window_start_cycle * u0b.iss.n_t;
    const long wend = (rep.window_end_cycle + 1) * u0b.iss.n_t;
    const auto variants = cdir_variants(neutral);

    // per-unit denominators are shared by all feeders of one variant
    std::map<CdirVariant, double> norm;
    for (const auto v : variants) norm[v] = detail::cdir_norm(u0b.iss, v, wbegin, wend);

    struct Acc {
        double sum = 0.0;
        long count = 0;
    };
    std::map<CdirVariant, std::vector<Acc>> acc;
    for (const auto v : variants) acc[v].resize(channels.size());

    auto in_window = [&](const ChannelAnalysis& ca, std::size_t h) {
        const long c = ca.cycle_ordinal(h);
        return c >= rep.window_start_cycle && c <= rep.window_end_cycle;
    };

    for (std::size_t f = 0; f < channels.size(); ++f) {
        const auto& ca = channels[f];
        for (std::size_t h = 0; h < ca.features.size(); ++h) {
            if (!in_window(ca, h)) continue;
            for (const auto v : variants) {
                Acc& a = acc[v][f];
                ++a.count;
                if (!ca.pair_faulty[h] || !ca.features[h].is_m_shape) continue;
                const long nmin = ca.features[h].n_min;
                double cd = 0.0;
                if (norm[v] > 0.0 && u0b.iss.defined(nmin - 1) && u0b.iss.defined(nmin + 1))
                    cd = detail::cdir_raw(u0b.iss, nmin, v) / norm[v];
                a.sum += compute_index(ca.iss, ca.features[h], cd);
            }
        }
    }

    for (std::size_t f = 0; f < channels.size(); ++f) {
        std::map<CdirVariant, double> means;
        for (const auto v : variants) {
            const Acc& a = acc[v][f];
            means[v] = a.count > 0 ? a.sum / a.count : 0.0;
        }
        rep.mean_index.emplace_back(channels[f].id, std::move(means));
    }

    // resonant neutral: both forms are evaluated; keep the one separating the
    // top feeder from the runner-up by the widest margin
    auto margin = [&](CdirVariant v) {
        double top = -1e300, second = -1e300;
        for (const auto& [id, m] : rep.mean_index) {
            const double x = m.at(v);
            if (x > top) {
                second = top;
                top = x;
            } else if (x > second) {
                second = x;
            }
        }
        return rep.mean_index.size() > 1 ? top - second : top;
    };
    rep.chosen_variant = variants.front();
    for (const auto v : variants)
        if (margin(v) > margin(rep.chosen_variant)) rep.chosen_variant = v;

    // argmax, required strictly positive and strictly largest
    const CdirVariant cv = rep.chosen_variant;
    std::string best;
    double best_val = 0.0;
    bool tie = false;
    for (const auto& [id, m] : rep.mean_index) {
        const double x = m.at(cv);
        if (best.empty() || x > best_val) {
            best = id;
            best_val = x;
            tie = false;
        } else if (x == best_val) {
            tie = true;
        }
    }
    if (!best.empty() && best_val > 0.0 && !tie) rep.chosen_feeder = best;

    // INDEX streams under the chosen variant
    for (std::size_t f = 0; f < channels.size(); ++f) {
        const auto& ca = channels[f];
        for (std::size_t h = 0; h < ca.features.size(); ++h) {
            if (!in_window(ca, h)) continue;
            IndexSample s;
            s.feeder_id = ca.id;
            s.half_cycle_index = static_cast<long>(h);
            s.c_dir_variant = cv;
            s.n0 = ca.features[h].n0;
            s.n1 = ca.features[h].n1;
            if (ca.pair_faulty[h] && ca.features[h].is_m_shape && norm[cv] > 0.0) {
                const long nmin = ca.features[h].n_min;
                if (u0b.iss.defined(nmin - 1) && u0b.iss.defined(nmin + 1))
                    s.index_value = compute_index(
                        ca.iss, ca.features[h], detail::cdir_raw(u0b.iss, nmin, cv) / norm[cv]);
            }
            rep.samples.push_back(std::move(s));
        }
    }
    return rep;
}

/// Run the slope pipeline on every channel and identify the faulty feeder for
/// a trigger at the given sample-time cycle ordinal.
inline IdentificationReport identify(const SynchronizedRecord& record, long trigger_cycle,
                                     const PipelineConfig& cfg) {
    if (trigger_cycle < 0) throw sequencing_error("identify: trigger not set");
    record.validate();
    std::vector<ChannelAnalysis> channels;
    channels.reserve(record.feeders.size());
    for (const auto& [id, s] : record.feeders) channels.push_back(analyze_channel(s, id, cfg));
    const ChannelAnalysis u0b = analyze_channel(record.u0b, "u0b", cfg);
    return identify_from_analyses(channels, u0b, record.neutral, trigger_cycle, cfg);
}

}  // namespace hifd
