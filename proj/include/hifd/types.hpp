#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hifd {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or argument value.
struct parameter_error : error {
    using error::error;
};

/// Channels that are supposed to be synchronous do not line up.
struct alignment_error : error {
    using error::error;
};

/// Index or window outside the defined region of a series.
struct range_error : error {
    using error::error;
};

/// Events presented out of order (cycle streams, missing trigger).
struct sequencing_error : error {
    using error::error;
};

/// Malformed input file; carries the 1-based row where parsing failed.
struct ingestion_error : error {
    ingestion_error(const std::string& msg, long row_number)
        : error(msg + " (row " + std::to_string(row_number) + ")"), row(row_number) {}
    explicit ingestion_error(const std::string& msg) : error(msg), row(-1) {}
    long row;
};

/// Numerical breakdown detected inside a solver or integrator.
struct diagnostic_error : error {
    using error::error;
};

// ---------------------------------------------------------------------------
// Neutral grounding type of the network under analysis.
// ---------------------------------------------------------------------------

enum class NeutralType { Isolated, Resonant, LowResistor };

inline const char* to_string(NeutralType n) {
    switch (n) {
        case NeutralType::Isolated:    return "isolated";
        case NeutralType::Resonant:    return "resonant";
        case NeutralType::LowResistor: return "low-resistor";
    }
    return "?";
}

inline NeutralType neutral_from_string(const std::string& s) {
    if (s == "isolated")     return NeutralType::Isolated;
    if (s == "resonant")     return NeutralType::Resonant;
    if (s == "low-resistor" || s == "low_resistor") return NeutralType::LowResistor;
    throw parameter_error("unknown neutral type: " + s);
}

// ---------------------------------------------------------------------------
// SampleSeries — one uniformly sampled waveform channel.
// ---------------------------------------------------------------------------

struct SampleSeries {
    std::vector<double> values;   ///< samples (A or V)
    double fs = 6400.0;           ///< sampling rate, Hz
    double f0 = 50.0;             ///< power frequency, Hz
    double t0 = 0.0;              ///< time of first sample, s

    SampleSeries() = default;
    SampleSeries(std::vector<double> v, double fs_, double f0_ = 50.0, double t0_ = 0.0)
        : values(std::move(v)), fs(fs_), f0(f0_), t0(t0_) {}

    /// Samples per power-frequency cycle. fs/f0 must be an exact integer.
    int samples_per_cycle() const {
        if (!(fs > 0.0) || !(f0 > 0.0))
            throw parameter_error("sampling and power frequency must be positive");
        const double ratio = fs / f0;
        const double rounded = std::round(ratio);
        if (std::abs(ratio - rounded) > 1e-9 * ratio || rounded < 4.0)
            throw parameter_error("fs/f0 must be an exact integer number of samples per cycle");
        return static_cast<int>(rounded);
    }

    std::size_t size() const { return values.size(); }
    int full_cycles() const { return static_cast<int>(values.size()) / samples_per_cycle(); }

    /// Analysis operations need at least two full cycles of data.
    void require_cycles(int n) const {
        if (static_cast<int>(values.size()) < n * samples_per_cycle())
            throw parameter_error("series shorter than " + std::to_string(n) + " cycles");
    }

    bool same_grid(const SampleSeries& o) const {
        return values.size() == o.values.size() && fs == o.fs && f0 == o.f0 && t0 == o.t0;
    }
};

// ---------------------------------------------------------------------------
// SynchronizedRecord — time-aligned bus voltage plus per-feeder currents.
// The transformer-feeder channel travels in `feeders` like any other channel.
// ---------------------------------------------------------------------------

struct SynchronizedRecord {
    SampleSeries u0b;                                          ///< bus zero-sequence voltage
    std::vector<std::pair<std::string, SampleSeries>> feeders; ///< ordered (id, i0i)
    NeutralType neutral = NeutralType::Resonant;

    void validate() const {
        u0b.samples_per_cycle();
        for (std::size_t i = 0; i < feeders.size(); ++i) {
            if (!u0b.same_grid(feeders[i].second))
                throw alignment_error("channel '" + feeders[i].first +
                                      "' is not synchronous with u0b");
            for (std::size_t j = i + 1; j < feeders.size(); ++j)
                if (feeders[i].first == feeders[j].first)
                    throw alignment_error("duplicate feeder id '" + feeders[i].first + "'");
        }
    }

    const SampleSeries* find(const std::string& id) const {
        for (const auto& [fid, s] : feeders)
            if (fid == id) return &s;
        return nullptr;
    }

    int samples_per_cycle() const { return u0b.samples_per_cycle(); }
    std::size_t length() const { return u0b.values.size(); }
};

/// FNV-1a digest over the raw bytes of all channels; identifies an input record.
inline std::uint64_t record_digest(const SynchronizedRecord& rec) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    auto mix_series = [&](const SampleSeries& s) {
        mix(s.values.data(), s.values.size() * sizeof(double));
        mix(&s.fs, sizeof s.fs);
        mix(&s.f0, sizeof s.f0);
        mix(&s.t0, sizeof s.t0);
    };
    mix_series(rec.u0b);
    for (const auto& [id, s] : rec.feeders) {
        mix(id.data(), id.size());
        mix_series(s);
    }
    return h;
}

}  // namespace hifd
