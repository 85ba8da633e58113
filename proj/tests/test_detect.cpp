#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hifd/corpus.hpp"
#include "hifd/detect.hpp"
#include "hifd/identify.hpp"
#include "hifd/netsim.hpp"
#include "hifd/noise.hpp"

using namespace hifd;

namespace {

constexpr double kUF = 1e-6;

SampleSeries sine_series(double amp, double phase, int cycles) {
    SampleSeries s;
    s.fs = 6400.0;
    s.f0 = 50.0;
    const long n = static_cast<long>(cycles) * 128;
    s.values.resize(n);
    for (long i = 0; i < n; ++i)
        s.values[i] = amp * std::sin(2.0 * kPi * 50.0 * i / 6400.0 + phase);
    return s;
}

SynchronizedRecord resonant_record(double i_fm = 12.0, double band_r = 0.26,
                                   double tau = -0.4, double phi = 0.7, double delta = 0.0,
                                   int cycles = 12) {
    const auto p = NetworkParams::resonant(
        {1.2 * kUF, 0.35 * kUF, 1.4 * kUF, 0.9 * kUF}, 1, -0.09);
    DistortionSpec spec;
    spec.i_fm = i_fm;
    spec.i_fm_dist = distortion_peak_for_band(p, i_fm, band_r);
    spec.tau = tau;
    spec.phi = phi;
    spec.offset_delta = delta;
    return solve_resonant(p, spec, 6400.0, cycles);
}

std::vector<HalfCycleFeature> features_of(const SampleSeries& s,
                                          const PipelineConfig& cfg = {}) {
    const auto ca = analyze_channel(s, "x", cfg);
    return ca.features;
}

}  // namespace

TEST_CASE("a pure sinusoid never shows an M shape") {
    const auto feats = features_of(sine_series(5.0, 0.4, 10));
    REQUIRE(feats.size() >= 15);
    for (const auto& f : feats) REQUIRE_FALSE(f.is_m_shape);
}

TEST_CASE("noise-free faulty feeder shows an M shape on every interior half-cycle") {
    const auto rec = resonant_record();
    const auto feats = features_of(*rec.find("F2"));
    REQUIRE(feats.size() >= 18);
    for (const auto& f : feats) {
        REQUIRE(f.is_m_shape);
        // extrema ordering inside the guarded window
        REQUIRE(f.n0 + f.d <= f.n_max1);
        REQUIRE(f.n_max1 < f.n_min);
        REQUIRE(f.n_min < f.n_max2);
        REQUIRE(f.n_max2 <= f.n1 - f.d);
    }
}

TEST_CASE("healthy records under noise stay M-free nearly always") {
    // Monte-Carlo corpus: 100 seeded healthy records at 40 dB
    long total = 0, m_shapes = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> amp(1.0, 20.0), ph(0.0, 2.0 * kPi);
        auto s = sine_series(amp(rng), ph(rng), 8);
        std::normal_distribution<double> g(0.0, amp(rng) * 0.01);  // ~40 dB
        for (auto& x : s.values) x += g(rng);
        for (const auto& f : features_of(s)) {
            ++total;
            if (f.is_m_shape) ++m_shapes;
        }
    }
    REQUIRE(total > 1000);
    REQUIRE(static_cast<double>(m_shapes) / total < 0.01);
}

TEST_CASE("degenerate half-cycle windows return no M shape without throwing") {
    const auto rec = resonant_record();
    const auto ca = analyze_channel(*rec.find("F2"), "F2", {});
    const auto f = m_shape_half_cycle(ca.iss, 100, 112, {});  // 12-sample window
    REQUIRE_FALSE(f.is_m_shape);
}

TEST_CASE("m-shape verdict is invariant to uniform channel scaling") {
    const auto rec = resonant_record();
    const auto base = features_of(*rec.find("F2"));
    for (double a : {0.01, 0.5, 3.0, 250.0}) {
        SampleSeries scaled = *rec.find("F2");
        for (auto& x : scaled.values) x *= a;
        const auto feats = features_of(scaled);
        REQUIRE(feats.size() == base.size());
        for (std::size_t i = 0; i < feats.size(); ++i)
            REQUIRE(feats[i].is_m_shape == base[i].is_m_shape);
    }
}

TEST_CASE("cycle_is_faulty requires both half-cycles") {
    HalfCycleFeature t, f;
    t.is_m_shape = true;
    f.is_m_shape = false;
    REQUIRE(cycle_is_faulty(t, t));
    REQUIRE_FALSE(cycle_is_faulty(t, f));
    REQUIRE_FALSE(cycle_is_faulty(f, t));
    REQUIRE_FALSE(cycle_is_faulty(f, f));
}

TEST_CASE("update_detection triggers after four consecutive faulty cycles") {
    DetectionState st;
    for (long c = 1; c <= 4; ++c) st = update_detection(st, true, c);
    REQUIRE(st.triggered_at.has_value());
    REQUIRE(*st.triggered_at == 4);
}

TEST_CASE("a clean cycle resets the consecutive counter") {
    DetectionState st;
    const bool stream[] = {true, true, false, true, true, true, true};
    long cycle = 0;
    for (bool b : stream) st = update_detection(st, b, ++cycle);
    REQUIRE(st.triggered_at.has_value());
    REQUIRE(*st.triggered_at == 7);
}

TEST_CASE("no faulty cycles, no trigger") {
    DetectionState st;
    for (long c = 1; c <= 40; ++c) st = update_detection(st, false, c);
    REQUIRE_FALSE(st.triggered_at.has_value());
}

TEST_CASE("out-of-order cycles are rejected") {
    DetectionState st;
    st = update_detection(st, true, 3);
    REQUIRE_THROWS_AS(update_detection(st, true, 3), sequencing_error);
    REQUIRE_THROWS_AS(update_detection(st, true, 2), sequencing_error);
}

TEST_CASE("trigger stays at its first cycle once armed") {
    DetectionState st;
    st.trigger_threshold = 2;
    st = update_detection(st, true, 1);
    st = update_detection(st, true, 2);
    st = update_detection(st, true, 3);
    REQUIRE(*st.triggered_at == 2);
}

TEST_CASE("detection never fires on benign signals") {
    // property suite: sinusoid, sinusoid + 30 dB noise, sinusoid + one
    // impulse per cycle (Grubbs-RLRS path) -- 100 seeds each
    for (int kind = 0; kind < 3; ++kind) {
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            std::mt19937_64 rng(seed * 3 + kind);
            std::uniform_real_distribution<double> amp(1.0, 20.0), ph(0.0, 2.0 * kPi);
            const double a = amp(rng);
            auto s = sine_series(a, ph(rng), 8);
            if (kind >= 1) {
                std::normal_distribution<double> g(0.0, a / std::sqrt(2.0) / 31.6);  // 30 dB
                for (auto& x : s.values) x += g(rng);
            }
            if (kind == 2) {
                std::uniform_int_distribution<int> pos(0, 127);
                for (int c = 0; c < 8; ++c)
                    s.values[c * 128 + pos(rng)] += 10.0 * a * (c % 2 ? 1.0 : -1.0);
            }
            const auto ca = analyze_channel(s, "x", {});
            DetectionState st;
            long cycle = 0;
            for (std::size_t h = 0; h + 1 < ca.features.size(); h += 2)
                st = update_detection(
                    st, cycle_is_faulty(ca.features[h], ca.features[h + 1]), ++cycle);
            REQUIRE_FALSE(st.triggered_at.has_value());
        }
    }
}

TEST_CASE("detection always fires quickly on stable fault records") {
    // 8 distortion archetypes: decay/extent/offset variants, 30+ dB noise
    struct Arc {
        double r, tau, delta;
    };
    const Arc arcs[8] = {{0.26, -0.30, 0.00}, {0.24, -0.50, 0.10}, {0.25, -0.70, 0.22},
                         {0.235, -0.35, -0.08}, {0.23, -0.35, 0.05}, {0.25, -0.60, -0.20},
                         {0.26, -0.90, 0.15}, {0.23, -0.45, -0.15}};
    std::uint64_t seed = 11;
    for (const auto& arc : arcs) {
        auto rec = resonant_record(10.0, arc.r, arc.tau, 0.7, arc.delta, 12);
        rec = add_noise(rec, 30.0, 0.0, 10.0, ++seed);
        const auto ca = analyze_channel(*rec.find("F2"), "F2", {});
        DetectionState st;
        long cycle = 0;
        for (std::size_t h = 0; h + 1 < ca.features.size(); h += 2)
            st = update_detection(
                st, cycle_is_faulty(ca.features[h], ca.features[h + 1]), ++cycle);
        REQUIRE(st.triggered_at.has_value());
        REQUIRE(*st.triggered_at <= st.trigger_threshold + 2);
    }
}

TEST_CASE("faulty half-cycles carry exactly two maxima by exhaustive scan") {
    // independent of the M-shape detector: enumerate the strict local extrema
    // of |IS| inside every guarded half-cycle window of the faulty channel
    const auto rec = resonant_record();
    const auto ca = analyze_channel(*rec.find("F2"), "F2", {});
    const auto& zc = ca.iss.zero_crossings;
    const int d = 128 / 16;
    REQUIRE(zc.size() >= 8);
    for (std::size_t k = 0; k + 1 < zc.size(); ++k) {
        const long a = zc[k] + d, b = zc[k + 1] - d;
        std::vector<long> maxima, minima;
        for (long n = a + 1; n < b; ++n) {
            const double x0 = std::abs(ca.iss.slopes[n - 1]);
            const double x1 = std::abs(ca.iss.slopes[n]);
            const double x2 = std::abs(ca.iss.slopes[n + 1]);
            if (x1 > x0 && x1 > x2) maxima.push_back(n);
            if (x1 < x0 && x1 < x2) minima.push_back(n);
        }
        REQUIRE(maxima.size() == 2);
        REQUIRE(minima.size() == 1);
        REQUIRE(maxima[0] < minima[0]);
        REQUIRE(minima[0] < maxima[1]);
    }
}
