#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hifd/netsim.hpp"
#include "hifd/noise.hpp"
#include "hifd/types.hpp"

namespace hifd {

// ---------------------------------------------------------------------------
// Scenario corpus: labeled synthetic records spanning the three neutrals,
// the distortion archetypes (extent, decay, offset) and noise levels.
// ---------------------------------------------------------------------------

struct ScenarioSpec {
    std::string id;
    NeutralType neutral = NeutralType::Resonant;
    std::vector<double> c0;          ///< supply feeder capacitances, F
    double c0l = 0.0;                ///< transformer-feeder capacitance, F
    double v = -0.08;                ///< detuning (resonant)
    double r_n = 10.0;               ///< neutral resistor (low-resistor)
    int faulty_feeder = 0;
    double i_fm = 10.0;              ///< fault-current peak, A
    double band_r = 0.25;            ///< distortion-to-sinusoid ratio on the faulty channel
    double tau = -0.5;
    double offset_delta = 0.0;
    double phi = 0.0;
    double snr_db = kNoiselessSnr;
    double impulse_rate = 0.0;       ///< impulses per cycle
    double impulse_gain = 10.0;      ///< impulse amplitude, times channel peak
    int cycles = 40;
    std::uint64_t seed = 1;

    double fault_rms() const { return i_fm / std::sqrt(2.0); }
    bool has_impulses() const { return impulse_rate > 0.0; }
};

struct LabeledRecord {
    ScenarioSpec scenario;
    SynchronizedRecord record;
    std::string faulty_feeder_id;
};

struct Manifest {
    std::vector<ScenarioSpec> scenarios;
};

inline NetworkParams scenario_params(const ScenarioSpec& sc) {
    switch (sc.neutral) {
        case NeutralType::Resonant:
            return NetworkParams::resonant(sc.c0, sc.faulty_feeder, sc.v, sc.c0l);
        case NeutralType::Isolated:
            return NetworkParams::isolated(sc.c0, sc.faulty_feeder, sc.c0l);
        case NeutralType::LowResistor:
            return NetworkParams::low_resistor(sc.c0, sc.faulty_feeder, sc.r_n, sc.c0l);
    }
    throw parameter_error("scenario: unknown neutral");
}

/// Distortion peak that puts the faulty channel's distortion-to-sinusoid
/// ratio at band_r. The two local maxima of the M shape must land inside the
/// guarded half-cycle window, which confines that ratio to roughly
/// [0.20, 0.32]; the band parameter makes the corpus deterministic there.
inline double distortion_peak_for_band(const NetworkParams& p, double i_fm, double band_r) {
    double i_d = 0.0;
    switch (p.neutral) {
        case NeutralType::Resonant: {
            const auto a = resonant_amplitudes(p, i_fm);
            const double g = (1.0 - 4.0 * a.q * (1.0 - p.c0_faulty() / p.c0_sum())) /
                             (1.0 - 4.0 * a.q);
            if (!(g > 0.0))
                throw parameter_error("scenario: faulty-feeder share violates the sign condition");
            const double chan = i_fm + a.i_mc[static_cast<std::size_t>(p.faulty_feeder)];
            i_d = band_r * chan / g;
            break;
        }
        case NeutralType::Isolated:
            i_d = band_r * i_fm;
            break;
        case NeutralType::LowResistor: {
            const auto d = low_resistor_derived(p, i_fm);
            const double rest = p.omega * (p.c0_sum() - p.c0_faulty()) * d.u_m;
            i_d = band_r * std::hypot(d.i_ml, rest);
            break;
        }
    }
    return std::min(i_d, 0.98 * i_fm);
}

inline LabeledRecord build_scenario(const ScenarioSpec& sc, double fs = 6400.0) {
    const NetworkParams p = scenario_params(sc);
    DistortionSpec spec;
    spec.i_fm = sc.i_fm;
    spec.i_fm_dist = distortion_peak_for_band(p, sc.i_fm, sc.band_r);
    spec.tau = sc.tau;
    spec.phi = sc.phi;
    spec.offset_delta = sc.offset_delta;
    LabeledRecord out;
    out.scenario = sc;
    out.record = solve_network(p, spec, fs, sc.cycles);
    if (std::isfinite(sc.snr_db) || sc.has_impulses())
        out.record = add_noise(out.record, sc.snr_db, sc.impulse_rate, sc.impulse_gain, sc.seed);
    out.faulty_feeder_id = "F" + std::to_string(sc.faulty_feeder + 1);
    return out;
}

inline std::vector<LabeledRecord> build_corpus(const Manifest& manifest, double fs = 6400.0) {
    if (manifest.scenarios.empty()) throw parameter_error("manifest lists no scenarios");
    std::vector<LabeledRecord> out;
    out.reserve(manifest.scenarios.size());
    for (const auto& sc : manifest.scenarios) {
        if (sc.id.empty()) throw parameter_error("manifest: scenario without id");
        if (sc.cycles < 2) throw parameter_error("manifest: scenario '" + sc.id + "' too short");
        out.push_back(build_scenario(sc, fs));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Default corpus: 28 scenarios, 22 impulse-free and 6 with arcing impulses;
// three fault currents at or below 1 A RMS (all impulse-interfered) and three
// more below 6 A RMS. Resonant scenarios keep C0n/C0S well below 0.738.
// ---------------------------------------------------------------------------

inline Manifest default_manifest() {
    const double uF = 1e-6;
    Manifest m;
    auto res = [&](std::string id, std::vector<double> caps, int fault, double v, double i_fm,
                   double r, double tau, double delta, double phi, double snr, double imp,
                   std::uint64_t seed) {
        ScenarioSpec s;
        s.id = std::move(id);
        s.neutral = NeutralType::Resonant;
        s.c0 = std::move(caps);
        s.faulty_feeder = fault;
        s.v = v;
        s.i_fm = i_fm;
        s.band_r = r;
        s.tau = tau;
        s.offset_delta = delta;
        s.phi = phi;
        s.snr_db = snr;
        s.impulse_rate = imp;
        s.seed = seed;
        m.scenarios.push_back(std::move(s));
    };
    auto iso = [&](std::string id, std::vector<double> caps, int fault, double i_fm, double r,
                   double tau, double delta, double phi, double snr, double imp,
                   std::uint64_t seed) {
        ScenarioSpec s;
        s.id = std::move(id);
        s.neutral = NeutralType::Isolated;
        s.c0 = std::move(caps);
        s.c0l = 0.05 * uF;
        s.faulty_feeder = fault;
        s.i_fm = i_fm;
        s.band_r = r;
        s.tau = tau;
        s.offset_delta = delta;
        s.phi = phi;
        s.snr_db = snr;
        s.impulse_rate = imp;
        s.seed = seed;
        m.scenarios.push_back(std::move(s));
    };
    auto lrs = [&](std::string id, std::vector<double> caps, int fault, double rn, double i_fm,
                   double r, double tau, double delta, double phi, double snr, double imp,
                   std::uint64_t seed) {
        ScenarioSpec s;
        s.id = std::move(id);
        s.neutral = NeutralType::LowResistor;
        s.c0 = std::move(caps);
        s.faulty_feeder = fault;
        s.r_n = rn;
        s.i_fm = i_fm;
        s.band_r = r;
        s.tau = tau;
        s.offset_delta = delta;
        s.phi = phi;
        s.snr_db = snr;
        s.impulse_rate = imp;
        s.seed = seed;
        m.scenarios.push_back(std::move(s));
    };
    const double inf = kNoiselessSnr;

    // resonant (12): detuning -0.10..-0.06, faulty share 8..16 %
    res("R01", {1.2 * uF, 0.35 * uF, 1.4 * uF, 0.9 * uF}, 1, -0.090, 12.0, 0.26, -0.30, 0.00, 0.70, inf, 0, 101);
    res("R02", {1.2 * uF, 0.35 * uF, 1.4 * uF, 0.9 * uF}, 1, -0.080, 10.0, 0.24, -0.50, 0.10, 1.90, 40.0, 0, 102);
    res("R03", {0.9 * uF, 1.1 * uF, 0.30 * uF, 1.3 * uF}, 2, -0.100, 16.0, 0.25, -0.70, 0.22, 2.80, 35.0, 0, 103);
    res("R04", {0.9 * uF, 1.1 * uF, 0.30 * uF, 1.3 * uF}, 2, -0.075, 8.0, 0.235, -0.35, -0.08, 0.35, 32.0, 0, 104);
    res("R05", {0.45 * uF, 1.0 * uF, 1.2 * uF, 0.85 * uF}, 0, -0.095, 20.0, 0.24, -0.35, 0.05, 1.10, 30.0, 0, 105);
    res("R06", {0.45 * uF, 1.0 * uF, 1.2 * uF, 0.85 * uF}, 0, -0.085, 14.0, 0.25, -0.60, -0.20, 4.20, 38.0, 0, 106);
    res("R07", {1.0 * uF, 0.9 * uF, 1.1 * uF, 0.40 * uF}, 3, -0.070, 9.0, 0.26, -0.45, 0.15, 5.10, 33.0, 0, 107);
    res("R08", {1.0 * uF, 0.9 * uF, 1.1 * uF, 0.40 * uF}, 3, -0.100, 25.0, 0.24, -0.85, 0.00, 0.00, 36.0, 0, 108);
    res("R09", {1.3 * uF, 0.50 * uF, 1.2 * uF, 1.0 * uF}, 1, -0.090, 7.0, 0.25, -0.35, 0.12, 2.30, 34.0, 0, 109);
    res("R10", {1.3 * uF, 0.50 * uF, 1.2 * uF, 1.0 * uF}, 1, -0.065, 11.0, 0.24, -0.55, -0.12, 3.60, 31.0, 0, 110);
    res("R11", {1.1 * uF, 0.38 * uF, 1.3 * uF, 1.2 * uF}, 1, -0.095, 1.2, 0.26, -0.40, 0.08, 1.50, 31.0, 1.0, 111);
    res("R12", {1.0 * uF, 1.2 * uF, 0.42 * uF, 0.9 * uF}, 2, -0.085, 13.0, 0.25, -0.65, 0.18, 0.90, 33.0, 1.5, 112);

    // isolated (8)
    iso("I01", {0.8 * uF, 1.2 * uF, 0.6 * uF, 1.0 * uF}, 2, 10.0, 0.25, -0.50, 0.00, 1.10, inf, 0, 201);
    iso("I02", {0.8 * uF, 1.2 * uF, 0.6 * uF, 1.0 * uF}, 0, 8.0, 0.24, -0.30, 0.10, 2.40, 40.0, 0, 202);
    iso("I03", {1.1 * uF, 0.7 * uF, 0.9 * uF, 1.3 * uF}, 3, 15.0, 0.26, -0.70, -0.15, 3.30, 35.0, 0, 203);
    iso("I04", {1.1 * uF, 0.7 * uF, 0.9 * uF, 1.3 * uF}, 1, 6.5, 0.235, -0.35, 0.20, 0.60, 32.0, 0, 204);
    iso("I05", {0.6 * uF, 0.8 * uF, 1.0 * uF, 0.7 * uF}, 2, 12.0, 0.24, -0.90, 0.05, 4.80, 30.0, 1.0, 205);
    iso("I06", {0.6 * uF, 0.8 * uF, 1.0 * uF, 0.7 * uF}, 1, 7.0, 0.25, -0.40, -0.22, 5.70, 37.0, 0, 206);
    iso("I07", {0.9 * uF, 1.0 * uF, 0.8 * uF, 1.1 * uF}, 0, 18.0, 0.26, -0.55, 0.14, 1.80, 34.0, 0, 207);
    iso("I08", {0.9 * uF, 1.0 * uF, 0.8 * uF, 1.1 * uF}, 3, 1.2, 0.25, -0.50, 0.00, 2.90, 30.0, 1.0, 208);

    // low-resistor (8): 10 ohm neutral, theta close to pi/2
    lrs("L01", {0.30 * uF, 0.25 * uF, 0.20 * uF, 0.25 * uF}, 0, 10.0, 10.0, 0.25, -0.50, 0.00, 0.30, inf, 0, 301);
    lrs("L02", {0.30 * uF, 0.25 * uF, 0.20 * uF, 0.25 * uF}, 2, 10.0, 14.0, 0.24, -0.35, 0.12, 1.40, 40.0, 0, 302);
    lrs("L03", {0.22 * uF, 0.28 * uF, 0.25 * uF, 0.25 * uF}, 1, 12.0, 20.0, 0.26, -0.70, -0.10, 2.60, 35.0, 0, 303);
    lrs("L04", {0.22 * uF, 0.28 * uF, 0.25 * uF, 0.25 * uF}, 3, 8.0, 9.0, 0.22, -0.20, 0.18, 3.90, 32.0, 0, 304);
    lrs("L05", {0.35 * uF, 0.30 * uF, 0.28 * uF, 0.32 * uF}, 2, 10.0, 30.0, 0.24, -0.80, 0.06, 5.40, 30.0, 0, 305);
    lrs("L06", {0.35 * uF, 0.30 * uF, 0.28 * uF, 0.32 * uF}, 0, 12.0, 7.0, 0.25, -0.45, -0.18, 0.80, 36.0, 0, 306);
    lrs("L07", {0.26 * uF, 0.24 * uF, 0.30 * uF, 0.22 * uF}, 3, 10.0, 1.2, 0.26, -0.60, 0.00, 2.10, 30.0, 1.0, 307);
    lrs("L08", {0.26 * uF, 0.24 * uF, 0.30 * uF, 0.22 * uF}, 1, 10.0, 16.0, 0.24, -0.55, 0.15, 4.50, 33.0, 2.0, 308);

    return m;
}

}  // namespace hifd
