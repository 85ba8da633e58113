#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "hifd/corpus.hpp"
#include "hifd/identify.hpp"
#include "hifd/netsim.hpp"
#include "hifd/noise.hpp"
#include "hifd/pipeline.hpp"

using namespace hifd;

namespace {

constexpr double kUF = 1e-6;

DistortionSpec spec_for(const NetworkParams& p, double i_fm, double band_r, double tau,
                        double phi, double delta) {
    DistortionSpec s;
    s.i_fm = i_fm;
    s.i_fm_dist = distortion_peak_for_band(p, i_fm, band_r);
    s.tau = tau;
    s.phi = phi;
    s.offset_delta = delta;
    return s;
}

IntervalSlopeSeries toy_iss(std::vector<double> slopes) {
    IntervalSlopeSeries iss;
    iss.l = 16;
    iss.n_t = 128;
    iss.slopes = std::move(slopes);
    iss.defined_begin = 0;
    iss.defined_end = static_cast<long>(iss.slopes.size());
    return iss;
}

}  // namespace

TEST_CASE("c_dir normalization maps the extreme slope to +1 (low-resistor form)") {
    // IS(n_min) = -max|IS| over the window  =>  c_dir = +1
    std::vector<double> s(256);
    for (int n = 0; n < 256; ++n) s[n] = std::sin(2.0 * kPi * n / 128.0);
    auto iss = toy_iss(std::move(s));
    long nmin = 96;  // sin = -1, the negative extreme
    const double cd = c_dir(iss, nmin, CdirVariant::NegSlope);
    REQUIRE(cd == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("isolated form is negative where the bus slope increases") {
    std::vector<double> s(256);
    for (int n = 0; n < 256; ++n) s[n] = std::sin(2.0 * kPi * n / 128.0);
    auto iss = toy_iss(std::move(s));
    // at n = 0 the slope series is increasing
    const double cd = c_dir(iss, 2, NeutralType::Isolated);
    REQUIRE(cd < 0.0);
    // and the resonant primary form is its negation
    REQUIRE(c_dir(iss, 2, NeutralType::Resonant) == Catch::Approx(-cd).epsilon(1e-12));
}

TEST_CASE("c_dir rejects positions without a defined derivative") {
    auto iss = toy_iss(std::vector<double>(64, 1.0));
    iss.defined_begin = 10;
    iss.defined_end = 50;
    REQUIRE_THROWS_AS(c_dir(iss, 10, CdirVariant::SlopeDerivative), range_error);
    REQUIRE_THROWS_AS(c_dir(iss, 55, CdirVariant::NegSlope), range_error);
}

TEST_CASE("compute_index applies the formula on signed slope values") {
    // synthetic feature with mean-of-maxima 2 and minimum 0.5
    std::vector<double> s(300, 0.0);
    s[100] = 2.0;
    s[110] = 0.5;
    s[120] = 2.0;
    auto iss = toy_iss(std::move(s));
    HalfCycleFeature f;
    f.is_m_shape = true;
    f.n_max1 = 100;
    f.n_min = 110;
    f.n_max2 = 120;
    REQUIRE(compute_index(iss, f, 1.0) == Catch::Approx(0.75));
    REQUIRE(compute_index(iss, f, -0.5) == Catch::Approx(-0.375));
    f.is_m_shape = false;
    REQUIRE(compute_index(iss, f, 1.0) == 0.0);
}

TEST_CASE("compute_index degenerates to zero for a vanishing maxima mean") {
    std::vector<double> s(300, 0.0);
    s[50] = 5.0;  // channel peak slope, sets the degeneracy scale
    s[100] = 1e-15;
    s[110] = -1e-15;
    s[120] = -1e-15;
    auto iss = toy_iss(std::move(s));
    HalfCycleFeature f;
    f.is_m_shape = true;
    f.n_max1 = 100;
    f.n_min = 110;
    f.n_max2 = 120;
    REQUIRE(compute_index(iss, f, 1.0) == 0.0);
}

TEST_CASE("resonant record identifies the labeled feeder with positive margin") {
    const auto p = NetworkParams::resonant(
        {1.2 * kUF, 0.35 * kUF, 1.4 * kUF, 0.9 * kUF}, 1, -0.09);
    auto rec = solve_resonant(p, spec_for(p, 12.0, 0.26, -0.4, 0.7, 0.1), 6400.0, 30);
    rec = add_noise(rec, 35.0, 0.0, 10.0, 5);

    const PipelineConfig cfg;
    const auto rep = identify(rec, 5, cfg);
    REQUIRE(rep.chosen_feeder.has_value());
    REQUIRE(*rep.chosen_feeder == "F2");
    const double top = rep.mean_for("F2", rep.chosen_variant);
    REQUIRE(top > 0.0);
    for (const auto& [id, means] : rep.mean_index)
        if (id != "F2") REQUIRE(means.at(rep.chosen_variant) <= 0.0);
    // both resonant forms were evaluated
    REQUIRE(rep.mean_index.front().second.size() == 2);
}

TEST_CASE("isolated record separates the faulty feeder by sign") {
    const auto p = NetworkParams::isolated(
        {0.8 * kUF, 1.2 * kUF, 0.6 * kUF, 1.0 * kUF}, 2, 0.05 * kUF);
    auto rec = solve_isolated(p, spec_for(p, 6.0, 0.25, -0.5, 1.1, -0.1), 6400.0, 30);
    rec = add_noise(rec, 32.0, 0.0, 10.0, 6);

    const auto rep = identify(rec, 5, PipelineConfig{});
    REQUIRE(rep.chosen_feeder.has_value());
    REQUIRE(*rep.chosen_feeder == "F3");
    REQUIRE(rep.mean_for("F3", rep.chosen_variant) > 0.0);
    // every healthy channel and the transformer feeder go strictly negative
    for (const auto& [id, means] : rep.mean_index)
        if (id != "F3") REQUIRE(means.at(rep.chosen_variant) < 0.0);
}

TEST_CASE("low-resistor 1 A fault with impulses is still identified") {
    const auto p = NetworkParams::low_resistor(
        {0.26 * kUF, 0.24 * kUF, 0.30 * kUF, 0.22 * kUF}, 3, 10.0);
    auto rec = solve_low_resistor(p, spec_for(p, 1.414, 0.26, -0.6, 0.9, 0.0), 6400.0, 30);
    rec = add_noise(rec, 25.0, 1.0, 10.0, 7);

    const auto rep = identify(rec, 5, PipelineConfig{});
    REQUIRE(rep.chosen_feeder.has_value());
    REQUIRE(*rep.chosen_feeder == "F4");
    REQUIRE(rep.mean_for("F4", rep.chosen_variant) > 0.0);
    for (const auto& [id, means] : rep.mean_index)
        if (id != "F4") REQUIRE(means.at(rep.chosen_variant) <= 0.0);
}

TEST_CASE("healthy record with a forced trigger identifies nothing") {
    SynchronizedRecord rec;
    rec.neutral = NeutralType::Resonant;
    const long n = 30 * 128;
    auto mk = [&](double amp, double phase) {
        SampleSeries s;
        s.fs = 6400.0;
        s.f0 = 50.0;
        s.values.resize(n);
        for (long i = 0; i < n; ++i)
            s.values[i] = amp * std::sin(2.0 * kPi * 50.0 * i / 6400.0 + phase);
        return s;
    };
    rec.u0b = mk(100.0, -0.9);
    rec.feeders = {{"i0L", mk(20.0, 2.2)}, {"F1", mk(5.0, 0.1)}, {"F2", mk(7.0, 0.1)}};

    const auto rep = identify(rec, 6, PipelineConfig{});
    REQUIRE_FALSE(rep.chosen_feeder.has_value());
}

TEST_CASE("identify without a trigger is a sequencing error") {
    SynchronizedRecord rec;
    rec.u0b.values.assign(512, 0.0);
    REQUIRE_THROWS_AS(identify(rec, -1, PipelineConfig{}), sequencing_error);
}

TEST_CASE("short records flag the short window and still aggregate") {
    const auto p = NetworkParams::resonant(
        {1.2 * kUF, 0.35 * kUF, 1.4 * kUF, 0.9 * kUF}, 1, -0.09);
    const auto rec = solve_resonant(p, spec_for(p, 12.0, 0.26, -0.4, 0.7, 0.0), 6400.0, 12);
    const auto rep = identify(rec, 5, PipelineConfig{});
    REQUIRE(rep.short_window);
    REQUIRE(rep.chosen_feeder.has_value());
    REQUIRE(*rep.chosen_feeder == "F2");
}

TEST_CASE("argmax is invariant to a common current scaling") {
    const auto p = NetworkParams::resonant(
        {1.2 * kUF, 0.35 * kUF, 1.4 * kUF, 0.9 * kUF}, 1, -0.09);
    auto rec = solve_resonant(p, spec_for(p, 12.0, 0.26, -0.4, 0.7, 0.1), 6400.0, 30);
    const auto base = identify(rec, 5, PipelineConfig{});

    for (double a : {0.02, 12.0}) {
        auto scaled = rec;
        for (auto& [id, s] : scaled.feeders)
            for (auto& x : s.values) x *= a;
        const auto rep = identify(scaled, 5, PipelineConfig{});
        REQUIRE(rep.chosen_feeder == base.chosen_feeder);
    }
}

TEST_CASE("mean uses every half-cycle in the window, zeros included") {
    const auto p = NetworkParams::resonant(
        {1.2 * kUF, 0.35 * kUF, 1.4 * kUF, 0.9 * kUF}, 1, -0.09);
    const auto rec = solve_resonant(p, spec_for(p, 12.0, 0.26, -0.4, 0.7, 0.0), 6400.0, 30);
    const auto rep = identify(rec, 5, PipelineConfig{});

    // recompute the faulty-feeder mean from the emitted samples: the divisor
    // counts all half-cycles in the window, including the zero entries
    double sum = 0.0;
    long count = 0;
    for (const auto& s : rep.samples)
        if (s.feeder_id == "F2") {
            sum += s.index_value;
            ++count;
        }
    REQUIRE(count > 0);
    REQUIRE(rep.mean_for("F2", rep.chosen_variant) ==
            Catch::Approx(sum / count).margin(1e-12));
}

TEST_CASE("sign separation holds across randomized resonant draws") {
    // noise-free randomized records with C0n/C0S < 0.738 and the coefficient
    // sign condition intact: the faulty feeder is the unique positive mean
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> cap(0.3, 1.5), vdist(-0.1, -0.05),
        band(0.23, 0.27), taud(-0.9, -0.25), phid(0.0, 2.0 * kPi), deltad(-0.15, 0.15);
    std::uniform_int_distribution<int> which(0, 3);
    int done = 0;
    while (done < 100) {
        std::vector<double> caps{cap(rng) * kUF, cap(rng) * kUF, cap(rng) * kUF,
                                 cap(rng) * kUF};
        const int fault = which(rng);
        const double v = vdist(rng);
        // keep the faulty share inside the geometry band of the M shape
        double c0s = caps[0] + caps[1] + caps[2] + caps[3];
        const double share = caps[fault] / c0s;
        if (share > 0.18) continue;
        const auto p = NetworkParams::resonant(caps, fault, v);
        const auto spec = spec_for(p, 10.0, band(rng), taud(rng), phid(rng), deltad(rng));
        if (spec.i_fm_dist >= 0.97 * spec.i_fm) continue;  // band not reachable
        const auto rec = solve_resonant(p, spec, 6400.0, 14);
        const auto rep = identify(rec, 5, PipelineConfig{});
        REQUIRE(rep.chosen_feeder.has_value());
        REQUIRE(*rep.chosen_feeder == "F" + std::to_string(fault + 1));
        for (const auto& [id, means] : rep.mean_index)
            if (id != *rep.chosen_feeder)
                REQUIRE(means.at(rep.chosen_variant) <= 1e-12);
        ++done;
    }
}

TEST_CASE("sign separation holds for isolated and low-resistor draws") {
    std::mt19937_64 rng(3141);
    std::uniform_real_distribution<double> cap(0.4, 1.4), lr_cap(0.15, 0.32),
        band(0.23, 0.27), taud(-0.9, -0.25), phid(0.0, 2.0 * kPi), deltad(-0.12, 0.12);
    std::uniform_int_distribution<int> which(0, 3);

    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> caps{cap(rng) * kUF, cap(rng) * kUF, cap(rng) * kUF,
                                 cap(rng) * kUF};
        const int fault = which(rng);
        const auto p = NetworkParams::isolated(caps, fault, 0.05 * kUF);
        const auto spec = spec_for(p, 8.0, band(rng), taud(rng), phid(rng), deltad(rng));
        const auto rec = solve_isolated(p, spec, 6400.0, 14);
        const auto rep = identify(rec, 5, PipelineConfig{});
        REQUIRE(rep.chosen_feeder.has_value());
        REQUIRE(*rep.chosen_feeder == "F" + std::to_string(fault + 1));
        for (const auto& [id, means] : rep.mean_index)
            if (id != *rep.chosen_feeder)
                REQUIRE(means.at(rep.chosen_variant) <= 1e-12);
    }

    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> caps{lr_cap(rng) * kUF, lr_cap(rng) * kUF, lr_cap(rng) * kUF,
                                 lr_cap(rng) * kUF};
        const int fault = which(rng);
        const auto p = NetworkParams::low_resistor(caps, fault, 10.0);
        const auto spec = spec_for(p, 10.0, band(rng), taud(rng), phid(rng), deltad(rng));
        const auto rec = solve_low_resistor(p, spec, 6400.0, 14);
        const auto rep = identify(rec, 5, PipelineConfig{});
        REQUIRE(rep.chosen_feeder.has_value());
        REQUIRE(*rep.chosen_feeder == "F" + std::to_string(fault + 1));
        for (const auto& [id, means] : rep.mean_index)
            if (id != *rep.chosen_feeder)
                REQUIRE(means.at(rep.chosen_variant) <= 1e-12);
    }
}

TEST_CASE("pipeline geometry carries over to other sampling rates") {
    // 12.8 kHz, 256 samples per cycle: interval and guard scale with N_T
    const auto p = NetworkParams::resonant(
        {1.2 * kUF, 0.35 * kUF, 1.4 * kUF, 0.9 * kUF}, 1, -0.09);
    const auto spec = spec_for(p, 12.0, 0.26, -0.4, 0.7, 0.1);
    const auto rec = solve_resonant(p, spec, 12800.0, 30);
    REQUIRE(rec.samples_per_cycle() == 256);

    PipelineConfig cfg;
    cfg.fs = 12800.0;
    const auto rep = run_pipeline(rec, cfg);
    REQUIRE(rep.trigger_cycle.has_value());
    REQUIRE(*rep.trigger_cycle <= 6);
    REQUIRE(rep.identification.has_value());
    REQUIRE(rep.identification->chosen_feeder == "F2");
}
