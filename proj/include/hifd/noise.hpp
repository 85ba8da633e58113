#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "hifd/types.hpp"

namespace hifd {

// ---------------------------------------------------------------------------
// Measurement-noise model: independent white Gaussian noise per channel at a
// requested SNR, plus Poisson-placed single-sample impulses standing in for
// arcing-intermittence interference. Deterministic under a seed.
// ---------------------------------------------------------------------------

inline constexpr double kNoiselessSnr = std::numeric_limits<double>::infinity();

inline SynchronizedRecord add_noise(const SynchronizedRecord& record, double snr_db,
                                    double impulse_rate, double impulse_gain,
                                    std::uint64_t seed) {
    if (!(snr_db > 0.0))
        throw parameter_error("add_noise: snr_db must be positive (infinity = none)");
    SynchronizedRecord out = record;

    std::uint64_t channel = 0;
    auto corrupt = [&](SampleSeries& s) {
        std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + 0x517cc1b727220a95ull * ++channel);
        const std::size_t n = s.values.size();
        if (n == 0) return;
        if (std::isfinite(snr_db)) {
            double rms = 0.0, peak = 0.0;
            for (double x : s.values) {
                rms += x * x;
                peak = std::max(peak, std::abs(x));
            }
            rms = std::sqrt(rms / n);
            const double sigma = rms / std::pow(10.0, snr_db / 20.0);
            std::normal_distribution<double> gauss(0.0, sigma);
            if (sigma > 0.0)
                for (double& x : s.values) x += gauss(rng);
        }
        if (impulse_rate > 0.0) {
            double peak = 0.0;
            for (double x : s.values) peak = std::max(peak, std::abs(x));
            const double cycles = static_cast<double>(n) / s.samples_per_cycle();
            std::poisson_distribution<int> count(impulse_rate * cycles);
            std::uniform_int_distribution<std::size_t> pos(0, n - 1);
            std::bernoulli_distribution flip(0.5);
            const int k = count(rng);
            for (int i = 0; i < k; ++i)
                s.values[pos(rng)] += (flip(rng) ? 1.0 : -1.0) * impulse_gain * peak;
        }
    };

    corrupt(out.u0b);
    for (auto& [id, s] : out.feeders) corrupt(s);
    return out;
}

}  // namespace hifd
