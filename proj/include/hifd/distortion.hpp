#pragma once

#include <cmath>
#include <vector>

#include "hifd/signal.hpp"
#include "hifd/types.hpp"

namespace hifd {

// ---------------------------------------------------------------------------
// Periodic zero-crossing distortion of a stable arcing fault current.
//
// The waveform is assembled per quarter-interval: a decaying double-frequency
// arch on the first quarter, mirrored about the half-cycle midpoint, and
// continued anti-periodically into the second half-cycle. offset_delta
// translates the whole pattern so the mirror axis (the midpoint of the
// distortion interval) shifts while the anti-periodicity is preserved.
// ---------------------------------------------------------------------------

struct DistortionSpec {
    double i_fm = 10.0;        ///< fault-current sinusoid peak, A
    double i_fm_dist = 3.0;    ///< distortion peak, A
    double tau = -0.5;         ///< decay constant, -1 < tau < 0
    double phi = 0.0;          ///< phase of the capacitive currents, rad
    double offset_delta = 0.0; ///< axial-asymmetry shift, rad
    double theta = 0.0;        ///< low-resistor phase lag, set by the solver

    void validate() const {
        if (!(tau > -1.0) || !(tau < 0.0))
            throw parameter_error("distortion: tau must lie in (-1, 0)");
        if (i_fm < 0.0 || i_fm_dist < 0.0)
            throw parameter_error("distortion: amplitudes must be non-negative");
        if (i_fm_dist > i_fm)
            throw parameter_error("distortion: i_fm_dist must not exceed i_fm");
        if (!(std::abs(offset_delta) < kPi / 2.0))
            throw parameter_error("distortion: |offset_delta| must be below pi/2");
    }
};

namespace detail {

/// Unit-amplitude pattern value at phase psi (relative to the reference
/// sinusoid sin(psi)). omega scales the decay exponent (tau/omega)*(phase).
inline double pattern_value(double psi, double tau, double delta, double omega) {
    double x = std::fmod(psi - delta, 2.0 * kPi);
    if (x < 0.0) x += 2.0 * kPi;
    const double sign = x < kPi ? 1.0 : -1.0;
    double xh = std::fmod(x, kPi);
    const double xm = xh < kPi / 2.0 ? xh : kPi - xh;  // mirror about pi/2
    return sign * (-std::exp((tau / omega) * xm) * std::sin(2.0 * xm));
}

/// dF/dpsi of the assembled pattern (piecewise analytic).
inline double pattern_derivative(double psi, double tau, double delta, double omega) {
    double x = std::fmod(psi - delta, 2.0 * kPi);
    if (x < 0.0) x += 2.0 * kPi;
    const double sign = x < kPi ? 1.0 : -1.0;
    double xh = std::fmod(x, kPi);
    const double mirrored = xh >= kPi / 2.0;
    const double xm = mirrored ? kPi - xh : xh;
    const double e = std::exp((tau / omega) * xm);
    const double raw = -e * ((tau / omega) * std::sin(2.0 * xm) + 2.0 * std::cos(2.0 * xm));
    return sign * (mirrored ? -raw : raw);
}

/// Peak magnitude of the unit pattern over one period (for normalization).
inline double pattern_peak(double tau, double delta, double omega) {
    double peak = 0.0;
    constexpr int kGrid = 4096;
    for (int i = 0; i < kGrid; ++i)
        peak = std::max(peak, std::abs(pattern_value(2.0 * kPi * i / kGrid, tau, delta, omega)));
    return peak;
}

/// Sampled distortion waveform with the given reference phase, peak-normalized
/// to amplitude. Samples are values of the pattern at psi = omega*t + phase.
inline std::vector<double> sample_pattern(double amplitude, double tau, double delta,
                                          double phase, double omega, double fs,
                                          long n_samples) {
    std::vector<double> out(n_samples);
    if (amplitude == 0.0) return out;
    const double scale = amplitude / pattern_peak(tau, delta, omega);
    for (long n = 0; n < n_samples; ++n)
        out[n] = scale * pattern_value(omega * n / fs + phase, tau, delta, omega);
    return out;
}

}  // namespace detail

/// The fault-current distorted component at reference phase phi - pi,
/// peak-normalized to i_fm_dist, repeated every cycle.
inline SampleSeries synth_fault_distortion(const DistortionSpec& spec, double fs, int cycles,
                                           double omega = 100.0 * kPi) {
    spec.validate();
    const double f0 = omega / (2.0 * kPi);
    SampleSeries s;
    s.fs = fs;
    s.f0 = f0;
    const long n = static_cast<long>(cycles * std::lround(fs / f0));
    s.values = detail::sample_pattern(spec.i_fm_dist, spec.tau, spec.offset_delta,
                                      spec.phi - kPi, omega, fs, n);
    return s;
}

}  // namespace hifd
