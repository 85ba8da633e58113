#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "hifd/types.hpp"

namespace hifd {

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// zero_sequence — symmetrical-component common mode of three phase channels.
// ---------------------------------------------------------------------------

inline SampleSeries zero_sequence(const SampleSeries& ia, const SampleSeries& ib,
                                  const SampleSeries& ic) {
    if (!ia.same_grid(ib) || !ia.same_grid(ic))
        throw alignment_error("zero_sequence: phase channels are not on the same grid");
    SampleSeries out = ia;
    for (std::size_t n = 0; n < out.values.size(); ++n)
        out.values[n] = (ia.values[n] + ib.values[n] + ic.values[n]) / 3.0;
    return out;
}

// ---------------------------------------------------------------------------
// Zero-phase low-pass filter.
//
// 4th-order Butterworth realized as two biquads (bilinear transform with
// prewarping), applied forward and backward so distortion positions are not
// phase-shifted. The input is reflect-padded by one cycle at each end.
// ---------------------------------------------------------------------------

struct Biquad {
    double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;

    void process(const double* in, double* out, std::size_t n) const {
        double z1 = 0.0, z2 = 0.0;  // transposed direct form II
        for (std::size_t i = 0; i < n; ++i) {
            const double x = in[i];
            const double y = b0 * x + z1;
            z1 = b1 * x - a1 * y + z2;
            z2 = b2 * x - a2 * y;
            out[i] = y;
        }
    }

    std::complex<double> response(double w) const {  // w = 2*pi*f/fs
        const std::complex<double> z = std::polar(1.0, -w);
        return (b0 + (b1 + b2 * z) * z) / (1.0 + (a1 + a2 * z) * z);
    }
};

struct ButterworthLP4 {
    std::array<Biquad, 2> sections;

    ButterworthLP4(double fc, double fs) {
        if (!(fc > 0.0) || !(fc < fs / 2.0))
            throw parameter_error("low-pass cutoff must lie in (0, fs/2)");
        const double k = std::tan(kPi * fc / fs);  // prewarped
        const double k2 = k * k;
        // pole-pair Q values of the 4th-order Butterworth prototype
        const double q[2] = {1.0 / (2.0 * std::cos(kPi / 8.0)),
                             1.0 / (2.0 * std::cos(3.0 * kPi / 8.0))};
        for (int s = 0; s < 2; ++s) {
            const double norm = 1.0 + k / q[s] + k2;
            sections[s].b0 = k2 / norm;
            sections[s].b1 = 2.0 * k2 / norm;
            sections[s].b2 = k2 / norm;
            sections[s].a1 = 2.0 * (k2 - 1.0) / norm;
            sections[s].a2 = (1.0 - k / q[s] + k2) / norm;
        }
    }

    /// Single-pass magnitude response at frequency f (Hz) for sample rate fs.
    double magnitude(double f, double fs) const {
        const double w = 2.0 * kPi * f / fs;
        return std::abs(sections[0].response(w) * sections[1].response(w));
    }
};

namespace detail {

/// Odd reflection of `pad` samples around each end; continues a waveform
/// smoothly so the filter transient stays inside the padding.
inline std::vector<double> reflect_pad(const std::vector<double>& x, std::size_t pad) {
    pad = std::min(pad, x.size() > 1 ? x.size() - 1 : std::size_t{0});
    std::vector<double> y;
    y.reserve(x.size() + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) y.push_back(2.0 * x.front() - x[i]);
    y.insert(y.end(), x.begin(), x.end());
    for (std::size_t i = 2; i <= pad + 1; ++i) y.push_back(2.0 * x.back() - x[x.size() - i]);
    return y;
}

inline std::size_t reflect_pad_width(const std::vector<double>& x, std::size_t pad) {
    return std::min(pad, x.size() > 1 ? x.size() - 1 : std::size_t{0});
}

}  // namespace detail

/// Zero-phase (forward-backward) low-pass; same length as the input.
inline SampleSeries lowpass(const SampleSeries& s, double fc = 1500.0) {
    const ButterworthLP4 filt(fc, s.fs);
    const std::size_t pad = detail::reflect_pad_width(
        s.values, static_cast<std::size_t>(s.samples_per_cycle()));
    std::vector<double> buf = detail::reflect_pad(s.values, pad);

    auto run = [&](std::vector<double>& v) {
        std::vector<double> tmp(v.size());
        filt.sections[0].process(v.data(), tmp.data(), v.size());
        filt.sections[1].process(tmp.data(), v.data(), v.size());
    };
    run(buf);
    std::reverse(buf.begin(), buf.end());
    run(buf);
    std::reverse(buf.begin(), buf.end());

    SampleSeries out = s;
    std::copy(buf.begin() + static_cast<long>(pad),
              buf.begin() + static_cast<long>(pad + s.values.size()), out.values.begin());
    return out;
}

// ---------------------------------------------------------------------------
// fundamental_phasor — single-bin discrete Fourier projection at f0 over one
// cycle. Cosine reference: x(n) ~ A*cos(2*pi*n/N + phase), phase in (-pi, pi].
// ---------------------------------------------------------------------------

struct Phasor {
    double amplitude = 0.0;
    double phase = 0.0;  ///< radians, 0 for the all-zero cycle
};

inline Phasor fundamental_phasor(const SampleSeries& s, int cycle_index) {
    const int nt = s.samples_per_cycle();
    const long start = static_cast<long>(cycle_index) * nt;
    if (cycle_index < 0 || start + nt > static_cast<long>(s.values.size()))
        throw range_error("fundamental_phasor: cycle " + std::to_string(cycle_index) +
                          " not fully inside the series");
    std::complex<double> acc = 0.0;
    for (int n = 0; n < nt; ++n) {
        const double th = 2.0 * kPi * n / nt;
        acc += s.values[start + n] * std::complex<double>(std::cos(th), -std::sin(th));
    }
    acc *= 2.0 / nt;
    Phasor p;
    p.amplitude = std::abs(acc);
    p.phase = (p.amplitude == 0.0) ? 0.0 : std::arg(acc);
    return p;
}

/// Phasor of an arbitrary cycle-aligned window starting at `start` (samples).
inline Phasor fundamental_phasor_at(const std::vector<double>& v, long start, int nt) {
    if (start < 0 || start + nt > static_cast<long>(v.size()))
        throw range_error("fundamental_phasor_at: window out of bounds");
    std::complex<double> acc = 0.0;
    for (int n = 0; n < nt; ++n) {
        const double th = 2.0 * kPi * n / nt;
        acc += v[start + n] * std::complex<double>(std::cos(th), -std::sin(th));
    }
    acc *= 2.0 / nt;
    Phasor p;
    p.amplitude = std::abs(acc);
    p.phase = (p.amplitude == 0.0) ? 0.0 : std::arg(acc);
    return p;
}

}  // namespace hifd
