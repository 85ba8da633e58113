#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hifd/refit.hpp"
#include "hifd/signal.hpp"
#include "hifd/types.hpp"

namespace hifd {

// ---------------------------------------------------------------------------
// Interval slope: least-squares slope of a centered l-sample interval,
// the noise-robust replacement for the pointwise derivative.
// ---------------------------------------------------------------------------

/// Closed-form least-squares slope of an l-sample window,
///   (l*sum(n*y) - sum(n)*sum(y)) / (l*sum(n^2) - sum(n)^2),
/// evaluated with centered indices (algebraically identical, better
/// conditioned). Units: signal units per sample.
inline double llsf_slope(const double* w, int l) {
    const double mid = (l - 1) / 2.0;
    double num = 0.0, den = 0.0;
    for (int i = 0; i < l; ++i) {
        const double k = i - mid;
        num += k * w[i];
        den += k * k;
    }
    return num / den;
}

inline double llsf_slope(const std::vector<double>& w) {
    return llsf_slope(w.data(), static_cast<int>(w.size()));
}

struct SlopeOptions {
    int l = 0;               ///< interval length; 0 = N_T/8
    double fc = 1500.0;      ///< low-pass cutoff; 0 disables filtering
    bool grubbs_rlrs = true; ///< outlier rejection + robust smoothing
    RefitOptions refit;

    int interval_for(int samples_per_cycle) const {
        int li = l > 0 ? l : samples_per_cycle / 8;
        if (li < 4 || li % 2 != 0)
            throw parameter_error("interval length must be even and >= 4");
        return li;
    }
};

/// Interval slope at one sample; the interval values pass through
/// refit_interval first unless `refit` is disabled.
inline double interval_slope(const SampleSeries& s, long n_s, int l, bool refit = true,
                             const RefitOptions& opt = {}) {
    const int half = l / 2;
    if (l < 4) throw parameter_error("interval_slope: l must be >= 4");
    if (n_s < half || n_s + (l - half) > static_cast<long>(s.values.size()))
        throw range_error("interval_slope: interval does not fit inside the series");
    if (!refit) return llsf_slope(s.values.data() + (n_s - half), l);
    std::vector<double> w(s.values.begin() + (n_s - half), s.values.begin() + (n_s - half) + l);
    return llsf_slope(refit_interval(w, opt));
}

// ---------------------------------------------------------------------------
// IntervalSlopeSeries — per-sample interval slopes plus the fundamental
// zero-crossings of the slope curve (N0, N1, ... delimiting half-cycles).
// ---------------------------------------------------------------------------

struct IntervalSlopeSeries {
    std::vector<double> slopes;      ///< NaN where the interval does not fit
    int l = 16;
    std::string source_id;
    std::vector<long> zero_crossings;
    long defined_begin = 0;          ///< first index with a defined slope
    long defined_end = 0;            ///< one past the last defined index
    double fs = 6400.0;
    double f0 = 50.0;
    double t0 = 0.0;
    int n_t = 128;

    bool defined(long n) const { return n >= defined_begin && n < defined_end; }
    double at(long n) const {
        if (!defined(n)) throw range_error("slope undefined at index " + std::to_string(n));
        return slopes[n];
    }
};

/// Nominal-then-calibrated zero-crossings of the slope curve. Per cycle the
/// fundamental phasor gives nominal positions; each is moved to the nearest
/// actual sign change within +-N_T/16 samples, else the nominal one is kept.
inline std::vector<long> is_zero_crossings(const IntervalSlopeSeries& iss) {
    std::vector<long> out;
    const long lo = iss.defined_begin, hi = iss.defined_end;
    if (hi - lo < iss.n_t) return out;

    const int nt = iss.n_t;
    const int search = nt / 16;
    for (long start = lo; start + nt <= hi; start += nt) {
        const Phasor p = fundamental_phasor_at(iss.slopes, start, nt);
        if (p.amplitude == 0.0) continue;
        // cosine reference: zero at phase +-pi/2 of the fundamental argument
        for (const double target : {-kPi / 2.0, kPi / 2.0}) {
            double k = (target - p.phase) * nt / (2.0 * kPi);
            k = std::fmod(k, static_cast<double>(nt));
            if (k < 0) k += nt;
            long nominal = start + static_cast<long>(std::lround(k));
            if (nominal >= hi) nominal -= nt;
            if (nominal < lo) continue;

            long best = -1;
            for (int off = 0; off <= search && best < 0; ++off) {
                for (const long cand : {nominal - off, nominal + off}) {
                    if (cand <= lo || cand >= hi) continue;
                    const double a = iss.slopes[cand - 1], b = iss.slopes[cand];
                    if (a * b <= 0.0 && (a != 0.0 || b != 0.0)) {
                        best = cand;
                        break;
                    }
                }
            }
            out.push_back(best >= 0 ? best : nominal);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    // enforce minimum spacing: merged crossings would create degenerate windows
    std::vector<long> spaced;
    for (long c : out)
        if (spaced.empty() || c - spaced.back() > nt / 4)
            spaced.push_back(c);
    return spaced;
}

/// Full descriptor pipeline for one channel:
/// despike (Grubbs-RLRS per interval on the raw series) -> zero-phase
/// low-pass -> least-squares interval slopes -> calibrated zero-crossings.
inline IntervalSlopeSeries interval_slope_series(const SampleSeries& s,
                                                 const SlopeOptions& opt = {},
                                                 std::string source_id = {}) {
    s.require_cycles(2);
    const int nt = s.samples_per_cycle();
    const int l = opt.interval_for(nt);
    const int half = l / 2;

    SampleSeries work = s;
    if (opt.grubbs_rlrs) work.values = despike(work.values, l, opt.refit);
    if (opt.fc > 0.0) work = lowpass(work, opt.fc);

    IntervalSlopeSeries iss;
    iss.l = l;
    iss.source_id = std::move(source_id);
    iss.fs = s.fs;
    iss.f0 = s.f0;
    iss.t0 = s.t0;
    iss.n_t = nt;
    const long n = static_cast<long>(work.values.size());
    iss.slopes.assign(n, std::numeric_limits<double>::quiet_NaN());
    iss.defined_begin = half;
    iss.defined_end = n - (l - half) + 1;
    for (long ns = iss.defined_begin; ns < iss.defined_end; ++ns)
        iss.slopes[ns] = llsf_slope(work.values.data() + (ns - half), l);

    iss.zero_crossings = is_zero_crossings(iss);
    return iss;
}

}  // namespace hifd
