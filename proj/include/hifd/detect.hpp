#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "hifd/interval_slope.hpp"
#include "hifd/types.hpp"

namespace hifd {

// ---------------------------------------------------------------------------
// Half-cycle "M shape" criterion on the interval-slope magnitude, and the
// faulty-cycle / trigger bookkeeping built on top of it.
// ---------------------------------------------------------------------------

struct MShapeOptions {
    double rho = 0.3;      ///< allowed relative spread between interior minima
    double epsilon_m = 0.15; ///< prominence gate (mean of maxima vs minimum)
    int d = 0;             ///< guard margin in samples; 0 = N_T/16
};

struct HalfCycleFeature {
    long n_max1 = -1;      ///< |IS| extrema positions (absolute sample indices)
    long n_min = -1;
    long n_max2 = -1;
    bool is_m_shape = false;
    long n0 = 0, n1 = 0;   ///< delimiting zero-crossings
    int d = 0;             ///< guard margin used
};

namespace detail {

struct Extremum {
    long idx;
    bool is_max;
};

/// Local extrema of y on [a, b] by strict sign change of the first
/// difference; plateaus collapse to their midpoint.
inline std::vector<Extremum> local_extrema(const std::vector<double>& y, long a, long b) {
    std::vector<Extremum> out;
    long i = a;
    while (i < b) {
        double di = y[i + 1] - y[i];
        if (di == 0.0) {
            ++i;
            continue;
        }
        long j = i + 1;
        while (j < b && y[j + 1] - y[j] == 0.0) ++j;
        if (j >= b) break;
        const double dj = y[j + 1] - y[j];
        const long mid = (i + 1 + j) / 2;
        if (di > 0.0 && dj < 0.0) out.push_back({mid, true});
        else if (di < 0.0 && dj > 0.0) out.push_back({mid, false});
        i = j;
    }
    return out;
}

}  // namespace detail

/// Decide whether |IS| between crossings N0 and N1 exhibits an M shape:
/// two maxima straddling a minimum inside the guarded window, all other
/// interior minima confined to [n_max1, n_max2] with similar values, and a
/// minimum prominence so numerically flat curves do not qualify.
inline HalfCycleFeature m_shape_half_cycle(const IntervalSlopeSeries& iss, long n0, long n1,
                                           const MShapeOptions& opt = {}) {
    HalfCycleFeature f;
    f.n0 = n0;
    f.n1 = n1;
    f.d = opt.d > 0 ? opt.d : iss.n_t / 16;

    const long a = n0 + f.d, b = n1 - f.d;
    if (b - a + 1 < 3 || !iss.defined(a) || !iss.defined(b)) return f;  // degenerate

    std::vector<double> mag(iss.slopes.size(), 0.0);
    for (long i = a; i <= b; ++i) mag[i] = std::abs(iss.slopes[i]);

    const auto ext = detail::local_extrema(mag, a, b);
    std::vector<long> maxima, minima;
    for (const auto& e : ext) (e.is_max ? maxima : minima).push_back(e.idx);
    if (maxima.size() < 2 || minima.empty()) return f;

    // the two dominant maxima
    long m1 = -1, m2 = -1;
    for (long m : maxima) {
        if (m1 < 0 || mag[m] > mag[m1]) {
            m2 = m1;
            m1 = m;
        } else if (m2 < 0 || mag[m] > mag[m2]) {
            m2 = m;
        }
    }
    if (m1 > m2) std::swap(m1, m2);

    long nmin = -1;
    for (long m : minima)
        if (m > m1 && m < m2 && (nmin < 0 || mag[m] < mag[nmin])) nmin = m;
    if (nmin < 0) return f;

    const double mean_max = 0.5 * (mag[m1] + mag[m2]);
    if (!(mean_max > 0.0)) return f;

    // interior minima must sit between the maxima and stay close in value
    for (long m : minima) {
        if (m < m1 || m > m2) return f;
        if (std::abs(mag[m] - mag[nmin]) > opt.rho * mean_max) return f;
    }
    if ((mean_max - mag[nmin]) / mean_max < opt.epsilon_m) return f;

    f.n_max1 = m1;
    f.n_min = nmin;
    f.n_max2 = m2;
    f.is_m_shape = true;
    return f;
}

/// A cycle is recorded as faulty only when both half-cycles show the M shape.
inline bool cycle_is_faulty(const HalfCycleFeature& first, const HalfCycleFeature& second) {
    return first.is_m_shape && second.is_m_shape;
}

// ---------------------------------------------------------------------------
// Detection state: consecutive faulty cycles arm the trigger.
// ---------------------------------------------------------------------------

struct DetectionState {
    int consecutive_faulty = 0;
    int trigger_threshold = 4;
    std::optional<long> triggered_at;  ///< cycle index of the trigger
    long last_cycle = -1;
};

/// Fold one cycle verdict into the state. Cycles must arrive in order.
inline DetectionState update_detection(DetectionState state, bool faulty, long cycle_index) {
    if (cycle_index <= state.last_cycle)
        throw sequencing_error("update_detection: cycle " + std::to_string(cycle_index) +
                               " presented out of order");
    state.last_cycle = cycle_index;
    if (faulty) {
        if (++state.consecutive_faulty >= state.trigger_threshold && !state.triggered_at)
            state.triggered_at = cycle_index;
    } else {
        state.consecutive_faulty = 0;
    }
    return state;
}

}  // namespace hifd
