#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <unordered_map>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "hifd/types.hpp"

namespace hifd {

// ---------------------------------------------------------------------------
// Grubbs-criterion outlier rejection plus robust local regression smoothing,
// applied per interval before the slope fit. Impulses from intermittent arcs
// appear as single-sample outliers against the locally affine waveform; the
// Grubbs test removes them and the local regression refills and smooths.
// ---------------------------------------------------------------------------

struct RefitOptions {
    double grubbs_alpha = 0.05;     ///< two-sided significance
    double max_remove_frac = 0.25;  ///< outlier budget per interval (l/4)
    int robust_iters = 2;           ///< bisquare reweighting passes
};

/// Two-sided Grubbs critical value for sample size n.
inline double grubbs_critical(int n, double alpha = 0.05) {
    if (n < 3) return std::numeric_limits<double>::infinity();
    boost::math::students_t dist(n - 2);
    const double t = boost::math::quantile(dist, 1.0 - alpha / (2.0 * n));
    return (n - 1) / std::sqrt(static_cast<double>(n)) *
           std::sqrt(t * t / (n - 2 + t * t));
}

namespace detail {

/// Center-anchored tricube kernel for an l-sample window (bandwidth l), with
/// the first and second index moments used by the weighted affine fit.
struct TricubeKernel {
    std::vector<double> k, kx, kxx;
};

inline const TricubeKernel& tricube_kernel(int l) {
    thread_local std::unordered_map<int, TricubeKernel> cache;
    auto it = cache.find(l);
    if (it != cache.end()) return it->second;
    TricubeKernel t;
    t.k.resize(l);
    t.kx.resize(l);
    t.kxx.resize(l);
    const double center = (l - 1) / 2.0;
    for (int i = 0; i < l; ++i) {
        const double d = std::abs(i - center) / static_cast<double>(l);
        const double c = 1.0 - d * d * d;
        t.k[i] = c * c * c;
        t.kx[i] = t.k[i] * i;
        t.kxx[i] = t.k[i] * i * i;
    }
    return cache.emplace(l, std::move(t)).first->second;
}

struct RefitScratch {
    std::vector<double> res, rw, m, mw;
    std::vector<char> keep;
};

/// Core refit; writes the smoothed window into `out` (size l).
inline void refit_window(const double* w, int l, const RefitOptions& opt, double* out,
                         RefitScratch& sc) {
    // constant windows are their own fit
    bool constant = true;
    for (int i = 1; i < l && constant; ++i) constant = w[i] == w[0];
    if (constant) {
        std::copy(w, w + l, out);
        return;
    }

    sc.keep.assign(l, 1);
    sc.rw.assign(l, 1.0);
    sc.res.resize(l);

    // Iterative Grubbs on residuals from a least-squares affine fit of the
    // kept samples; at most l*max_remove_frac removals.
    const int max_remove = static_cast<int>(l * opt.max_remove_frac);
    for (int pass = 0; pass < max_remove; ++pass) {
        double sn = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (int i = 0; i < l; ++i) {
            if (!sc.keep[i]) continue;
            sn += 1.0;
            sx += i;
            sy += w[i];
            sxx += static_cast<double>(i) * i;
            sxy += i * w[i];
        }
        if (sn < 4.0) break;
        const double den = sn * sxx - sx * sx;
        const double b = (sn * sxy - sx * sy) / den;
        const double a = (sy - b * sx) / sn;

        double rm = 0.0;
        for (int i = 0; i < l; ++i) {
            sc.res[i] = w[i] - (a + b * i);
            if (sc.keep[i]) rm += sc.res[i];
        }
        rm /= sn;
        double s2 = 0.0;
        for (int i = 0; i < l; ++i)
            if (sc.keep[i]) s2 += (sc.res[i] - rm) * (sc.res[i] - rm);
        const double sd = std::sqrt(s2 / (sn - 1.0));
        if (sd <= 0.0) break;

        int worst = -1;
        double gmax = 0.0;
        for (int i = 0; i < l; ++i) {
            if (!sc.keep[i]) continue;
            const double g = std::abs(sc.res[i] - rm) / sd;
            if (g > gmax) {
                gmax = g;
                worst = i;
            }
        }
        if (worst < 0 || gmax <= grubbs_critical(static_cast<int>(sn), opt.grubbs_alpha))
            break;
        sc.keep[worst] = 0;
    }

    // Robust local regression: one tricube-weighted affine fit anchored at the
    // window center, iterated with bisquare reweighting; the window is then
    // replaced by the fitted line, so removed outliers pick up the local fit
    // value and kept samples are smoothed toward it.
    const TricubeKernel& kern = tricube_kernel(l);
    sc.m.resize(l);
    sc.mw.resize(l);
    double fa = 0.0, fb = 0.0;
    bool have_fit = false;
    for (int iter = 0; iter <= opt.robust_iters; ++iter) {
        for (int i = 0; i < l; ++i) {
            sc.m[i] = sc.keep[i] ? sc.rw[i] : 0.0;
            sc.mw[i] = sc.m[i] * w[i];
        }
        double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
        for (int i = 0; i < l; ++i) {
            sw += kern.k[i] * sc.m[i];
            swx += kern.kx[i] * sc.m[i];
            swxx += kern.kxx[i] * sc.m[i];
            swy += kern.k[i] * sc.mw[i];
            swxy += kern.kx[i] * sc.mw[i];
        }
        const double den = sw * swxx - swx * swx;
        if (sw <= 0.0) {
            break;  // everything rejected; keep the previous (or trivial) fit
        } else if (std::abs(den) < 1e-300 * sw * sw + 1e-300) {
            fa = swy / sw;
            fb = 0.0;
        } else {
            fb = (sw * swxy - swx * swy) / den;
            fa = (swy - fb * swx) / sw;
        }
        have_fit = true;
        if (iter == opt.robust_iters) break;

        // bisquare weights from the median absolute residual of kept samples
        std::vector<double>& r = sc.res;
        std::size_t nk = 0;
        for (int i = 0; i < l; ++i) {
            const double resid = w[i] - (fa + fb * i);
            if (sc.keep[i]) r[nk++] = std::abs(resid);
        }
        if (nk == 0) break;
        std::nth_element(r.begin(), r.begin() + nk / 2, r.begin() + nk);
        const double s = 1.4826 * r[nk / 2];
        if (s <= 0.0) break;
        for (int i = 0; i < l; ++i) {
            const double u = (w[i] - (fa + fb * i)) / (6.0 * s);
            sc.rw[i] = (std::abs(u) < 1.0 && sc.keep[i]) ? (1 - u * u) * (1 - u * u) : 0.0;
        }
    }
    if (have_fit)
        for (int i = 0; i < l; ++i) out[i] = fa + fb * i;
    else
        std::copy(w, w + l, out);
}

}  // namespace detail

/// Refit one interval: Grubbs outlier rejection plus robust local regression.
/// Returns the smoothed window; affine inputs are reproduced exactly.
inline std::vector<double> refit_interval(const std::vector<double>& window,
                                          const RefitOptions& opt = {}) {
    if (window.size() < 4)
        throw parameter_error("refit_interval: window must hold at least 4 samples");
    std::vector<double> out(window.size());
    detail::RefitScratch sc;
    detail::refit_window(window.data(), static_cast<int>(window.size()), opt, out.data(), sc);
    return out;
}

/// Despike a whole series: every interior sample is replaced by the value the
/// refit of its centered l-sample interval assigns to the center position.
/// Boundary samples (first/last l/2) are passed through unchanged.
inline std::vector<double> despike(const std::vector<double>& x, int l,
                                   const RefitOptions& opt = {}) {
    if (l < 4) throw parameter_error("despike: interval length must be >= 4");
    std::vector<double> out = x;
    if (x.size() < static_cast<std::size_t>(l)) return out;
    const int half = l / 2;
    const long n = static_cast<long>(x.size());
    detail::RefitScratch sc;
    std::vector<double> fit(l);
    for (long ns = half; ns <= n - (l - half); ++ns) {
        detail::refit_window(x.data() + (ns - half), l, opt, fit.data(), sc);
        out[ns] = fit[half];
    }
    return out;
}

}  // namespace hifd
