#pragma once

#include <cstdint>

#include "hifd/detect.hpp"
#include "hifd/interval_slope.hpp"
#include "hifd/types.hpp"

namespace hifd {

/// Every threshold of the detection/identification pipeline in one place.
/// Defaults follow the reference configuration (6.4 kHz, 50 Hz, N_T = 128).
struct PipelineConfig {
    double fs = 6400.0;
    double f0 = 50.0;
    double fc = 1500.0;        ///< low-pass cutoff, Hz
    int l = 0;                 ///< slope interval; 0 = N_T/8
    int d = 0;                 ///< half-cycle guard; 0 = N_T/16
    int trigger_threshold = 4; ///< consecutive faulty cycles to trigger
    int window_pre = 4;        ///< identification window, cycles before trigger
    int window_post = 20;      ///< identification window, cycles after trigger
    double rho = 0.3;
    double epsilon_m = 0.15;
    bool grubbs_rlrs = true;
    std::uint64_t seed = 0;    ///< echoed into reports for reproducibility

    SlopeOptions slope_options() const {
        SlopeOptions o;
        o.l = l;
        o.fc = fc;
        o.grubbs_rlrs = grubbs_rlrs;
        return o;
    }

    MShapeOptions mshape_options() const {
        MShapeOptions o;
        o.rho = rho;
        o.epsilon_m = epsilon_m;
        o.d = d;
        return o;
    }

    void validate() const {
        if (!(fs > 0) || !(f0 > 0) || fs / f0 < 4)
            throw parameter_error("config: bad sampling setup");
        if (!(fc > 0.0) || !(fc < fs / 2.0))
            throw parameter_error("config: fc must lie in (0, fs/2)");
        if (trigger_threshold < 1) throw parameter_error("config: trigger_threshold >= 1");
        if (window_pre < 0 || window_post < 0) throw parameter_error("config: bad window");
        if (!(rho >= 0.0) || !(epsilon_m >= 0.0))
            throw parameter_error("config: rho and epsilon_m must be non-negative");
    }
};

}  // namespace hifd
