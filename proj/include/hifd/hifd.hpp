#pragma once

// High-impedance fault detection and feeder identification from synchronous
// zero-sequence waveforms, plus the circuit-faithful synthetic generator.

#include "hifd/config.hpp"
#include "hifd/corpus.hpp"
#include "hifd/csv.hpp"
#include "hifd/detect.hpp"
#include "hifd/distortion.hpp"
#include "hifd/identify.hpp"
#include "hifd/interval_slope.hpp"
#include "hifd/netsim.hpp"
#include "hifd/noise.hpp"
#include "hifd/pipeline.hpp"
#include "hifd/refit.hpp"
#include "hifd/report.hpp"
#include "hifd/signal.hpp"
#include "hifd/types.hpp"
