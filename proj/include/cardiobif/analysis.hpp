#pragma once

#include <string>
#include <vector>

#include "cardiobif/integrate.hpp"

namespace cardiobif {

struct AnalysisOptions {
    double ead_prominence = 1.0;  // mV, minimum swing counted as an EAD
    double plateau_floor = -40.0; // mV, EADs end at the final descent below this
    double repol_floor = -80.0;   // mV, repolarisation-failure threshold
};

struct APFeatures {
    bool ap_detected = false;
    double v_rest = 0.0;     // mV, V before the stimulus
    double v_peak = 0.0;     // mV
    double amplitude = 0.0;  // mV
    double t_upstroke = 0.0; // ms, max-dV/dt anchor
    double apd90 = 0.0;      // ms, NaN when repolarisation to 90% never happens
    int ead_count = 0;
    bool repol_failure = false; // V never back below repol_floor after the peak
};

// Features of the AP triggered by the trace's first stimulus pulse. The
// analysed window runs from that pulse to the next one (or trace end). A trace
// without a detected AP yields ap_detected = false with zeroed features.
APFeatures ap_features(const Trace& trace, const AnalysisOptions& opts = {});

struct TraceComparison {
    double sup_dV = 0.0; // mV, max |V_a - V_b| on the common window
    double rms_dV = 0.0; // mV, time-weighted root-mean-square difference
    double d_apd90 = 0.0; // ms, apd90(a) - apd90(b); NaN if either has none
    double t0 = 0.0, t1 = 0.0; // ms, the window actually compared
};

// Compares V with linear interpolation on the union time grid of the common
// window, optionally clipped to [t_from, t_to]. Throws DomainError when the
// windows are disjoint.
TraceComparison compare_traces(const Trace& a, const Trace& b,
                               double t_from = -1e300, double t_to = 1e300,
                               const AnalysisOptions& opts = {});

// One row per trace: identifier plus every APFeatures field.
void write_features_csv(const std::vector<std::pair<std::string, APFeatures>>& rows,
                        const std::string& path);

} // namespace cardiobif
