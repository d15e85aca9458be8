#include "cardiobif/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "cardiobif/errors.hpp"

namespace cardiobif {

namespace {

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// Index range [first, last] of trace samples inside [t0, t1].
std::pair<std::size_t, std::size_t> window_indices(const Trace& tr, double t0,
                                                   double t1) {
    std::size_t first = 0;
    while (first + 1 < tr.size() && tr.times[first] < t0) ++first;
    std::size_t last = tr.size() - 1;
    while (last > first && tr.times[last] > t1) --last;
    return {first, last};
}

double interp(const std::vector<double>& ts, const std::vector<double>& vs,
              double t) {
    const auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return vs.front();
    if (it == ts.end()) return vs.back();
    const std::size_t i = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return vs[i - 1] + w * (vs[i] - vs[i - 1]);
}

} // namespace

APFeatures ap_features(const Trace& trace, const AnalysisOptions& opts) {
    if (trace.size() < 3) throw DomainError("ap_features: trace too short");
    const std::vector<double> V = trace.voltage();
    const std::vector<double>& t = trace.times;

    // analysis window: first stimulus pulse to the next pulse (or trace end)
    double t0 = t.front();
    double t1 = t.back();
    if (!trace.protocol.pulses.empty()) {
        double first_start = 1e300;
        for (const auto& p : trace.protocol.pulses)
            first_start = std::min(first_start, p.start);
        t0 = std::max(t0, first_start);
        double next = 1e300;
        for (const auto& p : trace.protocol.pulses) {
            if (p.start > first_start) next = std::min(next, p.start);
            if (p.period > 0.0) next = std::min(next, p.start + p.period);
        }
        t1 = std::min(t1, next);
    }
    const auto [i0, i1] = window_indices(trace, t0, t1);

    APFeatures f;
    f.v_rest = V[i0];

    // upstroke anchor: maximum dV/dt (central differences)
    std::size_t i_up = i0;
    double max_slope = -1e300;
    for (std::size_t i = (i0 > 0 ? i0 : 1); i < i1; ++i) {
        const double slope = (V[i + 1] - V[i - 1]) / (t[i + 1] - t[i - 1]);
        if (slope > max_slope) {
            max_slope = slope;
            i_up = i;
        }
    }
    std::size_t i_peak = i_up;
    for (std::size_t i = i_up; i <= i1; ++i)
        if (V[i] > V[i_peak]) i_peak = i;

    f.v_peak = V[i_peak];
    f.amplitude = f.v_peak - f.v_rest;
    f.t_upstroke = t[i_up];
    f.ap_detected = f.v_peak >= -20.0 && max_slope >= 1.0;
    if (!f.ap_detected) return APFeatures{false, f.v_rest, f.v_peak, 0.0,
                                          0.0,  0.0,      0,        false};

    // APD90: first crossing of the 90%-repolarisation level after the peak
    const double v90 = f.v_peak - 0.9 * f.amplitude;
    f.apd90 = nan_value;
    for (std::size_t i = i_peak; i < i1; ++i) {
        if (V[i + 1] <= v90 && V[i] > v90) {
            const double w = (V[i] - v90) / (V[i] - V[i + 1]);
            f.apd90 = t[i] + w * (t[i + 1] - t[i]) - f.t_upstroke;
            break;
        }
    }

    f.repol_failure = true;
    for (std::size_t i = i_peak; i <= i1; ++i)
        if (V[i] < opts.repol_floor) {
            f.repol_failure = false;
            break;
        }

    // EAD window: from the peak to the final descent below the plateau floor
    std::size_t i_end = i1;
    while (i_end > i_peak && V[i_end] < opts.plateau_floor) --i_end;

    // Count >= prominence up-swings: each is a strict local minimum followed
    // by a strict local maximum at least `prominence` above it. The +/- delta
    // alternation makes the count immune to sub-threshold ripples and to
    // resampling.
    int count = 0;
    bool looking_for_rise = true;
    double cur_min = V[i_peak];
    double cur_max = V[i_peak];
    for (std::size_t i = i_peak + 1; i <= i_end; ++i) {
        const double v = V[i];
        if (looking_for_rise) {
            if (v < cur_min) cur_min = v;
            if (v >= cur_min + opts.ead_prominence) {
                ++count;
                looking_for_rise = false;
                cur_max = v;
            }
        } else {
            if (v > cur_max) cur_max = v;
            if (v <= cur_max - opts.ead_prominence) {
                looking_for_rise = true;
                cur_min = v;
            }
        }
    }
    f.ead_count = count;
    return f;
}

TraceComparison compare_traces(const Trace& a, const Trace& b, double t_from,
                               double t_to, const AnalysisOptions& opts) {
    TraceComparison cmp;
    cmp.t0 = std::max({a.times.front(), b.times.front(), t_from});
    cmp.t1 = std::min({a.times.back(), b.times.back(), t_to});
    if (!(cmp.t0 < cmp.t1))
        throw DomainError("compare_traces: time windows are disjoint");

    const std::vector<double> Va = a.voltage();
    const std::vector<double> Vb = b.voltage();

    std::vector<double> grid;
    grid.reserve(a.size() + b.size());
    for (double t : a.times)
        if (t >= cmp.t0 && t <= cmp.t1) grid.push_back(t);
    for (double t : b.times)
        if (t >= cmp.t0 && t <= cmp.t1) grid.push_back(t);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    if (grid.size() < 2) throw DomainError("compare_traces: window has no samples");

    double sup = 0.0;
    double integral = 0.0;
    double prev_t = grid.front();
    double prev_d = interp(a.times, Va, prev_t) - interp(b.times, Vb, prev_t);
    sup = std::abs(prev_d);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double d = interp(a.times, Va, grid[i]) - interp(b.times, Vb, grid[i]);
        sup = std::max(sup, std::abs(d));
        integral += 0.5 * (d * d + prev_d * prev_d) * (grid[i] - prev_t);
        prev_t = grid[i];
        prev_d = d;
    }
    cmp.sup_dV = sup;
    cmp.rms_dV = std::sqrt(integral / (grid.back() - grid.front()));

    const APFeatures fa = ap_features(a, opts);
    const APFeatures fb = ap_features(b, opts);
    cmp.d_apd90 = (fa.ap_detected && fb.ap_detected) ? fa.apd90 - fb.apd90
                                                     : nan_value;
    return cmp;
}

void write_features_csv(const std::vector<std::pair<std::string, APFeatures>>& rows,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write features '" + path + "'");
    out << "trace,ap_detected,v_rest,v_peak,amplitude,t_upstroke,apd90,"
           "ead_count,repol_failure\n";
    out.precision(17);
    for (const auto& [name, f] : rows) {
        out << name << "," << (f.ap_detected ? 1 : 0) << "," << f.v_rest << ","
            << f.v_peak << "," << f.amplitude << "," << f.t_upstroke << ","
            << f.apd90 << "," << f.ead_count << "," << (f.repol_failure ? 1 : 0)
            << "\n";
    }
}

} // namespace cardiobif
