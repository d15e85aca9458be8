#pragma once

#include "cardiobif/continuation.hpp"

namespace cardiobif {

struct CyclePoint {
    double lambda = 0.0;
    double T = 0.0;              // period, ms
    std::vector<State> nodes;    // m shooting nodes
    double arclength = 0.0;
    std::vector<std::complex<double>> multipliers; // descending |mu|
    int trivial_index = -1;      // multiplier closest to +1
    bool stable = false;         // all nontrivial |mu| < 1
    double residual = 0.0;       // max closure defect, model units
    int iterations = 0;
    std::string flag;            // e.g. trivial-multiplier deviation note
};

struct CycleOptions {
    int m = 20;                // shooting nodes
    double dt_flow = 0.005;    // ms, target segment substep
    double shoot_tol = 1e-8;   // closure inf-norm, model units
    double floquet_tol = 1e-3; // trivial multiplier |mu - 1| bound
    double event_param_tol = 1e-4; // x param_scale, bisection exit
    double mult_tol = 1e-4;    // unit-circle distance at refined PD/torus
    int max_iter = 12;
    int bisect_max_iter = 40;
    StepControl step{0.05, 1e-5, 0.5, 1.4, 400};
    double eps_fd = 1e-6;      // scaled FD step for variational flows
    double hopf_eps = 0.01;    // scaled amplitude of the Hopf starting cycle
    double t_scale = 100.0;    // ms, period weight in the arclength metric
    double max_period = 5000.0; // ms, homoclinic-like guard
};

struct CycleBranch {
    std::string parameter;
    std::vector<CyclePoint> points;
    std::vector<BranchEvent> events;
    std::vector<CyclePoint> event_points; // refined cycles, aligned with events
    std::string termination;
};

// First corrected cycle near a Hopf event: nodes seeded on the linearised
// ellipse, Newton on (nodes, T, lambda) with amplitude and phase pins.
// `amplitude` <= 0 uses opts.hopf_eps.
CyclePoint cycle_from_hopf(const ParameterisedSystem& sys,
                           const BranchEvent& hopf,
                           const CycleOptions& opts = {},
                           double amplitude = 0.0);

// Pseudo-arclength continuation of limit cycles. `second` seeds the walk
// direction; pass nullptr to derive it from `first` (amplitude doubling for
// a Hopf-born cycle).
CycleBranch continue_cycles(const ParameterisedSystem& sys,
                            const CyclePoint& first, const CyclePoint* second,
                            double lambda_min, double lambda_max,
                            const CycleOptions& opts = {});

// Attempts a doubled-period restart at a period-doubling point: nodes run
// twice around the original cycle, perturbed along the critical Floquet mode
// with opposite signs on the two loops; solved at fixed lambda values probed
// on both sides of the event. Throws NewtonFailure if no doubled cycle
// converges (documented branch-switching limitation).
CyclePoint start_doubled_cycle(const ParameterisedSystem& sys,
                               const CyclePoint& pd_point,
                               const CycleOptions& opts = {});

// Recomputed single-shooting closure ||flow(node0, T) - node0||_inf.
double cycle_closure_residual(const ParameterisedSystem& sys,
                              const CyclePoint& point,
                              const CycleOptions& opts = {});

// parameter, arclength, stability flag, node-0 state components, leading
// nontrivial multiplier real+imag, plus a trailing period column.
void write_cycle_branch_csv(const CycleBranch& branch, Variant variant,
                            const std::string& path);

// Re-verifies each row by flowing node 0 over one period; tolerance grows
// with the leading multiplier magnitude (unstable cycles amplify the
// round-tripped state error).
void verify_cycle_branch_csv(const ParameterisedSystem& sys,
                             const std::string& path,
                             const CycleOptions& opts = {},
                             double base_tol = 1e-4);

} // namespace cardiobif
