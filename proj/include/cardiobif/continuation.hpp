#pragma once

#include <string>
#include <vector>

#include "cardiobif/newton.hpp"

namespace cardiobif {

// Arclength step control in the scaled (state, parameter) metric
//   ds^2 = sum_j (dx_j/scale_j)^2 + (dlambda/param_scale)^2.
struct StepControl {
    double initial = 0.02;
    double min = 1e-7;
    double max = 0.25;
    double grow = 1.5; // applied after fast corrector convergence
    int max_points = 4000;
};

struct BranchEvent {
    std::string kind; // "hopf" | "limit-point" | "period-doubling" | "torus"
    double lambda = 0.0;
    State x;             // equilibrium / representative cycle node
    double omega = 0.0;  // Hopf: imaginary part of the crossing pair (rad/ms)
    double period = 0.0; // cycle events: period at the event
    std::string diagnostics;
};

struct ContinuationOptions {
    StepControl step;
    NewtonOptions newton;
    int corrector_max_iter = 8;
    double event_param_tol = 1e-4; // x param_scale, bisection exit
    double hopf_re_tol = 1e-6;     // |Re| of the pair at the refined point
    int bisect_max_iter = 60;
};

struct EquilibriumBranch {
    std::string parameter;
    std::vector<EquilibriumPoint> points;
    std::vector<BranchEvent> events;
    std::string termination; // "range" | "max_points" | truncation reason
};

// Pseudo-arclength walk from a converged start point. direction = initial
// sign of dlambda. Stops on leaving [lambda_min, lambda_max], on point
// budget, or on step-size underflow (reason recorded).
EquilibriumBranch continue_equilibria(const ParameterisedSystem& sys,
                                      const EquilibriumPoint& start,
                                      double lambda_min, double lambda_max,
                                      double direction,
                                      const ContinuationOptions& opts = {});

// One CSV per branch: parameter, arclength, stability flag, state
// components, leading eigenvalue real+imag.
void write_branch_csv(const EquilibriumBranch& branch, Variant variant,
                      const std::string& path);
// kind, parameter, diagnostics.
void write_events_csv(const std::vector<BranchEvent>& events,
                      const std::string& path);

// Loads a branch CSV and re-verifies every point's residual against the
// system (throws DomainError when a point fails verify_tol).
EquilibriumBranch read_branch_csv(const ParameterisedSystem& sys,
                                  const std::string& path,
                                  double verify_tol = 1e-8);

} // namespace cardiobif
