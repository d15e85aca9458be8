#pragma once

#include <string>
#include <vector>

#include "cardiobif/model.hpp"

namespace cardiobif {

struct Pulse {
    double start = 0.0;     // ms
    double duration = 2.0;  // ms
    double amplitude = 0.0; // pA/pF, positive depolarises
    double period = 0.0;    // ms; > 0 repeats the pulse indefinitely
};

// Rectangular pulse train(s). Pulses must not overlap for single-cell use.
struct StimulusProtocol {
    std::vector<Pulse> pulses;

    double value_at(double t) const;
    // Sorted times in (t0, t1) where the stimulus switches on or off; the
    // adaptive integrator splits segments there.
    std::vector<double> switch_times(double t0, double t1) const;
    void validate(double t_end) const; // throws DomainError on overlap/bad fields
};

enum class Method { rush_larsen_euler, adaptive_rk };

struct IntegratorConfig {
    Method method = Method::rush_larsen_euler;
    double dt = 0.02;        // ms, fixed-step path
    double abs_tol = 1e-8;   // adaptive path
    double rel_tol = 1e-6;
    double max_dt = 1.0;     // adaptive path cap
    int output_stride = 5;   // record every n-th fixed step
    double sample_dt = 0.1;  // ms, adaptive-path output grid
};

struct Trace {
    Variant variant = Variant::modified;
    std::vector<double> times;        // ms, strictly increasing
    std::vector<double> data;         // row-major, times.size() x dim
    std::size_t dim = 0;
    StimulusProtocol protocol;
    CellParameters params;

    std::size_t size() const { return times.size(); }
    const double* state_at(std::size_t i) const { return data.data() + i * dim; }
    double value(std::size_t i, std::size_t component) const {
        return data[i * dim + component];
    }
    std::vector<double> component(std::size_t c) const;
    std::vector<double> voltage() const { return component(0); }
};

// One fixed step; gates exponentially toward steady state with rates frozen
// at the step's start, the rest by forward Euler on the rhs.
State step_rush_larsen(const CellParameters& p, const State& x, double t,
                       double dt, const StimulusProtocol& protocol);

Trace simulate(const CellParameters& p, const State& x0,
               const StimulusProtocol& protocol, double t_end,
               const IntegratorConfig& config = {});

struct EquilibrateResult {
    State state;
    double residual; // max |rhs component| at the returned state
};

// Stimulus-free relaxation toward equilibrium.
EquilibrateResult equilibrate(const CellParameters& p, const State& guess,
                              double t_relax, double dt = 0.02);

} // namespace cardiobif
