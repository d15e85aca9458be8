#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cardiobif/parameters.hpp"
#include "cardiobif/state.hpp"

namespace cardiobif {

// Autonomous vector field f(x, lambda) with one distinguished scalar
// parameter. Implementations must tolerate states slightly outside the
// physical domain (Newton iterates overshoot).
class ParameterisedSystem {
public:
    virtual ~ParameterisedSystem() = default;
    virtual int dim() const = 0;
    virtual void eval(const double* x, double lambda, double* f) const = 0;
    // Typical component magnitudes, weighting arclength/phase metrics.
    virtual std::vector<double> scales() const = 0;
    virtual double param_scale() const = 0;
    // Flow x in place over `duration` with `substeps` fixed smooth steps
    // (shooting segments differentiate this map, so the step count must not
    // depend on the state). Default: classic fixed-step RK4 on eval.
    virtual void flow(double* x, double lambda, double duration,
                      int substeps) const;
};

// Cell model vector field (no stimulus) with one registry parameter exposed
// as the continuation knob.
class CellSystem final : public ParameterisedSystem {
public:
    CellSystem(const CellParameters& base, const std::string& parameter);
    int dim() const override;
    void eval(const double* x, double lambda, double* f) const override;
    std::vector<double> scales() const override;
    double param_scale() const override;
    // Rush-Larsen/Euler substeps (the same kernel as the trace integrator).
    void flow(double* x, double lambda, double duration,
              int substeps) const override;

    const CellParameters& base() const { return base_; }
    const std::string& parameter() const { return name_; }
    // base parameters with the knob set to lambda
    CellParameters at(double lambda) const;

private:
    CellParameters base_;
    std::string name_;
};

enum class FdScheme { forward, central };

// d f/d x with per-component step h_j = eps * max(1, |x_j|). The central
// scheme (default step eps/10) is the higher-order cross-check oracle.
Eigen::MatrixXd fd_jacobian(const ParameterisedSystem& sys, const State& x,
                            double lambda, FdScheme scheme = FdScheme::forward,
                            double eps = 1e-7);

// d f/d lambda with step eps * max(1, |lambda|).
Eigen::VectorXd fd_dlambda(const ParameterisedSystem& sys, const State& x,
                           double lambda, FdScheme scheme = FdScheme::forward,
                           double eps = 1e-7);

// Full spectrum sorted by descending real part (conjugates adjacent,
// positive imaginary part first). Throws DomainError if the QR iteration
// fails to converge.
std::vector<std::complex<double>> eigenvalues_sorted(const Eigen::MatrixXd& A);

// Spectrum plus matching unit eigenvectors, same ordering.
void eigen_pairs(const Eigen::MatrixXd& A,
                 std::vector<std::complex<double>>& values,
                 Eigen::MatrixXcd& vectors);

int count_unstable(const std::vector<std::complex<double>>& eigs);

struct NewtonOptions {
    int max_iter = 50;
    double tol = 1e-10;   // on ||f||_inf in model units
    double eps_fd = 1e-7; // forward-difference Jacobian step factor
};

struct EquilibriumPoint {
    double lambda = 0.0;
    State x;
    double residual = 0.0; // ||f||_inf at x
    int iterations = 0;
    std::vector<std::complex<double>> eigenvalues; // descending real part
    bool stable = false; // all real parts < 0
    double arclength = 0.0;
    std::string flag; // e.g. grazing eigenvalue pair annotation
};

// Damped Newton on f(x, lambda) = 0 at fixed lambda. Attaches the spectrum.
// Throws NewtonFailure (no convergence / stalled line search) or
// SingularJacobian.
EquilibriumPoint newton_equilibrium(const ParameterisedSystem& sys,
                                    const State& guess, double lambda,
                                    const NewtonOptions& opts = {});

} // namespace cardiobif
