#include "cardiobif/newton.hpp"

#include <algorithm>
#include <cmath>

#include "cardiobif/errors.hpp"
#include "cardiobif/model.hpp"

namespace cardiobif {

void ParameterisedSystem::flow(double* x, double lambda, double duration,
                               int substeps) const {
    const int n = dim();
    const double h = duration / substeps;
    State k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (int s = 0; s < substeps; ++s) {
        eval(x, lambda, k1.data());
        for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
        eval(tmp.data(), lambda, k2.data());
        for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
        eval(tmp.data(), lambda, k3.data());
        for (int i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
        eval(tmp.data(), lambda, k4.data());
        for (int i = 0; i < n; ++i)
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

CellSystem::CellSystem(const CellParameters& base, const std::string& parameter)
    : base_(base), name_(parameter) {
    get_parameter(base_, name_); // validates the name
}

int CellSystem::dim() const { return static_cast<int>(cardiobif::dim(base_.variant)); }

CellParameters CellSystem::at(double lambda) const {
    CellParameters p = base_;
    set_parameter(p, name_, lambda);
    return p;
}

void CellSystem::eval(const double* x, double lambda, double* f) const {
    CellParameters p = base_;
    set_parameter(p, name_, lambda);
    kernel::rhs(p, x, 0.0, f);
}

std::vector<double> CellSystem::scales() const { return state_scales(base_.variant); }

void CellSystem::flow(double* x, double lambda, double duration,
                      int substeps) const {
    const CellParameters p = at(lambda);
    const double h = duration / substeps;
    for (int s = 0; s < substeps; ++s) kernel::advance_rl(p, x, 0.0, h);
}

double CellSystem::param_scale() const {
    const double v = std::abs(get_parameter(base_, name_));
    return std::max(v, 1e-2);
}

Eigen::MatrixXd fd_jacobian(const ParameterisedSystem& sys, const State& x,
                            double lambda, FdScheme scheme, double eps) {
    const int n = sys.dim();
    if (static_cast<int>(x.size()) != n)
        throw DomainError("fd_jacobian: state dimension mismatch");
    Eigen::MatrixXd J(n, n);
    State xp(x), f0(n), f1(n), f2(n);
    if (scheme == FdScheme::forward) {
        sys.eval(x.data(), lambda, f0.data());
        for (int j = 0; j < n; ++j) {
            const double h = eps * std::max(1.0, std::abs(x[j]));
            xp[j] = x[j] + h;
            sys.eval(xp.data(), lambda, f1.data());
            xp[j] = x[j];
            for (int i = 0; i < n; ++i) J(i, j) = (f1[i] - f0[i]) / h;
        }
    } else {
        const double ceps = eps / 10.0;
        for (int j = 0; j < n; ++j) {
            const double h = ceps * std::max(1.0, std::abs(x[j]));
            xp[j] = x[j] + h;
            sys.eval(xp.data(), lambda, f1.data());
            xp[j] = x[j] - h;
            sys.eval(xp.data(), lambda, f2.data());
            xp[j] = x[j];
            for (int i = 0; i < n; ++i) J(i, j) = (f1[i] - f2[i]) / (2.0 * h);
        }
    }
    return J;
}

Eigen::VectorXd fd_dlambda(const ParameterisedSystem& sys, const State& x,
                           double lambda, FdScheme scheme, double eps) {
    const int n = sys.dim();
    Eigen::VectorXd col(n);
    State f0(n), f1(n), f2(n);
    const double h = (scheme == FdScheme::forward ? eps : eps / 10.0) *
                     std::max(1.0, std::abs(lambda));
    if (scheme == FdScheme::forward) {
        sys.eval(x.data(), lambda, f0.data());
        sys.eval(x.data(), lambda + h, f1.data());
        for (int i = 0; i < n; ++i) col(i) = (f1[i] - f0[i]) / h;
    } else {
        sys.eval(x.data(), lambda + h, f1.data());
        sys.eval(x.data(), lambda - h, f2.data());
        for (int i = 0; i < n; ++i) col(i) = (f1[i] - f2[i]) / (2.0 * h);
    }
    return col;
}

namespace {

bool eig_less(const std::complex<double>& a, const std::complex<double>& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
}

} // namespace

std::vector<std::complex<double>> eigenvalues_sorted(const Eigen::MatrixXd& A) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw DomainError("eigenvalue iteration did not converge");
    std::vector<std::complex<double>> out(A.rows());
    for (int i = 0; i < A.rows(); ++i) out[i] = solver.eigenvalues()(i);
    std::sort(out.begin(), out.end(), eig_less);
    return out;
}

void eigen_pairs(const Eigen::MatrixXd& A,
                 std::vector<std::complex<double>>& values,
                 Eigen::MatrixXcd& vectors) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A, /*computeEigenvectors=*/true);
    if (solver.info() != Eigen::Success)
        throw DomainError("eigenvalue iteration did not converge");
    const int n = static_cast<int>(A.rows());
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return eig_less(solver.eigenvalues()(a), solver.eigenvalues()(b));
    });
    values.resize(n);
    vectors.resize(n, n);
    for (int k = 0; k < n; ++k) {
        values[k] = solver.eigenvalues()(order[k]);
        vectors.col(k) = solver.eigenvectors().col(order[k]);
    }
}

int count_unstable(const std::vector<std::complex<double>>& eigs) {
    int n = 0;
    for (const auto& e : eigs)
        if (e.real() > 0.0) ++n;
    return n;
}

EquilibriumPoint newton_equilibrium(const ParameterisedSystem& sys,
                                    const State& guess, double lambda,
                                    const NewtonOptions& opts) {
    const int n = sys.dim();
    if (static_cast<int>(guess.size()) != n)
        throw DomainError("newton_equilibrium: guess dimension mismatch");
    for (double v : guess)
        if (!std::isfinite(v)) throw DomainError("newton_equilibrium: non-finite guess");

    State x = guess, f(n), x_try(n), f_try(n);
    const std::vector<double> sc = sys.scales();
    auto inf_norm = [n](const State& v) {
        double m = 0.0;
        for (int i = 0; i < n; ++i) m = std::max(m, std::abs(v[i]));
        return m;
    };
    auto step_norm = [&](const Eigen::VectorXd& v) {
        double m = 0.0;
        for (int i = 0; i < n; ++i) m = std::max(m, std::abs(v(i)) / sc[i]);
        return m;
    };
    sys.eval(x.data(), lambda, f.data());
    double res = inf_norm(f);

    EquilibriumPoint pt;
    pt.lambda = lambda;
    int iter = 0;
    while (res > opts.tol) {
        if (iter >= opts.max_iter)
            throw NewtonFailure("equilibrium Newton did not converge", res, iter);
        const Eigen::MatrixXd J = fd_jacobian(sys, x, lambda, FdScheme::forward,
                                              opts.eps_fd);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible())
            throw SingularJacobian("singular Jacobian in equilibrium Newton");
        Eigen::VectorXd rhs(n);
        for (int i = 0; i < n; ++i) rhs(i) = -f[i];
        const Eigen::VectorXd dx = lu.solve(rhs);
        const double nd = step_norm(dx);

        // Affine-invariant acceptance: the residual norm mixes units whose
        // stiffness spans ~10 orders, so an honest Newton step can raise it
        // transiently. Accept on contraction of the simplified correction
        // (same factorisation) measured in scaled state units instead.
        double alpha = 1.0;
        for (;;) {
            for (int i = 0; i < n; ++i) x_try[i] = x[i] + alpha * dx(i);
            bool finite = true;
            for (double v : x_try)
                if (!std::isfinite(v)) { finite = false; break; }
            bool accept = false;
            double res_try = 1e308;
            if (finite) {
                sys.eval(x_try.data(), lambda, f_try.data());
                res_try = inf_norm(f_try);
                for (int i = 0; i < n; ++i) rhs(i) = -f_try[i];
                const double nd_bar = step_norm(lu.solve(rhs));
                accept = res_try <= opts.tol ||
                         nd_bar <= (1.0 - 0.5 * alpha) * nd;
            }
            if (accept) {
                x = x_try;
                f = f_try;
                res = res_try;
                break;
            }
            alpha *= 0.5;
            if (alpha < 1.0 / 1024.0)
                throw NewtonFailure("equilibrium Newton line search stalled", res,
                                    iter);
        }
        ++iter;
    }

    pt.x = x;
    pt.residual = res;
    pt.iterations = iter;
    pt.eigenvalues = eigenvalues_sorted(
        fd_jacobian(sys, x, lambda, FdScheme::forward, opts.eps_fd));
    pt.stable = true;
    for (const auto& e : pt.eigenvalues)
        if (e.real() >= 0.0) { pt.stable = false; break; }
    return pt;
}

} // namespace cardiobif
