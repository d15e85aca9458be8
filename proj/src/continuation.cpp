#include "cardiobif/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cardiobif/errors.hpp"

namespace cardiobif {

namespace {

constexpr double kImagTol = 1e-8; // below this an eigenvalue counts as real

struct Metric {
    std::vector<double> inv_scale; // 1/scale_j
    double inv_pscale;

    double norm(const State& dx, double dlambda) const {
        double s = 0.0;
        for (std::size_t j = 0; j < dx.size(); ++j) {
            const double v = dx[j] * inv_scale[j];
            s += v * v;
        }
        const double w = dlambda * inv_pscale;
        return std::sqrt(s + w * w);
    }
};

struct TangentVec {
    State x;         // physical components
    double lambda;   // physical component
};

double point_dist(const Metric& m, const EquilibriumPoint& a,
                  const EquilibriumPoint& b) {
    State dx(a.x.size());
    for (std::size_t j = 0; j < dx.size(); ++j) dx[j] = b.x[j] - a.x[j];
    return m.norm(dx, b.lambda - a.lambda);
}

TangentVec secant_tangent(const Metric& m, const EquilibriumPoint& from,
                          const EquilibriumPoint& to) {
    TangentVec t;
    t.x.resize(from.x.size());
    for (std::size_t j = 0; j < t.x.size(); ++j) t.x[j] = to.x[j] - from.x[j];
    t.lambda = to.lambda - from.lambda;
    const double n = m.norm(t.x, t.lambda);
    if (n == 0.0) throw DomainError("continuation: coincident branch points");
    for (double& v : t.x) v /= n;
    t.lambda /= n;
    return t;
}

// Largest real part among complex-pair eigenvalues (Hopf test); -inf when the
// spectrum is purely real.
double hopf_test(const std::vector<std::complex<double>>& eigs) {
    double best = -1e300;
    for (const auto& e : eigs)
        if (std::abs(e.imag()) > kImagTol) best = std::max(best, e.real());
    return best;
}

// Largest real eigenvalue (limit-point test).
double lp_test(const std::vector<std::complex<double>>& eigs) {
    double best = -1e300;
    for (const auto& e : eigs)
        if (std::abs(e.imag()) <= kImagTol) best = std::max(best, e.real());
    return best;
}

std::complex<double> leading_complex_pair(
    const std::vector<std::complex<double>>& eigs) {
    for (const auto& e : eigs)
        if (e.imag() > kImagTol) return e;
    return {0.0, 0.0};
}

// Newton corrector for [f(x,lambda); <t, u - u_pred>_scaled] = 0.
// Returns false when the corrector fails to converge.
bool correct_point(const ParameterisedSystem& sys, const Metric& m,
                   const TangentVec& t, const State& x_pred, double lambda_pred,
                   const ContinuationOptions& opts, EquilibriumPoint& out) {
    const int n = sys.dim();
    State x = x_pred;
    double lambda = lambda_pred;
    State f(n);

    for (int iter = 0; iter < opts.corrector_max_iter; ++iter) {
        bool finite = true;
        for (double v : x)
            if (!std::isfinite(v)) { finite = false; break; }
        if (!finite || !std::isfinite(lambda)) return false;

        sys.eval(x.data(), lambda, f.data());
        double res = 0.0;
        for (double v : f) res = std::max(res, std::abs(v));
        double c = t.lambda * (lambda - lambda_pred) * m.inv_pscale * m.inv_pscale;
        for (int j = 0; j < n; ++j)
            c += t.x[j] * (x[j] - x_pred[j]) * m.inv_scale[j] * m.inv_scale[j];

        if (res <= opts.newton.tol && std::abs(c) <= 1e-10) {
            out.lambda = lambda;
            out.x = x;
            out.residual = res;
            out.iterations = iter;
            return true;
        }

        Eigen::MatrixXd M(n + 1, n + 1);
        M.topLeftCorner(n, n) =
            fd_jacobian(sys, x, lambda, FdScheme::forward, opts.newton.eps_fd);
        M.block(0, n, n, 1) =
            fd_dlambda(sys, x, lambda, FdScheme::forward, opts.newton.eps_fd);
        for (int j = 0; j < n; ++j)
            M(n, j) = t.x[j] * m.inv_scale[j] * m.inv_scale[j];
        M(n, n) = t.lambda * m.inv_pscale * m.inv_pscale;

        Eigen::VectorXd rhs(n + 1);
        for (int i = 0; i < n; ++i) rhs(i) = -f[i];
        rhs(n) = -c;
        Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
        if (!lu.isInvertible()) return false;
        const Eigen::VectorXd du = lu.solve(rhs);
        for (int j = 0; j < n; ++j) x[j] += du(j);
        lambda += du(n);
    }
    return false;
}

void classify(const ParameterisedSystem& sys, const ContinuationOptions& opts,
              EquilibriumPoint& pt) {
    pt.eigenvalues = eigenvalues_sorted(
        fd_jacobian(sys, pt.x, pt.lambda, FdScheme::forward, opts.newton.eps_fd));
    pt.stable = true;
    for (const auto& e : pt.eigenvalues)
        if (e.real() >= 0.0) { pt.stable = false; break; }
}

// Bisection along the secant between two accepted points until the sign
// change of `test` is localised within the parameter tolerance (and, for
// Hopf, the pair's real part is below hopf_re_tol).
bool refine_event(const ParameterisedSystem& sys, const Metric& m,
                  const ContinuationOptions& opts, const EquilibriumPoint& a,
                  const EquilibriumPoint& b, bool is_hopf,
                  double (*test)(const std::vector<std::complex<double>>&),
                  EquilibriumPoint& out) {
    TangentVec t = secant_tangent(m, a, b);
    double s_lo = 0.0, s_hi = point_dist(m, a, b);
    double psi_lo = test(a.eigenvalues);
    EquilibriumPoint best = (std::abs(psi_lo) <
                             std::abs(test(b.eigenvalues)))
                                ? a
                                : b;
    const double lam_tol = opts.event_param_tol * (1.0 / m.inv_pscale);
    double lam_lo = a.lambda, lam_hi = b.lambda;

    for (int iter = 0; iter < opts.bisect_max_iter; ++iter) {
        const double psi_best = std::abs(test(best.eigenvalues));
        const bool lam_done = std::abs(lam_hi - lam_lo) <= lam_tol;
        if (lam_done && (!is_hopf || psi_best <= opts.hopf_re_tol)) break;

        const double s_mid = 0.5 * (s_lo + s_hi);
        State x_pred(a.x.size());
        for (std::size_t j = 0; j < x_pred.size(); ++j)
            x_pred[j] = a.x[j] + s_mid * t.x[j];
        const double lam_pred = a.lambda + s_mid * t.lambda;
        EquilibriumPoint mid;
        if (!correct_point(sys, m, t, x_pred, lam_pred, opts, mid)) {
            // shrink toward the lower end and retry next loop
            s_hi = 0.5 * (s_mid + s_hi);
            continue;
        }
        classify(sys, opts, mid);
        const double psi_mid = test(mid.eigenvalues);
        if (std::abs(psi_mid) < std::abs(test(best.eigenvalues))) best = mid;
        if ((psi_lo <= 0.0) == (psi_mid <= 0.0)) {
            s_lo = s_mid;
            psi_lo = psi_mid;
            lam_lo = mid.lambda;
        } else {
            s_hi = s_mid;
            lam_hi = mid.lambda;
        }
    }
    out = best;
    return true;
}

} // namespace

EquilibriumBranch continue_equilibria(const ParameterisedSystem& sys,
                                      const EquilibriumPoint& start,
                                      double lambda_min, double lambda_max,
                                      double direction,
                                      const ContinuationOptions& opts) {
    if (!(lambda_min < lambda_max))
        throw DomainError("continue_equilibria: empty parameter range");
    if (direction == 0.0)
        throw DomainError("continue_equilibria: direction must be nonzero");

    Metric m;
    m.inv_scale = sys.scales();
    for (double& v : m.inv_scale) v = 1.0 / v;
    m.inv_pscale = 1.0 / sys.param_scale();
    const double pscale = sys.param_scale();

    EquilibriumBranch branch;
    branch.termination = "max_points";

    // re-converge the seed and classify it
    EquilibriumPoint p0 = newton_equilibrium(sys, start.x, start.lambda, opts.newton);
    p0.arclength = 0.0;
    branch.points.push_back(p0);

    // first step by natural continuation in lambda
    EquilibriumPoint p1;
    {
        double dl = (direction > 0 ? 1.0 : -1.0) * opts.step.initial * pscale;
        bool ok = false;
        while (std::abs(dl) >= opts.step.min * pscale) {
            try {
                p1 = newton_equilibrium(sys, p0.x, p0.lambda + dl, opts.newton);
                ok = true;
                break;
            } catch (const NewtonFailure&) {
                dl *= 0.5;
            }
        }
        if (!ok) {
            branch.termination = "step size underflow at the first step";
            return branch;
        }
        p1.arclength = point_dist(m, p0, p1);
        branch.points.push_back(p1);
    }

    double h = opts.step.initial;
    while (static_cast<int>(branch.points.size()) < opts.step.max_points) {
        const EquilibriumPoint& prev = branch.points[branch.points.size() - 2];
        const EquilibriumPoint& cur = branch.points.back();
        if (cur.lambda < lambda_min || cur.lambda > lambda_max) {
            branch.termination = "range";
            break;
        }
        const TangentVec t = secant_tangent(m, prev, cur);

        EquilibriumPoint next;
        bool accepted = false;
        while (!accepted) {
            State x_pred(cur.x.size());
            for (std::size_t j = 0; j < x_pred.size(); ++j)
                x_pred[j] = cur.x[j] + h * t.x[j];
            const double lam_pred = cur.lambda + h * t.lambda;
            if (correct_point(sys, m, t, x_pred, lam_pred, opts, next)) {
                State dxp(cur.x.size());
                for (std::size_t j = 0; j < dxp.size(); ++j)
                    dxp[j] = next.x[j] - x_pred[j];
                const double from_pred = m.norm(dxp, next.lambda - lam_pred);
                const double from_cur = point_dist(m, cur, next);
                if (from_cur <= opts.step.max && from_pred <= std::max(h, 1e-6)) {
                    accepted = true;
                    break;
                }
            }
            h *= 0.5;
            if (h < opts.step.min) break;
        }
        if (!accepted) {
            branch.termination = "step size underflow (corrector repeatedly failed)";
            break;
        }
        classify(sys, opts, next);
        next.arclength = cur.arclength + point_dist(m, cur, next);
        branch.points.push_back(next);
        if (next.iterations <= 3) h = std::min(h * opts.step.grow, opts.step.max);
    }
    if (static_cast<int>(branch.points.size()) >= opts.step.max_points)
        branch.termination = "max_points";

    // event detection over consecutive pairs
    for (std::size_t k = 0; k + 1 < branch.points.size(); ++k) {
        const EquilibriumPoint& a = branch.points[k];
        const EquilibriumPoint& b = branch.points[k + 1];
        const double ha = hopf_test(a.eigenvalues);
        const double hb = hopf_test(b.eigenvalues);
        if (ha > -1e299 && hb > -1e299 && (ha <= 0.0) != (hb <= 0.0)) {
            EquilibriumPoint at;
            if (refine_event(sys, m, opts, a, b, true, hopf_test, at)) {
                BranchEvent ev;
                ev.kind = "hopf";
                ev.lambda = at.lambda;
                ev.x = at.x;
                const auto pair = leading_complex_pair(at.eigenvalues);
                ev.omega = std::abs(pair.imag());
                std::ostringstream d;
                d.precision(10);
                d << "pair re=" << pair.real() << " im=+-" << std::abs(pair.imag())
                  << "; crossing between lambda=" << a.lambda << " and "
                  << b.lambda;
                ev.diagnostics = d.str();
                branch.events.push_back(ev);
            }
        }
        const double la = lp_test(a.eigenvalues);
        const double lb = lp_test(b.eigenvalues);
        if ((la <= 0.0) != (lb <= 0.0)) {
            EquilibriumPoint at;
            if (refine_event(sys, m, opts, a, b, false, lp_test, at)) {
                BranchEvent ev;
                ev.kind = "limit-point";
                ev.lambda = at.lambda;
                ev.x = at.x;
                std::ostringstream d;
                d.precision(10);
                d << "real eigenvalue crossing zero between lambda=" << a.lambda
                  << " and " << b.lambda;
                ev.diagnostics = d.str();
                branch.events.push_back(ev);
            }
        }
    }

    // flag grazing (degenerate) Hopf candidates: pair real part dips inside
    // the Hopf tolerance without a sign change on either side
    for (std::size_t k = 1; k + 1 < branch.points.size(); ++k) {
        const double hm = hopf_test(branch.points[k - 1].eigenvalues);
        const double hc = hopf_test(branch.points[k].eigenvalues);
        const double hp = hopf_test(branch.points[k + 1].eigenvalues);
        if (std::abs(hc) < opts.hopf_re_tol && (hm <= 0.0) == (hc <= 0.0) &&
            (hp <= 0.0) == (hc <= 0.0))
            branch.points[k].flag = "degenerate-hopf-grazing";
    }
    return branch;
}

void write_branch_csv(const EquilibriumBranch& branch, Variant variant,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write branch '" + path + "'");
    out << "parameter,arclength,stable";
    for (const auto& name : component_names(variant)) out << "," << name;
    out << ",leading_re,leading_im\n";
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf;
    };
    for (const auto& p : branch.points) {
        put(p.lambda);
        out << ",";
        put(p.arclength);
        out << "," << (p.stable ? 1 : 0);
        for (double v : p.x) {
            out << ",";
            put(v);
        }
        const std::complex<double> lead =
            p.eigenvalues.empty() ? std::complex<double>(0, 0) : p.eigenvalues[0];
        out << ",";
        put(lead.real());
        out << ",";
        put(lead.imag());
        out << "\n";
    }
}

void write_events_csv(const std::vector<BranchEvent>& events,
                      const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write events '" + path + "'");
    out << "kind,parameter,diagnostics\n";
    char buf[32];
    for (const auto& e : events) {
        std::snprintf(buf, sizeof buf, "%.17g", e.lambda);
        out << e.kind << "," << buf << "," << e.diagnostics << "\n";
    }
}

EquilibriumBranch read_branch_csv(const ParameterisedSystem& sys,
                                  const std::string& path, double verify_tol) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read branch '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw DomainError("branch '" + path + "': empty file");
    const int n = sys.dim();
    // header sanity: parameter,arclength,stable + n components + leading pair
    {
        int cols = 1;
        for (char ch : line)
            if (ch == ',') ++cols;
        if (cols != n + 5)
            throw DomainError("branch '" + path + "': column count mismatch");
    }

    EquilibriumBranch branch;
    State f(n);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (static_cast<int>(vals.size()) != n + 5)
            throw DomainError("branch '" + path + "': bad row " +
                              std::to_string(row));
        EquilibriumPoint p;
        p.lambda = vals[0];
        p.arclength = vals[1];
        p.stable = vals[2] != 0.0;
        p.x.assign(vals.begin() + 3, vals.begin() + 3 + n);
        p.eigenvalues = {{vals[n + 3], vals[n + 4]}};
        sys.eval(p.x.data(), p.lambda, f.data());
        double res = 0.0;
        for (double v : f) res = std::max(res, std::abs(v));
        if (!(res <= verify_tol))
            throw DomainError("branch '" + path + "': point " +
                              std::to_string(row) +
                              " failed residual re-verification (" +
                              std::to_string(res) + ")");
        p.residual = res;
        branch.points.push_back(std::move(p));
    }
    return branch;
}

} // namespace cardiobif
