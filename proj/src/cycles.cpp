#include "cardiobif/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cardiobif/errors.hpp"

namespace cardiobif {

namespace {

constexpr double kImagRelTol = 1e-6; // multiplier counts as complex above this

struct Work {
    const ParameterisedSystem* sys;
    int n, m, N; // N = m*n + 2; U = [x_0..x_{m-1}, T, lambda]
    int nsub;    // substeps per segment, frozen for one solve
    std::vector<double> scale, inv_s, inv_s2;
    double pscale, t_scale, eps_fd;
};

Work make_work(const ParameterisedSystem& sys, const CycleOptions& o,
               double T_ref) {
    Work w;
    w.sys = &sys;
    w.n = sys.dim();
    w.m = o.m;
    w.N = w.m * w.n + 2;
    w.scale = sys.scales();
    w.inv_s.resize(w.n);
    w.inv_s2.resize(w.n);
    for (int j = 0; j < w.n; ++j) {
        w.inv_s[j] = 1.0 / w.scale[j];
        w.inv_s2[j] = w.inv_s[j] * w.inv_s[j];
    }
    w.pscale = sys.param_scale();
    w.t_scale = o.t_scale;
    w.eps_fd = o.eps_fd;
    w.nsub = std::max(1, static_cast<int>(std::ceil((T_ref / o.m) / o.dt_flow)));
    return w;
}

double unorm(const Work& w, const Eigen::VectorXd& dU) {
    double s = 0.0;
    for (int i = 0; i < w.m; ++i)
        for (int j = 0; j < w.n; ++j) {
            const double v = dU(i * w.n + j) * w.inv_s[j];
            s += v * v / w.m;
        }
    const double vT = dU(w.m * w.n) / w.t_scale;
    const double vL = dU(w.m * w.n + 1) / w.pscale;
    return std::sqrt(s + vT * vT + vL * vL);
}

// w.dot(U) = rhs, solved alongside the closure equations
struct AffineRow {
    Eigen::VectorXd w;
    double rhs = 0.0;
};

// Flows every segment; returns the closure inf-norm (inf on bad input) and
// fills endpoints + the closure part of r.
double closure(const Work& w, const Eigen::VectorXd& U,
               std::vector<State>& endp, Eigen::VectorXd& r) {
    const int n = w.n, m = w.m;
    const double T = U(m * n), lam = U(m * n + 1);
    if (!std::isfinite(T) || !std::isfinite(lam) || T <= 0.0) return 1e308;
    for (int k = 0; k < m * n; ++k)
        if (!std::isfinite(U(k))) return 1e308;
    const double seg = T / m;
    double rmax = 0.0;
    State y(n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) y[j] = U(i * n + j);
        w.sys->flow(y.data(), lam, seg, w.nsub);
        endp[i] = y;
        const int ip = (i + 1) % m;
        for (int j = 0; j < n; ++j) {
            const double rr = y[j] - U(ip * n + j);
            if (!std::isfinite(rr)) return 1e308;
            r(i * n + j) = rr;
            rmax = std::max(rmax, std::abs(rr));
        }
    }
    return rmax;
}

// Segment-flow Jacobian blocks at U (forward differences, scaled steps).
void assemble_B(const Work& w, const Eigen::VectorXd& U,
                const std::vector<State>& endp,
                std::vector<Eigen::MatrixXd>& B) {
    const int n = w.n, m = w.m;
    const double T = U(m * n), lam = U(m * n + 1);
    const double seg = T / m;
    B.assign(m, Eigen::MatrixXd(n, n));
    State y(n);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) {
            const double hj = w.eps_fd * w.scale[j];
            for (int k = 0; k < n; ++k) y[k] = U(i * n + k);
            y[j] += hj;
            w.sys->flow(y.data(), lam, seg, w.nsub);
            for (int k = 0; k < n; ++k) B[i](k, j) = (y[k] - endp[i][k]) / hj;
        }
    }
}

void assemble_full(const Work& w, const Eigen::VectorXd& U,
                   const std::vector<State>& endp,
                   std::vector<Eigen::MatrixXd>& B, Eigen::MatrixXd& M,
                   const AffineRow& c1, const AffineRow& c2) {
    const int n = w.n, m = w.m;
    const double T = U(m * n), lam = U(m * n + 1);
    const double seg = T / m;
    M.setZero(w.N, w.N);
    assemble_B(w, U, endp, B);
    State y(n), f(n);
    const double hlam = w.eps_fd * std::max(w.pscale, std::abs(lam));
    for (int i = 0; i < m; ++i) {
        M.block(i * n, i * n, n, n) = B[i];
        const int ip = (i + 1) % m;
        M.block(i * n, ip * n, n, n) -= Eigen::MatrixXd::Identity(n, n);
        w.sys->eval(endp[i].data(), lam, f.data());
        for (int k = 0; k < n; ++k) M(i * n + k, m * n) = f[k] / m;
        for (int k = 0; k < n; ++k) y[k] = U(i * n + k);
        w.sys->flow(y.data(), lam + hlam, seg, w.nsub);
        for (int k = 0; k < n; ++k)
            M(i * n + k, m * n + 1) = (y[k] - endp[i][k]) / hlam;
    }
    M.row(m * n) = c1.w.transpose();
    M.row(m * n + 1) = c2.w.transpose();
}

struct SolveOut {
    double residual = 0.0;
    int iterations = 0;
    std::vector<Eigen::MatrixXd> B; // segment Jacobians near the solution
};

bool solve_shooting(const Work& w, Eigen::VectorXd& U, const AffineRow& c1,
                    const AffineRow& c2, int max_iter, double tol,
                    SolveOut& out) {
    std::vector<State> endp(w.m, State(w.n));
    Eigen::VectorXd r(w.N);
    Eigen::MatrixXd M;
    double last_step = 1e300;
    for (int iter = 0;; ++iter) {
        const double rmax = closure(w, U, endp, r);
        if (rmax >= 1e308) return false;
        const double c1v = c1.w.dot(U) - c1.rhs;
        const double c2v = c2.w.dot(U) - c2.rhs;
        r(w.m * w.n) = c1v;
        r(w.m * w.n + 1) = c2v;
        if (rmax <= tol && std::abs(c1v) <= 1e-9 && std::abs(c2v) <= 1e-9) {
            out.residual = rmax;
            out.iterations = iter;
            if (out.B.empty() || last_step > 1e-5) assemble_B(w, U, endp, out.B);
            return true;
        }
        if (iter >= max_iter) return false;
        assemble_full(w, U, endp, out.B, M, c1, c2);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
        const Eigen::VectorXd du = lu.solve(-r);
        if (!du.allFinite()) return false;
        U += du;
        last_step = unorm(w, du);
        if (last_step > 1e3) return false; // diverging
    }
}

void attach_multipliers(const Work& w, const CycleOptions& opts,
                        const std::vector<Eigen::MatrixXd>& B, CyclePoint& p) {
    const int n = w.n;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < w.m; ++i) M = B[i] * M;
    Eigen::MatrixXd Ms(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Ms(i, j) = M(i, j) * w.scale[j] * w.inv_s[i];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(Ms, false);
    if (solver.info() != Eigen::Success) {
        p.flag = "multiplier extraction failed (QR iteration)";
        p.multipliers.clear();
        p.trivial_index = -1;
        p.stable = false;
        return;
    }
    p.multipliers.resize(n);
    for (int i = 0; i < n; ++i) p.multipliers[i] = solver.eigenvalues()(i);
    std::sort(p.multipliers.begin(), p.multipliers.end(),
              [](const std::complex<double>& a, const std::complex<double>& b) {
                  const double ma = std::abs(a), mb = std::abs(b);
                  if (ma != mb) return ma > mb;
                  return a.imag() > b.imag();
              });
    p.trivial_index = 0;
    double best = 1e300;
    for (int i = 0; i < n; ++i) {
        const double d = std::abs(p.multipliers[i] - std::complex<double>(1, 0));
        if (d < best) {
            best = d;
            p.trivial_index = i;
        }
    }
    if (best > opts.floquet_tol) {
        std::ostringstream os;
        os.precision(6);
        os << "trivial multiplier deviation |mu-1|=" << best;
        p.flag = os.str();
    }
    p.stable = true;
    for (int i = 0; i < n; ++i) {
        if (i == p.trivial_index) continue;
        if (std::abs(p.multipliers[i]) >= 1.0) {
            p.stable = false;
            break;
        }
    }
}

bool is_complex_mult(const std::complex<double>& mu) {
    return std::abs(mu.imag()) > kImagRelTol * std::max(1.0, std::abs(mu));
}

// > 0 once a real multiplier has passed through -1
double pd_test(const CyclePoint& p) {
    double mu_min = 0.0;
    for (int i = 0; i < static_cast<int>(p.multipliers.size()); ++i) {
        if (i == p.trivial_index || is_complex_mult(p.multipliers[i])) continue;
        mu_min = std::min(mu_min, p.multipliers[i].real());
    }
    return -mu_min - 1.0;
}

// > 0 once a complex pair has left the unit circle
double torus_test(const CyclePoint& p) {
    double best = -1e300;
    for (int i = 0; i < static_cast<int>(p.multipliers.size()); ++i) {
        if (i == p.trivial_index || !is_complex_mult(p.multipliers[i])) continue;
        best = std::max(best, std::abs(p.multipliers[i]));
    }
    return best > -1e299 ? best - 1.0 : -1.0;
}

std::complex<double> pd_critical(const CyclePoint& p) {
    std::complex<double> mu(0, 0);
    double best = 1e300;
    for (int i = 0; i < static_cast<int>(p.multipliers.size()); ++i) {
        if (i == p.trivial_index || is_complex_mult(p.multipliers[i])) continue;
        const double d = std::abs(p.multipliers[i].real() + 1.0);
        if (d < best) {
            best = d;
            mu = p.multipliers[i];
        }
    }
    return mu;
}

std::complex<double> torus_critical(const CyclePoint& p) {
    std::complex<double> mu(0, 0);
    double best = 1e300;
    for (int i = 0; i < static_cast<int>(p.multipliers.size()); ++i) {
        if (i == p.trivial_index || !is_complex_mult(p.multipliers[i])) continue;
        const double d = std::abs(std::abs(p.multipliers[i]) - 1.0);
        if (d < best) {
            best = d;
            mu = p.multipliers[i];
        }
    }
    return mu;
}

Eigen::VectorXd pack(const Work& w, const CyclePoint& p) {
    Eigen::VectorXd U(w.N);
    for (int i = 0; i < w.m; ++i)
        for (int j = 0; j < w.n; ++j) U(i * w.n + j) = p.nodes[i][j];
    U(w.m * w.n) = p.T;
    U(w.m * w.n + 1) = p.lambda;
    return U;
}

CyclePoint unpack(const Work& w, const Eigen::VectorXd& U) {
    CyclePoint p;
    p.nodes.assign(w.m, State(w.n));
    for (int i = 0; i < w.m; ++i)
        for (int j = 0; j < w.n; ++j) p.nodes[i][j] = U(i * w.n + j);
    p.T = U(w.m * w.n);
    p.lambda = U(w.m * w.n + 1);
    return p;
}

// Integral phase anchor referenced at `ref`: sum_i <f(ref_i), x_i - ref_i>_s.
AffineRow phase_row(const Work& w, const CyclePoint& ref) {
    AffineRow row;
    row.w = Eigen::VectorXd::Zero(w.N);
    State f(w.n);
    for (int i = 0; i < w.m; ++i) {
        w.sys->eval(ref.nodes[i].data(), ref.lambda, f.data());
        for (int j = 0; j < w.n; ++j) row.w(i * w.n + j) = f[j] * w.inv_s2[j];
    }
    row.rhs = row.w.dot(pack(w, ref));
    return row;
}

AffineRow arc_row(const Work& w, const Eigen::VectorXd& tangent,
                  const Eigen::VectorXd& U_pred) {
    AffineRow row;
    row.w = Eigen::VectorXd::Zero(w.N);
    for (int i = 0; i < w.m; ++i)
        for (int j = 0; j < w.n; ++j)
            row.w(i * w.n + j) = tangent(i * w.n + j) * w.inv_s2[j] / w.m;
    row.w(w.m * w.n) = tangent(w.m * w.n) / (w.t_scale * w.t_scale);
    row.w(w.m * w.n + 1) = tangent(w.m * w.n + 1) / (w.pscale * w.pscale);
    row.rhs = row.w.dot(U_pred);
    return row;
}

AffineRow lambda_pin_row(const Work& w, double lambda) {
    AffineRow row;
    row.w = Eigen::VectorXd::Zero(w.N);
    row.w(w.m * w.n + 1) = 1.0;
    row.rhs = lambda;
    return row;
}

double node_spread(const Work& w, const CyclePoint& p) {
    double spread = 0.0;
    for (int j = 0; j < w.n; ++j) {
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < w.m; ++i) {
            lo = std::min(lo, p.nodes[i][j]);
            hi = std::max(hi, p.nodes[i][j]);
        }
        spread = std::max(spread, (hi - lo) * w.inv_s[j]);
    }
    return spread;
}

// Corrects a predicted cycle with phase anchor (ref = `ref`) + arclength row.
bool correct_cycle(const ParameterisedSystem& sys, const CycleOptions& opts,
                   const CyclePoint& ref, const Eigen::VectorXd& tangent,
                   const Eigen::VectorXd& U_pred, CyclePoint& out) {
    const double T_pred = U_pred(opts.m * sys.dim());
    if (!(T_pred > 0.0)) return false;
    Work w = make_work(sys, opts, T_pred);
    const AffineRow c1 = phase_row(w, ref);
    const AffineRow c2 = arc_row(w, tangent, U_pred);
    Eigen::VectorXd U = U_pred;
    SolveOut so;
    if (!solve_shooting(w, U, c1, c2, opts.max_iter, opts.shoot_tol, so))
        return false;
    out = unpack(w, U);
    out.residual = so.residual;
    out.iterations = so.iterations;
    attach_multipliers(w, opts, so.B, out);
    return true;
}

struct EventSpec {
    const char* kind;
    double (*test)(const CyclePoint&);
    std::complex<double> (*critical)(const CyclePoint&);
};

void refine_cycle_event(const ParameterisedSystem& sys,
                        const CycleOptions& opts, const EventSpec& spec,
                        const CyclePoint& a, const CyclePoint& b,
                        CycleBranch& branch) {
    Work w = make_work(sys, opts, a.T);
    const Eigen::VectorXd Ua = pack(w, a), Ub = pack(w, b);
    Eigen::VectorXd t = Ub - Ua;
    const double gap = unorm(w, t);
    if (gap == 0.0) return;
    t /= gap;

    double s_lo = 0.0, s_hi = gap;
    double psi_lo = spec.test(a);
    double lam_lo = a.lambda, lam_hi = b.lambda;
    const CyclePoint* best = &a;
    CyclePoint mid, best_store = a;
    if (std::abs(spec.test(b)) < std::abs(spec.test(best_store)))
        best_store = b;
    const double lam_tol = opts.event_param_tol * w.pscale;

    for (int iter = 0; iter < opts.bisect_max_iter; ++iter) {
        const double unit_dist = std::abs(std::abs(spec.critical(best_store)) - 1.0);
        if (std::abs(lam_hi - lam_lo) <= lam_tol && unit_dist <= opts.mult_tol)
            break;
        const double s_mid = 0.5 * (s_lo + s_hi);
        const Eigen::VectorXd U_pred = Ua + s_mid * t;
        if (!correct_cycle(sys, opts, a, t, U_pred, mid)) {
            s_hi = 0.5 * (s_mid + s_hi);
            continue;
        }
        if (std::abs(spec.test(mid)) < std::abs(spec.test(best_store)))
            best_store = mid;
        if ((psi_lo <= 0.0) == (spec.test(mid) <= 0.0)) {
            s_lo = s_mid;
            psi_lo = spec.test(mid);
            lam_lo = mid.lambda;
        } else {
            s_hi = s_mid;
            lam_hi = mid.lambda;
        }
    }
    (void)best;

    BranchEvent ev;
    ev.kind = spec.kind;
    ev.lambda = best_store.lambda;
    ev.x = best_store.nodes.empty() ? State{} : best_store.nodes[0];
    ev.period = best_store.T;
    const std::complex<double> mu = spec.critical(best_store);
    std::ostringstream d;
    d.precision(10);
    d << "critical multiplier " << mu.real() << (mu.imag() < 0 ? "-" : "+")
      << std::abs(mu.imag()) << "i; |mu|=" << std::abs(mu)
      << "; bracket [" << std::min(a.lambda, b.lambda) << ";"
      << std::max(a.lambda, b.lambda) << "]";
    ev.diagnostics = d.str();
    branch.events.push_back(ev);
    branch.event_points.push_back(best_store);
}

} // namespace

CyclePoint cycle_from_hopf(const ParameterisedSystem& sys,
                           const BranchEvent& hopf, const CycleOptions& opts,
                           double amplitude) {
    const int n = sys.dim();
    if (static_cast<int>(hopf.x.size()) != n)
        throw DomainError("cycle_from_hopf: event state dimension mismatch");
    const Eigen::MatrixXd J =
        fd_jacobian(sys, hopf.x, hopf.lambda, FdScheme::forward, 1e-7);
    std::vector<std::complex<double>> vals;
    Eigen::MatrixXcd vecs;
    eigen_pairs(J, vals, vecs);
    int k = -1;
    double best = 1e300;
    for (int i = 0; i < n; ++i)
        if (vals[i].imag() > 1e-8 && std::abs(vals[i].real()) < best) {
            best = std::abs(vals[i].real());
            k = i;
        }
    if (k < 0) throw DomainError("cycle_from_hopf: no complex pair at the event");
    const double omega = vals[k].imag();

    Work w = make_work(sys, opts, 2.0 * M_PI / omega);
    State wre(n), wim(n);
    for (int j = 0; j < n; ++j) {
        wre[j] = vecs(j, k).real();
        wim[j] = vecs(j, k).imag();
    }
    auto sdot = [&](const State& a, const State& b) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += a[j] * b[j] * w.inv_s2[j];
        return s;
    };
    // rotate the pair onto principal axes of the scaled metric, then make
    // the real part unit length so the amplitude pin reads in scaled units
    {
        const double phi =
            0.5 * std::atan2(2.0 * sdot(wre, wim), sdot(wre, wre) - sdot(wim, wim));
        State re2(n), im2(n);
        for (int j = 0; j < n; ++j) {
            re2[j] = std::cos(phi) * wre[j] - std::sin(phi) * wim[j];
            im2[j] = std::sin(phi) * wre[j] + std::cos(phi) * wim[j];
        }
        const double nr = std::sqrt(sdot(re2, re2));
        for (int j = 0; j < n; ++j) {
            wre[j] = re2[j] / nr;
            wim[j] = im2[j] / nr;
        }
    }

    const double eps = amplitude > 0.0 ? amplitude : opts.hopf_eps;
    Eigen::VectorXd U(w.N);
    for (int i = 0; i < w.m; ++i) {
        const double th = 2.0 * M_PI * i / w.m;
        for (int j = 0; j < n; ++j)
            U(i * n + j) =
                hopf.x[j] + eps * (wre[j] * std::cos(th) - wim[j] * std::sin(th));
    }
    U(w.m * n) = 2.0 * M_PI / omega;
    U(w.m * n + 1) = hopf.lambda;

    AffineRow phase, amp;
    phase.w = Eigen::VectorXd::Zero(w.N);
    amp.w = Eigen::VectorXd::Zero(w.N);
    for (int j = 0; j < n; ++j) {
        phase.w(j) = wim[j] * w.inv_s2[j];
        amp.w(j) = wre[j] * w.inv_s2[j];
    }
    double ph0 = 0.0, am0 = 0.0;
    for (int j = 0; j < n; ++j) {
        ph0 += wim[j] * w.inv_s2[j] * hopf.x[j];
        am0 += wre[j] * w.inv_s2[j] * hopf.x[j];
    }
    phase.rhs = ph0;
    amp.rhs = am0 + eps;

    SolveOut so;
    if (!solve_shooting(w, U, phase, amp, opts.max_iter, opts.shoot_tol, so))
        throw NewtonFailure("cycle_from_hopf: shooting Newton failed", 0.0,
                            opts.max_iter);
    CyclePoint p = unpack(w, U);
    p.residual = so.residual;
    p.iterations = so.iterations;
    attach_multipliers(w, opts, so.B, p);
    return p;
}

CycleBranch continue_cycles(const ParameterisedSystem& sys,
                            const CyclePoint& first, const CyclePoint* second,
                            double lambda_min, double lambda_max,
                            const CycleOptions& opts) {
    CycleBranch branch;
    branch.termination = "max_points";
    branch.points.push_back(first);
    branch.points.front().arclength = 0.0;

    Work w0 = make_work(sys, opts, first.T);
    if (second) {
        branch.points.push_back(*second);
    } else {
        // derive a second point by a small natural-parameter step
        bool ok = false;
        for (double sgn : {1.0, -1.0}) {
            const double lam = first.lambda + sgn * 1e-3 * w0.pscale;
            Work w = make_work(sys, opts, first.T);
            Eigen::VectorXd U = pack(w, first);
            U(w.m * w.n + 1) = lam;
            const AffineRow c1 = phase_row(w, first);
            const AffineRow c2 = lambda_pin_row(w, lam);
            SolveOut so;
            if (solve_shooting(w, U, c1, c2, opts.max_iter, opts.shoot_tol, so)) {
                CyclePoint p = unpack(w, U);
                p.residual = so.residual;
                p.iterations = so.iterations;
                attach_multipliers(w, opts, so.B, p);
                branch.points.push_back(p);
                ok = true;
                break;
            }
        }
        if (!ok) {
            branch.termination = "could not seed a second cycle point";
            return branch;
        }
    }
    branch.points.back().arclength =
        unorm(w0, pack(w0, branch.points.back()) - pack(w0, branch.points.front()));

    double h = opts.step.initial;
    while (static_cast<int>(branch.points.size()) < opts.step.max_points) {
        const CyclePoint& prev = branch.points[branch.points.size() - 2];
        const CyclePoint& cur = branch.points.back();
        if (cur.lambda < lambda_min || cur.lambda > lambda_max) {
            branch.termination = "range";
            break;
        }
        if (cur.T > opts.max_period) {
            branch.termination =
                "period exceeded limit (homoclinic-like approach to the "
                "equilibrium branch)";
            break;
        }
        Work w = make_work(sys, opts, cur.T);
        if (node_spread(w, cur) < 1e-3) {
            branch.termination = "cycle amplitude collapsed onto the equilibrium branch";
            break;
        }
        Eigen::VectorXd t = pack(w, cur) - pack(w, prev);
        const double tn = unorm(w, t);
        if (tn == 0.0) {
            branch.termination = "coincident cycle points";
            break;
        }
        t /= tn;

        CyclePoint next;
        bool accepted = false;
        while (!accepted) {
            const Eigen::VectorXd U_pred = pack(w, cur) + h * t;
            if (correct_cycle(sys, opts, cur, t, U_pred, next)) {
                const double from_cur = unorm(w, pack(w, next) - pack(w, cur));
                const double from_pred = unorm(w, pack(w, next) - U_pred);
                if (from_cur <= opts.step.max &&
                    from_pred <= std::max(h, 1e-4) && next.T > 0.0) {
                    accepted = true;
                    break;
                }
            }
            h *= 0.5;
            if (h < opts.step.min) break;
        }
        if (!accepted) {
            branch.termination = "step size underflow (shooting Newton repeatedly failed)";
            break;
        }
        next.arclength = cur.arclength + unorm(w, pack(w, next) - pack(w, cur));
        branch.points.push_back(next);
        if (next.iterations <= 4) h = std::min(h * opts.step.grow, opts.step.max);
    }

    const EventSpec specs[] = {{"period-doubling", pd_test, pd_critical},
                               {"torus", torus_test, torus_critical}};
    for (std::size_t k = 0; k + 1 < branch.points.size(); ++k) {
        const CyclePoint& a = branch.points[k];
        const CyclePoint& b = branch.points[k + 1];
        if (a.multipliers.empty() || b.multipliers.empty()) continue;
        for (const auto& spec : specs) {
            const double pa = spec.test(a), pb = spec.test(b);
            if ((pa <= 0.0) != (pb <= 0.0))
                refine_cycle_event(sys, opts, spec, a, b, branch);
        }
    }
    return branch;
}

CyclePoint start_doubled_cycle(const ParameterisedSystem& sys,
                               const CyclePoint& pd_point,
                               const CycleOptions& opts) {
    const int n = sys.dim(), m = opts.m;
    if (m % 2 != 0)
        throw DomainError("start_doubled_cycle: even node count required");
    Work w = make_work(sys, opts, pd_point.T);

    // segment Jacobians at the PD point for the critical mode shape
    Eigen::VectorXd U0 = pack(w, pd_point);
    std::vector<State> endp(m, State(n));
    Eigen::VectorXd r(w.N);
    if (closure(w, U0, endp, r) >= 1e308)
        throw DomainError("start_doubled_cycle: cannot flow the PD cycle");
    std::vector<Eigen::MatrixXd> B;
    assemble_B(w, U0, endp, B);

    Eigen::MatrixXd Mono = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < m; ++i) Mono = B[i] * Mono;
    Eigen::MatrixXd Ms(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) Ms(i, j) = Mono(i, j) * w.scale[j] * w.inv_s[i];
    std::vector<std::complex<double>> vals;
    Eigen::MatrixXcd vecs;
    {
        Eigen::EigenSolver<Eigen::MatrixXd> solver(Ms, true);
        if (solver.info() != Eigen::Success)
            throw DomainError("start_doubled_cycle: eigen solve failed");
        vals.resize(n);
        for (int i = 0; i < n; ++i) vals[i] = solver.eigenvalues()(i);
        vecs = solver.eigenvectors();
    }
    int k = -1;
    double best = 1e300;
    for (int i = 0; i < n; ++i) {
        const double d = std::abs(vals[i] - std::complex<double>(-1.0, 0.0));
        if (d < best) {
            best = d;
            k = i;
        }
    }
    if (k < 0 || best > 0.2)
        throw DomainError("start_doubled_cycle: no multiplier near -1");

    // critical mode propagated along the cycle (normalised per node)
    std::vector<State> mode(m, State(n));
    State v(n);
    for (int j = 0; j < n; ++j) v[j] = vecs(j, k).real() * w.scale[j];
    for (int i = 0; i < m; ++i) {
        double norm = 0.0;
        for (int j = 0; j < n; ++j) {
            const double s = v[j] * w.inv_s[j];
            norm += s * s;
        }
        norm = std::sqrt(norm);
        for (int j = 0; j < n; ++j) mode[i][j] = v[j] / norm;
        Eigen::VectorXd vv(n);
        for (int j = 0; j < n; ++j) vv(j) = v[j];
        vv = B[i] * vv;
        for (int j = 0; j < n; ++j) v[j] = vv(j);
    }

    const double eps = 2.0 * opts.hopf_eps;
    CyclePoint guess;
    guess.T = 2.0 * pd_point.T;
    guess.nodes.assign(m, State(n));
    for (int i = 0; i < m; ++i) {
        const int orig = (2 * i) % m;
        const double sign = (2 * i) < m ? 1.0 : -1.0;
        for (int j = 0; j < n; ++j)
            guess.nodes[i][j] = pd_point.nodes[orig][j] + sign * eps * mode[orig][j];
    }

    const double lam_tol = opts.event_param_tol * w.pscale;
    for (double off : {2.0 * lam_tol, -2.0 * lam_tol, 20.0 * lam_tol,
                       -20.0 * lam_tol, 200.0 * lam_tol, -200.0 * lam_tol}) {
        const double lam = pd_point.lambda + off;
        guess.lambda = lam;
        Work wd = make_work(sys, opts, guess.T);
        Eigen::VectorXd U = pack(wd, guess);
        const AffineRow c1 = phase_row(wd, guess);
        const AffineRow c2 = lambda_pin_row(wd, lam);
        SolveOut so;
        if (!solve_shooting(wd, U, c1, c2, opts.max_iter, opts.shoot_tol, so))
            continue;
        CyclePoint p = unpack(wd, U);
        // reject convergence back onto the period-1 cycle
        double half_gap = 0.0;
        for (int i = 0; i < m / 2; ++i)
            for (int j = 0; j < n; ++j)
                half_gap = std::max(half_gap,
                                    std::abs(p.nodes[i][j] - p.nodes[i + m / 2][j]) *
                                        wd.inv_s[j]);
        if (half_gap < std::max(1e-3, 0.25 * eps)) continue;
        p.residual = so.residual;
        p.iterations = so.iterations;
        attach_multipliers(wd, opts, so.B, p);
        return p;
    }
    throw NewtonFailure("start_doubled_cycle: no doubled cycle converged near the event",
                        0.0, opts.max_iter);
}

double cycle_closure_residual(const ParameterisedSystem& sys,
                              const CyclePoint& point,
                              const CycleOptions& opts) {
    const int n = sys.dim();
    State y = point.nodes.at(0);
    const int ns = std::max(1, static_cast<int>(std::ceil(point.T / opts.dt_flow)));
    sys.flow(y.data(), point.lambda, point.T, ns);
    double r = 0.0;
    for (int j = 0; j < n; ++j) r = std::max(r, std::abs(y[j] - point.nodes[0][j]));
    return r;
}

namespace {

std::complex<double> leading_nontrivial(const CyclePoint& p) {
    for (int i = 0; i < static_cast<int>(p.multipliers.size()); ++i)
        if (i != p.trivial_index) return p.multipliers[i];
    return {0.0, 0.0};
}

} // namespace

void write_cycle_branch_csv(const CycleBranch& branch, Variant variant,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write cycle branch '" + path + "'");
    out << "parameter,arclength,stable";
    for (const auto& name : component_names(variant)) out << "," << name;
    out << ",leading_re,leading_im,period\n";
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
        for (double v : p.nodes.at(0)) {
            out << ",";
            put(v);
        }
        const auto mu = leading_nontrivial(p);
        out << ",";
        put(mu.real());
        out << ",";
        put(mu.imag());
        out << ",";
        put(p.T);
        out << "\n";
    }
}

void verify_cycle_branch_csv(const ParameterisedSystem& sys,
                             const std::string& path, const CycleOptions& opts,
                             double base_tol) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot read cycle branch '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw DomainError("cycle branch '" + path + "': empty file");
    const int n = sys.dim();
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> vals;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        if (static_cast<int>(vals.size()) != n + 6)
            throw DomainError("cycle branch '" + path + "': bad row " +
                              std::to_string(row));
        CyclePoint p;
        p.lambda = vals[0];
        p.nodes.assign(1, State(vals.begin() + 3, vals.begin() + 3 + n));
        const double mu_mag = std::hypot(vals[n + 3], vals[n + 4]);
        p.T = vals[n + 5];
        double x_mag = 1.0;
        for (double v : p.nodes[0]) x_mag = std::max(x_mag, std::abs(v));
        const double tol = base_tol * (1.0 + mu_mag) * x_mag;
        const double res = cycle_closure_residual(sys, p, opts);
        if (!(res <= tol))
            throw DomainError("cycle branch '" + path + "': point " +
                              std::to_string(row) +
                              " failed closure re-verification (" +
                              std::to_string(res) + " > " + std::to_string(tol) +
                              ")");
    }
}

} // namespace cardiobif
