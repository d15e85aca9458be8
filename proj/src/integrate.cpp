#include "cardiobif/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "cardiobif/errors.hpp"

namespace cardiobif {

double StimulusProtocol::value_at(double t) const {
    double total = 0.0;
    for (const auto& p : pulses) {
        double local = t - p.start;
        if (p.period > 0.0 && local >= 0.0)
            local -= p.period * std::floor(local / p.period);
        if (local >= 0.0 && local < p.duration) total += p.amplitude;
    }
    return total;
}

std::vector<double> StimulusProtocol::switch_times(double t0, double t1) const {
    std::vector<double> ts;
    for (const auto& p : pulses) {
        const auto add = [&](double t) {
            if (t > t0 && t < t1) ts.push_back(t);
        };
        if (p.period > 0.0) {
            const long k0 = std::max(0L, static_cast<long>(
                                             std::floor((t0 - p.start) / p.period)) - 1);
            for (long k = k0;; ++k) {
                const double on = p.start + static_cast<double>(k) * p.period;
                if (on >= t1) break;
                add(on);
                add(on + p.duration);
            }
        } else {
            add(p.start);
            add(p.start + p.duration);
        }
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

void StimulusProtocol::validate(double t_end) const {
    std::vector<std::pair<double, double>> windows;
    for (const auto& p : pulses) {
        if (!(p.duration > 0.0))
            throw DomainError("stimulus pulse duration must be positive");
        if (!(std::isfinite(p.start) && std::isfinite(p.amplitude)))
            throw DomainError("stimulus pulse has non-finite fields");
        if (p.period > 0.0 && p.period <= p.duration)
            throw DomainError("stimulus pulse period must exceed its duration");
        if (p.period > 0.0) {
            for (double on = p.start; on < t_end; on += p.period)
                windows.emplace_back(on, on + p.duration);
        } else {
            windows.emplace_back(p.start, p.start + p.duration);
        }
    }
    std::sort(windows.begin(), windows.end());
    for (std::size_t i = 1; i < windows.size(); ++i)
        if (windows[i].first < windows[i - 1].second)
            throw DomainError("stimulus pulses overlap in time");
}

std::vector<double> Trace::component(std::size_t c) const {
    std::vector<double> out(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) out[i] = data[i * dim + c];
    return out;
}

namespace {

void check_finite(const double* x, std::size_t n, double t) {
    for (std::size_t i = 0; i < n; ++i)
        if (!std::isfinite(x[i]))
            throw IntegrationDiverged("integration diverged (non-finite state) at t=" +
                                          std::to_string(t) + " ms",
                                      t);
}

// Dormand-Prince 5(4) pair.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // embedded 4th-order weights
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695,
                            e4 = 393.0 / 640, e5 = -92097.0 / 339200,
                            e6 = 187.0 / 2100, e7 = 1.0 / 40;
};

// Integrates over [t0, t1] with constant stimulus amplitude (the caller splits
// at pulse edges). x is updated in place; k1 holds rhs(x) on entry and exit
// (FSAL). Returns nothing; dt_state carries the adaptive step between calls.
class RkSegmentIntegrator {
public:
    RkSegmentIntegrator(const CellParameters& p, const IntegratorConfig& cfg)
        : p_(p), cfg_(cfg), n_(dim(p.variant)) {
        for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &xt_, &x5_})
            v->resize(n_);
    }

    void start(const State& x, double i_stim) {
        kernel::rhs(p_, x.data(), i_stim, k1_.data());
    }

    void run(State& x, double t0, double t1, double i_stim, double& dt) {
        double t = t0;
        while (t < t1) {
            dt = std::min({dt, cfg_.max_dt, t1 - t});
            if (!(dt > 0.0)) break;
            const double err = attempt(x, t, dt, i_stim);
            if (std::isfinite(err) && err <= 1.0) {
                t += dt;
                x.swap(x5_);
                k1_.swap(k7_); // FSAL
                check_finite(x.data(), n_, t);
                dt *= std::clamp(0.9 * std::pow(err > 1e-12 ? err : 1e-12, -0.2),
                                 1.0, 5.0);
            } else {
                // A non-finite error means the trial step left the model's
                // domain entirely (sub-microsecond gate rates blow up explicit
                // stages); shrink hard and retry.
                dt *= std::isfinite(err)
                          ? std::max(0.9 * std::pow(err, -0.2), 0.2)
                          : 0.2;
                if (dt < 1e-10)
                    throw IntegrationDiverged(
                        "adaptive step size underflow at t=" + std::to_string(t) +
                            " ms",
                        t);
            }
        }
    }

private:
    // One trial step; fills x5_ (5th-order result) and k7_ = rhs(x5_).
    // Returns the scaled error norm.
    double attempt(const State& x, double t, double dt, double i_stim) {
        using D = Dopri5;
        (void)t;
        for (std::size_t i = 0; i < n_; ++i)
            xt_[i] = x[i] + dt * D::a21 * k1_[i];
        kernel::rhs(p_, xt_.data(), i_stim, k2_.data());
        for (std::size_t i = 0; i < n_; ++i)
            xt_[i] = x[i] + dt * (D::a31 * k1_[i] + D::a32 * k2_[i]);
        kernel::rhs(p_, xt_.data(), i_stim, k3_.data());
        for (std::size_t i = 0; i < n_; ++i)
            xt_[i] = x[i] + dt * (D::a41 * k1_[i] + D::a42 * k2_[i] + D::a43 * k3_[i]);
        kernel::rhs(p_, xt_.data(), i_stim, k4_.data());
        for (std::size_t i = 0; i < n_; ++i)
            xt_[i] = x[i] + dt * (D::a51 * k1_[i] + D::a52 * k2_[i] +
                                  D::a53 * k3_[i] + D::a54 * k4_[i]);
        kernel::rhs(p_, xt_.data(), i_stim, k5_.data());
        for (std::size_t i = 0; i < n_; ++i)
            xt_[i] = x[i] + dt * (D::a61 * k1_[i] + D::a62 * k2_[i] +
                                  D::a63 * k3_[i] + D::a64 * k4_[i] +
                                  D::a65 * k5_[i]);
        kernel::rhs(p_, xt_.data(), i_stim, k6_.data());
        for (std::size_t i = 0; i < n_; ++i)
            x5_[i] = x[i] + dt * (D::b1 * k1_[i] + D::b3 * k3_[i] + D::b4 * k4_[i] +
                                  D::b5 * k5_[i] + D::b6 * k6_[i]);
        kernel::rhs(p_, x5_.data(), i_stim, k7_.data());
        double err = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double x4 = x[i] + dt * (D::e1 * k1_[i] + D::e3 * k3_[i] +
                                           D::e4 * k4_[i] + D::e5 * k5_[i] +
                                           D::e6 * k6_[i] + D::e7 * k7_[i]);
            const double sc =
                cfg_.abs_tol +
                cfg_.rel_tol * std::max(std::abs(x[i]), std::abs(x5_[i]));
            const double d = (x5_[i] - x4) / sc;
            err += d * d;
        }
        return std::sqrt(err / static_cast<double>(n_));
    }

    const CellParameters& p_;
    const IntegratorConfig& cfg_;
    std::size_t n_;
    State k1_, k2_, k3_, k4_, k5_, k6_, k7_, xt_, x5_;
};

Trace simulate_rl(const CellParameters& p, const State& x0,
                  const StimulusProtocol& protocol, double t_end,
                  const IntegratorConfig& cfg) {
    const std::size_t n = dim(p.variant);
    const long n_steps = static_cast<long>(std::ceil(t_end / cfg.dt - 1e-9));
    const int stride = std::max(1, cfg.output_stride);

    Trace tr;
    tr.variant = p.variant;
    tr.dim = n;
    tr.protocol = protocol;
    tr.params = p;
    tr.times.reserve(static_cast<std::size_t>(n_steps / stride) + 2);
    tr.data.reserve((static_cast<std::size_t>(n_steps / stride) + 2) * n);

    State x = x0;
    const auto record = [&](double t) {
        tr.times.push_back(t);
        tr.data.insert(tr.data.end(), x.begin(), x.end());
    };
    record(0.0);
    for (long k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt;
        const double i_stim = protocol.value_at(t);
        kernel::advance_rl(p, x.data(), i_stim, cfg.dt);
        if ((k + 1) % stride == 0 || k + 1 == n_steps) {
            const double t_next = static_cast<double>(k + 1) * cfg.dt;
            check_finite(x.data(), n, t_next);
            record(t_next);
        }
    }
    return tr;
}

Trace simulate_rk(const CellParameters& p, const State& x0,
                  const StimulusProtocol& protocol, double t_end,
                  const IntegratorConfig& cfg) {
    const std::size_t n = dim(p.variant);
    Trace tr;
    tr.variant = p.variant;
    tr.dim = n;
    tr.protocol = protocol;
    tr.params = p;

    // Output samples plus stimulus switch times form the segment grid, so each
    // integrated segment has a constant stimulus and lands exactly on samples.
    struct GridPoint {
        double t;
        bool sample;
    };
    std::vector<GridPoint> grid;
    const long n_samples = static_cast<long>(std::ceil(t_end / cfg.sample_dt - 1e-9));
    for (long k = 1; k <= n_samples; ++k)
        grid.push_back({std::min(static_cast<double>(k) * cfg.sample_dt, t_end), true});
    for (double t : protocol.switch_times(0.0, t_end)) grid.push_back({t, false});
    std::sort(grid.begin(), grid.end(),
              [](const GridPoint& a, const GridPoint& b) { return a.t < b.t; });
    std::vector<GridPoint> merged;
    for (const auto& g : grid) {
        if (!merged.empty() && std::abs(g.t - merged.back().t) < 1e-12)
            merged.back().sample = merged.back().sample || g.sample;
        else
            merged.push_back(g);
    }

    State x = x0;
    RkSegmentIntegrator rk(p, cfg);
    const auto record = [&](double t) {
        tr.times.push_back(t);
        tr.data.insert(tr.data.end(), x.begin(), x.end());
    };
    record(0.0);
    double t = 0.0;
    double dt = std::min(cfg.dt, cfg.max_dt);
    for (const auto& g : merged) {
        const double i_stim = protocol.value_at(0.5 * (t + g.t));
        rk.start(x, i_stim);
        rk.run(x, t, g.t, i_stim, dt);
        t = g.t;
        if (g.sample) record(t);
    }
    return tr;
}

} // namespace

State step_rush_larsen(const CellParameters& p, const State& x, double t,
                       double dt, const StimulusProtocol& protocol) {
    if (!(dt > 0.0)) throw DomainError("step_rush_larsen: dt must be positive");
    validate_state(p.variant, x);
    State out = x;
    kernel::advance_rl(p, out.data(), protocol.value_at(t), dt);
    check_finite(out.data(), out.size(), t + dt);
    return out;
}

Trace simulate(const CellParameters& p, const State& x0,
               const StimulusProtocol& protocol, double t_end,
               const IntegratorConfig& cfg) {
    if (!(t_end > 0.0)) throw DomainError("simulate: t_end must be positive");
    if (!(cfg.dt > 0.0) || !(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0))
        throw DomainError("simulate: dt and tolerances must be positive");
    validate_state(p.variant, x0);
    protocol.validate(t_end);
    return cfg.method == Method::rush_larsen_euler
               ? simulate_rl(p, x0, protocol, t_end, cfg)
               : simulate_rk(p, x0, protocol, t_end, cfg);
}

EquilibrateResult equilibrate(const CellParameters& p, const State& guess,
                              double t_relax, double dt) {
    if (!(t_relax > 0.0)) throw DomainError("equilibrate: t_relax must be positive");
    validate_state(p.variant, guess);
    State x = guess;
    const long n_steps = static_cast<long>(std::ceil(t_relax / dt - 1e-9));
    for (long k = 0; k < n_steps; ++k) {
        kernel::advance_rl(p, x.data(), 0.0, dt);
        if ((k & 1023) == 0)
            check_finite(x.data(), x.size(), static_cast<double>(k) * dt);
    }
    check_finite(x.data(), x.size(), t_relax);
    State dxdt(x.size());
    kernel::rhs(p, x.data(), 0.0, dxdt.data());
    double res = 0.0;
    for (double v : dxdt) res = std::max(res, std::abs(v));
    return {std::move(x), res};
}

} // namespace cardiobif
