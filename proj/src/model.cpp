#include "cardiobif/model.hpp"

#include <cmath>

#include "cardiobif/errors.hpp"

namespace cardiobif {

double tau_v(double V) {
    // tau_v = 0.25 + 2.24*v_inf/(1 - tanh(x)), v_inf = (1+e^a)^-2,
    // a = (V+71.55)/7.43, x = 6.468 + 0.07V. With 1 - tanh(x) = 2/(1+e^{2x})
    // this is 0.25 + 1.12*(e^{-2s} + e^{2x-2s}) for s = log(1+e^a); the
    // combined exponents stay bounded for all physical V, unlike the factors.
    const double a = (V + 71.55) / 7.43;
    const double x = 6.468 + 0.07 * V;
    const double s = a > 30.0 ? a : std::log1p(std::exp(a));
    return 0.25 + 1.12 * (std::exp(-2.0 * s) + std::exp(2.0 * (x - s)));
}

namespace rates {

inline GateRates m(double V) {
    const double a = 1.0 / (1.0 + std::exp((-60.0 - V) / 5.0));
    const double b = 0.1 / (1.0 + std::exp((V + 35.0) / 5.0)) +
                     0.1 / (1.0 + std::exp((V - 50.0) / 200.0));
    const double e = 1.0 + std::exp((-56.86 - V) / 9.03);
    return {1.0 / (e * e), a * b};
}

inline double h_inf(double V) {
    const double e = 1.0 + std::exp((V + 71.55) / 7.43);
    return 1.0 / (e * e);
}

inline GateRates h(double V) {
    double tau;
    if (V >= -40.0) {
        tau = 0.13 * (1.0 + std::exp(-(V + 10.66) / 11.1)) / 0.77;
    } else {
        const double a = 0.057 * std::exp(-(V + 80.0) / 6.8);
        const double b = 2.7 * std::exp(0.079 * V) + 3.1e5 * std::exp(0.3485 * V);
        tau = 1.0 / (a + b);
    }
    return {h_inf(V), tau};
}

inline GateRates j(double V) {
    double tau;
    if (V >= -40.0) {
        const double b = 0.6 * std::exp(0.057 * V) / (1.0 + std::exp(-0.1 * (V + 32.0)));
        tau = 1.0 / b;
    } else {
        const double a = (-2.5428e4 * std::exp(0.2444 * V) -
                          6.948e-6 * std::exp(-0.04391 * V)) *
                         (V + 37.78) / (1.0 + std::exp(0.311 * (V + 79.23)));
        const double b = 0.02424 * std::exp(-0.01052 * V) /
                         (1.0 + std::exp(-0.1378 * (V + 40.14)));
        tau = 1.0 / (a + b);
    }
    return {h_inf(V), tau};
}

inline GateRates v(double V) { return {h_inf(V), tau_v(V)}; }

inline GateRates xr1(double V) {
    const double inf = 1.0 / (1.0 + std::exp((-26.0 - V) / 7.0));
    const double a = 450.0 / (1.0 + std::exp((-45.0 - V) / 10.0));
    const double b = 6.0 / (1.0 + std::exp((V + 30.0) / 11.5));
    return {inf, a * b};
}

inline GateRates xr2(double V) {
    const double inf = 1.0 / (1.0 + std::exp((V + 88.0) / 24.0));
    const double a = 3.0 / (1.0 + std::exp((-60.0 - V) / 20.0));
    const double b = 1.12 / (1.0 + std::exp((V - 60.0) / 20.0));
    return {inf, a * b};
}

inline GateRates xs(double V) {
    const double inf = 1.0 / (1.0 + std::exp((-5.0 - V) / 14.0));
    const double a = 1400.0 / std::sqrt(1.0 + std::exp((5.0 - V) / 6.0));
    const double b = 1.0 / (1.0 + std::exp((V - 35.0) / 15.0));
    return {inf, a * b + 80.0};
}

inline GateRates r(double V) {
    const double inf = 1.0 / (1.0 + std::exp((20.0 - V) / 6.0));
    return {inf, 9.5 * std::exp(-(V + 40.0) * (V + 40.0) / 1800.0) + 0.8};
}

// endocardial kinetics
inline GateRates s(double V) {
    const double inf = 1.0 / (1.0 + std::exp((V + 28.0) / 5.0));
    return {inf, 1000.0 * std::exp(-(V + 67.0) * (V + 67.0) / 1000.0) + 8.0};
}

inline GateRates d(double V) {
    const double inf = 1.0 / (1.0 + std::exp((-8.0 - V) / 7.5));
    const double a = 1.4 / (1.0 + std::exp((-35.0 - V) / 13.0)) + 0.25;
    const double b = 1.4 / (1.0 + std::exp((V + 5.0) / 5.0));
    const double c = 1.0 / (1.0 + std::exp((50.0 - V) / 20.0));
    return {inf, a * b + c};
}

inline GateRates f(double V) {
    const double inf = 1.0 / (1.0 + std::exp((V + 20.0) / 7.0));
    const double a = 1102.5 * std::exp(-(V + 27.0) * (V + 27.0) / 225.0);
    const double b = 200.0 / (1.0 + std::exp((13.0 - V) / 10.0));
    const double c = 180.0 / (1.0 + std::exp((V + 30.0) / 10.0)) + 20.0;
    return {inf, a + b + c};
}

inline GateRates f2(double V) {
    const double inf = 0.67 / (1.0 + std::exp((V + 35.0) / 7.0)) + 0.33;
    const double a = 600.0 * std::exp(-(V + 25.0) * (V + 25.0) / 170.0);
    const double b = 31.0 / (1.0 + std::exp((25.0 - V) / 10.0));
    const double c = 16.0 / (1.0 + std::exp((V + 30.0) / 10.0));
    return {inf, a + b + c};
}

inline GateRates fcass(double ca_ss) {
    const double q = (ca_ss / 0.05) * (ca_ss / 0.05);
    return {0.6 / (1.0 + q) + 0.4, 80.0 / (1.0 + q) + 2.0};
}

} // namespace rates

GateRates gate_rates(Variant variant, Gate gate, double v_or_cass) {
    if (!std::isfinite(v_or_cass))
        throw DomainError("gate_rates: non-finite argument");
    switch (gate) {
    case Gate::m: return rates::m(v_or_cass);
    case Gate::h:
        if (variant != Variant::original)
            throw DomainError("gate h exists only in the original variant");
        return rates::h(v_or_cass);
    case Gate::j:
        if (variant != Variant::original)
            throw DomainError("gate j exists only in the original variant");
        return rates::j(v_or_cass);
    case Gate::v:
        if (variant != Variant::modified)
            throw DomainError("gate v exists only in the modified variant");
        return rates::v(v_or_cass);
    case Gate::xr1: return rates::xr1(v_or_cass);
    case Gate::xr2: return rates::xr2(v_or_cass);
    case Gate::xs: return rates::xs(v_or_cass);
    case Gate::r: return rates::r(v_or_cass);
    case Gate::s: return rates::s(v_or_cass);
    case Gate::d: return rates::d(v_or_cass);
    case Gate::f: return rates::f(v_or_cass);
    case Gate::f2: return rates::f2(v_or_cass);
    case Gate::fCass: return rates::fcass(v_or_cass);
    }
    throw DomainError("gate_rates: invalid gate id");
}

Gate gate_from_name(std::string_view name) {
    if (name == "m") return Gate::m;
    if (name == "h") return Gate::h;
    if (name == "j") return Gate::j;
    if (name == "v") return Gate::v;
    if (name == "xr1") return Gate::xr1;
    if (name == "xr2") return Gate::xr2;
    if (name == "xs") return Gate::xs;
    if (name == "r") return Gate::r;
    if (name == "s") return Gate::s;
    if (name == "d") return Gate::d;
    if (name == "f") return Gate::f;
    if (name == "f2") return Gate::f2;
    if (name == "fCass") return Gate::fCass;
    throw DomainError("unknown gate '" + std::string(name) + "'");
}

namespace {

template <class L>
inline void gate_tables(const double* x, double* inf, double* tau) {
    const double V = x[L::V];
    GateRates g;
    g = rates::m(V);     inf[L::m] = g.inf;     tau[L::m] = g.tau;
    g = rates::xr1(V);   inf[L::xr1] = g.inf;   tau[L::xr1] = g.tau;
    g = rates::xr2(V);   inf[L::xr2] = g.inf;   tau[L::xr2] = g.tau;
    g = rates::xs(V);    inf[L::xs] = g.inf;    tau[L::xs] = g.tau;
    g = rates::r(V);     inf[L::r] = g.inf;     tau[L::r] = g.tau;
    g = rates::s(V);     inf[L::s] = g.inf;     tau[L::s] = g.tau;
    g = rates::d(V);     inf[L::d] = g.inf;     tau[L::d] = g.tau;
    g = rates::f(V);     inf[L::f] = g.inf;     tau[L::f] = g.tau;
    g = rates::f2(V);    inf[L::f2] = g.inf;    tau[L::f2] = g.tau;
    g = rates::fcass(x[L::Ca_ss]); inf[L::fCass] = g.inf; tau[L::fCass] = g.tau;
    if constexpr (L::has_hj) {
        g = rates::h(V); inf[L::h] = g.inf; tau[L::h] = g.tau;
        g = rates::j(V); inf[L::j] = g.inf; tau[L::j] = g.tau;
    } else {
        g = rates::v(V); inf[L::v] = g.inf; tau[L::v] = g.tau;
    }
}

template <class L>
inline Currents currents_impl(const CellParameters& p, const double* x) {
    Currents c{};
    const double V = x[L::V];
    const double Nai = x[L::Na_i];
    const double Cai = x[L::Ca_i];
    const double CaSR = x[L::Ca_SR];
    const double CaSS = x[L::Ca_ss];
    double Ki;
    if constexpr (L::has_hj) Ki = x[L::K_i];
    else Ki = p.K_i_fixed;

    const double rtf = p.R * p.T / p.F;
    c.E_K = rtf * std::log(p.K_o / Ki);
    c.E_Na = rtf * std::log(p.Na_o / Nai);
    c.E_Ks = rtf * std::log((p.K_o + p.p_KNa * p.Na_o) / (Ki + p.p_KNa * Nai));
    c.E_Ca = 0.5 * rtf * std::log(p.Ca_o / Cai);

    const double sqrt_ko = std::sqrt(p.K_o / 5.4);
    const double a_k1 = 0.1 / (1.0 + std::exp(0.06 * (V - c.E_K - 200.0)));
    const double b_k1 = (3.0 * std::exp(0.0002 * (V - c.E_K + 100.0)) +
                         std::exp(0.1 * (V - c.E_K - 10.0))) /
                        (1.0 + std::exp(-0.5 * (V - c.E_K)));
    c.I_K1 = p.G_K1 * sqrt_ko * a_k1 / (a_k1 + b_k1) * (V - c.E_K);

    c.I_to = p.G_to * x[L::r] * x[L::s] * (V - c.E_K);
    c.I_Kr = p.eta * p.G_Kr * sqrt_ko * x[L::xr1] * x[L::xr2] * (V - c.E_K);
    c.I_Ks = p.eta * p.G_Ks * x[L::xs] * x[L::xs] * (V - c.E_Ks);

    const double m3 = x[L::m] * x[L::m] * x[L::m];
    double inact;
    if constexpr (L::has_hj) inact = x[L::h] * x[L::j];
    else inact = x[L::v] * x[L::v];
    c.I_Na = p.G_Na * m3 * inact * (V - c.E_Na);
    c.I_bNa = p.G_bNa * (V - c.E_Na);

    // L-type calcium: the textbook form has a removable singularity at
    // V = 15 mV; with z = 2(V-15)F/RT it is 2*F*G_CaL*gates *
    // z/(e^z - 1) * (0.25*Ca_ss*e^z - Ca_o), finite everywhere.
    const double z = 2.0 * (V - 15.0) * p.F / (p.R * p.T);
    const double ez = std::exp(z);
    const double q = z != 0.0 ? z / std::expm1(z) : 1.0;
    c.I_CaL = 2.0 * p.F * p.G_CaL * x[L::d] * x[L::f] * x[L::f2] * x[L::fCass] *
              q * (0.25 * CaSS * ez - p.Ca_o);

    const double fvrt = V * p.F / (p.R * p.T);
    const double f_nak = 1.0 / (1.0 + 0.1245 * std::exp(-0.1 * fvrt) +
                                0.0353 * std::exp(-fvrt));
    c.I_NaK = p.P_NaK * (p.K_o / (p.K_o + p.K_mK)) * (Nai / (Nai + p.K_mNa)) * f_nak;

    const double e_g = std::exp(p.gamma * fvrt);
    const double e_g1 = std::exp((p.gamma - 1.0) * fvrt);
    const double km3 = p.K_mNai * p.K_mNai * p.K_mNai;
    const double nao3 = p.Na_o * p.Na_o * p.Na_o;
    c.I_NaCa = p.k_NaCa *
               (e_g * Nai * Nai * Nai * p.Ca_o - e_g1 * nao3 * Cai * 2.5) /
               ((km3 + nao3) * (p.K_mCa + p.Ca_o) * (1.0 + p.k_sat * e_g1));

    c.I_pCa = p.G_pCa * Cai / (Cai + p.K_pCa);
    c.I_pK = p.G_pK * (V - c.E_K) / (1.0 + std::exp((25.0 - V) / 5.98));
    c.I_bCa = p.G_bCa * (V - c.E_Ca);

    const double ec_r = p.EC / CaSR;
    const double k_casr = p.max_sr - (p.max_sr - p.min_sr) / (1.0 + ec_r * ec_r);
    const double k1 = p.k1_prime / k_casr;
    c.k2 = p.k2_prime * k_casr;
    const double open = k1 * CaSS * CaSS * x[L::Rbar] / (p.k3 + k1 * CaSS * CaSS);
    c.J_rel = p.V_rel * open * (CaSR - CaSS);
    c.J_leak = p.V_leak * (CaSR - Cai);
    c.J_up = p.V_maxup / (1.0 + (p.K_up * p.K_up) / (Cai * Cai));
    c.J_xfer = p.V_xfer * (CaSS - Cai);
    return c;
}

template <class L>
inline void slow_rhs(const CellParameters& p, const double* x, const Currents& c,
                     double i_stim, double* dxdt) {
    dxdt[L::V] = (-c.total() + i_stim) / p.C_m;
    dxdt[L::Rbar] = p.k4 * (1.0 - x[L::Rbar]) - c.k2 * x[L::Ca_ss] * x[L::Rbar];

    const double Cai = x[L::Ca_i];
    const double CaSR = x[L::Ca_SR];
    const double CaSS = x[L::Ca_ss];
    const double cvf = p.capacitance / (p.V_c * p.F);
    const double cvf2 = p.capacitance / (2.0 * p.V_c * p.F);
    const double cvssf2 = p.capacitance / (2.0 * p.V_ss * p.F);

    // instantaneous-buffering factors
    const double bc = Cai + p.K_bufc;
    const double bufc = 1.0 / (1.0 + p.Buf_c * p.K_bufc / (bc * bc));
    const double bsr = CaSR + p.K_bufsr;
    const double bufsr = 1.0 / (1.0 + p.Buf_sr * p.K_bufsr / (bsr * bsr));
    const double bss = CaSS + p.K_bufss;
    const double bufss = 1.0 / (1.0 + p.Buf_ss * p.K_bufss / (bss * bss));

    dxdt[L::Ca_i] = bufc * (-(c.I_bCa + c.I_pCa - 2.0 * c.I_NaCa) * cvf2 -
                            (c.J_up - c.J_leak) * (p.V_sr / p.V_c) + c.J_xfer);
    dxdt[L::Ca_SR] = bufsr * (c.J_up - c.J_rel - c.J_leak);
    dxdt[L::Ca_ss] = bufss * (-c.J_xfer * (p.V_c / p.V_ss) +
                              c.J_rel * (p.V_sr / p.V_ss) - c.I_CaL * cvssf2);
    dxdt[L::Na_i] = -(c.I_Na + c.I_bNa + 3.0 * c.I_NaK + 3.0 * c.I_NaCa) * cvf;
    if constexpr (L::has_hj)
        dxdt[L::K_i] = -(c.I_K1 + c.I_to + c.I_Kr + c.I_Ks - 2.0 * c.I_NaK +
                         c.I_pK - i_stim) * cvf;
}

template <class L>
inline void rhs_impl(const CellParameters& p, const double* x, double i_stim,
                     double* dxdt) {
    double inf[L::dim], tau[L::dim];
    gate_tables<L>(x, inf, tau);
    const Currents c = currents_impl<L>(p, x);
    slow_rhs<L>(p, x, c, i_stim, dxdt);
    dxdt[L::m] = (inf[L::m] - x[L::m]) / tau[L::m];
    dxdt[L::xr1] = (inf[L::xr1] - x[L::xr1]) / tau[L::xr1];
    dxdt[L::xr2] = (inf[L::xr2] - x[L::xr2]) / tau[L::xr2];
    dxdt[L::xs] = (inf[L::xs] - x[L::xs]) / tau[L::xs];
    dxdt[L::r] = (inf[L::r] - x[L::r]) / tau[L::r];
    dxdt[L::s] = (inf[L::s] - x[L::s]) / tau[L::s];
    dxdt[L::d] = (inf[L::d] - x[L::d]) / tau[L::d];
    dxdt[L::f] = (inf[L::f] - x[L::f]) / tau[L::f];
    dxdt[L::f2] = (inf[L::f2] - x[L::f2]) / tau[L::f2];
    dxdt[L::fCass] = (inf[L::fCass] - x[L::fCass]) / tau[L::fCass];
    if constexpr (L::has_hj) {
        dxdt[L::h] = (inf[L::h] - x[L::h]) / tau[L::h];
        dxdt[L::j] = (inf[L::j] - x[L::j]) / tau[L::j];
    } else {
        dxdt[L::v] = (inf[L::v] - x[L::v]) / tau[L::v];
    }
}

template <class L>
inline void advance_rl_impl(const CellParameters& p, double* x, double i_stim,
                            double dt, double dv_extra) {
    double inf[L::dim], tau[L::dim];
    gate_tables<L>(x, inf, tau);
    const Currents c = currents_impl<L>(p, x);
    double slow[L::dim];
    slow_rhs<L>(p, x, c, i_stim, slow);

    x[L::V] += dt * (slow[L::V] + dv_extra);
    x[L::Rbar] += dt * slow[L::Rbar];
    x[L::Ca_i] += dt * slow[L::Ca_i];
    x[L::Ca_SR] += dt * slow[L::Ca_SR];
    x[L::Ca_ss] += dt * slow[L::Ca_ss];
    x[L::Na_i] += dt * slow[L::Na_i];
    if constexpr (L::has_hj) x[L::K_i] += dt * slow[L::K_i];

    const auto rl = [&](int g) {
        x[g] = inf[g] + (x[g] - inf[g]) * std::exp(-dt / tau[g]);
    };
    rl(L::m);
    rl(L::xr1);
    rl(L::xr2);
    rl(L::xs);
    rl(L::r);
    rl(L::s);
    rl(L::d);
    rl(L::f);
    rl(L::f2);
    rl(L::fCass);
    if constexpr (L::has_hj) {
        rl(L::h);
        rl(L::j);
    } else {
        rl(L::v);
    }
}

} // namespace

namespace kernel {

void rhs(const CellParameters& p, const double* x, double i_stim, double* dxdt) {
    if (p.variant == Variant::original)
        rhs_impl<LayoutOriginal>(p, x, i_stim, dxdt);
    else
        rhs_impl<LayoutModified>(p, x, i_stim, dxdt);
}

void advance_rl(const CellParameters& p, double* x, double i_stim, double dt,
                double dv_extra) {
    if (p.variant == Variant::original)
        advance_rl_impl<LayoutOriginal>(p, x, i_stim, dt, dv_extra);
    else
        advance_rl_impl<LayoutModified>(p, x, i_stim, dt, dv_extra);
}

} // namespace kernel

Currents ionic_currents(const CellParameters& p, const State& x) {
    validate_state(p.variant, x);
    return p.variant == Variant::original
               ? currents_impl<LayoutOriginal>(p, x.data())
               : currents_impl<LayoutModified>(p, x.data());
}

void rhs(const CellParameters& p, const State& x, double i_stim, State& dxdt) {
    validate_state(p.variant, x);
    dxdt.resize(x.size());
    kernel::rhs(p, x.data(), i_stim, dxdt.data());
}

State rhs(const CellParameters& p, const State& x, double i_stim) {
    State dxdt;
    rhs(p, x, i_stim, dxdt);
    return dxdt;
}

} // namespace cardiobif
