#pragma once

#include "cardiobif/parameters.hpp"
#include "cardiobif/state.hpp"

namespace cardiobif {

enum class Gate { m, h, j, v, xr1, xr2, xs, r, s, d, f, f2, fCass };

Gate gate_from_name(std::string_view name); // throws DomainError

struct GateRates {
    double inf; // steady state, in [0,1]
    double tau; // time constant, ms, > 0
};

// Rate pair for one gate. The argument is the membrane potential in mV for
// every gate except fCass, whose kinetics depend on Ca_ss (mM) instead.
// Throws DomainError if the gate does not exist in the variant (h/j are
// original-only, v is modified-only).
GateRates gate_rates(Variant variant, Gate gate, double v_or_cass);

// Merged sodium-inactivation time constant
//   tau_v = 0.25 + 2.24*v_inf / (1 - tanh(6.468 + 0.07*V)),
// evaluated in log space: both v_inf and the denominator underflow separately
// at depolarised V while their ratio stays O(1).
double tau_v(double V);

struct Currents {
    // transmembrane currents, pA/pF
    double I_K1, I_to, I_Kr, I_Ks, I_CaL, I_NaK, I_Na, I_bNa, I_NaCa, I_bCa,
        I_pK, I_pCa;
    // reversal potentials, mV
    double E_K, E_Na, E_Ca, E_Ks;
    // SR calcium fluxes, mM/ms, and the release-gate closing rate coefficient
    double J_rel, J_leak, J_up, J_xfer;
    double k2; // 1/(mM*ms), used by the Rbar equation

    double total() const {
        return I_K1 + I_to + I_Kr + I_Ks + I_CaL + I_NaK + I_Na + I_bNa +
               I_NaCa + I_bCa + I_pK + I_pCa;
    }
};

// Named current set at one state. Validates the state. With eta scaling the
// effective conductances are eta*G_Kr and eta*G_Ks.
Currents ionic_currents(const CellParameters& p, const State& x);

// Time-derivative of the full state; i_stim is entered positive and
// depolarises. Validates the state.
State rhs(const CellParameters& p, const State& x, double i_stim);
void rhs(const CellParameters& p, const State& x, double i_stim, State& dxdt);

namespace kernel {

// Unchecked raw-pointer core shared by every integration path (single cell,
// tissue, shooting flows). x and dxdt have dim(p.variant) entries.
void rhs(const CellParameters& p, const double* x, double i_stim, double* dxdt);

// One Rush-Larsen/Euler step in place: HH gates move exponentially toward
// their steady state with rates frozen at the step-start state, everything
// else by forward Euler on the rhs. dv_extra is added to dV/dt (the tissue
// solver passes D*laplacian; single-cell callers pass 0).
void advance_rl(const CellParameters& p, double* x, double i_stim, double dt,
                double dv_extra = 0.0);

} // namespace kernel

} // namespace cardiobif
