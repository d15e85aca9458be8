#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "cardiobif/state.hpp"

namespace cardiobif {

// Full constant set of the endocardial cell model. Defaults are the published
// values with one exception: G_CaL uses the AP-duration-adjusted 1.75e-4
// cm^3/(uF*s) instead of the 2006 publication's 3.98e-5.
struct CellParameters {
    Variant variant = Variant::modified;

    // physical constants
    double R = 8314.472;     // mJ/(mol*K)
    double T = 310.0;        // K
    double F = 96485.3415;   // C/mmol
    double C_m = 1.0;        // uF/cm^2, membrane normalisation in dV/dt
    double capacitance = 0.185; // uF, couples pA/pF currents to mM/ms fluxes

    // geometry
    double V_c = 0.016404;   // nL
    double V_sr = 0.001094;  // nL
    double V_ss = 0.00005468; // nL

    // external concentrations
    double K_o = 5.4;   // mM
    double Na_o = 140.0; // mM
    double Ca_o = 2.0;  // mM

    // conductances / maximal currents
    double G_Na = 14.838;    // nS/pF
    double G_K1 = 5.405;     // nS/pF
    double G_to = 0.073;     // nS/pF (endocardial)
    double G_Kr = 0.153;     // nS/pF
    double G_Ks = 0.392;     // nS/pF (endocardial)
    double G_CaL = 0.000175; // cm^3/(uF*s)
    double G_bNa = 0.00029;  // nS/pF
    double G_bCa = 0.000592; // nS/pF
    double G_pCa = 0.1238;   // pA/pF
    double G_pK = 0.0146;    // nS/pF

    // pump / exchanger kinetics
    double P_NaK = 2.724; // pA/pF
    double K_mK = 1.0;    // mM
    double K_mNa = 40.0;  // mM
    double k_NaCa = 1000.0; // pA/pF
    double K_mNai = 87.5; // mM
    double K_mCa = 1.38;  // mM
    double k_sat = 0.1;
    double gamma = 0.35;
    double p_KNa = 0.03;
    double K_pCa = 0.0005; // mM

    // calcium handling
    double K_up = 0.00025;   // mM
    double V_maxup = 0.006375; // mM/ms
    double V_rel = 0.102;    // 1/ms
    double V_leak = 0.00036; // 1/ms
    double V_xfer = 0.0038;  // 1/ms
    double k1_prime = 0.15;  // 1/(mM^2*ms)
    double k2_prime = 0.045; // 1/(mM*ms)
    double k3 = 0.06;        // 1/ms
    double k4 = 0.005;       // 1/ms
    double EC = 1.5;         // mM
    double max_sr = 2.5;
    double min_sr = 1.0;

    // buffering
    double Buf_c = 0.2;      // mM
    double K_bufc = 0.001;   // mM
    double Buf_sr = 10.0;    // mM
    double K_bufsr = 0.3;    // mM
    double Buf_ss = 0.4;     // mM
    double K_bufss = 0.00025; // mM

    // modified-variant fixed potassium and the joint K-current scaling
    double K_i_fixed = 138.0; // mM
    double eta = 1.0;         // scales G_Kr and G_Ks together
};

struct ParameterInfo {
    std::string_view name;
    double CellParameters::*member;
    std::string_view unit;
};

// Every scalar addressable by name (continuation parameter ids, file IO,
// config overrides). Does not include the variant flag.
const std::vector<ParameterInfo>& parameter_registry();

bool has_parameter(std::string_view name);
double get_parameter(const CellParameters& p, std::string_view name); // throws DomainError
void set_parameter(CellParameters& p, std::string_view name, double value); // throws DomainError

// Flat text table, one "name value unit" triple per line, '#' comments.
CellParameters load_parameters(const std::string& path);         // throws DomainError
void save_parameters(const CellParameters& p, const std::string& path);
void write_parameters(const CellParameters& p, std::ostream& out);

} // namespace cardiobif
