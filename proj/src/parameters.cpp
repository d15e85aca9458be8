#include "cardiobif/parameters.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "cardiobif/errors.hpp"

namespace cardiobif {

const std::vector<ParameterInfo>& parameter_registry() {
    using P = CellParameters;
    static const std::vector<ParameterInfo> table = {
        {"R", &P::R, "mJ/(mol*K)"},
        {"T", &P::T, "K"},
        {"F", &P::F, "C/mmol"},
        {"C_m", &P::C_m, "uF/cm2"},
        {"capacitance", &P::capacitance, "uF"},
        {"V_c", &P::V_c, "nL"},
        {"V_sr", &P::V_sr, "nL"},
        {"V_ss", &P::V_ss, "nL"},
        {"K_o", &P::K_o, "mM"},
        {"Na_o", &P::Na_o, "mM"},
        {"Ca_o", &P::Ca_o, "mM"},
        {"G_Na", &P::G_Na, "nS/pF"},
        {"G_K1", &P::G_K1, "nS/pF"},
        {"G_to", &P::G_to, "nS/pF"},
        {"G_Kr", &P::G_Kr, "nS/pF"},
        {"G_Ks", &P::G_Ks, "nS/pF"},
        {"G_CaL", &P::G_CaL, "cm3/(uF*s)"},
        {"G_bNa", &P::G_bNa, "nS/pF"},
        {"G_bCa", &P::G_bCa, "nS/pF"},
        {"G_pCa", &P::G_pCa, "pA/pF"},
        {"G_pK", &P::G_pK, "nS/pF"},
        {"P_NaK", &P::P_NaK, "pA/pF"},
        {"K_mK", &P::K_mK, "mM"},
        {"K_mNa", &P::K_mNa, "mM"},
        {"k_NaCa", &P::k_NaCa, "pA/pF"},
        {"K_mNai", &P::K_mNai, "mM"},
        {"K_mCa", &P::K_mCa, "mM"},
        {"k_sat", &P::k_sat, "dimensionless"},
        {"gamma", &P::gamma, "dimensionless"},
        {"p_KNa", &P::p_KNa, "dimensionless"},
        {"K_pCa", &P::K_pCa, "mM"},
        {"K_up", &P::K_up, "mM"},
        {"V_maxup", &P::V_maxup, "mM/ms"},
        {"V_rel", &P::V_rel, "1/ms"},
        {"V_leak", &P::V_leak, "1/ms"},
        {"V_xfer", &P::V_xfer, "1/ms"},
        {"k1_prime", &P::k1_prime, "1/(mM2*ms)"},
        {"k2_prime", &P::k2_prime, "1/(mM*ms)"},
        {"k3", &P::k3, "1/ms"},
        {"k4", &P::k4, "1/ms"},
        {"EC", &P::EC, "mM"},
        {"max_sr", &P::max_sr, "dimensionless"},
        {"min_sr", &P::min_sr, "dimensionless"},
        {"Buf_c", &P::Buf_c, "mM"},
        {"K_bufc", &P::K_bufc, "mM"},
        {"Buf_sr", &P::Buf_sr, "mM"},
        {"K_bufsr", &P::K_bufsr, "mM"},
        {"Buf_ss", &P::Buf_ss, "mM"},
        {"K_bufss", &P::K_bufss, "mM"},
        {"K_i_fixed", &P::K_i_fixed, "mM"},
        {"eta", &P::eta, "dimensionless"},
    };
    return table;
}

namespace {

const ParameterInfo* find_info(std::string_view name) {
    for (const auto& info : parameter_registry())
        if (info.name == name) return &info;
    return nullptr;
}

// Continuation sweeps address the modified variant's pinned potassium as
// plain "K_i"; accept that alias everywhere a parameter is named.
std::string_view resolve_alias(std::string_view name) {
    return name == "K_i" ? std::string_view("K_i_fixed") : name;
}

} // namespace

bool has_parameter(std::string_view name) {
    return find_info(resolve_alias(name)) != nullptr;
}

double get_parameter(const CellParameters& p, std::string_view name) {
    const auto* info = find_info(resolve_alias(name));
    if (!info) throw DomainError("unknown parameter '" + std::string(name) + "'");
    return p.*(info->member);
}

void set_parameter(CellParameters& p, std::string_view name, double value) {
    const auto* info = find_info(resolve_alias(name));
    if (!info) throw DomainError("unknown parameter '" + std::string(name) + "'");
    if (!std::isfinite(value))
        throw DomainError("parameter '" + std::string(name) + "' set to non-finite value");
    p.*(info->member) = value;
}

CellParameters load_parameters(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open parameter table '" + path + "'");
    CellParameters p;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream row(line);
        std::string name;
        if (!(row >> name)) continue; // blank or comment-only
        if (name == "variant") {
            std::string value;
            if (!(row >> value))
                throw DomainError(path + ":" + std::to_string(lineno) +
                                  ": variant needs a value");
            p.variant = variant_from_name(value);
            continue;
        }
        double value;
        if (!(row >> value))
            throw DomainError(path + ":" + std::to_string(lineno) +
                              ": expected 'name value unit', got '" + line + "'");
        set_parameter(p, name, value); // unit token, if present, is informative only
    }
    return p;
}

void write_parameters(const CellParameters& p, std::ostream& out) {
    out << "variant " << variant_name(p.variant) << "\n";
    out.precision(17);
    for (const auto& info : parameter_registry())
        out << info.name << " " << p.*(info.member) << " " << info.unit << "\n";
}

void save_parameters(const CellParameters& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write parameter table '" + path + "'");
    write_parameters(p, out);
}

} // namespace cardiobif
