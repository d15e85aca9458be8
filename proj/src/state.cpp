#include "cardiobif/state.hpp"

#include <cmath>

#include "cardiobif/errors.hpp"

namespace cardiobif {

Variant variant_from_name(std::string_view name) {
    if (name == "original") return Variant::original;
    if (name == "modified") return Variant::modified;
    throw DomainError("unknown model variant '" + std::string(name) +
                      "' (expected 'original' or 'modified')");
}

const std::vector<std::string>& component_names(Variant variant) {
    static const std::vector<std::string> original = {
        "V",    "d",    "f",     "f2",    "fCass", "h",    "j",
        "m",    "r",    "Rbar",  "s",     "xr1",   "xr2",  "xs",
        "Ca_i", "Ca_SR", "Ca_ss", "K_i",  "Na_i"};
    static const std::vector<std::string> modified = {
        "V",   "d",   "f",    "f2",    "fCass", "m",    "r",    "Rbar", "s",
        "v",   "xr1", "xr2",  "xs",    "Ca_i",  "Ca_SR", "Ca_ss", "Na_i"};
    return variant == Variant::original ? original : modified;
}

std::size_t component_index(Variant variant, std::string_view name) {
    const auto& names = component_names(variant);
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    throw DomainError("unknown state component '" + std::string(name) +
                      "' for " + variant_name(variant) + " variant");
}

bool is_rl_gate(Variant variant, std::size_t index) {
    if (variant == Variant::original) {
        using L = LayoutOriginal;
        return index >= 1 && index <= static_cast<std::size_t>(L::xs) &&
               index != static_cast<std::size_t>(L::Rbar);
    }
    using L = LayoutModified;
    return index >= 1 && index <= static_cast<std::size_t>(L::xs) &&
           index != static_cast<std::size_t>(L::Rbar);
}

State initial_state(Variant variant) {
    if (variant == Variant::original) {
        using L = LayoutOriginal;
        State x(L::dim);
        x[L::V] = -86.2;
        x[L::d] = 0.0;
        x[L::f] = 1.0;
        x[L::f2] = 1.0;
        x[L::fCass] = 1.0;
        x[L::h] = 0.75;
        x[L::j] = 0.75;
        x[L::m] = 0.0;
        x[L::r] = 0.0;
        x[L::Rbar] = 1.0;
        x[L::s] = 1.0;
        x[L::xr1] = 0.0;
        x[L::xr2] = 1.0;
        x[L::xs] = 0.0;
        x[L::Ca_i] = 0.00007;
        x[L::Ca_SR] = 1.3;
        x[L::Ca_ss] = 0.00007;
        x[L::K_i] = 138.3;
        x[L::Na_i] = 7.67;
        return x;
    }
    using L = LayoutModified;
    State x(L::dim);
    x[L::V] = -86.2;
    x[L::d] = 0.0;
    x[L::f] = 1.0;
    x[L::f2] = 1.0;
    x[L::fCass] = 1.0;
    x[L::m] = 0.0;
    x[L::r] = 0.0;
    x[L::Rbar] = 1.0;
    x[L::s] = 1.0;
    x[L::v] = 0.75; // v^2 matches the original's h*j at rest
    x[L::xr1] = 0.0;
    x[L::xr2] = 1.0;
    x[L::xs] = 0.0;
    x[L::Ca_i] = 0.00007;
    x[L::Ca_SR] = 1.3;
    x[L::Ca_ss] = 0.00007;
    x[L::Na_i] = 7.67;
    return x;
}

std::vector<double> state_scales(Variant variant) {
    const auto& names = component_names(variant);
    std::vector<double> w(names.size(), 1.0);
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& n = names[i];
        if (n == "V") w[i] = 100.0;
        else if (n == "Ca_i" || n == "Ca_ss") w[i] = 1e-3;
        else if (n == "Ca_SR") w[i] = 5.0;
        else if (n == "Na_i") w[i] = 10.0;
        else if (n == "K_i") w[i] = 140.0;
        // gates stay at 1
    }
    return w;
}

void validate_state(Variant variant, const State& x) {
    const auto& names = component_names(variant);
    if (x.size() != names.size())
        throw DomainError("state has " + std::to_string(x.size()) +
                          " components, " + variant_name(variant) +
                          " variant needs " + std::to_string(names.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]))
            throw DomainError("state component '" + names[i] + "' is not finite");
        if (is_rl_gate(variant, i) || names[i] == "Rbar") {
            if (x[i] < 0.0 || x[i] > 1.0)
                throw DomainError("gate '" + names[i] + "' outside [0,1]: " +
                                  std::to_string(x[i]));
        } else if (i > 0 && x[i] <= 0.0) { // concentrations
            throw DomainError("concentration '" + names[i] +
                              "' must be positive: " + std::to_string(x[i]));
        }
    }
}

} // namespace cardiobif
