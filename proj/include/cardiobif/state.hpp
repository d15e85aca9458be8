#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cardiobif {

enum class Variant { original, modified };

// A state vector; component order is the canonical export order below.
using State = std::vector<double>;

// Canonical component order: V first, then gates alphabetically
// (case-insensitive), then concentrations alphabetically.
//
// original (19): V d f f2 fCass h j m r Rbar s xr1 xr2 xs Ca_i Ca_SR Ca_ss K_i Na_i
// modified (17): V d f f2 fCass m r Rbar s v xr1 xr2 xs Ca_i Ca_SR Ca_ss Na_i
struct LayoutOriginal {
    static constexpr int V = 0, d = 1, f = 2, f2 = 3, fCass = 4, h = 5, j = 6,
                         m = 7, r = 8, Rbar = 9, s = 10, xr1 = 11, xr2 = 12,
                         xs = 13, Ca_i = 14, Ca_SR = 15, Ca_ss = 16, K_i = 17,
                         Na_i = 18;
    static constexpr int dim = 19;
    static constexpr bool has_hj = true;
};

struct LayoutModified {
    static constexpr int V = 0, d = 1, f = 2, f2 = 3, fCass = 4, m = 5, r = 6,
                         Rbar = 7, s = 8, v = 9, xr1 = 10, xr2 = 11, xs = 12,
                         Ca_i = 13, Ca_SR = 14, Ca_ss = 15, Na_i = 16;
    static constexpr int dim = 17;
    static constexpr bool has_hj = false;
};

constexpr std::size_t dim(Variant variant) {
    return variant == Variant::original ? LayoutOriginal::dim : LayoutModified::dim;
}

constexpr const char* variant_name(Variant variant) {
    return variant == Variant::original ? "original" : "modified";
}

Variant variant_from_name(std::string_view name); // throws DomainError

const std::vector<std::string>& component_names(Variant variant);
std::size_t component_index(Variant variant, std::string_view name); // throws DomainError

// True for the Hodgkin-Huxley gates advanced by Rush-Larsen. Rbar (the SR
// release adaptation variable) is not one: its rates depend on calcium, and it
// is advanced by Euler like the concentrations.
bool is_rl_gate(Variant variant, std::size_t index);

// Published resting initial values of the original model (the modified variant
// drops h, j, K_i and starts its merged gate at v = 0.75, so v^2 = h*j).
State initial_state(Variant variant);

// Typical component magnitudes, used to weight norms and arclength metrics.
std::vector<double> state_scales(Variant variant);

// Throws DomainError naming the first offending component: non-finite value,
// gate outside [0,1], or non-positive concentration.
void validate_state(Variant variant, const State& x);

} // namespace cardiobif
