#pragma once

#include <string>
#include <vector>

#include "cardiobif/config.hpp"

namespace cardiobif {

struct PresetInfo {
    std::string name;
    std::string description;
};

// Canned experiments, one per published figure panel group.
const std::vector<PresetInfo>& list_presets();

ExperimentConfig preset_config(const std::string& name); // throws DomainError

} // namespace cardiobif
