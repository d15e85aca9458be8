#pragma once

#include <string>
#include <vector>

#include "cardiobif/config.hpp"

namespace cardiobif {

struct RunResult {
    std::vector<std::string> artifacts; // paths written, manifest first
    std::vector<std::string> notes;     // human-readable run remarks
};

// Validates, writes manifest.txt into the output directory, then executes the
// experiment and writes its artifacts. Module errors propagate unchanged.
RunResult run_experiment(const ExperimentConfig& config);

} // namespace cardiobif
