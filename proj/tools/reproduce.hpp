#ifndef QDCAV_TOOLS_REPRODUCE_HPP
#define QDCAV_TOOLS_REPRODUCE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "qdcav/config.hpp"

namespace qdcav::repro {

struct TargetCheck {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tol_abs = 0.0;
    bool pass = false;
    std::string note;
};

struct FigureReport {
    std::string figure;
    std::vector<TargetCheck> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Names of the supported figures, in reproduction order.
const std::vector<std::string>& figure_names();

// Runs one figure against the built-in defaults, writing data files under
// out_dir.  Throws std::invalid_argument for an unknown figure name.
FigureReport run_figure(const std::string& figure, const ExperimentConfig& config,
                        const std::filesystem::path& out_dir);

// The embedded target table (the same content is checked in under
// fixtures/paper_targets.json).
std::string target_table_json();

} // namespace qdcav::repro

#endif
