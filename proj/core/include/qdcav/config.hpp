#ifndef QDCAV_CONFIG_HPP
#define QDCAV_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "qdcav/spectrum.hpp"

namespace qdcav {

// Inclusive linspace; count >= 1 (count == 1 emits {min}).
struct GridSpec {
    double min = 0.0;
    double max = 0.0;
    int count = 1;

    std::vector<double> linspace() const;
};

struct NoiseSpec {
    NoiseModel model = NoiseModel::gaussian;
    double scale = 0.0; // fraction of the map maximum
    std::uint64_t seed = 1;
};

/**
 * Complete experiment description.  Parsed from / emitted to JSON; comments
 * are permitted in input files so fixtures can carry provenance notes.
 * The value-level round trip parse(serialize(c)) == c is exact.
 */
struct ExperimentConfig {
    ExcitonParams exciton;
    CavityParams cavity;
    CouplingParams coupling;
    TemperatureTuning temperature;
    double lambda0_nm = 0.0;   // reference wavelength for nm <-> ueV at IO
    GridSpec b_grid;           // tesla
    GridSpec t_grid;           // kelvin
    GridSpec energy_grid;      // ueV
    double t_hold_K = 0.0;     // sample temperature during magnetic sweeps
    double b_fixed_T = 0.0;    // field during temperature sweeps
    SynthesisOptions synthesis;
    NoiseSpec noise;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;

    // Built-in defaults reproducing the reference device; equals the
    // checked-in fixtures/paper_defaults.json.
    static ExperimentConfig paper_defaults();
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

} // namespace qdcav

#endif
