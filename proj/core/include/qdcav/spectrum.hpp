#ifndef QDCAV_SPECTRUM_HPP
#define QDCAV_SPECTRUM_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qdcav/polariton.hpp"

namespace qdcav {

// Intensity vs photon energy on a strictly increasing grid.
struct Spectrum {
    std::vector<double> energies_ueV;
    std::vector<double> intensities;
};

enum class TuningAxis { magnetic_field, temperature };

/**
 * A stack of spectra over a tuning axis (B or T).  All frames share one
 * energy grid.  fixed_field_T carries the field a temperature sweep was
 * taken at; it is absent for magnetic sweeps.
 */
struct SweepMap {
    TuningAxis axis_kind = TuningAxis::temperature;
    std::vector<double> tuning;
    std::vector<double> energies_ueV;
    std::vector<std::vector<double>> intensities; // one row per tuning value
    std::optional<double> fixed_field_T;

    Spectrum frame(std::size_t i) const { return Spectrum{energies_ueV, intensities.at(i)}; }
};

// Linear red shift of the QD line with temperature.
struct TemperatureTuning {
    double t_ref_K = 0.0;
    double e_ref_ueV = 0.0;        // QD energy at t_ref
    double slope_ueV_per_K = 0.0;  // positive = red shift with rising T

    double energy_at(double t_K) const { return e_ref_ueV - slope_ueV_per_K * (t_K - t_ref_K); }
};

enum class Emphasis { cavity_weighted, exciton_weighted, equal };

struct SynthesisOptions {
    Emphasis emphasis = Emphasis::cavity_weighted;
    // Narrow lines are broadened to the spectrometer resolution.
    double resolution_floor_ueV = 27.0;
};

// amplitude * (w/2)^2 / ((E-c)^2 + (w/2)^2); peak value is `amplitude`.
double lorentzian(double e, double center, double fwhm, double amplitude);

// Sum of one Lorentzian per mode, fwhm = max(2*half_linewidth, floor),
// amplitude from the selected basis weight (squared).
Spectrum synth_spectrum(std::span<const ComplexMode> modes,
                        std::span<const double> grid,
                        const SynthesisOptions& opt = {});

/**
 * Coupled exciton-cavity modes at a given field.
 *
 * For B > 0 the circular basis applies and the V-system is solved with
 * (g_plus, g_minus).  At exactly B = 0 the zero-field eigenstates are the
 * linear dipole components: the co-polarized one couples with g0 and the
 * orthogonal one is dark, so the result is the two-mode doublet plus an
 * uncoupled line at the exciton energy.
 */
std::array<ComplexMode, 3> exciton_cavity_modes(const ExcitonParams& exc,
                                                const CavityParams& cav,
                                                const CouplingParams& cpl,
                                                double b_tesla);

SweepMap sweep_magnetic(const ExcitonParams& exc, const CavityParams& cav,
                        const CouplingParams& cpl,
                        std::span<const double> b_grid,
                        std::span<const double> energy_grid,
                        const SynthesisOptions& opt = {});

SweepMap sweep_temperature(const ExcitonParams& exc, const TemperatureTuning& tt,
                           const CavityParams& cav, const CouplingParams& cpl,
                           std::span<const double> t_grid,
                           std::span<const double> energy_grid,
                           double b_fixed_T,
                           const SynthesisOptions& opt = {});

enum class NoiseModel { shot, gaussian };

// Deterministic for a fixed seed (per-frame streams are split from the master
// seed, so frame order does not matter).  Intensities are clamped at zero.
// gaussian: sigma = scale * map_max everywhere;
// shot:     sigma = scale * sqrt(I * map_max), i.e. scale*map_max at the peak.
SweepMap add_noise(const SweepMap& map, NoiseModel model, double scale, std::uint64_t seed);

} // namespace qdcav

#endif
