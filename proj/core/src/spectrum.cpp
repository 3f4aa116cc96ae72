#include "qdcav/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qdcav {

namespace {

void check_grid(std::span<const double> grid) {
    if (grid.empty())
        throw std::invalid_argument("energy grid must be non-empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("energy grid must be strictly increasing");
}

double mode_amplitude(const ComplexMode& m, Emphasis emphasis) {
    switch (emphasis) {
        case Emphasis::cavity_weighted:
            return m.weights[2] * m.weights[2];
        case Emphasis::exciton_weighted:
            return m.weights[0] * m.weights[0] + m.weights[1] * m.weights[1];
        case Emphasis::equal:
            return 1.0;
    }
    return 1.0;
}

// splitmix64: cheap, well-mixed stream derivation so per-frame noise streams
// are independent of evaluation order and platform.
std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

    // Box-Muller over explicitly generated uniforms; std::normal_distribution
    // is implementation-defined and would break cross-platform determinism.
    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double two_pi = 6.283185307179586476925286766559;
        spare_ = r * std::sin(two_pi * u2);
        have_spare_ = true;
        return r * std::cos(two_pi * u2);
    }

private:
    double uniform() { return (splitmix64(state_) >> 11) * 0x1.0p-53; }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace

double lorentzian(double e, double center, double fwhm, double amplitude) {
    if (!(fwhm > 0.0))
        throw std::domain_error("lorentzian: fwhm must be positive");
    const double half = fwhm / 2.0;
    const double d = e - center;
    return amplitude * half * half / (d * d + half * half);
}

Spectrum synth_spectrum(std::span<const ComplexMode> modes, std::span<const double> grid,
                        const SynthesisOptions& opt) {
    if (modes.empty())
        throw std::invalid_argument("synth_spectrum: mode list must be non-empty");
    check_grid(grid);

    Spectrum s;
    s.energies_ueV.assign(grid.begin(), grid.end());
    s.intensities.assign(grid.size(), 0.0);
    for (const auto& m : modes) {
        const double amp = mode_amplitude(m, opt.emphasis);
        if (amp == 0.0) continue;
        const double fwhm = std::max(2.0 * m.half_linewidth_ueV, opt.resolution_floor_ueV);
        for (std::size_t i = 0; i < grid.size(); ++i)
            s.intensities[i] += lorentzian(grid[i], m.energy_ueV, fwhm, amp);
    }
    return s;
}

std::array<ComplexMode, 3> exciton_cavity_modes(const ExcitonParams& exc,
                                                const CavityParams& cav,
                                                const CouplingParams& cpl, double b_tesla) {
    const double gamma_c = cavity_linewidth(cav);
    if (b_tesla > 0.0) {
        return polariton_modes_3x3(branch_energy(exc, SpinBranch::plus_one, b_tesla),
                                   branch_energy(exc, SpinBranch::minus_one, b_tesla),
                                   exc.gamma_x_ueV, cav.ec_ueV, gamma_c, cpl.g_plus_ueV,
                                   cpl.g_minus_ueV);
    }

    // Zero field: the eigenstates are the linear dipole components.  The
    // co-polarized one couples with g0; the orthogonal one stays dark.  In
    // the circular basis both linear states spread evenly over sigma+-.
    const auto doublet = polariton_modes_2x2(exc.e0_ueV, exc.gamma_x_ueV, cav.ec_ueV,
                                             gamma_c, cpl.g0_ueV);
    const double inv_sqrt2 = 0.70710678118654752440;
    std::array<ComplexMode, 3> out;
    for (int i = 0; i < 2; ++i) {
        out[i] = doublet[i];
        const double w_exc = doublet[i].weights[0];
        out[i].weights = {w_exc * inv_sqrt2, w_exc * inv_sqrt2, doublet[i].weights[2]};
    }
    ComplexMode dark;
    dark.energy_ueV = exc.e0_ueV;
    dark.half_linewidth_ueV = exc.gamma_x_ueV / 2.0;
    dark.weights = {inv_sqrt2, inv_sqrt2, 0.0};
    out[2] = dark;
    std::sort(out.begin(), out.end(), [](const ComplexMode& a, const ComplexMode& b) {
        if (a.energy_ueV != b.energy_ueV) return a.energy_ueV < b.energy_ueV;
        return a.half_linewidth_ueV < b.half_linewidth_ueV;
    });
    return out;
}

SweepMap sweep_magnetic(const ExcitonParams& exc, const CavityParams& cav,
                        const CouplingParams& cpl, std::span<const double> b_grid,
                        std::span<const double> energy_grid, const SynthesisOptions& opt) {
    if (b_grid.empty())
        throw std::invalid_argument("sweep_magnetic: field grid must be non-empty");
    check_grid(energy_grid);

    SweepMap map;
    map.axis_kind = TuningAxis::magnetic_field;
    map.tuning.assign(b_grid.begin(), b_grid.end());
    map.energies_ueV.assign(energy_grid.begin(), energy_grid.end());
    map.intensities.reserve(b_grid.size());
    for (const double b : b_grid) {
        const auto modes = exciton_cavity_modes(exc, cav, cpl, b);
        map.intensities.push_back(synth_spectrum(modes, energy_grid, opt).intensities);
    }
    return map;
}

SweepMap sweep_temperature(const ExcitonParams& exc, const TemperatureTuning& tt,
                           const CavityParams& cav, const CouplingParams& cpl,
                           std::span<const double> t_grid,
                           std::span<const double> energy_grid, double b_fixed_T,
                           const SynthesisOptions& opt) {
    if (t_grid.empty())
        throw std::invalid_argument("sweep_temperature: temperature grid must be non-empty");
    check_grid(energy_grid);

    SweepMap map;
    map.axis_kind = TuningAxis::temperature;
    map.tuning.assign(t_grid.begin(), t_grid.end());
    map.energies_ueV.assign(energy_grid.begin(), energy_grid.end());
    map.fixed_field_T = b_fixed_T;
    map.intensities.reserve(t_grid.size());
    for (const double t : t_grid) {
        ExcitonParams at_t = exc;
        at_t.e0_ueV = tt.energy_at(t);
        const auto modes = exciton_cavity_modes(at_t, cav, cpl, b_fixed_T);
        map.intensities.push_back(synth_spectrum(modes, energy_grid, opt).intensities);
    }
    return map;
}

SweepMap add_noise(const SweepMap& map, NoiseModel model, double scale, std::uint64_t seed) {
    if (scale < 0.0)
        throw std::domain_error("add_noise: scale must be non-negative");
    SweepMap out = map;
    if (scale == 0.0) return out;

    double map_max = 0.0;
    for (const auto& row : map.intensities)
        for (const double v : row) map_max = std::max(map_max, v);
    if (map_max <= 0.0) return out;

    for (std::size_t f = 0; f < out.intensities.size(); ++f) {
        std::uint64_t mix = seed;
        splitmix64(mix);
        GaussianStream stream(mix ^ (0x632be59bd9b4e019ull * (f + 1)));
        for (double& v : out.intensities[f]) {
            const double sigma = model == NoiseModel::gaussian
                                     ? scale * map_max
                                     : scale * std::sqrt(std::max(v, 0.0) * map_max);
            v = std::max(0.0, v + sigma * stream.next());
        }
    }
    return out;
}

} // namespace qdcav
