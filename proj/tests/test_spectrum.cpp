#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qdcav/config.hpp"
#include "qdcav/peaks.hpp"
#include "qdcav/spectrum.hpp"

using namespace qdcav;
using oracles::rel_err;

TEST_CASE("lorentzian shape") {
    CHECK(lorentzian(10.0, 10.0, 4.0, 3.5) == 3.5);
    CHECK(std::abs(lorentzian(12.0, 10.0, 4.0, 3.5) - 1.75) < 1e-12);
    CHECK(std::abs(lorentzian(8.0, 10.0, 4.0, 3.5) - 1.75) < 1e-12);
    CHECK_THROWS_AS(lorentzian(0.0, 0.0, 0.0, 1.0), std::domain_error);
}

TEST_CASE("lorentzian integral") {
    // oracle: analytic integral = amplitude * pi * fwhm / 2, quadrature over
    // +-50 fwhm catches all but ~0.6% of it
    const double amp = 3.0, fwhm = 40.0;
    const auto grid = oracles::linspace(-50.0 * fwhm, 50.0 * fwhm, 400001);
    std::vector<double> y(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) y[i] = lorentzian(grid[i], 0.0, fwhm, amp);
    const double integral = oracles::trapezoid(grid, y);
    CHECK(rel_err(integral, amp * 3.14159265358979323846 * fwhm / 2.0) < 0.02);
}

TEST_CASE("synth_spectrum single mode equals one lorentzian") {
    ComplexMode m;
    m.energy_ueV = 1000.0;
    m.half_linewidth_ueV = 30.0;
    m.weights = {0.6, 0.0, 0.8};
    const auto grid = oracles::linspace(500.0, 1500.0, 501);
    SynthesisOptions opt;
    opt.emphasis = Emphasis::equal;
    const Spectrum s = synth_spectrum(std::span(&m, 1), grid, opt);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(s.intensities[i] == lorentzian(grid[i], 1000.0, 60.0, 1.0));
}

TEST_CASE("resolution floor substitutes narrow and zero widths") {
    ComplexMode m;
    m.energy_ueV = 1000.0;
    m.half_linewidth_ueV = 0.0;
    m.weights = {0.0, 0.0, 1.0};
    const auto grid = oracles::linspace(900.0, 1100.0, 401);
    const Spectrum s = synth_spectrum(std::span(&m, 1), grid, {});
    // fwhm == floor: value at center +- floor/2 is half of peak
    const double peak = s.intensities[200];
    CHECK(peak == 1.0);
    std::size_t idx_half = 200 + static_cast<std::size_t>(27.0 / 2.0 / 0.5);
    CHECK(std::abs(s.intensities[idx_half] - 0.5) < 0.01);
}

TEST_CASE("on-resonance doublet with paper numbers") {
    const double ec = 1.3317e6;
    const auto modes = polariton_modes_2x2(ec, 1.0, ec, 150.0, 72.0);
    const auto grid = oracles::linspace(ec - 400.0, ec + 400.0, 801);
    const Spectrum s = synth_spectrum(modes, grid, {});
    const PeakSet peaks = extract_peaks(s);
    REQUIRE(peaks.peaks.size() == 2);
    // oracle: the synthesis inputs (2x2 closed form), separation 123 ueV
    CHECK(std::abs(peaks.peaks[1].center_ueV - peaks.peaks[0].center_ueV - 123.23) < 0.5);
    CHECK(rel_err(peaks.peaks[0].amplitude, peaks.peaks[1].amplitude) < 1e-6);
}

TEST_CASE("uncoupled system under cavity weighting shows only the cavity") {
    const double ec = 1.3317e6;
    const auto modes = polariton_modes_2x2(ec + 200.0, 1.0, ec, 150.0, 0.0);
    const auto grid = oracles::linspace(ec - 500.0, ec + 500.0, 1001);
    const Spectrum s = synth_spectrum(modes, grid, {});
    const PeakSet peaks = extract_peaks(s);
    REQUIRE(peaks.peaks.size() == 1);
    CHECK(std::abs(peaks.peaks[0].center_ueV - ec) < 0.5);
}

TEST_CASE("sweep_magnetic structure and zero-field reduction") {
    const auto cfg = ExperimentConfig::paper_defaults();
    const auto e_grid = oracles::linspace(cfg.cavity.ec_ueV - 800.0, cfg.cavity.ec_ueV + 800.0,
                                          801);
    const std::vector<double> b_grid{0.0};
    const SweepMap map = sweep_magnetic(cfg.exciton, cfg.cavity, cfg.coupling, b_grid, e_grid,
                                        cfg.synthesis);
    REQUIRE(map.tuning.size() == 1);
    // single-point sweep at B = 0 equals the zero-field spectrum
    const auto modes = exciton_cavity_modes(cfg.exciton, cfg.cavity, cfg.coupling, 0.0);
    const Spectrum direct = synth_spectrum(modes, e_grid, cfg.synthesis);
    for (std::size_t i = 0; i < e_grid.size(); ++i)
        CHECK(map.intensities[0][i] == direct.intensities[i]);
}

TEST_CASE("decoupled sweep keeps an unshifted cavity line and crossing excitons") {
    auto cfg = ExperimentConfig::paper_defaults();
    cfg.coupling.g0_ueV = 0.0;
    cfg.coupling.g_plus_ueV = 0.0;
    cfg.coupling.g_minus_ueV = 0.0;
    ExcitonParams exc = cfg.exciton;
    exc.e0_ueV = cfg.cavity.ec_ueV + 100.0; // +1 branch crosses within the grid
    const auto e_grid = oracles::linspace(cfg.cavity.ec_ueV - 700.0, cfg.cavity.ec_ueV + 700.0,
                                          1401);
    const auto b_grid = oracles::linspace(0.5, 4.0, 8);
    SynthesisOptions opt;
    opt.emphasis = Emphasis::equal;
    const SweepMap map = sweep_magnetic(exc, cfg.cavity, cfg.coupling, b_grid, e_grid, opt);
    for (std::size_t f = 0; f < map.tuning.size(); ++f) {
        // Frames where a bare exciton line sits within the resolution floor
        // of the cavity blend into one peak; skip those for the position
        // check.
        const double b = map.tuning[f];
        const double near = std::min(
            std::abs(branch_energy(exc, SpinBranch::plus_one, b) - cfg.cavity.ec_ueV),
            std::abs(branch_energy(exc, SpinBranch::minus_one, b) - cfg.cavity.ec_ueV));
        if (near < 2.0 * opt.resolution_floor_ueV) continue;
        const PeakSet ps = extract_peaks(map.frame(f));
        bool cavity_there = false;
        for (const auto& p : ps.peaks)
            if (std::abs(p.center_ueV - cfg.cavity.ec_ueV) < 0.5) cavity_there = true;
        CHECK(cavity_there);
    }
}

TEST_CASE("temperature sweep anchors") {
    TemperatureTuning tt{34.0, 1000.0, 70.0};
    CHECK(tt.energy_at(34.0) == 1000.0);
    CHECK(tt.energy_at(41.0) == 1000.0 - 490.0);
    CHECK(tt.energy_at(27.0) == 1000.0 + 490.0);
}

TEST_CASE("temperature sweep with zero slope is frame-constant") {
    auto cfg = ExperimentConfig::paper_defaults();
    cfg.temperature.slope_ueV_per_K = 0.0;
    const auto e_grid = oracles::linspace(cfg.cavity.ec_ueV - 600.0, cfg.cavity.ec_ueV + 600.0,
                                          601);
    const auto t_grid = oracles::linspace(30.0, 40.0, 11);
    const SweepMap map = sweep_temperature(cfg.exciton, cfg.temperature, cfg.cavity,
                                           cfg.coupling, t_grid, e_grid, 0.0, cfg.synthesis);
    for (std::size_t f = 1; f < map.intensities.size(); ++f)
        CHECK(map.intensities[f] == map.intensities[0]);
}

TEST_CASE("tuning mechanism independence of the minimum gap") {
    // the same (g, gamma_c, gamma_x) anti-crossing reached by temperature at
    // B = 0 and by field on the +1 branch must give the same minimum gap
    auto cfg = ExperimentConfig::paper_defaults();
    const double g = 63.0;
    cfg.coupling.g0_ueV = g;
    cfg.coupling.g_plus_ueV = g;
    cfg.coupling.g_minus_ueV = g;
    const auto e_grid = cfg.energy_grid.linspace();

    const auto t_grid = oracles::linspace(30.0, 43.0, 105);
    const SweepMap t_map = sweep_temperature(cfg.exciton, cfg.temperature, cfg.cavity,
                                             cfg.coupling, t_grid, e_grid, 0.0, cfg.synthesis);
    const AntiCrossing t_ac = detect_anticrossing(t_map);

    // field sweep: push the minus branch far away so the +1 crossing is clean
    ExcitonParams exc = cfg.exciton;
    exc.g_diff = 20.0;
    exc.e0_ueV = cfg.cavity.ec_ueV + 600.0;
    const auto b_grid = oracles::linspace(0.2, 2.4, 105);
    const SweepMap b_map =
        sweep_magnetic(exc, cfg.cavity, cfg.coupling, b_grid, e_grid, cfg.synthesis);
    const AntiCrossing b_ac = detect_anticrossing(b_map);

    const double t_step_gap = 69.478 * (t_grid[1] - t_grid[0]);
    CHECK(std::abs(t_ac.min_gap_ueV - b_ac.min_gap_ueV) < t_step_gap);
    CHECK(std::abs(t_ac.min_gap_ueV - 2.0 * std::sqrt(g * g - 146.97 * 146.97 / 16.0)) < 2.0);
}

TEST_CASE("synthesized spectra are non-negative and peak counts match modes") {
    std::mt19937 rng(41);
    std::uniform_real_distribution<double> g_dist(45.0, 90.0);
    std::uniform_real_distribution<double> det_dist(-60.0, 60.0);
    const double ec = 1.3317e6;
    for (int i = 0; i < 50; ++i) {
        const double g = g_dist(rng);
        const auto modes = polariton_modes_2x2(ec + det_dist(rng), 1.0, ec, 150.0, g);
        // grid finer than fwhm/10 (narrowest mode here is ~27 ueV wide)
        const auto grid = oracles::linspace(ec - 500.0, ec + 500.0, 2001);
        const Spectrum s = synth_spectrum(modes, grid, {});
        int above_floor = 0;
        const double sep = modes[1].energy_ueV - modes[0].energy_ueV;
        const double width = modes[0].half_linewidth_ueV + modes[1].half_linewidth_ueV;
        for (const double v : s.intensities) CHECK(v >= 0.0);
        for (const auto& m : modes)
            if (m.weights[2] * m.weights[2] > 0.05) ++above_floor;
        if (sep < 1.2 * width) continue; // merged peaks are out of scope here
        const PeakSet ps = extract_peaks(s, 4, 0.05);
        CHECK(static_cast<int>(ps.peaks.size()) == above_floor);
    }
}

TEST_CASE("resonance symmetry of polariton amplitudes") {
    const double ec = 1.3317e6;
    const auto modes = polariton_modes_2x2(ec, 1.0, ec, 147.97, 72.0);
    CHECK(std::abs(modes[0].weights[2] * modes[0].weights[2] -
                   modes[1].weights[2] * modes[1].weights[2]) < 1e-6);
}

TEST_CASE("add_noise determinism and clamping") {
    const auto cfg = ExperimentConfig::paper_defaults();
    const auto e_grid = oracles::linspace(cfg.cavity.ec_ueV - 300.0, cfg.cavity.ec_ueV + 300.0,
                                          301);
    const auto t_grid = oracles::linspace(33.0, 40.0, 15);
    const SweepMap map = sweep_temperature(cfg.exciton, cfg.temperature, cfg.cavity,
                                           cfg.coupling, t_grid, e_grid, 0.0, cfg.synthesis);

    const SweepMap same = add_noise(map, NoiseModel::gaussian, 0.0, 7);
    CHECK(same.intensities == map.intensities);

    const SweepMap a = add_noise(map, NoiseModel::gaussian, 0.01, 1234);
    const SweepMap b = add_noise(map, NoiseModel::gaussian, 0.01, 1234);
    CHECK(a.intensities == b.intensities);
    const SweepMap c = add_noise(map, NoiseModel::gaussian, 0.01, 1235);
    CHECK(a.intensities != c.intensities);

    bool changed = false;
    for (std::size_t f = 0; f < map.intensities.size(); ++f)
        for (std::size_t i = 0; i < map.intensities[f].size(); ++i) {
            if (a.intensities[f][i] != map.intensities[f][i]) changed = true;
            CHECK(a.intensities[f][i] >= 0.0);
        }
    CHECK(changed);

    const SweepMap shot = add_noise(map, NoiseModel::shot, 0.01, 99);
    for (const auto& row : shot.intensities)
        for (const double v : row) CHECK(v >= 0.0);
}
