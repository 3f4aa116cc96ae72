#include "reproduce.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "qdcav/fits.hpp"
#include "qdcav/peaks.hpp"
#include "qdcav/sweep_csv.hpp"
#include "qdcav/units.hpp"

namespace qdcav::repro {

namespace {

// Targets: paper readouts where quoted, model-derived anchors otherwise.
// Frame tolerances are one grid step; paper comparisons carry the tolerance
// the corresponding acceptance criterion states.
constexpr const char* kTargetTable = R"JSON({
  "fig1b": {
    "g_diff": {"target": 2.9, "tol": 1e-6},
    "gamma2_ueV_per_T2": {"target": 6.0, "tol": 1e-6},
    "shift_plus_7T_ueV": {"target": -300.0, "tol": 45.0},
    "shift_minus_7T_ueV": {"target": 830.0, "tol": 83.0}
  },
  "fig2a": {
    "min_gap_frame_T": {"target": 2.4875, "tol": 0.3},
    "resonance_field_vs_paper_T": {"target": 2.1, "tol": 0.525}
  },
  "fig2b": {
    "min_gap_frame_T": {"target": 3.0739, "tol": 0.3},
    "resonance_field_vs_paper_T": {"target": 2.7, "tol": 0.675}
  },
  "fig3a": {
    "min_gap_0T_ueV": {"target": 123.0, "tol": 6.15},
    "min_gap_1T_plus_ueV": {"target": 102.0, "tol": 5.1},
    "min_gap_1T_minus_ueV": {"target": 94.0, "tol": 4.7},
    "branch_split_1T_nm": {"target": 0.11, "tol": 0.011}
  },
  "fig3b": {
    "flatness_plus": {"target": 0.0, "tol": 0.10},
    "flatness_minus": {"target": 0.0, "tol": 0.10},
    "mean_reduction_plus": {"target": 0.11, "tol": 0.03},
    "mean_reduction_minus": {"target": 0.17, "tol": 0.03}
  }
})JSON";

TargetCheck make_check(const std::string& figure, const std::string& name, double value,
                       const std::string& note = {}) {
    const auto table = nlohmann::json::parse(kTargetTable);
    const auto& entry = table.at(figure).at(name);
    TargetCheck c;
    c.name = name;
    c.value = value;
    c.target = entry.at("target").get<double>();
    c.tol_abs = entry.at("tol").get<double>();
    c.pass = std::abs(value - c.target) <= c.tol_abs;
    c.note = note;
    return c;
}

std::vector<double> linspace(double lo, double hi, int count) {
    GridSpec g{lo, hi, count};
    return g.linspace();
}

FigureReport run_fig1b(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const auto b_grid = cfg.b_grid.linspace();
    std::vector<ZeemanPoint> points;
    for (const double b : b_grid)
        points.push_back({b, branch_energy(cfg.exciton, SpinBranch::plus_one, b),
                          branch_energy(cfg.exciton, SpinBranch::minus_one, b)});
    write_zeeman_csv(points, dir / "fig1b_branches.csv", EnergyUnit::ueV);

    const FitResult fit = fit_zeeman(points);
    const double e0 = cfg.exciton.e0_ueV;

    FigureReport rep{"fig1b", {}};
    rep.checks.push_back(make_check("fig1b", "g_diff", fit.value("g_diff")));
    rep.checks.push_back(
        make_check("fig1b", "gamma2_ueV_per_T2", fit.value("gamma2_ueV_per_T2")));
    rep.checks.push_back(make_check(
        "fig1b", "shift_plus_7T_ueV",
        branch_energy(cfg.exciton, SpinBranch::plus_one, 7.0) - e0, "paper readout -0.3 meV"));
    rep.checks.push_back(make_check(
        "fig1b", "shift_minus_7T_ueV",
        branch_energy(cfg.exciton, SpinBranch::minus_one, 7.0) - e0, "paper readout 0.83 meV"));
    return rep;
}

FigureReport run_fig2(const std::string& figure, const ExperimentConfig& cfg,
                      const std::filesystem::path& dir) {
    const bool is_a = figure == "fig2a";
    const double t_hold = is_a ? 34.0 : 41.0;
    const auto b_grid = is_a ? linspace(1.5, 3.3, 7) : linspace(1.8, 3.6, 7);

    ExcitonParams exc = cfg.exciton;
    exc.e0_ueV = cfg.temperature.energy_at(t_hold);
    const auto energy_grid = cfg.energy_grid.linspace();
    const SweepMap map =
        sweep_magnetic(exc, cfg.cavity, cfg.coupling, b_grid, energy_grid, cfg.synthesis);
    write_sweep_csv(map, dir / (figure + "_map.csv"), EnergyUnit::ueV);

    // Frame with the smallest adjacent peak separation.
    double best_b = b_grid.front();
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < map.tuning.size(); ++f) {
        const PeakSet ps = extract_peaks(map.frame(f));
        for (std::size_t i = 0; i + 1 < ps.peaks.size(); ++i) {
            const double gap = ps.peaks[i + 1].center_ueV - ps.peaks[i].center_ueV;
            if (gap < best_gap) {
                best_gap = gap;
                best_b = map.tuning[f];
            }
        }
    }

    const SpinBranch branch = is_a ? SpinBranch::plus_one : SpinBranch::minus_one;
    const double b_res = resonance_field(exc, branch, cfg.cavity);

    FigureReport rep{figure, {}};
    rep.checks.push_back(
        make_check(figure, "min_gap_frame_T", best_b, "one grid step of the resonance field"));
    rep.checks.push_back(make_check(figure, "resonance_field_vs_paper_T", b_res,
                                    "lambda0-sensitive"));
    return rep;
}

FigureReport run_fig3a(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const auto t_grid = cfg.t_grid.linspace();
    const auto energy_grid = cfg.energy_grid.linspace();

    const SweepMap map0 = sweep_temperature(cfg.exciton, cfg.temperature, cfg.cavity,
                                            cfg.coupling, t_grid, energy_grid, 0.0,
                                            cfg.synthesis);
    write_sweep_csv(map0, dir / "fig3a_0T_map.csv", EnergyUnit::ueV);
    const AntiCrossing ac0 = detect_anticrossing(map0);

    const SweepMap map1 = sweep_temperature(cfg.exciton, cfg.temperature, cfg.cavity,
                                            cfg.coupling, t_grid, energy_grid, 1.0,
                                            cfg.synthesis);
    write_sweep_csv(map1, dir / "fig3a_1T_map.csv", EnergyUnit::ueV);
    const auto crossings = detect_anticrossings(map1);
    if (crossings.size() < 2)
        throw std::runtime_error("fig3a: expected two anti-crossings at 1 T");

    const double split_nm = energy_to_wavelength(cfg.cavity.ec_ueV) -
                            energy_to_wavelength(cfg.cavity.ec_ueV +
                                                 branch_splitting(cfg.exciton, 1.0));

    FigureReport rep{"fig3a", {}};
    rep.checks.push_back(make_check("fig3a", "min_gap_0T_ueV", ac0.min_gap_ueV));
    rep.checks.push_back(
        make_check("fig3a", "min_gap_1T_plus_ueV", crossings.front().min_gap_ueV));
    rep.checks.push_back(
        make_check("fig3a", "min_gap_1T_minus_ueV", crossings.back().min_gap_ueV));
    rep.checks.push_back(
        make_check("fig3a", "branch_split_1T_nm", split_nm, "lambda0-sensitive"));
    return rep;
}

FigureReport run_fig3b(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    const auto energy_grid = cfg.energy_grid.linspace();
    // Half the default temperature resolution is plenty for the gap minima
    // and keeps the 7-sweep run fast.
    const auto t_grid = linspace(cfg.t_grid.min, cfg.t_grid.max, (cfg.t_grid.count + 1) / 2);

    std::vector<RabiPoint> series;
    for (int b = 1; b <= 7; ++b) {
        const SweepMap map = sweep_temperature(cfg.exciton, cfg.temperature, cfg.cavity,
                                               cfg.coupling, t_grid, energy_grid,
                                               static_cast<double>(b), cfg.synthesis);
        const auto crossings = detect_anticrossings(map);
        if (crossings.size() < 2)
            throw std::runtime_error("fig3b: expected two anti-crossings at B = " +
                                     std::to_string(b));
        series.push_back({static_cast<double>(b), crossings.front().min_gap_ueV,
                          crossings.back().min_gap_ueV});
    }

    const double gamma_c = cavity_linewidth(cfg.cavity);
    const RabiTable table =
        rabi_vs_field(series, gamma_c, cfg.exciton.gamma_x_ueV, cfg.coupling.g0_ueV);

    {
        std::ofstream out(dir / "fig3b_rabi_vs_field.csv");
        out << "b_field_T,g_plus_ueV,g_minus_ueV\n";
        for (const auto& row : table.rows)
            out << row.b_tesla << "," << row.g_plus_ueV << "," << row.g_minus_ueV << "\n";
    }

    auto flatness = [&](auto getter) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
        for (const auto& row : table.rows) {
            const double v = getter(row);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        return (hi - lo) / (sum / static_cast<double>(table.rows.size()));
    };

    FigureReport rep{"fig3b", {}};
    rep.checks.push_back(make_check("fig3b", "flatness_plus",
                                    flatness([](const RabiRow& r) { return r.g_plus_ueV; })));
    rep.checks.push_back(make_check("fig3b", "flatness_minus",
                                    flatness([](const RabiRow& r) { return r.g_minus_ueV; })));
    rep.checks.push_back(
        make_check("fig3b", "mean_reduction_plus", table.mean_reduction_plus.value_or(0.0)));
    rep.checks.push_back(
        make_check("fig3b", "mean_reduction_minus", table.mean_reduction_minus.value_or(0.0)));
    return rep;
}

} // namespace

const std::vector<std::string>& figure_names() {
    static const std::vector<std::string> names{"fig1b", "fig2a", "fig2b", "fig3a", "fig3b"};
    return names;
}

std::string target_table_json() { return kTargetTable; }

FigureReport run_figure(const std::string& figure, const ExperimentConfig& config,
                        const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    if (figure == "fig1b") return run_fig1b(config, out_dir);
    if (figure == "fig2a" || figure == "fig2b") return run_fig2(figure, config, out_dir);
    if (figure == "fig3a") return run_fig3a(config, out_dir);
    if (figure == "fig3b") return run_fig3b(config, out_dir);
    throw std::invalid_argument("unknown figure: " + figure);
}

} // namespace qdcav::repro
