#include "qdcav/sweep_csv.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qdcav/units.hpp"

namespace qdcav {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

[[noreturn]] void parse_fail(const std::filesystem::path& path, std::size_t line,
                             const std::string& what) {
    throw std::invalid_argument(path.string() + ":" + std::to_string(line) + ": " + what);
}

double to_double(const std::string& tok, const std::filesystem::path& path, std::size_t line) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &pos);
    } catch (const std::exception&) {
        parse_fail(path, line, "not a number: '" + tok + "'");
    }
    if (pos != tok.size()) parse_fail(path, line, "trailing characters in number: '" + tok + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

void write_sweep_csv(const SweepMap& map, const std::filesystem::path& path, EnergyUnit unit) {
    std::string out = "tuning,unit_value,intensity\n";
    for (std::size_t f = 0; f < map.tuning.size(); ++f) {
        const std::string t = fmt(map.tuning[f]);
        for (std::size_t i = 0; i < map.energies_ueV.size(); ++i) {
            const double uv = unit == EnergyUnit::ueV ? map.energies_ueV[i]
                                                      : energy_to_wavelength(map.energies_ueV[i]);
            out += t;
            out += ',';
            out += fmt(uv);
            out += ',';
            out += fmt(map.intensities[f][i]);
            out += '\n';
        }
    }
    atomic_write(path, out);
}

SweepMap read_sweep_csv(const std::filesystem::path& path, EnergyUnit unit) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
    ++line_no;
    {
        const auto cols = split_csv(line);
        if (cols.size() != 3 || cols[0] != "tuning" || cols[1] != "unit_value" ||
            cols[2] != "intensity")
            parse_fail(path, line_no, "expected header 'tuning,unit_value,intensity'");
    }

    SweepMap map;
    std::vector<double> cur_energy, cur_intensity;
    bool have_tuning = false;
    double cur_tuning = 0.0;

    auto flush_frame = [&]() {
        if (cur_energy.empty()) return;
        // Rows may come in nm order (descending energy); normalize ascending.
        std::vector<std::size_t> order(cur_energy.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return cur_energy[a] < cur_energy[b]; });
        std::vector<double> e(order.size()), y(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            e[i] = cur_energy[order[i]];
            y[i] = cur_intensity[order[i]];
        }
        if (map.intensities.empty()) {
            map.energies_ueV = e;
        } else if (e.size() != map.energies_ueV.size()) {
            throw std::invalid_argument(path.string() + ": frames have differing grid sizes");
        }
        map.tuning.push_back(cur_tuning);
        map.intensities.push_back(std::move(y));
        cur_energy.clear();
        cur_intensity.clear();
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            parse_fail(path, line_no, "blank lines are forbidden");
        const auto cols = split_csv(line);
        if (cols.size() != 3) parse_fail(path, line_no, "expected 3 columns");
        const double t = to_double(cols[0], path, line_no);
        const double uv = to_double(cols[1], path, line_no);
        const double y = to_double(cols[2], path, line_no);
        if (!have_tuning || t != cur_tuning) {
            flush_frame();
            cur_tuning = t;
            have_tuning = true;
        }
        cur_energy.push_back(unit == EnergyUnit::ueV ? uv : wavelength_to_energy(uv));
        cur_intensity.push_back(y);
    }
    flush_frame();
    if (map.tuning.empty()) parse_fail(path, line_no, "no data rows");
    return map;
}

void write_zeeman_csv(std::span<const ZeemanPoint> points, const std::filesystem::path& path,
                      EnergyUnit unit) {
    std::string out = unit == EnergyUnit::ueV ? "b_field_T,e_plus_ueV,e_minus_ueV\n"
                                              : "b_field_T,lambda_plus_nm,lambda_minus_nm\n";
    for (const auto& pt : points) {
        const double a = unit == EnergyUnit::ueV ? pt.e_plus_ueV
                                                 : energy_to_wavelength(pt.e_plus_ueV);
        const double b = unit == EnergyUnit::ueV ? pt.e_minus_ueV
                                                 : energy_to_wavelength(pt.e_minus_ueV);
        out += fmt(pt.b_tesla) + "," + fmt(a) + "," + fmt(b) + "\n";
    }
    atomic_write(path, out);
}

std::vector<ZeemanPoint> read_zeeman_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
    ++line_no;
    bool in_nm = false;
    {
        const auto cols = split_csv(line);
        if (cols.size() == 3 && cols[0] == "b_field_T" && cols[1] == "e_plus_ueV" &&
            cols[2] == "e_minus_ueV") {
            in_nm = false;
        } else if (cols.size() == 3 && cols[0] == "b_field_T" && cols[1] == "lambda_plus_nm" &&
                   cols[2] == "lambda_minus_nm") {
            in_nm = true;
        } else {
            parse_fail(path, line_no, "unrecognized zeeman CSV header");
        }
    }

    std::vector<ZeemanPoint> points;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            parse_fail(path, line_no, "blank lines are forbidden");
        const auto cols = split_csv(line);
        if (cols.size() != 3) parse_fail(path, line_no, "expected 3 columns");
        ZeemanPoint pt;
        pt.b_tesla = to_double(cols[0], path, line_no);
        const double a = to_double(cols[1], path, line_no);
        const double b = to_double(cols[2], path, line_no);
        pt.e_plus_ueV = in_nm ? wavelength_to_energy(a) : a;
        pt.e_minus_ueV = in_nm ? wavelength_to_energy(b) : b;
        points.push_back(pt);
    }
    if (points.empty()) parse_fail(path, line_no, "no data rows");
    return points;
}

std::string format_fit_report(const FitResult& r) {
    std::ostringstream out;
    nlohmann::ordered_json machine;
    auto emit = [&](const std::string& key, const nlohmann::ordered_json& v) {
        out << "# " << key << " = " << (v.is_string() ? v.get<std::string>() : v.dump())
            << "\n";
        machine[key] = v;
    };
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        emit(r.names[i], r.values[i]);
        emit(r.names[i] + "_stderr", r.std_errors[i]);
    }
    emit("residual_norm", r.residual_norm);
    emit("converged", r.converged);
    emit("iterations", r.iterations);
    emit("strong_coupling", r.is_strong_coupling);
    out << "```json\n" << machine.dump(2) << "\n```\n";
    return out.str();
}

} // namespace qdcav
