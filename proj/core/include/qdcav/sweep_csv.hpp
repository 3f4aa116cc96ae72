#ifndef QDCAV_SWEEP_CSV_HPP
#define QDCAV_SWEEP_CSV_HPP

#include <filesystem>
#include <span>
#include <vector>

#include "qdcav/fits.hpp"
#include "qdcav/spectrum.hpp"

namespace qdcav {

enum class EnergyUnit { ueV, nm };

/**
 * Sweep-map CSV: header `tuning,unit_value,intensity`, one energy-unit
 * column (never both), frames concatenated with boundaries marked by a
 * change of the tuning value.  Comma separated, '.' decimal, no blank
 * lines.  Writes are atomic (temp file + rename).
 */
void write_sweep_csv(const SweepMap& map, const std::filesystem::path& path, EnergyUnit unit);

// Parse errors carry the 1-based line number in the exception message.
SweepMap read_sweep_csv(const std::filesystem::path& path, EnergyUnit unit);

// Zeeman branch table: header `b_field_T,e_plus_ueV,e_minus_ueV` (or the
// lambda_*_nm pair when written in nm); the reader dispatches on the header
// and always returns energies in ueV.
void write_zeeman_csv(std::span<const ZeemanPoint> points,
                      const std::filesystem::path& path, EnergyUnit unit);
std::vector<ZeemanPoint> read_zeeman_csv(const std::filesystem::path& path);

// `# key = value` lines followed by a fenced machine block with the same
// content as JSON.
std::string format_fit_report(const FitResult& result);

} // namespace qdcav

#endif
