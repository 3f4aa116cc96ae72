#ifndef QDCAV_FITS_HPP
#define QDCAV_FITS_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdcav/leastsq.hpp"
#include "qdcav/peaks.hpp"

namespace qdcav {

struct FitResult {
    std::vector<std::string> names;
    std::vector<double> values;
    std::vector<double> std_errors;
    double residual_norm = 0.0;
    bool converged = false;
    int iterations = 0;
    bool is_strong_coupling = true;
    std::vector<double> residual_history; // accepted-step costs

    double value(std::string_view name) const;
    double std_error(std::string_view name) const;
    bool has(std::string_view name) const;
};

struct ZeemanPoint {
    double b_tesla;
    double e_plus_ueV;
    double e_minus_ueV;
};

/**
 * Joint linear least-squares fit of both spin branches to
 * E = E0 -/+ gamma1 B + gamma2 B^2 over the basis {1, -/+B, B^2}.
 * Reports e0_ueV, g_diff, gamma2_ueV_per_T2 (gamma1 mapped through mu_B).
 * Requires at least three distinct field values.
 */
FitResult fit_zeeman(std::span<const ZeemanPoint> points);

struct AnticrossingFitOptions {
    double gamma_x_ueV = 1.0;             // fixed, not fitted
    std::optional<double> fix_gamma_c;    // fit gamma_c unless set
    int max_iterations = 200;
    DetectOptions detect;
};

/**
 * Damped least-squares fit of extracted peak centers against the two-mode
 * model, free parameters {g, Ec, gamma_c, tuning intercept, tuning rate}
 * (gamma_c optionally held fixed).  Initial values are seeded from
 * detect_anticrossing.  Intended for maps with a single anti-crossing; on a
 * multi-crossing map fit each branch window separately (see window_map) or
 * use the minimum-separation route below.
 */
FitResult fit_anticrossing(const SweepMap& map, const AnticrossingFitOptions& opt = {});

// The residual/Jacobian pair fit_anticrossing runs on: params are
// (g, Ec[, gamma_c], intercept, rate), residuals interleave lower/upper
// branch centers per frame.  Exposed so the analytic Jacobian can be checked
// against finite differences.  Data are copied into the problem.
LeastSquaresProblem anticrossing_problem(std::span<const double> tuning,
                                         std::span<const double> lower,
                                         std::span<const double> upper, double t_mid,
                                         double gamma_x,
                                         std::optional<double> fix_gamma_c);

// theta = arccos(g0 / (sqrt(2) g_highfield)); inverse of reduced_coupling.
// Throws std::domain_error when the pair is inconsistent (argument > 1).
double infer_dipole_angle(double g0_ueV, double g_highfield_ueV);

struct RabiPoint {
    double b_tesla;
    double min_gap_plus_ueV;
    double min_gap_minus_ueV;
};

struct RabiRow {
    double b_tesla;
    double g_plus_ueV;
    double g_minus_ueV;
};

struct RabiTable {
    std::vector<RabiRow> rows;
    // Mean fractional reductions vs the supplied zero-field coupling,
    // present when g0 was given.
    std::optional<double> mean_reduction_plus;
    std::optional<double> mean_reduction_minus;
};

// Applies g_from_splitting per point (the minimum-separation estimator).
RabiTable rabi_vs_field(std::span<const RabiPoint> series, double gamma_c,
                        double gamma_x, std::optional<double> g0 = std::nullopt);

} // namespace qdcav

#endif
