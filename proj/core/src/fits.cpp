#include "qdcav/fits.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <set>
#include <stdexcept>

#include "qdcav/units.hpp"

namespace qdcav {

double FitResult::value(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return values[i];
    throw std::out_of_range("FitResult: no parameter named " + std::string(name));
}

double FitResult::std_error(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return std_errors[i];
    throw std::out_of_range("FitResult: no parameter named " + std::string(name));
}

bool FitResult::has(std::string_view name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

FitResult fit_zeeman(std::span<const ZeemanPoint> points) {
    std::set<double> distinct;
    for (const auto& pt : points) distinct.insert(pt.b_tesla);
    if (distinct.size() < 3)
        throw std::invalid_argument("fit_zeeman: need at least 3 distinct field values");

    // Model is linear in (E0, gamma1, gamma2) over the basis {1, -/+B, B^2};
    // accumulate normal equations directly.
    std::vector<double> ata(9, 0.0), atb(3, 0.0);
    auto accumulate = [&](double b, double e, double sign) {
        const double row[3] = {1.0, sign * b, b * b};
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) ata[i * 3 + j] += row[i] * row[j];
            atb[i] += row[i] * e;
        }
    };
    for (const auto& pt : points) {
        accumulate(pt.b_tesla, pt.e_plus_ueV, -1.0);
        accumulate(pt.b_tesla, pt.e_minus_ueV, +1.0);
    }

    std::vector<double> coef(3);
    if (!cholesky_solve(3, ata, atb, coef))
        throw std::runtime_error("fit_zeeman: rank-deficient design matrix");

    const double e0 = coef[0];
    const double gamma1 = coef[1];
    const double gamma2 = coef[2];

    double ss = 0.0;
    for (const auto& pt : points) {
        const double rp = e0 - gamma1 * pt.b_tesla + gamma2 * pt.b_tesla * pt.b_tesla -
                          pt.e_plus_ueV;
        const double rm = e0 + gamma1 * pt.b_tesla + gamma2 * pt.b_tesla * pt.b_tesla -
                          pt.e_minus_ueV;
        ss += rp * rp + rm * rm;
    }
    const std::size_t m = 2 * points.size();
    const double s2 = ss / static_cast<double>(m > 3 ? m - 3 : 1);

    std::vector<double> se(3, 0.0), e(3), col(3);
    for (int i = 0; i < 3; ++i) {
        e.assign(3, 0.0);
        e[i] = 1.0;
        if (cholesky_solve(3, ata, e, col)) se[i] = std::sqrt(std::max(s2 * col[i], 0.0));
    }

    const double mu_b = PhysConstants::bohr_magneton_ueV_per_T;
    FitResult result;
    result.names = {"e0_ueV", "g_diff", "gamma2_ueV_per_T2"};
    result.values = {e0, 2.0 * gamma1 / mu_b, gamma2};
    result.std_errors = {se[0], 2.0 * se[1] / mu_b, se[2]};
    result.residual_norm = std::sqrt(ss);
    result.converged = true;
    result.iterations = 1;
    return result;
}

namespace {

struct PairedFrames {
    std::vector<double> tuning;
    std::vector<double> lower;
    std::vector<double> upper;
    std::vector<double> fwhm; // mean width of the pair, for the gamma_c seed
};

// Frames where the two anti-crossing branches were both resolved.
PairedFrames paired_frames(const SweepMap& map, const DetectOptions& opt) {
    std::vector<PeakSet> frames;
    frames.reserve(map.tuning.size());
    for (std::size_t f = 0; f < map.tuning.size(); ++f)
        frames.push_back(extract_peaks(map.frame(f), opt.max_peaks, opt.floor_frac));

    PairedFrames out;
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& peaks = frames[f].peaks;
        if (peaks.size() < 2) continue;
        // The anti-crossing pair is the two dominant peaks; residual noise
        // structure never outranks the polaritons.  Frames where the weaker
        // one is below a tenth of the stronger carry mostly center noise and
        // are skipped.
        std::size_t first = 0, second = 1;
        if (peaks[second].amplitude > peaks[first].amplitude) std::swap(first, second);
        for (std::size_t i = 2; i < peaks.size(); ++i) {
            if (peaks[i].amplitude > peaks[first].amplitude) {
                second = first;
                first = i;
            } else if (peaks[i].amplitude > peaks[second].amplitude) {
                second = i;
            }
        }
        if (peaks[second].amplitude < 0.1 * peaks[first].amplitude) continue;
        const std::size_t lo = std::min(first, second);
        const std::size_t hi = std::max(first, second);
        out.tuning.push_back(map.tuning[f]);
        out.lower.push_back(peaks[lo].center_ueV);
        out.upper.push_back(peaks[hi].center_ueV);
        out.fwhm.push_back((peaks[lo].fwhm_ueV + peaks[hi].fwhm_ueV) / 2.0);
    }
    return out;
}

} // namespace

LeastSquaresProblem anticrossing_problem(std::span<const double> tuning,
                                         std::span<const double> lower,
                                         std::span<const double> upper, double t_mid,
                                         double gamma_x,
                                         std::optional<double> fix_gamma_c) {
    using cplx = std::complex<double>;
    struct Data {
        std::vector<double> t, lo, hi;
        double t_mid, gamma_x;
        std::optional<double> fix_gc;
    };
    const auto d = std::make_shared<Data>(Data{{tuning.begin(), tuning.end()},
                                               {lower.begin(), lower.end()},
                                               {upper.begin(), upper.end()},
                                               t_mid,
                                               gamma_x,
                                               fix_gamma_c});
    const bool fit_gc = !fix_gamma_c.has_value();
    const std::size_t n = fit_gc ? 5 : 4;

    auto unpack = [d, fit_gc](std::span<const double> p, double& g, double& ec, double& gc,
                              double& a, double& b) {
        g = p[0];
        ec = p[1];
        std::size_t idx = 2;
        gc = fit_gc ? p[idx++] : *d->fix_gc;
        a = p[idx++];
        b = p[idx];
    };

    LeastSquaresProblem problem;
    problem.n_residuals = 2 * d->t.size();
    problem.n_params = n;
    problem.residuals = [d, unpack](std::span<const double> p, std::span<double> r) {
        double g, ec, gc, a, b;
        unpack(p, g, ec, gc, a, b);
        for (std::size_t i = 0; i < d->t.size(); ++i) {
            const double ex = a + b * (d->t[i] - d->t_mid);
            const cplx q(0.5 * (ex - ec), 0.25 * (gc - d->gamma_x));
            const cplx s = std::sqrt(q * q + cplx(g * g));
            const double mean = 0.5 * (ex + ec);
            r[2 * i] = mean - std::abs(s.real()) - d->lo[i];
            r[2 * i + 1] = mean + std::abs(s.real()) - d->hi[i];
        }
    };
    problem.jacobian = [d, unpack, fit_gc, n](std::span<const double> p,
                                              std::span<double> jac) {
        double g, ec, gc, a, b;
        unpack(p, g, ec, gc, a, b);
        for (std::size_t i = 0; i < d->t.size(); ++i) {
            const double dt = d->t[i] - d->t_mid;
            const double ex = a + b * dt;
            const cplx q(0.5 * (ex - ec), 0.25 * (gc - d->gamma_x));
            cplx s = std::sqrt(q * q + cplx(g * g));
            if (std::abs(s) < 1e-30) s = cplx(1e-30, 0.0);
            // |Re s| flips the sign of every d(Re s)
            const double sgn = s.real() < 0.0 ? -1.0 : 1.0;
            // ds = (q dq + g dg) / s
            const double ds_dg = sgn * (cplx(g) / s).real();
            const double ds_dex = sgn * (q / (2.0 * s)).real();
            const double ds_dec = -ds_dex;
            const double ds_dgc = sgn * (q * cplx(0.0, 0.25) / s).real();

            double row_lo[5], row_hi[5];
            std::size_t idx = 0;
            row_lo[idx] = -ds_dg;
            row_hi[idx++] = ds_dg;
            row_lo[idx] = 0.5 - ds_dec;
            row_hi[idx] = 0.5 + ds_dec;
            ++idx;
            if (fit_gc) {
                row_lo[idx] = -ds_dgc;
                row_hi[idx] = ds_dgc;
                ++idx;
            }
            row_lo[idx] = 0.5 - ds_dex;
            row_hi[idx] = 0.5 + ds_dex;
            ++idx;
            row_lo[idx] = (0.5 - ds_dex) * dt;
            row_hi[idx] = (0.5 + ds_dex) * dt;

            for (std::size_t c = 0; c < n; ++c) {
                jac[(2 * i) * n + c] = row_lo[c];
                jac[(2 * i + 1) * n + c] = row_hi[c];
            }
        }
    };
    return problem;
}

FitResult fit_anticrossing(const SweepMap& map, const AnticrossingFitOptions& opt) {
    const AntiCrossing seed = detect_anticrossing(map, opt.detect);
    const PairedFrames data = paired_frames(map, opt.detect);
    if (data.tuning.size() < 5)
        throw std::runtime_error("fit_anticrossing: fewer than 5 frames with both branches resolved");

    const double gamma_x = opt.gamma_x_ueV;
    const bool fit_gc = !opt.fix_gamma_c.has_value();
    const double t_mid = seed.tuning_at_min;

    // Initial values: g and Ec from the detected minimum, the exciton line
    // from the trace identity Re(l1)+Re(l2) = Ex + Ec, gamma_c from the pair
    // width at resonance where each polariton has fwhm (gx+gc)/2.
    double ec0 = 0.0;
    double gc_seed = gamma_x;
    {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < data.tuning.size(); ++i) {
            const double d = std::abs(data.tuning[i] - seed.tuning_at_min);
            if (d < best) {
                best = d;
                ec0 = (data.lower[i] + data.upper[i]) / 2.0;
                gc_seed = std::max(2.0 * data.fwhm[i] - gamma_x, gamma_x);
            }
        }
    }
    double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < data.tuning.size(); ++i) {
        const double x = data.tuning[i] - t_mid;
        const double y = data.lower[i] + data.upper[i] - ec0;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n_pts = static_cast<double>(data.tuning.size());
    const double denom = n_pts * sxx - sx * sx;
    const double rate0 = denom != 0.0 ? (n_pts * sxy - sx * sy) / denom : 0.0;
    const double icpt0 = (sy - rate0 * sx) / n_pts;

    std::vector<double> p0;
    p0.push_back(seed.min_gap_ueV / 2.0);
    p0.push_back(ec0);
    if (fit_gc) p0.push_back(gc_seed);
    p0.push_back(icpt0);
    p0.push_back(rate0);

    const LeastSquaresProblem problem = anticrossing_problem(
        data.tuning, data.lower, data.upper, t_mid, gamma_x, opt.fix_gamma_c);

    LmOptions lm_opt;
    lm_opt.max_iterations = opt.max_iterations;
    const LmResult lm = levenberg_marquardt(problem, p0, lm_opt);

    const double g = std::abs(lm.params[0]);
    const double ec = lm.params[1];
    std::size_t at = 2;
    const double gc = fit_gc ? lm.params[at++] : *opt.fix_gamma_c;
    const double a = lm.params[at++];
    const double b = lm.params[at];

    FitResult result;
    result.names = {"g_ueV", "ec_ueV", "gamma_c_ueV", "tuning_intercept_ueV",
                    "tuning_rate_ueV", "min_gap_ueV", "tuning_at_min"};
    result.values = {g, ec, gc, a, b, seed.min_gap_ueV, seed.tuning_at_min};
    result.std_errors.assign(result.values.size(), 0.0);
    std::size_t idx = 0;
    result.std_errors[0] = lm.std_errors[idx++];
    result.std_errors[1] = lm.std_errors[idx++];
    if (fit_gc) result.std_errors[2] = lm.std_errors[idx++];
    result.std_errors[3] = lm.std_errors[idx++];
    result.std_errors[4] = lm.std_errors[idx];
    result.residual_norm = lm.residual_norm;
    result.converged = lm.converged;
    result.iterations = lm.iterations;
    result.is_strong_coupling = strong_coupling(g, gc, gamma_x);
    result.residual_history = lm.accepted_costs;
    return result;
}

double infer_dipole_angle(double g0_ueV, double g_highfield_ueV) {
    if (!(g0_ueV > 0.0) || !(g_highfield_ueV > 0.0))
        throw std::domain_error("infer_dipole_angle: couplings must be positive");
    const double arg = g0_ueV / (std::sqrt(2.0) * g_highfield_ueV);
    if (arg > 1.0 + 1e-12)
        throw std::domain_error(
            "infer_dipole_angle: inconsistent pair (reduction exceeds the sqrt(2) bound)");
    return std::acos(std::min(arg, 1.0));
}

RabiTable rabi_vs_field(std::span<const RabiPoint> series, double gamma_c, double gamma_x,
                        std::optional<double> g0) {
    RabiTable table;
    double sum_p = 0.0, sum_m = 0.0;
    for (const auto& pt : series) {
        RabiRow row;
        row.b_tesla = pt.b_tesla;
        row.g_plus_ueV = g_from_splitting(pt.min_gap_plus_ueV, gamma_c, gamma_x);
        row.g_minus_ueV = g_from_splitting(pt.min_gap_minus_ueV, gamma_c, gamma_x);
        sum_p += row.g_plus_ueV;
        sum_m += row.g_minus_ueV;
        table.rows.push_back(row);
    }
    if (g0 && !table.rows.empty() && *g0 > 0.0) {
        const double n = static_cast<double>(table.rows.size());
        table.mean_reduction_plus = 1.0 - sum_p / n / *g0;
        table.mean_reduction_minus = 1.0 - sum_m / n / *g0;
    }
    return table;
}

} // namespace qdcav
