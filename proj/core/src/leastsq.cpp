#include "qdcav/leastsq.hpp"

#include <cmath>
#include <stdexcept>

namespace qdcav {

bool cholesky_solve(std::size_t n, std::vector<double> a, std::span<const double> b,
                    std::span<double> x) {
    // In-place lower Cholesky, then forward/back substitution.
    for (std::size_t j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (!(d > 0.0)) return false;
        const double l = std::sqrt(d);
        a[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = s / l;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= a[i * n + k] * x[k];
        x[i] = s / a[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double s = x[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= a[k * n + ii] * x[k];
        x[ii] = s / a[ii * n + ii];
    }
    return true;
}

void central_difference_jacobian(const LeastSquaresProblem& problem,
                                 std::span<const double> params,
                                 std::span<double> jacobian_out) {
    const std::size_t m = problem.n_residuals;
    const std::size_t n = problem.n_params;
    std::vector<double> p(params.begin(), params.end());
    std::vector<double> r_plus(m), r_minus(m);
    for (std::size_t j = 0; j < n; ++j) {
        const double h = 1e-6 * std::max(std::abs(p[j]), 1.0);
        const double saved = p[j];
        p[j] = saved + h;
        problem.residuals(p, r_plus);
        p[j] = saved - h;
        problem.residuals(p, r_minus);
        p[j] = saved;
        for (std::size_t i = 0; i < m; ++i)
            jacobian_out[i * n + j] = (r_plus[i] - r_minus[i]) / (2.0 * h);
    }
}

namespace {

double cost_of(std::span<const double> r) {
    double c = 0.0;
    for (const double v : r) c += v * v;
    return c;
}

} // namespace

LmResult levenberg_marquardt(const LeastSquaresProblem& problem,
                             std::span<const double> initial, const LmOptions& opt) {
    const std::size_t m = problem.n_residuals;
    const std::size_t n = problem.n_params;
    if (initial.size() != n)
        throw std::invalid_argument("levenberg_marquardt: parameter count mismatch");
    if (m < n)
        throw std::invalid_argument("levenberg_marquardt: fewer residuals than parameters");

    LmResult result;
    result.params.assign(initial.begin(), initial.end());
    std::vector<double> r(m), j(m * n);
    std::vector<double> jtj(n * n), jtr(n), step(n), trial(n), r_trial(m);

    auto eval_jacobian = [&](std::span<const double> p) {
        if (problem.jacobian)
            problem.jacobian(p, j);
        else
            central_difference_jacobian(problem, p, j);
    };

    problem.residuals(result.params, r);
    double cost = cost_of(r);
    result.accepted_costs.push_back(cost);

    double lambda = opt.lambda_init;
    bool need_jacobian = true;
    int iter = 0;
    for (; iter < opt.max_iterations; ++iter) {
        if (need_jacobian) {
            eval_jacobian(result.params);
            for (std::size_t a = 0; a < n; ++a) {
                jtr[a] = 0.0;
                for (std::size_t b = a; b < n; ++b) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < m; ++i) s += j[i * n + a] * j[i * n + b];
                    jtj[a * n + b] = s;
                    jtj[b * n + a] = s;
                }
                for (std::size_t i = 0; i < m; ++i) jtr[a] += j[i * n + a] * r[i];
            }
            need_jacobian = false;
        }

        // (JtJ + lambda diag(JtJ)) step = -Jt r; dead columns get a floor
        // tied to the matrix scale so they stay numerically pinned.
        double diag_max = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            diag_max = std::max(diag_max, jtj[a * n + a]);
        if (diag_max <= 0.0) diag_max = 1.0;
        std::vector<double> damped = jtj;
        for (std::size_t a = 0; a < n; ++a) {
            const double d = std::max(jtj[a * n + a], 1e-12 * diag_max);
            damped[a * n + a] = jtj[a * n + a] + lambda * d;
        }
        std::vector<double> rhs(n);
        for (std::size_t a = 0; a < n; ++a) rhs[a] = -jtr[a];
        if (!cholesky_solve(n, damped, rhs, step)) {
            lambda *= 10.0;
            if (lambda > 1e14) break;
            continue;
        }

        for (std::size_t a = 0; a < n; ++a) trial[a] = result.params[a] + step[a];
        problem.residuals(trial, r_trial);
        const double trial_cost = cost_of(r_trial);

        if (trial_cost < cost) {
            double max_rel_step = 0.0;
            for (std::size_t a = 0; a < n; ++a) {
                const double rel = std::abs(step[a]) / std::max(std::abs(result.params[a]), 1.0);
                max_rel_step = std::max(max_rel_step, rel);
            }
            const double rel_drop = (cost - trial_cost) / std::max(cost, 1e-300);

            result.params = trial;
            r = r_trial;
            cost = trial_cost;
            result.accepted_costs.push_back(cost);
            lambda = std::max(lambda / 10.0, 1e-15);
            need_jacobian = true;

            if (rel_drop < opt.rel_tol || max_rel_step < opt.rel_tol) {
                result.converged = true;
                ++iter;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e14) {
                // Damping saturated: no downhill direction distinguishable
                // from rounding noise, treat as converged at the iterate.
                result.converged = true;
                break;
            }
        }
    }
    result.iterations = iter;
    result.residual_norm = std::sqrt(cost);

    // Standard errors from s^2 (JtJ)^-1 at the solution.
    eval_jacobian(result.params);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < m; ++i) s += j[i * n + a] * j[i * n + b];
            jtj[a * n + b] = s;
            jtj[b * n + a] = s;
        }
    result.std_errors.assign(n, 0.0);
    const double dof = static_cast<double>(m > n ? m - n : 1);
    const double s2 = cost / dof;
    std::vector<double> e(n, 0.0), col(n);
    for (std::size_t a = 0; a < n; ++a) {
        e.assign(n, 0.0);
        e[a] = 1.0;
        if (cholesky_solve(n, jtj, e, col))
            result.std_errors[a] = std::sqrt(std::max(s2 * col[a], 0.0));
    }
    return result;
}

} // namespace qdcav
