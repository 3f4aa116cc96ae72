#ifndef QDCAV_LEASTSQ_HPP
#define QDCAV_LEASTSQ_HPP

#include <functional>
#include <span>
#include <vector>

namespace qdcav {

/**
 * Small dense damped least-squares (Levenberg-Marquardt) engine.
 *
 * Damping is multiplicative on the scaled normal matrix: lambda starts at
 * 1e-3, is divided by 10 on an accepted step and multiplied by 10 on a
 * rejected one.  Convergence: relative cost change < 1e-10 or relative step
 * < 1e-10, iteration cap 200.  These knobs are fixed so fits are reproducible
 * across builds.
 */
struct LeastSquaresProblem {
    std::size_t n_residuals = 0;
    std::size_t n_params = 0;
    std::function<void(std::span<const double>, std::span<double>)> residuals;
    // Optional analytic Jacobian, row-major n_residuals x n_params.  When
    // absent, central differences with step 1e-6 relative are used.
    std::function<void(std::span<const double>, std::span<double>)> jacobian;
};

struct LmOptions {
    int max_iterations = 200;
    double lambda_init = 1e-3;
    double rel_tol = 1e-10;
};

struct LmResult {
    std::vector<double> params;
    std::vector<double> std_errors;      // from the final Jacobian, residual-variance scaled
    double residual_norm = 0.0;          // ||r|| at the solution
    bool converged = false;
    int iterations = 0;
    std::vector<double> accepted_costs;  // ||r||^2 after each accepted step (non-increasing)
};

LmResult levenberg_marquardt(const LeastSquaresProblem& problem,
                             std::span<const double> initial,
                             const LmOptions& opt = {});

// Fills J (row-major) with central differences of problem.residuals.
void central_difference_jacobian(const LeastSquaresProblem& problem,
                                 std::span<const double> params,
                                 std::span<double> jacobian_out);

// Solves the SPD system A x = b in place via Cholesky; returns false when the
// factorization breaks down.  A is n x n row-major.
bool cholesky_solve(std::size_t n, std::vector<double> a, std::span<const double> b,
                    std::span<double> x);

} // namespace qdcav

#endif
