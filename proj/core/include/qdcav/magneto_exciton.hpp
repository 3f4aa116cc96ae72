#ifndef QDCAV_MAGNETO_EXCITON_HPP
#define QDCAV_MAGNETO_EXCITON_HPP

namespace qdcav {

/**
 * Exciton dispersion parameters in Faraday geometry.
 *
 * The two spin branches follow
 *     E_m(B) = E0 - m * gamma1 * B + gamma2 * B^2,   m = +1, -1
 * with gamma1 = g_diff * mu_B / 2.  Only the g-factor difference enters;
 * individual electron/hole g factors are not part of the data model.
 */
struct ExcitonParams {
    double e0_ueV = 0.0;            // zero-field exciton energy
    double g_diff = 0.0;            // g_e - g_h
    double gamma2_ueV_per_T2 = 0.0; // diamagnetic coefficient
    double gamma_x_ueV = 1.0;       // homogeneous linewidth (FWHM)
    double fss_ueV = 0.0;           // anisotropic zero-field splitting, 0 unless known
};

enum class SpinBranch { plus_one, minus_one };

// gamma1 = g_diff * mu_B / 2, in ueV/T.
double zeeman_rate(const ExcitonParams& params);

// Branch energy at field b_tesla >= 0.  minus_one is the higher branch for
// B > 0 and g_diff > 0.  Throws std::domain_error for negative fields.
double branch_energy(const ExcitonParams& params, SpinBranch branch, double b_tesla);

// E(minus_one) - E(plus_one) = 2 * gamma1 * B for zero fss.
double branch_splitting(const ExcitonParams& params, double b_tesla);

} // namespace qdcav

#endif
