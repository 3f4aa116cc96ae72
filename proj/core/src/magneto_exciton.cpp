#include "qdcav/magneto_exciton.hpp"

#include <cmath>
#include <stdexcept>

#include "qdcav/units.hpp"

namespace qdcav {

double zeeman_rate(const ExcitonParams& params) {
    return params.g_diff * PhysConstants::bohr_magneton_ueV_per_T / 2.0;
}

double branch_splitting(const ExcitonParams& params, double b_tesla) {
    if (b_tesla < 0.0)
        throw std::domain_error("branch_splitting: field must be non-negative");
    // hypot reduces to |2 gamma1 B| exactly when fss is zero.
    return std::hypot(2.0 * zeeman_rate(params) * b_tesla, params.fss_ueV);
}

double branch_energy(const ExcitonParams& params, SpinBranch branch, double b_tesla) {
    if (b_tesla < 0.0)
        throw std::domain_error("branch_energy: field must be non-negative");
    const double common = params.e0_ueV + params.gamma2_ueV_per_T2 * b_tesla * b_tesla;
    const double half_split = branch_splitting(params, b_tesla) / 2.0;
    return branch == SpinBranch::plus_one ? common - half_split : common + half_split;
}

} // namespace qdcav
