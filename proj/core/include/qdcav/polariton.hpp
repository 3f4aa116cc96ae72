#ifndef QDCAV_POLARITON_HPP
#define QDCAV_POLARITON_HPP

#include <array>
#include <optional>

#include "qdcav/magneto_exciton.hpp"

namespace qdcav {

struct CavityParams {
    double ec_ueV = 0.0;   // cavity mode energy
    double q_factor = 1.0; // quality factor; linewidth is ec/q
};

// gamma_c = Ec / Q.
double cavity_linewidth(const CavityParams& cav);

/**
 * Coupling strengths of the exciton to the cavity mode.
 *
 * g0 is the zero-field coupling of the linear dipole; theta its angle to the
 * cavity polarization axis.  g_plus/g_minus are the circular-state couplings
 * that apply once the Zeeman splitting dominates; they may be set directly
 * from data or derived as g0 / (sqrt(2) cos theta).
 */
struct CouplingParams {
    double g0_ueV = 0.0;
    double theta_rad = 0.0;
    double g_plus_ueV = 0.0;
    double g_minus_ueV = 0.0;

    static CouplingParams from_dipole(double g0_ueV, double theta_rad);
};

// High-field circular coupling g' = g0 / (sqrt(2) cos theta).
// Throws std::domain_error when cos(theta) <= 0.
double reduced_coupling(double g0_ueV, double theta_rad);

/**
 * One eigenmode of the non-Hermitian coupled-mode matrix.
 *
 * weights holds the eigenvector magnitudes on the (exciton+, exciton-,
 * cavity) basis; the squared magnitudes sum to one.
 */
struct ComplexMode {
    double energy_ueV = 0.0;
    double half_linewidth_ueV = 0.0;
    std::array<double, 3> weights{0.0, 0.0, 0.0};
};

// True when g exceeds the loss scale |gamma_c - gamma_x| / 4.
bool strong_coupling(double g, double gamma_c, double gamma_x);

// On-resonance polariton splitting 2*sqrt(g^2 - (gamma_c-gamma_x)^2/16).
// Returns nullopt when the radicand is negative (no resolvable splitting).
std::optional<double> rabi_splitting(double g, double gamma_c, double gamma_x);

// Inverse of rabi_splitting in the strong regime:
// g = sqrt((dE/2)^2 + ((gamma_c-gamma_x)/4)^2).
double g_from_splitting(double delta_e, double gamma_c, double gamma_x);

// Eigenmodes of [[Ex - i gx/2, g], [g, Ec - i gc/2]], sorted by ascending
// energy (ties by ascending half linewidth).
std::array<ComplexMode, 2> polariton_modes_2x2(double ex, double gamma_x,
                                               double ec, double gamma_c, double g);

// Eigenmodes of the V-system
//   [[E+ - i gx/2, 0,           g+ ],
//    [0,           E- - i gx/2, g- ],
//    [g+,          g-,          Ec - i gc/2]]
// sorted as above.
std::array<ComplexMode, 3> polariton_modes_3x3(double e_plus, double e_minus,
                                               double gamma_x, double ec,
                                               double gamma_c, double g_plus,
                                               double g_minus);

// Smallest B >= 0 with branch_energy(B) == Ec, from the closed-form quadratic
// root (fss is not folded in).  Throws std::domain_error when no real
// non-negative root exists.
double resonance_field(const ExcitonParams& exc, SpinBranch branch, const CavityParams& cav);

} // namespace qdcav

#endif
