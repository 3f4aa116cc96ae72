#ifndef QDCAV_UNITS_HPP
#define QDCAV_UNITS_HPP

namespace qdcav {

// Every energy, linewidth and coupling in this library is carried in ueV;
// nanometers appear only at IO boundaries.
struct PhysConstants {
    static constexpr double bohr_magneton_ueV_per_T = 57.883818;
    static constexpr double hc_eV_nm = 1239.84198;
    static constexpr double hc_ueV_nm = hc_eV_nm * 1.0e6;
};

// E = hc / lambda.  Throws std::domain_error for lambda <= 0.
double wavelength_to_energy(double lambda_nm);

// lambda = hc / E.  Exact inverse of wavelength_to_energy.
double energy_to_wavelength(double energy_ueV);

// First-order conversion of a wavelength shift to an energy detuning,
// dE = hc * dlambda / lambda^2.  A blue shift (positive dlambda) maps to a
// positive detuning.
double detuning_nm_to_energy(double delta_lambda_nm, double lambda_ref_nm);

} // namespace qdcav

#endif
