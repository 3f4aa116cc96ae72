#include "qdcav/units.hpp"

#include <stdexcept>

namespace qdcav {

double wavelength_to_energy(double lambda_nm) {
    if (!(lambda_nm > 0.0))
        throw std::domain_error("wavelength_to_energy: wavelength must be positive");
    return PhysConstants::hc_ueV_nm / lambda_nm;
}

double energy_to_wavelength(double energy_ueV) {
    if (!(energy_ueV > 0.0))
        throw std::domain_error("energy_to_wavelength: energy must be positive");
    return PhysConstants::hc_ueV_nm / energy_ueV;
}

double detuning_nm_to_energy(double delta_lambda_nm, double lambda_ref_nm) {
    if (!(lambda_ref_nm > 0.0))
        throw std::domain_error("detuning_nm_to_energy: reference wavelength must be positive");
    return PhysConstants::hc_ueV_nm * delta_lambda_nm / (lambda_ref_nm * lambda_ref_nm);
}

} // namespace qdcav
