#include <doctest.h>

#include <stdexcept>

#include "oracles.hpp"
#include "qdcav/units.hpp"

using namespace qdcav;
using oracles::rel_err;

TEST_CASE("wavelength_to_energy at reference points") {
    // hc in eV nm converts 1239.84198 nm to exactly 1 eV.
    CHECK(rel_err(wavelength_to_energy(1239.84198), 1.0e6) < 1e-12);
    // oracle: hand evaluation hc/931 = 1331731.45 ueV
    CHECK(rel_err(wavelength_to_energy(931.0), 1331731.4500537056) < 1e-12);
    CHECK(rel_err(wavelength_to_energy(931.0), 1.3317e6) < 1e-4);
}

TEST_CASE("energy_to_wavelength inverts") {
    CHECK(rel_err(energy_to_wavelength(1.0e6), 1239.84198) < 1e-12);
    CHECK(std::abs(energy_to_wavelength(1.3317e6) - 931.0) < 0.1);
    for (const double lambda : {800.0, 931.0, 1000.0})
        CHECK(rel_err(energy_to_wavelength(wavelength_to_energy(lambda)), lambda) < 1e-12);
}

TEST_CASE("round trip over the working band") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> dist(100.0, 10000.0);
    for (int i = 0; i < 1000; ++i) {
        const double lambda = dist(rng);
        CHECK(rel_err(energy_to_wavelength(wavelength_to_energy(lambda)), lambda) < 1e-12);
    }
}

TEST_CASE("detuning_nm_to_energy") {
    // oracle: exact two-point difference hc/(l-dl) - hc/l
    auto exact = [](double dl, double l) {
        return wavelength_to_energy(l - dl) - wavelength_to_energy(l);
    };
    CHECK(std::abs(detuning_nm_to_energy(0.12, 931.0) - 172.0) < 1.0);
    CHECK(detuning_nm_to_energy(0.0, 931.0) == 0.0);
    // the paper pairs 0.58 nm with 0.83 meV
    CHECK(std::abs(detuning_nm_to_energy(0.58, 931.0) - 830.0) < 5.0);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dl_dist(-1.0, 1.0);
    std::uniform_real_distribution<double> l_dist(800.0, 2000.0);
    for (int i = 0; i < 500; ++i) {
        const double dl = dl_dist(rng);
        const double l = l_dist(rng);
        if (std::abs(dl) < 1e-6) continue;
        CHECK(rel_err(detuning_nm_to_energy(dl, l), exact(dl, l)) < 0.01);
    }
}

TEST_CASE("sign convention: blue shift is positive") {
    CHECK(detuning_nm_to_energy(0.5, 931.0) > 0.0);
    CHECK(detuning_nm_to_energy(-0.5, 931.0) < 0.0);
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(wavelength_to_energy(0.0), std::domain_error);
    CHECK_THROWS_AS(wavelength_to_energy(-5.0), std::domain_error);
    CHECK_THROWS_AS(energy_to_wavelength(0.0), std::domain_error);
    CHECK_THROWS_AS(detuning_nm_to_energy(0.1, 0.0), std::domain_error);
}

TEST_CASE("reference wavelength derivation from the quoted shift pair") {
    // lambda = sqrt(hc * dl / dE) with 0.58 nm <-> 830 ueV
    const double lambda0 = std::sqrt(PhysConstants::hc_ueV_nm * 0.58 / 830.0);
    CHECK(std::abs(lambda0 - 930.80374) < 1e-4);
    CHECK(std::abs(lambda0 - 931.0) < 0.5); // the rounded default
}
