/**
 *  @file dynamics.hpp
 *  @brief CR3BP and restricted N-body vector fields, deviation dynamics and perturbations
 */
#pragma once

#include "lpsk/ephemeris.hpp"
#include "lpsk/nominal.hpp"
#include "lpsk/types.hpp"
#include "lpsk/units.hpp"

#include <array>
#include <functional>
#include <vector>

namespace lpsk {

/// Distance below which a point-mass term is treated as a collision.
inline constexpr double singularity_guard = 1e-6;

// ----------------------------------------------------------------------------
// CR3BP (synodic frame)
// ----------------------------------------------------------------------------

double effective_potential(const Vec3& r, double mu);
Vec3 potential_gradient(const Vec3& r, double mu);
Mat3 potential_hessian(const Vec3& r, double mu);
PhaseState cr3bp_derivative(const PhaseState& state, double mu);
/// C = 2U - |v|^2
double jacobi_constant(const PhaseState& state, double mu);
/// Linearization of the CR3BP field, 6x6.
Mat6 cr3bp_jacobian(const Vec3& r, double mu);

/// L1..L5 in order; collinear points converged to |dU/dx| < 1e-12.
std::array<Vec3, 5> lagrange_points(double mu);

// ----------------------------------------------------------------------------
// Restricted N-body (center-body inertial frame)
// ----------------------------------------------------------------------------

/// User acceleration model (nondimensional): (r, v, t) -> a.
using PerturbationModel = std::function<Vec3(const Vec3& r, const Vec3& v, double t)>;

struct PerturbationConfig {
    bool srp_enabled = false;
    double spacecraft_mass = 500.0;  ///< [kg]
    double srp_area = 10.0;          ///< [m^2]
    double reflectivity_coeff = 1.8;
    std::vector<std::size_t> occluders;     ///< bodies casting a shadow
    std::vector<std::size_t> extra_bodies;  ///< bodies present in the truth model only
    std::vector<PerturbationModel> plugins;

    void validate() const;
};

/// Point-mass gravity of every body in @p eph (direct minus indirect terms).
Vec3 nbody_gravity(const Vec3& r, double t, const EphemerisSet& eph);
/// Gradient of nbody_gravity with respect to r.
Mat3 nbody_gravity_gradient(const Vec3& r, double t, const EphemerisSet& eph);

/// Cannonball SRP with binary cylindrical shadow; requires a body named "sun".
Vec3 srp_acceleration(const Vec3& r, double t, const EphemerisSet& eph,
                      const PerturbationConfig& pert, const UnitSystem& units);

PhaseState nbody_derivative(const PhaseState& state, double t, const EphemerisSet& eph,
                            const PerturbationConfig& pert = {}, const UnitSystem& units = {});

// ----------------------------------------------------------------------------
// Deviation dynamics
// ----------------------------------------------------------------------------

/// f_a for a nominal position given directly.
Vec3 error_acceleration(const Vec3& z1, const Vec3& r_nominal, double t, const EphemerisSet& eph);
Vec3 error_acceleration_f_a(const Vec3& z1, double t, const EphemerisSet& eph,
                            const NominalTrajectory& nominal);
PhaseState error_derivative(const PhaseState& z, double t, const Vec3& u, const EphemerisSet& eph,
                            const NominalTrajectory& nominal);

}  // namespace lpsk
