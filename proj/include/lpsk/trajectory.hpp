/**
 *  @file trajectory.hpp
 *  @brief Periodic orbits in the CR3BP, multiple-shooting transition to the ephemeris model, apsides
 */
#pragma once

#include "lpsk/ephemeris.hpp"
#include "lpsk/integrate.hpp"
#include "lpsk/nominal.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lpsk {

enum class OrbitFamily { PlanarLyapunov, Halo };

OrbitFamily parse_orbit_family(const std::string& name);
const char* to_string(OrbitFamily family);

/// Synodic initial condition on the y = 0 plane with velocity normal to it.
struct OrbitSeed {
    std::string name;
    OrbitFamily family = OrbitFamily::Halo;
    double mu = 0.0;
    PhaseState state;
    double period = 0.0;
};

/// Reads "key = value" lines: name, family, mu, x, y, z, vx, vy, vz, period.
OrbitSeed read_seed_fixture(const std::string& path);
/// Bundled fixture of the given family (data/seeds/).
OrbitSeed builtin_seed(OrbitFamily family);
std::string builtin_seed_path(OrbitFamily family);

struct PeriodicOrbit {
    PhaseState state;
    double period = 0.0;
    double mu = 0.0;
    OrbitFamily family = OrbitFamily::Halo;
    int iterations = 0;
    std::vector<double> residual_history;  ///< crossing residual before each update
};

struct StmState {
    PhaseState state;
    Mat6 stm = Mat6::Identity();
};

StmState cr3bp_propagate_stm(const PhaseState& x0, double mu, double duration,
                             const IntegratorSpec& spec);
PhaseState cr3bp_propagate(const PhaseState& x0, double mu, double duration,
                           const IntegratorSpec& spec);

/**
 *  @brief Differential correction on the half-period map
 *
 *  Halo: z0 held, (x0, vy0) corrected to zero vx and vz at the next y = 0
 *  crossing. Planar Lyapunov: x0 held, vy0 corrected to zero vx.
 *  @throws ConvergenceError after @p max_iter updates
 */
PeriodicOrbit correct_periodic_orbit(const PhaseState& seed, double mu, OrbitFamily family,
                                     double period_guess, double tol = 1e-12, int max_iter = 25);

StmState nbody_propagate_stm(const PhaseState& x0, double t0, double t1, const EphemerisSet& eph,
                             const IntegratorSpec& spec);

/// Node set of a propagation in @p eph (a* from point-mass gravity).
NominalTrajectory nominal_from_propagation(const PhaseState& x0, double t0, double t1,
                                           const EphemerisSet& eph, double max_spacing = 0.005,
                                           double period = 0.0);

struct TransitionOptions {
    int revolutions = 25;
    int patch_per_rev = 4;
    double continuity_tol = 1e-12;
    int max_iterations = 50;
    double max_step = 0.005;  ///< fixed segment step, also the nominal node spacing
    double t0 = 0.0;
    bool pin_first_position = false;
};

struct TransitionResult {
    NominalTrajectory nominal;
    std::vector<double> epochs;
    std::vector<PhaseState> patches;  ///< inertial
    int iterations = 0;
    double residual = 0.0;            ///< max relative continuity defect
    std::vector<double> residual_history;
};

/**
 *  @brief Multiple shooting from the CR3BP orbit to a trajectory of @p eph
 *
 *  All patch states are free (optionally the first position is pinned); the
 *  update is the minimum-norm Newton step dX = -J^T (J J^T)^{-1} F.
 *  @throws ConvergenceError when the defect does not reach the tolerance
 */
TransitionResult transition_to_qpo(const PeriodicOrbit& orbit, const EphemerisSet& eph,
                                   const TransitionOptions& opt = {});

/// Max relative continuity defect of patch states propagated in @p eph.
double continuity_residual(const std::vector<double>& epochs, const std::vector<PhaseState>& patches,
                           const EphemerisSet& eph, double max_step);

/// Zeros of the radial rate relative to @p body, refined by bisection to 1e-12.
std::vector<Apsis> find_apsides(const NominalTrajectory& nominal, const EphemerisSet& eph,
                                std::size_t body);

/// First apsis of @p kind at or after @p t_after in the nominal's stored list.
std::optional<Apsis> insertion_apsis(const NominalTrajectory& nominal, ApsisKind kind,
                                     double t_after);

}  // namespace lpsk
