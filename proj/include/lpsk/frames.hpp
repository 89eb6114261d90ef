/**
 *  @file frames.hpp
 *  @brief Conversion between the center-body inertial frame and the rotating-pulsating synodic frame
 */
#pragma once

#include "lpsk/ephemeris.hpp"
#include "lpsk/types.hpp"

namespace lpsk {

/**
 *  @brief Instantaneous synodic frame built from the primary (body 0) and a secondary
 *
 *  The X axis follows the primary-to-secondary vector, Z its orbital angular
 *  momentum. Lengths are scaled by the instantaneous separation and the origin
 *  is the barycenter of the pair, so the primaries sit at (-mu, 0, 0) and
 *  (1 - mu, 0, 0). Time is not rescaled.
 */
struct SynodicFrame {
    Mat3 C;           ///< columns are the synodic axes in inertial components
    Vec3 omega;       ///< frame angular velocity, synodic components
    Vec3 origin;      ///< barycenter position (inertial)
    Vec3 origin_dot;  ///< barycenter velocity (inertial)
    double scale;     ///< primary separation
    double scale_dot;

    static SynodicFrame at(const EphemerisSet& eph, double t, std::size_t secondary = 1);

    PhaseState to_synodic(const PhaseState& inertial) const;
    PhaseState to_inertial(const PhaseState& synodic) const;
};

/// Mass ratio mu_2 / (mu_1 + mu_2) of the primary pair.
double pair_mass_ratio(const EphemerisSet& eph, std::size_t secondary = 1);

PhaseState inertial_to_synodic(const PhaseState& state, double t, const EphemerisSet& eph);
PhaseState synodic_to_inertial(const PhaseState& state, double t, const EphemerisSet& eph);

}  // namespace lpsk
