/**
 *  @file units.hpp
 *  @brief Characteristic scales of the primary pair and scalar unit conversion
 */
#pragma once

#include <string_view>
#include <vector>

namespace lpsk {

namespace constants {
inline constexpr double pi = 3.14159265358979323846;
inline constexpr double seconds_per_day = 86400.0;
inline constexpr double astronomical_unit_m = 1.495978707e11;
/// Solar radiation pressure at 1 AU [N/m^2].
inline constexpr double solar_pressure_1au = 4.56e-6;
inline constexpr double earth_moon_mu = 0.01215;
inline constexpr double earth_moon_distance_m = 3.844e8;
inline constexpr double lunar_sidereal_period_days = 27.321661;
/// GM_sun / (GM_earth + GM_moon)
inline constexpr double sun_to_earth_moon_mass = 328900.56;
/// GM_jupiter / (GM_earth + GM_moon)
inline constexpr double jupiter_to_earth_moon_mass = 313.9691;
inline constexpr double earth_radius_m = 6.378137e6;
inline constexpr double moon_radius_m = 1.7374e6;
inline constexpr double sun_radius_m = 6.957e8;
}  // namespace constants

enum class QuantityKind { Length, Velocity, Acceleration, Time };

/// Parses "length", "velocity", "acceleration" or "time"; throws std::invalid_argument otherwise.
QuantityKind parse_quantity_kind(std::string_view name);

/**
 *  @brief Nondimensionalization of the primary pair
 *
 *  The length unit is the distance between primaries and the time unit makes
 *  their mean motion equal to one.
 */
struct UnitSystem {
    double length_unit = constants::earth_moon_distance_m;  ///< [m]
    double time_unit = 0.0;                                 ///< [s]
    double mass_ratio_mu = constants::earth_moon_mu;
    std::vector<double> grav_params;  ///< nondimensional mu_j of each modelled body

    UnitSystem() = default;
    UnitSystem(double length_m, double time_s, double mu, std::vector<double> gms = {});

    /// Earth-Moon defaults: mu = 0.01215, 384400 km, sidereal month / 2 pi.
    static UnitSystem earth_moon();

    double velocity_unit() const { return length_unit / time_unit; }
    double acceleration_unit() const { return length_unit / (time_unit * time_unit); }
    double unit_of(QuantityKind kind) const;

    double to_nondim(double value, QuantityKind kind) const { return value / unit_of(kind); }
    double from_nondim(double value, QuantityKind kind) const { return value * unit_of(kind); }

    double days_to_nondim(double days) const {
        return to_nondim(days * constants::seconds_per_day, QuantityKind::Time);
    }
    double nondim_to_days(double t) const {
        return from_nondim(t, QuantityKind::Time) / constants::seconds_per_day;
    }
};

}  // namespace lpsk
