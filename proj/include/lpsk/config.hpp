/**
 *  @file config.hpp
 *  @brief Scenario configuration: sectioned key/value text with explicit physical units
 *
 *  Example:
 *  @code
 *  [errors]
 *  sigma_insertion_position = 100 km
 *  sigma_control = 2 %
 *  @endcode
 *  Values are converted to SI at parse time; serialize_config() writes the
 *  canonical SI form, which parses back to an identical configuration.
 */
#pragma once

#include "lpsk/dynamics.hpp"
#include "lpsk/nominal.hpp"
#include "lpsk/trajectory.hpp"
#include "lpsk/units.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace lpsk {

enum class EphemerisModel { Circular, Bicircular, Elliptic };
enum class ControlLaw { Base, Relieved };

EphemerisModel parse_ephemeris_model(const std::string& s);
const char* to_string(EphemerisModel m);
ControlLaw parse_control_law(const std::string& s);
const char* to_string(ControlLaw law);
ApsisKind parse_apsis_kind(const std::string& s);

struct ScenarioConfig {
    // [system]
    double mass_ratio_mu = constants::earth_moon_mu;
    double length_unit_m = constants::earth_moon_distance_m;
    double period_s = constants::lunar_sidereal_period_days * constants::seconds_per_day;

    // [ephemeris]
    EphemerisModel model = EphemerisModel::Bicircular;
    double sun_phase_rad = 0.0;
    double moon_eccentricity = 0.0549;  ///< elliptic model only
    bool jupiter = false;

    // [nominal]
    OrbitFamily family = OrbitFamily::Halo;
    std::string seed_fixture;  ///< empty: bundled seed of the family
    std::string nominal_file;  ///< empty: build by multiple shooting
    int revolutions = 27;
    int patch_per_rev = 4;
    double continuity_tol = 1e-12;
    int max_iterations = 100;
    bool pin_first_position = false;

    // [insertion]
    ApsisKind insertion_apsis = ApsisKind::Apoapsis;
    std::optional<double> insertion_epoch_s;  ///< overrides the apsis choice

    // [errors]
    double sigma_insertion_position_m = 100e3;
    double sigma_insertion_velocity_mps = 0.01;
    double sigma_navigation_position_m = 1e3;
    double sigma_navigation_velocity_mps = 0.01;
    double sigma_control = 0.02;

    // [actuator]
    double u_min_mps2 = 1e-7;
    std::optional<double> u_sat_mps2;
    double noise_resample_s = 3600.0;

    // [control]
    ControlLaw law = ControlLaw::Base;
    double k1 = 0.5;
    double k2 = 0.5;
    std::optional<double> beta_min;
    std::optional<double> eta;  ///< used when beta_min is absent; both absent: optimized
    double z0_quantile = 0.999;

    // [timing]
    double measurement_interval_s = 2 * 86400.0;
    double duration_s = 365 * 86400.0;
    double t_i_s = 0.0;
    double t_i_prime_s = 50 * 86400.0;
    double t_f_s = 365 * 86400.0;
    double output_cadence = 0.01;  ///< nondimensional
    double truth_tol = 1e-12;

    // [perturbations]
    bool srp = false;
    double spacecraft_mass_kg = 500.0;
    double srp_area_m2 = 10.0;
    double reflectivity = 1.8;
    bool occultation = true;

    // [montecarlo]
    int runs = 25;
    std::uint64_t seed = 1;

    UnitSystem units() const;
    /// @throws ConfigError naming the offending field
    void validate() const;
};

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig parse_config_file(const std::string& path);
std::string serialize_config(const ScenarioConfig& cfg);

/// Value with unit, e.g. "100 km", "2 %", "0.5" -> SI. Exposed for tests.
double parse_quantity(const std::string& text, const std::string& dimension);

}  // namespace lpsk
