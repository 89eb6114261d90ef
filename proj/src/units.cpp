#include "lpsk/units.hpp"

#include <stdexcept>
#include <string>

namespace lpsk {

QuantityKind parse_quantity_kind(std::string_view name) {
    if (name == "length") return QuantityKind::Length;
    if (name == "velocity") return QuantityKind::Velocity;
    if (name == "acceleration") return QuantityKind::Acceleration;
    if (name == "time") return QuantityKind::Time;
    throw std::invalid_argument("unknown quantity kind '" + std::string(name) + "'");
}

UnitSystem::UnitSystem(double length_m, double time_s, double mu, std::vector<double> gms)
    : length_unit(length_m), time_unit(time_s), mass_ratio_mu(mu), grav_params(std::move(gms)) {
    if (!(length_unit > 0.0) || !(time_unit > 0.0))
        throw std::invalid_argument("unit system scales must be positive");
    if (!(mass_ratio_mu > 0.0 && mass_ratio_mu < 0.5))
        throw std::invalid_argument("mass ratio must lie in (0, 0.5)");
}

UnitSystem UnitSystem::earth_moon() {
    const double period_s = constants::lunar_sidereal_period_days * constants::seconds_per_day;
    const double mu = constants::earth_moon_mu;
    return UnitSystem(constants::earth_moon_distance_m, period_s / (2.0 * constants::pi), mu,
                      {1.0 - mu, mu, constants::sun_to_earth_moon_mass});
}

double UnitSystem::unit_of(QuantityKind kind) const {
    switch (kind) {
        case QuantityKind::Length: return length_unit;
        case QuantityKind::Velocity: return velocity_unit();
        case QuantityKind::Acceleration: return acceleration_unit();
        case QuantityKind::Time: return time_unit;
    }
    throw std::invalid_argument("unknown quantity kind");
}

}  // namespace lpsk
