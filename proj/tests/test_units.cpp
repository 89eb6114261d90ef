#include "lpsk/units.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace lpsk;

TEST_CASE("earth-moon scales follow from distance and sidereal month") {
    const UnitSystem u = UnitSystem::earth_moon();
    const double T = 27.321661 * 86400.0 / (2.0 * 3.14159265358979323846);
    CHECK(u.length_unit == doctest::Approx(3.844e8).epsilon(1e-15));
    CHECK(u.time_unit == doctest::Approx(T).epsilon(1e-15));
    CHECK(u.velocity_unit() == doctest::Approx(3.844e8 / T).epsilon(1e-15));
    CHECK(u.acceleration_unit() == doctest::Approx(3.844e8 / (T * T)).epsilon(1e-15));
    CHECK(u.mass_ratio_mu == 0.01215);
    REQUIRE(u.grav_params.size() == 3);
    CHECK(u.grav_params[0] + u.grav_params[1] == doctest::Approx(1.0));
}

TEST_CASE("velocity unit is about one kilometre per second") {
    const UnitSystem u = UnitSystem::earth_moon();
    CHECK(u.velocity_unit() > 1000.0);
    CHECK(u.velocity_unit() < 1030.0);
}

TEST_CASE("conversions round trip for every kind") {
    const UnitSystem u = UnitSystem::earth_moon();
    for (auto kind : {QuantityKind::Length, QuantityKind::Velocity, QuantityKind::Acceleration,
                      QuantityKind::Time}) {
        const double x = 1.2345e-3;
        CHECK(u.to_nondim(u.from_nondim(x, kind), kind) == doctest::Approx(x).epsilon(1e-15));
    }
    CHECK(u.to_nondim(3.844e8, QuantityKind::Length) == doctest::Approx(1.0));
    CHECK(u.days_to_nondim(1.0) == doctest::Approx(86400.0 / u.time_unit));
    CHECK(u.nondim_to_days(2.0 * constants::pi) == doctest::Approx(27.321661));
}

TEST_CASE("thrust of 0.1 N on 500 kg in nondimensional units") {
    const UnitSystem u = UnitSystem::earth_moon();
    const double a = 0.1 / 500.0;
    CHECK(a == doctest::Approx(2e-4));
    const double nd = u.to_nondim(a, QuantityKind::Acceleration);
    CHECK(nd > 0.073);
    CHECK(nd < 0.077);
}

TEST_CASE("invalid unit systems are rejected") {
    CHECK_THROWS_AS(UnitSystem(0.0, 1.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(UnitSystem(1.0, -1.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(UnitSystem(1.0, 1.0, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(parse_quantity_kind("mass"), std::invalid_argument);
    CHECK(parse_quantity_kind("time") == QuantityKind::Time);
}
