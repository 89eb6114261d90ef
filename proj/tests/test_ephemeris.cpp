#include "lpsk/ephemeris.hpp"
#include "lpsk/nominal.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace lpsk;

namespace {

constexpr double pi = 3.14159265358979323846;

/// Nominal sampled from an analytic z(t) = c + a cos t on the Z axis.
NominalTrajectory axis_nominal(double c, double a, double t1) {
    std::vector<NominalNode> nodes;
    for (int k = 0; k * 0.01 <= t1 + 1e-12; ++k) {
        const double t = k * 0.01;
        nodes.push_back({t, Vec3(0, 0, c + a * std::cos(t)), Vec3(0, 0, -a * std::sin(t)),
                         Vec3(0, 0, -a * std::cos(t))});
    }
    return NominalTrajectory(nodes, 2 * pi);
}

}  // namespace

TEST_CASE("circular provider: analytic state and centripetal acceleration") {
    const CircularProvider p(2.0, 0.5, 0.3);
    const double t = 1.7, ang = 0.3 + 0.5 * t;
    const PhaseState s = p.state(t);
    CHECK(s.position.x() == doctest::Approx(2 * std::cos(ang)));
    CHECK(s.position.y() == doctest::Approx(2 * std::sin(ang)));
    CHECK(s.velocity.x() == doctest::Approx(-std::sin(ang)));
    CHECK((p.acceleration(t) + 0.25 * s.position).norm() < 1e-15);
    CHECK_THROWS_AS(CircularProvider(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("inclined circular orbit keeps radius and angular momentum direction") {
    const double inc = 0.4, node = 1.1;
    const CircularProvider p(1.0, 1.0, 0.0, inc, node);
    const Vec3 h_expected(std::sin(inc) * std::sin(node), -std::sin(inc) * std::cos(node), std::cos(inc));
    for (double t : {0.0, 0.7, 2.9}) {
        const PhaseState s = p.state(t);
        CHECK(s.position.norm() == doctest::Approx(1.0));
        CHECK((s.position.cross(s.velocity).normalized() - h_expected).norm() < 1e-12);
    }
}

TEST_CASE("Kepler equation solutions satisfy the equation") {
    for (double e : {0.0, 0.0549, 0.5, 0.95})
        for (double m : {-7.0, 0.0, 0.3, 3.0, 3.14159, 12.5}) {
            const double E = KeplerProvider::solve_kepler(m, e);
            CHECK(E - e * std::sin(E) == doctest::Approx(m).epsilon(1e-13));
        }
}

TEST_CASE("Kepler provider conserves energy and obeys the two-body field") {
    KeplerProvider::Elements el;
    el.a = 1.0;
    el.e = 0.3;
    el.inclination = 0.2;
    el.arg_periapsis = 0.5;
    const KeplerProvider p(el, 1.0);
    const PhaseState s0 = p.state(0.0);
    const double energy0 = 0.5 * s0.velocity.squaredNorm() - 1.0 / s0.position.norm();
    CHECK(energy0 == doctest::Approx(-0.5));
    for (double t : {0.4, 1.9, 5.5}) {
        const PhaseState s = p.state(t);
        CHECK(0.5 * s.velocity.squaredNorm() - 1.0 / s.position.norm() == doctest::Approx(energy0).epsilon(1e-12));
        const double r = s.position.norm();
        CHECK((p.acceleration(t) + s.position / (r * r * r)).norm() < 1e-12);
        const double h = 1e-5;
        const Vec3 fd = (p.state(t + h).position - p.state(t - h).position) / (2 * h);
        CHECK((fd - s.velocity).norm() < 1e-9);
    }
    CHECK((p.state(2 * pi).position - s0.position).norm() < 1e-12);
}

TEST_CASE("tabulated provider interpolates and refuses extrapolation") {
    const CircularProvider circle(1.0, 1.0);
    const auto tab = tabulate(circle, 0.0, 10.0, 0.01);
    for (double t : {0.005, 3.333, 9.999}) {
        CHECK((tab->state(t).position - circle.state(t).position).norm() < 1e-10);
        CHECK((tab->state(t).velocity - circle.state(t).velocity).norm() < 1e-7);
    }
    CHECK((tab->state(5.0).position - circle.state(5.0).position).norm() < 1e-15);
    CHECK_THROWS_AS(tab->state(10.5), RangeError);
    CHECK_THROWS_AS(tab->state(-0.1), RangeError);
}

TEST_CASE("tabulated body text round trip") {
    const CircularProvider circle(1.0, 1.0);
    const auto tab = tabulate(circle, 0.0, 1.0, 0.1);
    std::stringstream io;
    write_tabulated_body(io, "moon", 0.01215, tab->epochs(), tab->states());
    const Body b = read_tabulated_body(io);
    CHECK(b.name == "moon");
    CHECK(b.mu == 0.01215);
    CHECK((b.provider->state(0.55).position - tab->state(0.55).position).norm() < 1e-15);
    std::istringstream bad("# body x mu 1\n0 1 2\n");
    CHECK_THROWS_AS(read_tabulated_body(bad), ConfigError);
}

TEST_CASE("ephemeris set: center at origin, span checks, lookup") {
    const UnitSystem u = UnitSystem::earth_moon();
    const EphemerisSet eph = earth_moon_sun_bicircular(u, 0.0, 10.0);
    REQUIRE(eph.size() == 3);
    CHECK(eph.body_position(0, 3.0).norm() == 0.0);
    CHECK(eph.body(1).mu == doctest::Approx(0.01215));
    CHECK(eph.body(0).mu == doctest::Approx(1 - 0.01215));
    CHECK(eph.find("sun").value() == 2);
    CHECK(!eph.find("pluto"));
    CHECK((eph.body_position(1, pi / 2) - Vec3(0, 1, 0)).norm() < 1e-15);
    const double a_sun = eph.body_position(2, 0.0).norm();
    CHECK(a_sun == doctest::Approx(1.495978707e11 / 3.844e8));
    // Sun's synodic period around the Earth-Moon line is close to 29.5 days
    const double rate = eph.body_state(2, 0.0).velocity.norm() / a_sun;
    CHECK(u.nondim_to_days(2 * pi / (1 - rate)) == doctest::Approx(29.5).epsilon(0.01));
    CHECK_THROWS_AS(eph.body_state(1, 11.0), RangeError);
    CHECK_THROWS_AS(eph.body(7), std::out_of_range);
    std::vector<Body> bad{{"moon", 0.01, 0.0, std::make_shared<CircularProvider>(1.0, 1.0)}};
    CHECK_THROWS_AS(EphemerisSet(bad, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("Jupiter rides on the Sun provider") {
    const UnitSystem u = UnitSystem::earth_moon();
    const EphemerisSet eph = earth_moon_sun_bicircular(u, 0.0, 10.0);
    const EphemerisSet with = eph.with_body(jupiter_about_sun(u, eph));
    const Vec3 rel = with.body_position(3, 2.0) - with.body_position(2, 2.0);
    CHECK(rel.norm() == doctest::Approx(5.2044 * 1.495978707e11 / 3.844e8));
    CHECK_THROWS_AS(jupiter_about_sun(u, earth_moon_circular(u, 0, 1)), std::invalid_argument);
}

TEST_CASE("closest approach of an analytic nominal") {
    const UnitSystem u = UnitSystem::earth_moon();
    const EphemerisSet eph = earth_moon_circular(u, 0.0, 7.0);
    const NominalTrajectory nom = axis_nominal(0.3, 0.1, 7.0);
    const ClosestApproach ca = closest_approach_radius(eph, nom, 0.0, 6.5);
    CHECK(ca.r == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(ca.t == doctest::Approx(pi).epsilon(1e-5));
    CHECK(ca.body == 0);
    CHECK_THROWS_AS(closest_approach_radius(eph, axis_nominal(0.0, 0.1, 7.0), 0.0, 6.5), DomainError);
}

TEST_CASE("relative body vector") {
    const UnitSystem u = UnitSystem::earth_moon();
    const EphemerisSet eph = earth_moon_circular(u, 0.0, 7.0);
    const NominalTrajectory nom = axis_nominal(0.3, 0.1, 7.0);
    CHECK((relative_body_vector(eph, 1, 0.0, nom) - Vec3(1, 0, -0.4)).norm() < 1e-15);
    CHECK((relative_body_vector(eph, 0, 0.0, nom) - Vec3(0, 0, -0.4)).norm() < 1e-15);
}
