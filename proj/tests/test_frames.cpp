#include "lpsk/dynamics.hpp"
#include "lpsk/frames.hpp"
#include "lpsk/integrate.hpp"

#include <doctest.h>

#include <cmath>

using namespace lpsk;

namespace {
const UnitSystem units = UnitSystem::earth_moon();
const double mu = units.mass_ratio_mu;
}  // namespace

TEST_CASE("primaries sit on the synodic X axis") {
    for (const EphemerisSet& eph : {earth_moon_circular(units, 0, 10),
                                    earth_moon_elliptic(units, 0, 10, 0.0549, 0.09)}) {
        CHECK(pair_mass_ratio(eph) == doctest::Approx(mu));
        for (double t : {0.0, 1.3, 4.4}) {
            const PhaseState moon = inertial_to_synodic(eph.body_state(1, t), t, eph);
            const PhaseState earth = inertial_to_synodic(PhaseState{}, t, eph);
            CHECK((moon.position - Vec3(1 - mu, 0, 0)).norm() < 1e-13);
            CHECK(moon.velocity.norm() < 1e-13);
            CHECK((earth.position - Vec3(-mu, 0, 0)).norm() < 1e-13);
            CHECK(earth.velocity.norm() < 1e-13);
        }
    }
}

TEST_CASE("circular frame is the classical rotating frame") {
    const EphemerisSet eph = earth_moon_circular(units, 0, 10);
    const double t = 0.8;
    const SynodicFrame f = SynodicFrame::at(eph, t);
    CHECK((f.omega - Vec3(0, 0, 1)).norm() < 1e-14);
    CHECK(f.scale == doctest::Approx(1.0));
    CHECK(std::abs(f.scale_dot) < 1e-14);
    // a point at rest in the synodic frame rotates at unit rate about the barycenter
    const PhaseState rho(Vec3(1.2, 0.0, 0.0), Vec3::Zero());
    const PhaseState x = synodic_to_inertial(rho, t, eph);
    const Vec3 rel = x.position - f.origin;
    CHECK(std::abs(f.origin.norm() - mu) < 1e-14);
    CHECK((x.velocity - f.origin_dot - Vec3(0, 0, 1).cross(rel)).norm() < 1e-13);
}

TEST_CASE("inertial and synodic conversions invert each other") {
    const EphemerisSet eph = earth_moon_elliptic(units, 0, 10, 0.0549, 0.09);
    const PhaseState rho(Vec3(1.15, -0.02, 0.03), Vec3(0.01, 0.2, -0.05));
    for (double t : {0.0, 2.0, 5.5}) {
        const PhaseState back = inertial_to_synodic(synodic_to_inertial(rho, t, eph), t, eph);
        CHECK((back.vec() - rho.vec()).norm() < 1e-13);
    }
}

TEST_CASE("restricted N-body flow with a circular Moon is the CR3BP flow") {
    const EphemerisSet eph = earth_moon_circular(units, -1, 10);
    const PhaseState rho0(Vec3(1.12, 0.01, 0.03), Vec3(0.002, 0.19, -0.001));
    const double t0 = 0.37;
    const PhaseState x0 = synodic_to_inertial(rho0, t0, eph);
    auto f_in = [&](double t, const Vec6& y) { return nbody_derivative(PhaseState(y), t, eph).vec(); };
    auto f_syn = [&](double, const Vec6& y) { return cr3bp_derivative(PhaseState(y), mu).vec(); };
    const double dt = 2.0;
    const Vec6 x1 = propagate(f_in, x0.vec(), t0, t0 + dt, IntegratorSpec::truth(), false).y;
    const Vec6 r1 = propagate(f_syn, rho0.vec(), t0, t0 + dt, IntegratorSpec::truth(), false).y;
    CHECK((inertial_to_synodic(PhaseState(x1), t0 + dt, eph).vec() - r1).norm() < 1e-10);
}
