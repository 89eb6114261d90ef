#include "lpsk/controller.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace lpsk;

TEST_CASE("base law in component form") {
    const Gains g{0.5, 2.0};
    const PhaseState z(Vec3(1, -2, 3), Vec3(0.5, 0.1, -0.2));
    const Vec3 fa(0.01, 0.02, -0.03);
    const Vec3 u = base_command(z, fa, g);
    const Vec3 expect = -(1 + 1.0) * z.position - 2.5 * z.velocity - fa;
    CHECK((u - expect).norm() < 1e-15);
    Vec6 zz;
    zz << z.position, z.velocity;
    CHECK((gain_matrix_K(g) * zz - apply_K(z, g)).norm() < 1e-15);
    const Eigen::JacobiSVD<GainMatrix> svd(gain_matrix_K(g));
    CHECK(gain_norm_ell(g) == doctest::Approx(svd.singularValues()[0]).epsilon(1e-14));
    CHECK_THROWS_AS((Gains{0.0, 1.0}.validate()), std::invalid_argument);
}

TEST_CASE("base law makes the error dynamics Hurwitz for positive gains") {
    for (const Gains g : {Gains{0.5, 0.5}, Gains{0.1, 5.0}, Gains{3.0, 0.2}}) {
        // z1' = z2, z2' = f_a + u = -K z
        Mat6 A = Mat6::Zero();
        A.topRightCorner<3, 3>() = Mat3::Identity();
        A.bottomRows<3>() = -gain_matrix_K(g);
        const Eigen::EigenSolver<Mat6> es(A);
        CHECK(es.eigenvalues().real().maxCoeff() < 0.0);
        // s^2 + (k1 + k2) s + 1 + k1 k2 has roots with real part at most -min(k1, k2) / 2
        CHECK(es.eigenvalues().real().maxCoeff() <= -std::min(g.k1, g.k2) / 2 + 1e-12);
    }
}

TEST_CASE("relieved command picks the largest admissible beta") {
    const Gains g{0.5, 0.5};
    const PhaseState z(Vec3(1e-3, 2e-3, -1e-3), Vec3(-2e-3, 1e-3, 0.5e-3));
    const Vec3 fa(1e-3, -5e-4, 2e-4);
    const double beta_min = 0.6;
    const Vec3 Kz = apply_K(z, g);

    // unsaturated: identical to the base law
    auto r = relieved_command(z, fa, g, beta_min, 1.0);
    CHECK_FALSE(r.saturated);
    CHECK(r.beta == 1.0);
    CHECK((r.u - base_command(z, fa, g)).norm() == 0.0);

    // brute force over a fine beta grid
    const double u_sat = (-0.8 * Kz - fa).norm();
    double best = -1;
    for (int i = 0; i <= 400000; ++i) {
        const double b = beta_min + (1 - beta_min) * i / 400000.0;
        if ((-b * Kz - fa).norm() <= u_sat) best = b;
    }
    r = relieved_command(z, fa, g, beta_min, u_sat);
    CHECK(r.saturated);
    CHECK_FALSE(r.infeasible);
    CHECK(r.beta == doctest::Approx(best).epsilon(1e-5));
    CHECK(r.u.norm() <= u_sat * (1 + 1e-12));
    CHECK(r.beta == doctest::Approx(0.8).epsilon(1e-10));

    // even beta_min is too large: infeasible, rescaled to the limit
    const double tight = 0.5 * (-beta_min * Kz - fa).norm();
    r = relieved_command(z, fa, g, beta_min, tight);
    CHECK(r.infeasible);
    CHECK(r.u.norm() == doctest::Approx(tight));

    CHECK_THROWS_AS(relieved_command(z, fa, g, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(relieved_command(z, fa, g, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("actuator dead-band, magnitude error and clamp") {
    ActuatorModel m;
    m.u_min = 1e-3;
    m.u_sat = 1.0;
    m.validate();
    auto o = apply_actuator(Vec3(5e-4, 0, 0), m, 0.0);
    CHECK(o.idle);
    CHECK(o.u.norm() == 0.0);
    o = apply_actuator(Vec3(0, 0.5, 0), m, 0.1);
    CHECK_FALSE(o.idle);
    CHECK_FALSE(o.clamped);
    CHECK(o.u.y() == doctest::Approx(0.55));
    o = apply_actuator(Vec3(0, 3, 4), m, 0.0);
    CHECK(o.clamped);
    CHECK(o.u.norm() == doctest::Approx(1.0));
    CHECK((o.u - Vec3(0, 0.6, 0.8)).norm() < 1e-15);

    ActuatorModel bad;
    bad.u_min = 2.0;
    bad.u_sat = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("noisy actuator draws a relative magnitude error") {
    ActuatorModel m;
    m.control_noise_sigma = 0.02;
    std::mt19937_64 rng(42);
    double sum = 0, sum2 = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const auto o = apply_actuator(Vec3(0.6, 0, 0.8), m, rng);
        CHECK(o.u.normalized().isApprox(Vec3(0.6, 0, 0.8)));
        const double e = o.u.norm() - 1.0;
        sum += e;
        sum2 += e * e;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum2 / n - mean * mean);
    CHECK(sd >= 0.0196);
    CHECK(sd <= 0.0204);
}

TEST_CASE("base law by hand and the gain norm") {
    const Vec3 u = base_command(PhaseState(Vec3(1e-3, 0, 0), Vec3::Zero()), Vec3::Zero(), Gains{0.5, 0.5});
    CHECK((u - Vec3(-1.25e-3, 0, 0)).norm() < 1e-18);
    CHECK(gain_norm_ell({0.5, 0.5}) == doctest::Approx(std::sqrt(1 + 1.5625)).epsilon(1e-15));
    for (double k1 = 0.01; k1 < 100; k1 *= 1.7)
        for (double k2 = 0.01; k2 < 100; k2 *= 1.7) CHECK(gain_norm_ell({k1, k2}) > 1.0);
}

TEST_CASE("relieved beta is maximal on random cases") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> gain(0.1, 5.0), frac(0.3, 0.95);
    int saturated = 0;
    for (int i = 0; i < 2000; ++i) {
        const Gains g{gain(rng), gain(rng)};
        const PhaseState z(Vec3(n(rng), n(rng), n(rng)), Vec3(n(rng), n(rng), n(rng)));
        const Vec3 fa = 0.2 * Vec3(n(rng), n(rng), n(rng));
        const double u_sat = frac(rng) * base_command(z, fa, g).norm();
        const auto r = relieved_command(z, fa, g, 0.05, u_sat);
        if (r.infeasible) continue;
        CHECK(r.u.norm() <= u_sat * (1 + 1e-12));
        CHECK(r.beta >= 0.05);
        if (r.saturated && r.beta < 1.0 - 1e-6) {
            ++saturated;
            CHECK((-(r.beta + 1e-6) * apply_K(z, g) - fa).norm() > u_sat);
        }
    }
    CHECK(saturated > 1000);
}

TEST_CASE("relieved command never exceeds the limit, even by rounding") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    const Gains g{0.6962, 300.0};
    for (int i = 0; i < 20000; ++i) {
        const PhaseState z(Vec3(n(rng), n(rng), n(rng)) * 1e-4, Vec3(n(rng), n(rng), n(rng)) * 1e-4);
        const Vec3 fa = Vec3(n(rng), n(rng), n(rng)) * 1e-5;
        const double u_sat = 0.5 * apply_K(z, g).norm();
        const auto r = relieved_command(z, fa, g, 0.01, u_sat);
        CHECK(r.u.norm() <= u_sat);
        CHECK(apply_actuator(r.u, ActuatorModel{0.0, u_sat, 0.0, 0.0}, 0.0).clamped == false);
    }
}
