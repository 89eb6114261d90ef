#include "lpsk/dynamics.hpp"

#include <cmath>
#include <sstream>

namespace lpsk {

namespace {

double guarded_norm(const Vec3& d, int body) {
    const double n = d.norm();
    if (!(n > singularity_guard)) {
        std::ostringstream msg;
        msg << "singularity guard violated near body " << body << " (distance " << n << ")";
        throw DomainError(msg.str(), body);
    }
    return n;
}

}  // namespace

// ----------------------------------------------------------------------------
// CR3BP
// ----------------------------------------------------------------------------

double effective_potential(const Vec3& r, double mu) {
    const double r1 = guarded_norm(r - Vec3(-mu, 0, 0), 0);
    const double r2 = guarded_norm(r - Vec3(1 - mu, 0, 0), 1);
    return 0.5 * (r.x() * r.x() + r.y() * r.y()) + (1 - mu) / r1 + mu / r2;
}

Vec3 potential_gradient(const Vec3& r, double mu) {
    const Vec3 d1 = r - Vec3(-mu, 0, 0);
    const Vec3 d2 = r - Vec3(1 - mu, 0, 0);
    const double r1 = guarded_norm(d1, 0), r2 = guarded_norm(d2, 1);
    const Vec3 g = -(1 - mu) * d1 / (r1 * r1 * r1) - mu * d2 / (r2 * r2 * r2);
    return Vec3(r.x() + g.x(), r.y() + g.y(), g.z());
}

Mat3 potential_hessian(const Vec3& r, double mu) {
    const Vec3 d1 = r - Vec3(-mu, 0, 0);
    const Vec3 d2 = r - Vec3(1 - mu, 0, 0);
    const double r1 = guarded_norm(d1, 0), r2 = guarded_norm(d2, 1);
    const double r13 = r1 * r1 * r1, r23 = r2 * r2 * r2;
    Mat3 H = (1 - mu) * (3.0 * d1 * d1.transpose() / (r13 * r1 * r1) - Mat3::Identity() / r13) +
             mu * (3.0 * d2 * d2.transpose() / (r23 * r2 * r2) - Mat3::Identity() / r23);
    H(0, 0) += 1.0;
    H(1, 1) += 1.0;
    return H;
}

PhaseState cr3bp_derivative(const PhaseState& s, double mu) {
    const Vec3 g = potential_gradient(s.position, mu);
    const Vec3& v = s.velocity;
    return {v, Vec3(2.0 * v.y() + g.x(), -2.0 * v.x() + g.y(), g.z())};
}

double jacobi_constant(const PhaseState& s, double mu) {
    return 2.0 * effective_potential(s.position, mu) - s.velocity.squaredNorm();
}

Mat6 cr3bp_jacobian(const Vec3& r, double mu) {
    Mat6 A = Mat6::Zero();
    A.block<3, 3>(0, 3) = Mat3::Identity();
    A.block<3, 3>(3, 0) = potential_hessian(r, mu);
    A(3, 4) = 2.0;
    A(4, 3) = -2.0;
    return A;
}

std::array<Vec3, 5> lagrange_points(double mu) {
    if (!(mu > 0.0 && mu < 0.5)) throw std::invalid_argument("mass ratio must lie in (0, 0.5)");
    // dU/dx on the x axis and its derivative
    auto f = [mu](double x) {
        const double a = x + mu, b = x - 1 + mu;
        return x - (1 - mu) * a / std::pow(std::abs(a), 3) - mu * b / std::pow(std::abs(b), 3);
    };
    auto df = [mu](double x) {
        const double a = std::abs(x + mu), b = std::abs(x - 1 + mu);
        return 1 + 2 * (1 - mu) / (a * a * a) + 2 * mu / (b * b * b);
    };
    // f is strictly increasing between singularities, so bracketed Newton is safe.
    auto solve = [&](double lo, double hi) {
        double x = 0.5 * (lo + hi);
        for (int i = 0; i < 200; ++i) {
            const double fx = f(x);
            if (std::abs(fx) < 1e-14) break;
            if (fx > 0) hi = x; else lo = x;
            double xn = x - fx / df(x);
            if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
            if (xn == x) break;
            x = xn;
        }
        return x;
    };
    const double eps = 1e-9;
    const double s3 = std::sqrt(3.0) / 2.0;
    return {Vec3(solve(-mu + eps, 1 - mu - eps), 0, 0), Vec3(solve(1 - mu + eps, 2.0), 0, 0),
            Vec3(solve(-2.0, -mu - eps), 0, 0), Vec3(0.5 - mu, s3, 0), Vec3(0.5 - mu, -s3, 0)};
}

// ----------------------------------------------------------------------------
// N-body
// ----------------------------------------------------------------------------

void PerturbationConfig::validate() const {
    if (!(spacecraft_mass > 0.0)) throw std::invalid_argument("spacecraft mass must be positive");
    if (!(srp_area >= 0.0)) throw std::invalid_argument("SRP area must be non-negative");
    if (!(reflectivity_coeff >= 1.0 && reflectivity_coeff <= 2.0))
        throw std::invalid_argument("reflectivity coefficient must lie in [1, 2]");
}

Vec3 nbody_gravity(const Vec3& r, double t, const EphemerisSet& eph) {
    const double mu0 = eph.body(0).mu;
    const double rn = guarded_norm(r, 0);
    Vec3 a = -mu0 * r / (rn * rn * rn);
    for (std::size_t j = 1; j < eph.size(); ++j) {
        const double mu = eph.body(j).mu;
        if (mu == 0.0) continue;
        const Vec3 rj = eph.body_position(j, t);
        const Vec3 d = rj - r;
        const double dn = guarded_norm(d, static_cast<int>(j));
        const double rjn = rj.norm();
        a += mu * (d / (dn * dn * dn) - rj / (rjn * rjn * rjn));
    }
    return a;
}

Mat3 nbody_gravity_gradient(const Vec3& r, double t, const EphemerisSet& eph) {
    auto term = [](const Vec3& d, double n) {
        const double n3 = n * n * n;
        return Mat3(3.0 * d * d.transpose() / (n3 * n * n) - Mat3::Identity() / n3);
    };
    const double rn = guarded_norm(r, 0);
    Mat3 G = eph.body(0).mu * term(r, rn);
    for (std::size_t j = 1; j < eph.size(); ++j) {
        const double mu = eph.body(j).mu;
        if (mu == 0.0) continue;
        const Vec3 d = r - eph.body_position(j, t);
        G += mu * term(d, guarded_norm(d, static_cast<int>(j)));
    }
    return G;
}

Vec3 srp_acceleration(const Vec3& r, double t, const EphemerisSet& eph,
                      const PerturbationConfig& pert, const UnitSystem& units) {
    const auto sun = eph.find("sun");
    if (!sun) throw std::invalid_argument("SRP requires a body named 'sun' in the ephemeris");
    const Vec3 rs = eph.body_position(*sun, t);
    for (std::size_t k : pert.occluders) {
        const Vec3 pk = eph.body_position(k, t);
        const Vec3 s = (rs - pk).normalized();
        const Vec3 rel = r - pk;
        const double along = rel.dot(s);
        if (along < 0.0 && (rel - along * s).norm() < eph.body(k).radius) return Vec3::Zero();
    }
    const Vec3 d = r - rs;
    const double dn = d.norm();
    const double dist_m = dn * units.length_unit;
    const double au_ratio = constants::astronomical_unit_m / dist_m;
    const double mag = pert.reflectivity_coeff * (pert.srp_area / pert.spacecraft_mass) *
                       constants::solar_pressure_1au * au_ratio * au_ratio;
    return (mag / units.acceleration_unit()) * d / dn;
}

PhaseState nbody_derivative(const PhaseState& s, double t, const EphemerisSet& eph,
                            const PerturbationConfig& pert, const UnitSystem& units) {
    Vec3 a = nbody_gravity(s.position, t, eph);
    if (pert.srp_enabled) a += srp_acceleration(s.position, t, eph, pert, units);
    for (const auto& p : pert.plugins) a += p(s.position, s.velocity, t);
    return {s.velocity, a};
}

// ----------------------------------------------------------------------------
// Deviation dynamics
// ----------------------------------------------------------------------------

Vec3 error_acceleration(const Vec3& z1, const Vec3& r_nominal, double t, const EphemerisSet& eph) {
    Vec3 fa = Vec3::Zero();
    for (std::size_t j = 0; j < eph.size(); ++j) {
        const double mu = eph.body(j).mu;
        if (mu == 0.0) continue;
        const Vec3 w = (j == 0 ? Vec3(Vec3::Zero()) : eph.body_position(j, t)) - r_nominal;
        const Vec3 d = w - z1;
        const double dn = guarded_norm(d, static_cast<int>(j));
        const double wn = guarded_norm(w, static_cast<int>(j));
        fa += mu * (d / (dn * dn * dn) - w / (wn * wn * wn));
    }
    return fa;
}

Vec3 error_acceleration_f_a(const Vec3& z1, double t, const EphemerisSet& eph,
                            const NominalTrajectory& nominal) {
    return error_acceleration(z1, nominal.state(t).r, t, eph);
}

PhaseState error_derivative(const PhaseState& z, double t, const Vec3& u, const EphemerisSet& eph,
                            const NominalTrajectory& nominal) {
    return {z.velocity, error_acceleration_f_a(z.position, t, eph, nominal) + u};
}

}  // namespace lpsk
