#include "lpsk/controller.hpp"

#include <algorithm>
#include <cmath>

namespace lpsk {

void Gains::validate() const {
    if (!(k1 > 0.0) || !(k2 > 0.0)) throw std::invalid_argument("gains k1, k2 must be positive");
}

GainMatrix gain_matrix_K(const Gains& g) {
    GainMatrix K;
    K << (1 + g.k1 * g.k2) * Mat3::Identity(), (g.k1 + g.k2) * Mat3::Identity();
    return K;
}

Vec3 apply_K(const PhaseState& z, const Gains& g) {
    return (1 + g.k1 * g.k2) * z.position + (g.k1 + g.k2) * z.velocity;
}

double gain_norm_ell(const Gains& g) {
    return std::hypot(g.k1 + g.k2, 1 + g.k1 * g.k2);
}

Vec3 base_command(const PhaseState& z, const Vec3& f_a, const Gains& g) {
    return -apply_K(z, g) - f_a;
}

RelievedCommand relieved_command(const PhaseState& z, const Vec3& f_a, const Gains& g,
                                 double beta_min, double u_sat) {
    if (!(beta_min > 0.0 && beta_min <= 1.0)) throw std::invalid_argument("beta_min must lie in (0, 1]");
    if (!(u_sat > 0.0)) throw std::invalid_argument("u_sat must be positive");
    const Vec3 Kz = apply_K(z, g);
    RelievedCommand out;
    out.u = -Kz - f_a;
    if (out.u.norm() <= u_sat) return out;

    // |beta Kz + f_a|^2 <= u_sat^2  <=>  a b^2 + 2 p b + c <= 0
    const double a = Kz.squaredNorm();
    const double p = Kz.dot(f_a);
    const double c = f_a.squaredNorm() - u_sat * u_sat;
    const double disc = p * p - a * c;
    double beta = beta_min;
    bool ok = false;
    if (a > 0.0 && disc >= 0.0) {
        const double sq = std::sqrt(disc);
        // larger root, written to avoid cancellation
        const double hi = (-p > 0.0) ? (-p + sq) / a : -c / (p + sq);
        const double lo = (-p > 0.0) ? c / (-p + sq) : (-p - sq) / a;
        if (hi >= beta_min && lo <= 1.0) {
            beta = std::min(1.0, hi);
            ok = true;
        }
    }
    out.beta = beta;
    out.saturated = true;
    out.u = -beta * Kz - f_a;
    out.infeasible = !ok;
    // rescale onto the limit; on the feasible branch this only removes rounding excess
    for (int i = 0; i < 4 && out.u.norm() > u_sat; ++i) out.u *= std::nextafter(u_sat / out.u.norm(), 0.0);
    return out;
}

void ActuatorModel::validate() const {
    if (!(u_min >= 0.0)) throw std::invalid_argument("u_min must be non-negative");
    if (u_sat && !(*u_sat > u_min)) throw std::invalid_argument("u_sat must exceed u_min");
    if (!(control_noise_sigma >= 0.0 && control_noise_sigma < 1.0))
        throw std::invalid_argument("control noise sigma must lie in [0, 1)");
    if (!(noise_resample_interval >= 0.0))
        throw std::invalid_argument("noise resample interval must be non-negative");
}

ActuatorOutput apply_actuator(const Vec3& u_cmd, const ActuatorModel& model, double eps) {
    ActuatorOutput out;
    const double n = u_cmd.norm();
    if (n < model.u_min) {
        out.idle = true;
        return out;
    }
    out.u = eps == 0.0 ? u_cmd : Vec3((1.0 + eps) * u_cmd);
    if (model.u_sat) {
        const double m = out.u.norm();
        if (m > *model.u_sat) {
            out.u *= *model.u_sat / m;
            out.clamped = true;
        }
    }
    return out;
}

ActuatorOutput apply_actuator(const Vec3& u_cmd, const ActuatorModel& model, std::mt19937_64& rng) {
    double eps = 0.0;
    if (model.control_noise_sigma > 0.0)
        eps = std::normal_distribution<double>(0.0, model.control_noise_sigma)(rng);
    return apply_actuator(u_cmd, model, eps);
}

}  // namespace lpsk
