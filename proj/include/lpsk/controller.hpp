/**
 *  @file controller.hpp
 *  @brief Backstepping station-keeping laws and the actuator model
 */
#pragma once

#include "lpsk/types.hpp"

#include <optional>
#include <random>

namespace lpsk {

/// Scalar gains, K1 = k1 I and K2 = k2 I.
struct Gains {
    double k1 = 0.5;
    double k2 = 0.5;
    void validate() const;
};

using GainMatrix = Eigen::Matrix<double, 3, 6>;

/// K = [(1 + k1 k2) I, (k1 + k2) I]
GainMatrix gain_matrix_K(const Gains& g);
/// K z without forming the matrix.
Vec3 apply_K(const PhaseState& z, const Gains& g);
/// Largest singular value of K.
double gain_norm_ell(const Gains& g);

/// u = -(1 + k1 k2) z1 - (k1 + k2) z2 - f_a
Vec3 base_command(const PhaseState& z, const Vec3& f_a, const Gains& g);

struct RelievedCommand {
    Vec3 u = Vec3::Zero();
    double beta = 1.0;
    bool saturated = false;   ///< beta < 1
    bool infeasible = false;  ///< even beta_min exceeds u_sat; u was rescaled to u_sat
};

/**
 *  @brief u = -beta K z - f_a with the largest beta in [beta_min, 1] meeting |u| <= u_sat
 *
 *  beta comes from the closed-form roots of |Kz|^2 b^2 + 2 (Kz . f_a) b + |f_a|^2 - u_sat^2.
 */
RelievedCommand relieved_command(const PhaseState& z, const Vec3& f_a, const Gains& g,
                                 double beta_min, double u_sat);

struct ActuatorModel {
    double u_min = 0.0;             ///< dead-band threshold (nondim)
    std::optional<double> u_sat;    ///< hard magnitude limit (nondim)
    double control_noise_sigma = 0.0;
    double noise_resample_interval = 0.0;  ///< nondim time
    void validate() const;
};

struct ActuatorOutput {
    Vec3 u = Vec3::Zero();
    bool idle = false;
    bool clamped = false;
};

/// Dead-band, magnitude error (1 + eps), then hard clamp.
ActuatorOutput apply_actuator(const Vec3& u_cmd, const ActuatorModel& model, double eps);
/// Same with a fresh eps ~ N(0, sigma_C^2) drawn from @p rng.
ActuatorOutput apply_actuator(const Vec3& u_cmd, const ActuatorModel& model, std::mt19937_64& rng);

}  // namespace lpsk
