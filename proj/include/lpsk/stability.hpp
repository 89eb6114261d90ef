/**
 *  @file stability.hpp
 *  @brief Lyapunov certification of the relieved law: beta_crit, (rho, theta), phi and u_sat,min
 */
#pragma once

#include "lpsk/controller.hpp"
#include "lpsk/ephemeris.hpp"
#include "lpsk/nominal.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace lpsk {

/// Lyapunov matrices; the 2x2 blocks act on one axis (z1_i, z2_i).
struct LyapunovMatrices {
    Mat6 X, Y, U;
    Eigen::Matrix2d X2, Y2, U2;
};

LyapunovMatrices lyapunov_matrices(const Gains& g, double beta);

/// Roots of the positive-definiteness quadratic of U(beta); beta2 is +inf when k1 = 1.
struct BetaRoots {
    double beta1;
    double beta2;
};
BetaRoots beta_roots(const Gains& g);
double beta_crit(const Gains& g);

/// Leading principal minors of the per-axis U(beta) block are positive.
bool sylvester_check(const Gains& g, double beta);

/// beta_min = beta_crit + eta (1 - beta_crit)
double beta_min_from_eta(const Gains& g, double eta);

struct ConvergenceConstants {
    double rho;
    double theta;
};
/// @throws CertificationError when beta_min <= beta_crit or beta_min > 1
ConvergenceConstants convergence_constants(const Gains& g, double beta_min);

/// Per-body term of the acceleration-error bound at deviation radius delta.
double psi_term(double w_norm, double w_norm1, double delta);

/// Relative-distance history of one body: t -> (|w|, |w|_1).
struct BodyDistance {
    double mu;
    std::function<std::pair<double, double>(double)> norms;
};

struct PhiResult {
    double phi = 0.0;
    double t = 0.0;  ///< attaining time
};

/**
 *  @brief Evaluates phi(|z0|) = max_t sum_j mu_j psi_j over [t0, t1]
 *
 *  The distance histories are sampled once on a dense grid; each evaluation
 *  scans the cached grid and refines the best cell by golden-section search.
 *  The exponential decay is measured from t0 (the insertion epoch).
 */
class PhiEvaluator {
public:
    PhiEvaluator(std::vector<BodyDistance> bodies, double t0, double t1, double period,
                 int samples_per_rev = 2000);
    PhiEvaluator(const NominalTrajectory& nominal, const EphemerisSet& eph, double t0, double t1,
                 int samples_per_rev = 2000);

    /// @throws CertificationError when rho |z0| e^{-theta t} reaches some |w_j(t)|
    PhiResult operator()(double z0_norm, double rho, double theta) const;
    /// min over bodies and grid of |w_j| (refined), the radius of set B
    double closest_approach() const { return r_min_; }
    double t_start() const { return t0_; }
    double t_end() const { return t1_; }

private:
    double total(double t, double z0_norm, double rho, double theta) const;
    std::vector<BodyDistance> bodies_;
    double t0_, t1_;
    std::vector<double> grid_;
    std::vector<std::vector<std::pair<double, double>>> cache_;  // [body][sample]
    double r_min_ = 0.0;
};

PhiResult phi_bound(double z0_norm, double rho, double theta, const NominalTrajectory& nominal,
                    const EphemerisSet& eph, double t0, double t1);

struct GainCertificate {
    Gains gains;
    double beta_crit = 0.0;
    double beta_min = 1.0;
    double eta = 1.0;
    double rho = 1.0;
    double theta = 0.0;
    double ell = 1.0;
    double r = 0.0;
    double z0_norm = 0.0;
    double phi = 0.0;
    double phi_time = 0.0;
    double u_sat_min = 0.0;
    bool feasible = false;
};

/// u_sat,min = beta_min ell rho |z0| + phi; infeasibility is reported, not thrown.
GainCertificate usat_min(const Gains& g, double beta_min, double z0_norm, const PhiEvaluator& phi);

struct EtaOptimum {
    double eta;
    GainCertificate certificate;
};
/// Coarse 32-point sweep over eta in [1e-6, 1], then golden-section refinement to 1e-4.
EtaOptimum optimize_eta(const Gains& g, double z0_norm, const PhiEvaluator& phi);

enum class EtaMode { Fixed, Optimized };

/// Row-major over k1 (rows) and k2 (columns).
std::vector<GainCertificate> gain_map(const std::vector<double>& k1_grid,
                                      const std::vector<double>& k2_grid, double z0_norm,
                                      const PhiEvaluator& phi, EtaMode mode, double eta = 1.0);

std::vector<double> linear_grid(double lo, double hi, int n);
std::vector<double> log_grid(double lo, double hi, int n);

void write_gain_map(std::ostream& out, const std::vector<GainCertificate>& cells);

/// Largest k1 with rho(k1) |z0| < r (rho does not depend on k2), by bisection.
double max_feasible_k1(double z0_norm, double r, double k1_hi = 1e4);

/**
 *  @brief Quantile of |z0| for z1 ~ N(0, sigma_r^2 I3), z2 ~ N(0, sigma_v^2 I3)
 *
 *  |z0|^2 = sigma_r^2 A + sigma_v^2 B with A, B chi-squared(3); the CDF is a
 *  one-dimensional convolution integral, inverted by root bracketing.
 */
double insertion_deviation_quantile(double sigma_r, double sigma_v, double q);

}  // namespace lpsk
