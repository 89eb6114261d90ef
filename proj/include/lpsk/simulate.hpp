/**
 *  @file simulate.hpp
 *  @brief Closed-loop truth/onboard scenario engine, Monte Carlo campaigns and mission metrics
 */
#pragma once

#include "lpsk/config.hpp"
#include "lpsk/controller.hpp"
#include "lpsk/dynamics.hpp"
#include "lpsk/ephemeris.hpp"
#include "lpsk/nominal.hpp"
#include "lpsk/stability.hpp"
#include "lpsk/trajectory.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lpsk {

/**
 *  @brief Everything a run needs, resolved once per campaign
 *
 *  All quantities are nondimensional. Times inside a run are measured from the
 *  insertion epoch t_ins.
 */
struct Scenario {
    ScenarioConfig config;
    UnitSystem units;
    EphemerisSet eph;        ///< model used for the nominal and onboard propagation
    EphemerisSet truth_eph;  ///< eph plus truth-only bodies
    PerturbationConfig perturbations;
    NominalTrajectory nominal;
    int transition_iterations = 0;
    double transition_residual = 0.0;
    double t_ins = 0.0;
    Gains gains;
    ActuatorModel actuator;
    std::optional<GainCertificate> certificate;  ///< relieved law only
    double duration = 0.0;
    double measurement_interval = 0.0;
    double t_i = 0.0, t_i_prime = 0.0, t_f = 0.0;
    double sigma_ir = 0.0, sigma_iv = 0.0, sigma_nr = 0.0, sigma_nv = 0.0;
};

EphemerisSet build_ephemeris(const ScenarioConfig& cfg, const UnitSystem& units, double t_start,
                             double t_end);
/// Time covered by the ephemeris built for a scenario (from -1).
double scenario_ephemeris_end(const ScenarioConfig& cfg);
OrbitSeed scenario_seed(const ScenarioConfig& cfg);
/// Periodic orbit correction followed by multiple shooting on @p eph.
TransitionResult build_transition(const ScenarioConfig& cfg, const EphemerisSet& eph);

/**
 *  @brief Resolves ephemeris, nominal, insertion epoch and (relieved law) certificate
 *  @throws ConfigError when the nominal does not cover the mission
 *  @throws CertificationError when the relieved law cannot be certified
 */
Scenario prepare_scenario(const ScenarioConfig& cfg);

/// Same, with an already built nominal (skips the transition).
Scenario prepare_scenario(const ScenarioConfig& cfg, const NominalTrajectory& nominal);

struct SeriesRow {
    double t = 0.0;    ///< since insertion
    Vec3 z1, z2;       ///< truth deviation
    Vec3 u;            ///< applied control
    double beta = 1.0;
    bool idle = false;
    bool output = false;  ///< on the uniform output grid (written to file)
};

/// Mission metrics in reporting units (m/s, mm^2/s^3, km, cm/s, um/s^2, days).
struct RunMetrics {
    double E_v = 0.0;
    double E_e = 0.0;
    double env_z1 = 0.0;
    double env_z2 = 0.0;
    double max_u = 0.0;
    double T_idle = 0.0;
    bool diverged = false;
    long saturation_events = 0;  ///< recorded epochs with beta < 1
    long clamp_events = 0;       ///< recorded epochs where the actuator limit cut the command
    long infeasible_events = 0;  ///< relieved law could not meet u_sat even at beta_min
};

struct RunOptions {
    bool keep_series = true;
    /// Replaces the sampled insertion error (truth deviation at t = 0).
    std::optional<PhaseState> initial_deviation;
};

struct RunResult {
    RunMetrics metrics;
    std::vector<SeriesRow> series;
    std::string failure;  ///< reason for divergence, empty otherwise
};

/// 64-bit SplitMix finalizer applied to (base, index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

RunResult run_scenario(const Scenario& scn, std::uint64_t run_index, const RunOptions& opt = {});

/**
 *  @brief Trapezoidal quadrature of |u| over [t_i, t_f]; envelopes over [t_i_prime, t_f]
 *
 *  Rows with equal times carry the two one-sided limits at a discontinuity.
 *  @throws RangeError when the window is not covered by the series
 */
RunMetrics compute_metrics(const std::vector<SeriesRow>& series, double t_i, double t_i_prime,
                           double t_f, const UnitSystem& units);

struct MetricStats {
    double mean = 0.0;
    double std = 0.0;
};

struct CampaignReport {
    std::uint64_t seed = 0;
    std::vector<RunMetrics> runs;
    int diverged = 0;
    /// Statistics over the non-diverged runs; keyed like RunMetrics.
    MetricStats E_v, E_e, env_z1, env_z2, max_u, T_idle;
};

CampaignReport monte_carlo(const Scenario& scn);
CampaignReport aggregate(const std::vector<RunMetrics>& runs, std::uint64_t seed);

/// Key-value text, one "name = value" per line.
void write_report(std::ostream& out, const CampaignReport& report, const Scenario& scn);
/// "t z1x z1y z1z z2x z2y z2z ux uy uz beta idle_flag" at the output epochs.
void write_series(std::ostream& out, const std::vector<SeriesRow>& series);

}  // namespace lpsk
