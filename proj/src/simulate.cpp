#include "lpsk/simulate.hpp"

#include "lpsk/integrate.hpp"
#include "lpsk/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

namespace lpsk {

namespace {

using Vec12 = Eigen::Matrix<double, 12, 1>;

}  // namespace

EphemerisSet build_ephemeris(const ScenarioConfig& c, const UnitSystem& u, double t0, double t1) {
    switch (c.model) {
        case EphemerisModel::Circular: return earth_moon_circular(u, t0, t1);
        case EphemerisModel::Bicircular: return earth_moon_sun_bicircular(u, t0, t1, c.sun_phase_rad);
        case EphemerisModel::Elliptic: return earth_moon_elliptic(u, t0, t1, c.moon_eccentricity);
    }
    throw ConfigError("unknown ephemeris model");
}

OrbitSeed scenario_seed(const ScenarioConfig& c) {
    return c.seed_fixture.empty() ? builtin_seed(c.family) : read_seed_fixture(c.seed_fixture);
}

TransitionResult build_transition(const ScenarioConfig& c, const EphemerisSet& eph) {
    const OrbitSeed seed = scenario_seed(c);
    const PeriodicOrbit orbit = correct_periodic_orbit(seed.state, c.mass_ratio_mu, c.family, seed.period);
    TransitionOptions opt;
    opt.revolutions = c.revolutions;
    opt.patch_per_rev = c.patch_per_rev;
    opt.continuity_tol = c.continuity_tol;
    opt.max_iterations = c.max_iterations;
    opt.pin_first_position = c.pin_first_position;
    return transition_to_qpo(orbit, eph, opt);
}

namespace {

NominalTrajectory build_nominal(const ScenarioConfig& c, const EphemerisSet& eph, int& iterations,
                                double& residual) {
    if (!c.nominal_file.empty()) return NominalTrajectory::read_file(c.nominal_file);
    TransitionResult tr = build_transition(c, eph);
    iterations = tr.iterations;
    residual = tr.residual;
    return std::move(tr.nominal);
}

Scenario finish(const ScenarioConfig& cfg, Scenario scn) {
    const UnitSystem& u = scn.units;
    const double T = u.time_unit;
    scn.duration = cfg.duration_s / T;
    scn.measurement_interval = cfg.measurement_interval_s / T;
    scn.t_i = cfg.t_i_s / T;
    scn.t_i_prime = cfg.t_i_prime_s / T;
    scn.t_f = cfg.t_f_s / T;
    scn.sigma_ir = cfg.sigma_insertion_position_m / u.length_unit;
    scn.sigma_iv = cfg.sigma_insertion_velocity_mps / u.velocity_unit();
    scn.sigma_nr = cfg.sigma_navigation_position_m / u.length_unit;
    scn.sigma_nv = cfg.sigma_navigation_velocity_mps / u.velocity_unit();

    if (cfg.insertion_epoch_s) {
        scn.t_ins = *cfg.insertion_epoch_s / T;
    } else {
        if (scn.nominal.apsides.empty() && scn.eph.size() > 1)
            scn.nominal.apsides = find_apsides(scn.nominal, scn.eph, 1);
        const auto a = insertion_apsis(scn.nominal, cfg.insertion_apsis, scn.nominal.t_start());
        if (!a)
            throw ConfigError(std::string("nominal has no ") + to_string(cfg.insertion_apsis));
        scn.t_ins = a->t;
    }
    if (!scn.nominal.covers(scn.t_ins) || !scn.nominal.covers(scn.t_ins + scn.duration)) {
        std::ostringstream msg;
        msg << "nominal span [" << scn.nominal.t_start() << ", " << scn.nominal.t_end()
            << "] does not cover the mission [" << scn.t_ins << ", " << scn.t_ins + scn.duration
            << "]; increase [nominal] revolutions";
        throw ConfigError(msg.str());
    }

    scn.gains = {cfg.k1, cfg.k2};
    scn.gains.validate();
    scn.actuator.u_min = cfg.u_min_mps2 / u.acceleration_unit();
    if (cfg.u_sat_mps2) scn.actuator.u_sat = *cfg.u_sat_mps2 / u.acceleration_unit();
    scn.actuator.control_noise_sigma = cfg.sigma_control;
    scn.actuator.noise_resample_interval = cfg.noise_resample_s / T;
    scn.actuator.validate();

    scn.perturbations.srp_enabled = cfg.srp;
    scn.perturbations.spacecraft_mass = cfg.spacecraft_mass_kg;
    scn.perturbations.srp_area = cfg.srp_area_m2;
    scn.perturbations.reflectivity_coeff = cfg.reflectivity;
    if (cfg.occultation) scn.perturbations.occluders = {0, 1};
    scn.perturbations.validate();

    if (cfg.law == ControlLaw::Relieved) {
        const double z0 = (scn.sigma_ir + scn.sigma_iv == 0.0)
                              ? 0.0
                              : insertion_deviation_quantile(scn.sigma_ir, scn.sigma_iv, cfg.z0_quantile);
        const PhiEvaluator phi(scn.nominal, scn.eph, scn.t_ins, scn.t_ins + scn.duration);
        GainCertificate cert;
        if (cfg.beta_min)
            cert = usat_min(scn.gains, *cfg.beta_min, z0, phi);
        else if (cfg.eta)
            cert = usat_min(scn.gains, beta_min_from_eta(scn.gains, *cfg.eta), z0, phi);
        else
            cert = optimize_eta(scn.gains, z0, phi).certificate;
        if (!cert.feasible)
            throw CertificationError("relieved law is not certifiable for these gains and |z0| budget");
        scn.certificate = cert;
    }
    return scn;
}

Scenario base_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    Scenario scn;
    scn.config = cfg;
    scn.units = cfg.units();
    return scn;
}

void add_truth_bodies(Scenario& scn) {
    scn.truth_eph = scn.eph;
    if (scn.config.jupiter) scn.truth_eph = scn.eph.with_body(jupiter_about_sun(scn.units, scn.eph));
}

}  // namespace

double scenario_ephemeris_end(const ScenarioConfig& cfg) {
    // generous: the nominal may be loaded or built, and insertion may wait one revolution
    return (cfg.revolutions + 2) * scenario_seed(cfg).period + cfg.duration_s / cfg.units().time_unit;
}

Scenario prepare_scenario(const ScenarioConfig& cfg) {
    Scenario scn = base_scenario(cfg);
    const double span = scenario_ephemeris_end(cfg);
    scn.eph = build_ephemeris(cfg, scn.units, -1.0, span);
    add_truth_bodies(scn);
    scn.nominal = build_nominal(cfg, scn.eph, scn.transition_iterations, scn.transition_residual);
    return finish(cfg, std::move(scn));
}

Scenario prepare_scenario(const ScenarioConfig& cfg, const NominalTrajectory& nominal) {
    Scenario scn = base_scenario(cfg);
    const double span = nominal.t_end() + 1.0;
    scn.eph = build_ephemeris(cfg, scn.units, std::min(-1.0, nominal.t_start() - 1.0), span);
    add_truth_bodies(scn);
    scn.nominal = nominal;
    return finish(cfg, std::move(scn));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

namespace {

struct Command {
    Vec3 onboard = Vec3::Zero();  ///< after the dead-band, before noise
    Vec3 applied = Vec3::Zero();
    double beta = 1.0;
    bool idle = false, saturated = false, clamped = false, infeasible = false;
};

Command command(const Scenario& scn, double t, const PhaseState& zhat, double eps) {
    const Vec3 fa = error_acceleration_f_a(zhat.position, t, scn.eph, scn.nominal);
    Command c;
    Vec3 u;
    if (scn.certificate) {
        const RelievedCommand r = relieved_command(zhat, fa, scn.gains, scn.certificate->beta_min,
                                                   *scn.actuator.u_sat);
        u = r.u;
        c.beta = r.beta;
        c.saturated = r.saturated;
        c.infeasible = r.infeasible;
    } else {
        u = base_command(zhat, fa, scn.gains);
    }
    const ActuatorOutput ideal = apply_actuator(u, scn.actuator, 0.0);
    const ActuatorOutput real = apply_actuator(u, scn.actuator, eps);
    c.onboard = ideal.u;
    c.applied = real.u;
    c.idle = real.idle;
    c.clamped = real.clamped;
    return c;
}

struct Epoch {
    double t;
    bool measure = false, noise = false, output = false;
};

std::vector<Epoch> epoch_list(const Scenario& scn) {
    std::vector<Epoch> e;
    const double D = scn.duration;
    const double h = scn.config.output_cadence;
    for (long i = 0; i * h <= D * (1 + 1e-15); ++i) e.push_back({i * h, false, false, true});
    for (long k = 0; k * scn.measurement_interval < D; ++k)
        e.push_back({k * scn.measurement_interval, true, false, false});
    if (scn.actuator.control_noise_sigma > 0.0)
        for (long j = 0; j * scn.actuator.noise_resample_interval < D; ++j)
            e.push_back({j * scn.actuator.noise_resample_interval, false, true, false});
    for (double t : {scn.t_i, scn.t_i_prime, scn.t_f, D}) e.push_back({t, false, false, false});
    std::stable_sort(e.begin(), e.end(), [](const Epoch& a, const Epoch& b) { return a.t < b.t; });
    std::vector<Epoch> merged;
    for (const Epoch& x : e) {
        if (!merged.empty() && x.t - merged.back().t <= 1e-12 * std::max(1.0, x.t)) {
            merged.back().measure |= x.measure;
            merged.back().noise |= x.noise;
            merged.back().output |= x.output;
        } else {
            merged.push_back(x);
        }
    }
    return merged;
}

}  // namespace

RunResult run_scenario(const Scenario& scn, std::uint64_t run_index, const RunOptions& opt) {
    RunResult out;
    std::mt19937_64 rng(derive_seed(scn.config.seed, run_index));
    std::normal_distribution<double> normal(0.0, 1.0);
    auto draw3 = [&] {
        Vec3 v;
        for (int i = 0; i < 3; ++i) v[i] = normal(rng);
        return v;
    };

    PhaseState dev;
    dev.position = scn.sigma_ir * draw3();
    dev.velocity = scn.sigma_iv * draw3();
    if (opt.initial_deviation) dev = *opt.initial_deviation;

    const double t_ins = scn.t_ins;
    auto nominal_phase = [&](double tau) { return scn.nominal.state(t_ins + tau).phase(); };

    Vec12 y;
    y.head<6>() = (nominal_phase(0.0) + dev).vec();
    y.tail<6>().setZero();
    double eps = 0.0;

    auto rhs = [&](double tau, const Vec12& s) {
        const double t = t_ins + tau;
        const PhaseState truth(Vec6(s.head<6>()));
        const PhaseState zhat(Vec6(s.tail<6>()));
        const Command c = command(scn, t, zhat, eps);
        Vec12 d;
        const PhaseState ft = nbody_derivative(truth, t, scn.truth_eph, scn.perturbations, scn.units);
        d.head<3>() = ft.position;
        d.segment<3>(3) = ft.velocity + c.applied;
        const PhaseState fz = error_derivative(zhat, t, c.onboard, scn.eph, scn.nominal);
        d.segment<3>(6) = fz.position;
        d.tail<3>() = fz.velocity;
        return d;
    };

    std::vector<SeriesRow> rows;
    auto& m = out.metrics;
    auto record = [&](double tau, bool output) {
        const PhaseState z = PhaseState(Vec6(y.head<6>())) - nominal_phase(tau);
        const Command c = command(scn, t_ins + tau, PhaseState(Vec6(y.tail<6>())), eps);
        rows.push_back({tau, z.position, z.velocity, c.applied, c.beta, c.idle, output});
        m.saturation_events += c.saturated;
        m.clamp_events += c.clamped;
        m.infeasible_events += c.infeasible;
        return z.position.norm();
    };

    IntegratorSpec spec;
    spec.abs_tol = spec.rel_tol = scn.config.truth_tol;
    const std::vector<Epoch> epochs = epoch_list(scn);
    double tau = 0.0;
    try {
        for (const Epoch& e : epochs) {
            if (e.t > tau) {
                const auto p = propagate(rhs, y, tau, e.t, spec, false);
                y = p.y;
                spec.initial_step = p.next_step;
                tau = e.t;
                if (e.measure || e.noise) record(tau, false);  // left limit
            }
            if (e.measure) {
                const PhaseState z = PhaseState(Vec6(y.head<6>())) - nominal_phase(tau);
                y.segment<3>(6) = z.position + scn.sigma_nr * draw3();
                y.tail<3>() = z.velocity + scn.sigma_nv * draw3();
            }
            if (e.noise) eps = scn.actuator.control_noise_sigma * normal(rng);
            if (record(tau, e.output) > 0.5) {
                m.diverged = true;
                std::ostringstream msg;
                msg << "deviation exceeded 0.5 at t=" << tau;
                out.failure = msg.str();
                break;
            }
        }
    } catch (const IntegrationError& err) {
        m.diverged = true;
        out.failure = err.what();
    }

    const double end = rows.back().t;
    if (end > scn.t_i) {
        const RunMetrics q = compute_metrics(rows, scn.t_i, std::min(scn.t_i_prime, end),
                                             std::min(scn.t_f, end), scn.units);
        m.E_v = q.E_v;
        m.E_e = q.E_e;
        m.env_z1 = q.env_z1;
        m.env_z2 = q.env_z2;
        m.max_u = q.max_u;
        m.T_idle = q.T_idle;
    }
    if (opt.keep_series) out.series = std::move(rows);
    return out;
}

RunMetrics compute_metrics(const std::vector<SeriesRow>& s, double t_i, double t_i_prime,
                           double t_f, const UnitSystem& units) {
    if (s.empty()) throw RangeError("empty time series");
    const double tol = 1e-12 * std::max(1.0, std::abs(t_f));
    if (!(t_i <= t_i_prime && t_i_prime <= t_f))
        throw RangeError("metric windows must satisfy t_i <= t_i_prime <= t_f");
    if (t_i < s.front().t - tol || t_f > s.back().t + tol) {
        std::ostringstream msg;
        msg << "metric window [" << t_i << ", " << t_f << "] outside series [" << s.front().t << ", "
            << s.back().t << "]";
        throw RangeError(msg.str());
    }
    double ev = 0.0, ee = 0.0, idle = 0.0, umax = 0.0, env1 = 0.0, env2 = 0.0;
    auto lerp = [](double a, double b, double w) { return a + (b - a) * w; };
    for (std::size_t k = 0; k + 1 < s.size(); ++k) {
        const double t0 = s[k].t, t1 = s[k + 1].t;
        if (!(t1 > t0)) continue;
        const double lo = std::max(t0, t_i), hi = std::min(t1, t_f);
        if (!(hi > lo)) continue;
        const double a = s[k].u.norm(), b = s[k + 1].u.norm();
        const double ia = s[k].idle, ib = s[k + 1].idle;
        const double wl = (lo - t0) / (t1 - t0), wh = (hi - t0) / (t1 - t0);
        const double h = hi - lo;
        ev += 0.5 * h * (lerp(a, b, wl) + lerp(a, b, wh));
        ee += 0.5 * h * (lerp(a * a, b * b, wl) + lerp(a * a, b * b, wh));
        idle += 0.5 * h * (lerp(ia, ib, wl) + lerp(ia, ib, wh));
    }
    for (const SeriesRow& r : s) {
        if (r.t >= t_i - tol && r.t <= t_f + tol) umax = std::max(umax, r.u.norm());
        if (r.t >= t_i_prime - tol && r.t <= t_f + tol) {
            env1 = std::max(env1, r.z1.norm());
            env2 = std::max(env2, r.z2.norm());
        }
    }
    const double V = units.velocity_unit(), A = units.acceleration_unit(), T = units.time_unit;
    RunMetrics m;
    m.E_v = ev * V;
    m.E_e = ee * A * A * T * 1e6;
    m.env_z1 = env1 * units.length_unit / 1e3;
    m.env_z2 = env2 * V * 1e2;
    m.max_u = umax * A * 1e6;
    m.T_idle = idle * T / constants::seconds_per_day;
    return m;
}

CampaignReport aggregate(const std::vector<RunMetrics>& runs, std::uint64_t seed) {
    CampaignReport rep;
    rep.seed = seed;
    rep.runs = runs;
    std::vector<const RunMetrics*> ok;
    for (const RunMetrics& r : runs) {
        if (r.diverged)
            ++rep.diverged;
        else
            ok.push_back(&r);
    }
    auto stats = [&](double RunMetrics::*f) {
        MetricStats s;
        if (ok.empty()) {
            s.mean = s.std = std::numeric_limits<double>::quiet_NaN();
            return s;
        }
        double sum = 0.0;
        for (const RunMetrics* r : ok) sum += r->*f;
        s.mean = sum / ok.size();
        if (ok.size() > 1) {
            double ss = 0.0;
            for (const RunMetrics* r : ok) ss += (r->*f - s.mean) * (r->*f - s.mean);
            s.std = std::sqrt(ss / (ok.size() - 1));
        }
        return s;
    };
    rep.E_v = stats(&RunMetrics::E_v);
    rep.E_e = stats(&RunMetrics::E_e);
    rep.env_z1 = stats(&RunMetrics::env_z1);
    rep.env_z2 = stats(&RunMetrics::env_z2);
    rep.max_u = stats(&RunMetrics::max_u);
    rep.T_idle = stats(&RunMetrics::T_idle);
    return rep;
}

CampaignReport monte_carlo(const Scenario& scn) {
    std::vector<RunMetrics> runs;
    RunOptions opt;
    opt.keep_series = false;
    for (int i = 0; i < scn.config.runs; ++i)
        runs.push_back(run_scenario(scn, static_cast<std::uint64_t>(i), opt).metrics);
    return aggregate(runs, scn.config.seed);
}

void write_report(std::ostream& out, const CampaignReport& rep, const Scenario& scn) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << std::setprecision(10);
    out << "seed = " << rep.seed << '\n'
        << "runs = " << rep.runs.size() << '\n'
        << "diverged = " << rep.diverged << '\n'
        << "insertion_epoch_days = " << scn.units.nondim_to_days(scn.t_ins) << '\n'
        << "transition_iterations = " << scn.transition_iterations << '\n'
        << "transition_residual = " << scn.transition_residual << '\n';
    if (scn.certificate) {
        const GainCertificate& c = *scn.certificate;
        out << "certificate.beta_min = " << c.beta_min << '\n'
            << "certificate.u_sat_min_mps2 = " << c.u_sat_min * scn.units.acceleration_unit() << '\n';
    }
    const std::pair<const char*, const MetricStats*> stats[] = {
        {"E_v_mps", &rep.E_v},        {"E_e_mm2ps3", &rep.E_e},     {"env_z1_km", &rep.env_z1},
        {"env_z2_cmps", &rep.env_z2}, {"max_u_umps2", &rep.max_u}, {"T_idle_days", &rep.T_idle}};
    for (const auto& [name, s] : stats)
        out << "mean." << name << " = " << s->mean << '\n' << "std." << name << " = " << s->std << '\n';
    for (std::size_t i = 0; i < rep.runs.size(); ++i) {
        const RunMetrics& r = rep.runs[i];
        std::ostringstream key;
        key << "run." << std::setw(3) << std::setfill('0') << i << '.';
        const std::string k = key.str();
        out << k << "E_v_mps = " << r.E_v << '\n'
            << k << "E_e_mm2ps3 = " << r.E_e << '\n'
            << k << "env_z1_km = " << r.env_z1 << '\n'
            << k << "env_z2_cmps = " << r.env_z2 << '\n'
            << k << "max_u_umps2 = " << r.max_u << '\n'
            << k << "T_idle_days = " << r.T_idle << '\n'
            << k << "diverged = " << (r.diverged ? "true" : "false") << '\n'
            << k << "saturation_events = " << r.saturation_events << '\n'
            << k << "clamp_events = " << r.clamp_events << '\n';
    }
    out.flags(flags);
    out.precision(prec);
}

void write_series(std::ostream& out, const std::vector<SeriesRow>& series) {
    const auto flags = out.flags();
    const auto prec = out.precision();
    out << "# t z1x z1y z1z z2x z2y z2z ux uy uz beta idle_flag\n" << std::setprecision(12);
    for (const SeriesRow& r : series) {
        if (!r.output) continue;
        out << r.t;
        for (int i = 0; i < 3; ++i) out << ' ' << r.z1[i];
        for (int i = 0; i < 3; ++i) out << ' ' << r.z2[i];
        for (int i = 0; i < 3; ++i) out << ' ' << r.u[i];
        out << ' ' << r.beta << ' ' << (r.idle ? 1 : 0) << '\n';
    }
    out.flags(flags);
    out.precision(prec);
}

}  // namespace lpsk
