#include "lpsk/cli.hpp"

#include "lpsk/config.hpp"
#include "lpsk/dynamics.hpp"
#include "lpsk/simulate.hpp"
#include "lpsk/stability.hpp"
#include "lpsk/trajectory.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <Eigen/Core>
#include <boost/version.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace lpsk {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return hex.str();
}

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

namespace {

constexpr const char* tool_version = "1.0.0";

class DivergenceError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Files of one invocation plus the manifest that lists them.
class Artifacts {
public:
    Artifacts(std::string dir, std::string subcommand, std::vector<std::string> args)
        : dir_(std::move(dir)), sub_(std::move(subcommand)), args_(std::move(args)) {}

    void add(const std::string& name, const std::string& content) { files_.emplace_back(name, content); }
    void note(const std::string& key, const std::string& value) { notes_.emplace_back(key, value); }
    void set_manifest_name(std::string name) { manifest_ = std::move(name); }

    void commit() const {
        fs::create_directories(dir_);
        std::ostringstream man;
        man << "tool = lpsk " << tool_version << '\n'
            << "subcommand = " << sub_ << '\n'
            << "arguments =";
        for (const auto& a : args_) man << ' ' << a;
        man << '\n'
            << "compiler = " << __VERSION__ << '\n'
            << "eigen = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
            << EIGEN_MINOR_VERSION << '\n'
            << "boost = " << BOOST_LIB_VERSION << '\n'
            << "cli11 = " << CLI11_VERSION << '\n';
        for (const auto& [k, v] : notes_) man << k << " = " << v << '\n';
        for (const auto& [name, content] : files_) {
            write(name, content);
            man << "file " << name << " sha256 " << sha256_hex(content) << '\n';
        }
        write(manifest_, man.str());
    }

private:
    void write(const std::string& name, const std::string& content) const {
        std::ofstream out(fs::path(dir_) / name, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + (fs::path(dir_) / name).string() + "'");
        out << content;
    }

    std::string dir_, sub_;
    std::string manifest_ = "manifest.txt";
    std::vector<std::string> args_;
    std::vector<std::pair<std::string, std::string>> files_;
    std::vector<std::pair<std::string, std::string>> notes_;
};

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    int verbosity = 0;
    bool allow_divergence = false;

    // orbit
    std::string family = "halo";
    std::string seed_fixture;
    std::optional<double> mu;
    // transition
    std::optional<int> revolutions, patch_per_rev, max_iterations;
    std::optional<double> tol;
    bool pin_first = false;
    // certify / optimize-eta / gainmap
    std::optional<double> k1, k2, eta, beta_min, z0_quantile, z0;
    std::string k1_range = "0.1:2", k2_range = "0.1:2", grid = "3x3", eta_mode = "fixed";
    bool log_spacing = false;
    // simulate / montecarlo
    std::optional<int> runs;
    std::uint64_t run_index = 0;
    // report
    std::string in;
};

std::string fmt(double v, int prec = 12) {
    std::ostringstream o;
    o << std::setprecision(prec) << v;
    return o.str();
}

ScenarioConfig load_config(const Options& o) {
    ScenarioConfig c = o.config.empty() ? ScenarioConfig{} : parse_config_file(o.config);
    if (o.seed) c.seed = *o.seed;
    if (o.runs) c.runs = *o.runs;
    if (o.revolutions) c.revolutions = *o.revolutions;
    if (o.patch_per_rev) c.patch_per_rev = *o.patch_per_rev;
    if (o.max_iterations) c.max_iterations = *o.max_iterations;
    if (o.tol) c.continuity_tol = *o.tol;
    if (o.pin_first) c.pin_first_position = true;
    if (o.k1) c.k1 = *o.k1;
    if (o.k2) c.k2 = *o.k2;
    if (o.eta) c.eta = *o.eta;
    if (o.beta_min) c.beta_min = *o.beta_min;
    if (o.z0_quantile) c.z0_quantile = *o.z0_quantile;
    c.validate();
    return c;
}

std::pair<double, double> parse_range(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw ConfigError("range '" + s + "' must be lo:hi");
    const double lo = std::stod(s.substr(0, colon)), hi = std::stod(s.substr(colon + 1));
    if (!(lo > 0.0 && hi >= lo)) throw ConfigError("range '" + s + "' must satisfy 0 < lo <= hi");
    return {lo, hi};
}

std::string certificate_text(const GainCertificate& c, const UnitSystem& u) {
    std::ostringstream o;
    o << std::setprecision(12) << "k1 = " << c.gains.k1 << '\n'
      << "k2 = " << c.gains.k2 << '\n'
      << "beta_crit = " << c.beta_crit << '\n'
      << "eta = " << c.eta << '\n'
      << "beta_min = " << c.beta_min << '\n'
      << "rho = " << c.rho << '\n'
      << "theta = " << c.theta << '\n'
      << "ell = " << c.ell << '\n'
      << "r = " << c.r << '\n'
      << "z0_norm = " << c.z0_norm << '\n'
      << "phi = " << c.phi << '\n'
      << "phi_time = " << c.phi_time << '\n'
      << "u_sat_min = " << c.u_sat_min << '\n'
      << "u_sat_min_mps2 = " << c.u_sat_min * u.acceleration_unit() << '\n'
      << "feasible = " << (c.feasible ? "true" : "false") << '\n';
    return o.str();
}

/// Mission-window certification context shared by certify, optimize-eta and gainmap.
struct CertContext {
    Scenario scn;
    double z0 = 0.0;
    std::unique_ptr<PhiEvaluator> phi;
};

CertContext cert_context(const Options& o, std::ostream& log) {
    ScenarioConfig c = load_config(o);
    c.law = ControlLaw::Base;  // certification is done here, not by prepare_scenario
    CertContext ctx{prepare_scenario(c), 0.0, nullptr};
    const Scenario& s = ctx.scn;
    ctx.z0 = o.z0 ? *o.z0 : insertion_deviation_quantile(s.sigma_ir, s.sigma_iv, c.z0_quantile);
    ctx.phi = std::make_unique<PhiEvaluator>(s.nominal, s.eph, s.t_ins, s.t_ins + s.duration);
    if (o.verbosity > 0)
        log << "certification window [" << s.t_ins << ", " << s.t_ins + s.duration
            << "], |z0| = " << ctx.z0 << ", closest approach " << ctx.phi->closest_approach() << '\n';
    return ctx;
}

int cmd_orbit(const Options& o, Artifacts& art, std::ostream& out) {
    ScenarioConfig c;
    c.family = parse_orbit_family(o.family);
    c.seed_fixture = o.seed_fixture;
    const OrbitSeed seed = scenario_seed(c);
    const double mu = o.mu ? *o.mu : seed.mu;
    const PeriodicOrbit orb = correct_periodic_orbit(seed.state, mu, c.family, seed.period);
    std::ostringstream t;
    t << std::setprecision(17) << "family = " << to_string(orb.family) << '\n'
      << "mu = " << mu << '\n'
      << "x = " << orb.state.position.x() << "\ny = " << orb.state.position.y()
      << "\nz = " << orb.state.position.z() << '\n'
      << "vx = " << orb.state.velocity.x() << "\nvy = " << orb.state.velocity.y()
      << "\nvz = " << orb.state.velocity.z() << '\n'
      << "period = " << orb.period << '\n'
      << "jacobi = " << jacobi_constant(orb.state, mu) << '\n'
      << "iterations = " << orb.iterations << '\n';
    art.add("orbit.txt", t.str());

    std::ostringstream samples;
    samples << "# t x y z vx vy vz\n" << std::setprecision(15);
    IntegratorSpec spec;
    PhaseState x = orb.state;
    const int n = 400;
    for (int k = 0; k <= n; ++k) {
        samples << k * orb.period / n;
        for (int i = 0; i < 6; ++i) samples << ' ' << x.vec()[i];
        samples << '\n';
        if (k < n) x = cr3bp_propagate(x, mu, orb.period / n, spec);
    }
    art.add("orbit_samples.txt", samples.str());
    out << "period " << fmt(orb.period) << ", jacobi " << fmt(jacobi_constant(orb.state, mu)) << '\n';
    return exit_ok;
}

int cmd_transition(const Options& o, Artifacts& art, std::ostream& out) {
    const ScenarioConfig c = load_config(o);
    const UnitSystem u = c.units();
    const EphemerisSet eph = build_ephemeris(c, u, -1.0, scenario_ephemeris_end(c));
    const TransitionResult tr = build_transition(c, eph);
    std::ostringstream nominal;
    tr.nominal.write(nominal, u);
    art.add("nominal.txt", nominal.str());
    art.add("config.ini", serialize_config(c));
    std::ostringstream t;
    t << std::setprecision(12) << "iterations = " << tr.iterations << '\n'
      << "residual = " << tr.residual << '\n'
      << "residual_history =";
    for (double r : tr.residual_history) t << ' ' << r;
    t << "\npatches = " << tr.patches.size() << '\n';
    art.add("transition.txt", t.str());
    std::ostringstream p;
    p << "# t x y z vx vy vz\n" << std::setprecision(17);
    for (std::size_t i = 0; i < tr.patches.size(); ++i) {
        p << tr.epochs[i];
        for (int k = 0; k < 6; ++k) p << ' ' << tr.patches[i].vec()[k];
        p << '\n';
    }
    art.add("patches.txt", p.str());
    out << "converged in " << tr.iterations << " iterations, residual " << fmt(tr.residual, 4) << '\n';
    return exit_ok;
}

int cmd_certify(const Options& o, Artifacts& art, std::ostream& out, std::ostream& err) {
    CertContext ctx = cert_context(o, err);
    const ScenarioConfig& c = ctx.scn.config;
    GainCertificate cert;
    if (c.beta_min)
        cert = usat_min(ctx.scn.gains, *c.beta_min, ctx.z0, *ctx.phi);
    else
        cert = usat_min(ctx.scn.gains, beta_min_from_eta(ctx.scn.gains, c.eta.value_or(1.0)), ctx.z0,
                        *ctx.phi);
    art.add("certificate.txt", certificate_text(cert, ctx.scn.units));
    art.add("config.ini", serialize_config(c));
    out << (cert.feasible ? "feasible" : "infeasible") << ", u_sat_min "
        << fmt(cert.u_sat_min * ctx.scn.units.acceleration_unit(), 6) << " m/s^2\n";
    return cert.feasible ? exit_ok : exit_infeasible;
}

int cmd_optimize_eta(const Options& o, Artifacts& art, std::ostream& out, std::ostream& err) {
    CertContext ctx = cert_context(o, err);
    const EtaOptimum best = optimize_eta(ctx.scn.gains, ctx.z0, *ctx.phi);
    art.add("certificate.txt", certificate_text(best.certificate, ctx.scn.units));
    art.add("config.ini", serialize_config(ctx.scn.config));
    out << "eta " << fmt(best.eta, 6) << ", u_sat_min "
        << fmt(best.certificate.u_sat_min * ctx.scn.units.acceleration_unit(), 6) << " m/s^2\n";
    return best.certificate.feasible ? exit_ok : exit_infeasible;
}

int cmd_gainmap(const Options& o, Artifacts& art, std::ostream& out, std::ostream& err) {
    const auto [k1lo, k1hi] = parse_range(o.k1_range);
    const auto [k2lo, k2hi] = parse_range(o.k2_range);
    const auto x = o.grid.find('x');
    if (x == std::string::npos) throw ConfigError("grid '" + o.grid + "' must be NxM");
    const int n = std::stoi(o.grid.substr(0, x)), m = std::stoi(o.grid.substr(x + 1));
    if (n < 1 || m < 1) throw ConfigError("grid dimensions must be positive");
    EtaMode mode;
    if (o.eta_mode == "fixed")
        mode = EtaMode::Fixed;
    else if (o.eta_mode == "optimized")
        mode = EtaMode::Optimized;
    else
        throw ConfigError("eta mode must be 'fixed' or 'optimized'");
    CertContext ctx = cert_context(o, err);
    auto grid = [&](double lo, double hi, int k) {
        return o.log_spacing ? log_grid(lo, hi, k) : linear_grid(lo, hi, k);
    };
    const auto cells = gain_map(grid(k1lo, k1hi, n), grid(k2lo, k2hi, m), ctx.z0, *ctx.phi, mode,
                                ctx.scn.config.eta.value_or(1.0));
    std::ostringstream t;
    write_gain_map(t, cells);
    art.add("gainmap.txt", t.str());
    art.add("config.ini", serialize_config(ctx.scn.config));
    int feasible = 0;
    for (const auto& c : cells) feasible += c.feasible;
    out << cells.size() << " cells, " << feasible << " feasible\n";
    return exit_ok;
}

int cmd_simulate(const Options& o, Artifacts& art, std::ostream& out) {
    const ScenarioConfig c = load_config(o);
    const Scenario scn = prepare_scenario(c);
    const RunResult r = run_scenario(scn, o.run_index);
    std::ostringstream series;
    write_series(series, r.series);
    art.add("series.txt", series.str());
    std::ostringstream report;
    write_report(report, aggregate({r.metrics}, c.seed), scn);
    art.add("metrics.txt", report.str());
    art.add("config.ini", serialize_config(c));
    art.note("seed", std::to_string(c.seed));
    art.note("run_index", std::to_string(o.run_index));
    out << "E_v " << fmt(r.metrics.E_v, 6) << " m/s, max_u " << fmt(r.metrics.max_u, 6) << " um/s^2"
        << (r.metrics.diverged ? ", DIVERGED: " + r.failure : std::string()) << '\n';
    if (r.metrics.diverged && !o.allow_divergence) {
        art.commit();
        throw DivergenceError("run diverged: " + r.failure);
    }
    return exit_ok;
}

int cmd_montecarlo(const Options& o, Artifacts& art, std::ostream& out, std::ostream& err) {
    const ScenarioConfig c = load_config(o);
    const Scenario scn = prepare_scenario(c);
    if (o.verbosity > 0)
        err << "nominal ready (" << scn.transition_iterations << " iterations), insertion t = " << scn.t_ins
            << '\n';
    const CampaignReport rep = monte_carlo(scn);
    std::ostringstream report;
    write_report(report, rep, scn);
    art.add("report.txt", report.str());
    art.add("config.ini", serialize_config(c));
    art.note("seed", std::to_string(c.seed));
    out << rep.runs.size() << " runs, " << rep.diverged << " diverged, mean E_v " << fmt(rep.E_v.mean, 6)
        << " m/s, mean max_u " << fmt(rep.max_u.mean, 6) << " um/s^2\n";
    if (rep.diverged > 0 && !o.allow_divergence) {
        art.commit();
        throw DivergenceError(std::to_string(rep.diverged) + " run(s) diverged");
    }
    return exit_ok;
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read '" + path.string() + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

int cmd_report(const Options& o, Artifacts& art, std::ostream& out) {
    const fs::path dir(o.in);
    // integrity check against the manifest
    std::ifstream man(dir / "manifest.txt");
    if (!man) throw ConfigError("no manifest.txt in '" + o.in + "'");
    std::string line;
    int checked = 0;
    while (std::getline(man, line)) {
        std::istringstream ls(line);
        std::string tag, name, algo, hash;
        if (!(ls >> tag >> name >> algo >> hash) || tag != "file") continue;
        if (sha256_file((dir / name).string()) != hash)
            throw ConfigError("artifact '" + name + "' does not match its manifest hash");
        ++checked;
    }
    fs::path src = dir / "report.txt";
    if (!fs::exists(src)) src = dir / "metrics.txt";
    const auto kv = read_key_values(src);
    std::ostringstream t;
    t << "# metric unit mean std\n";
    const std::pair<const char*, const char*> metrics[] = {
        {"E_v", "mps"},         {"E_e", "mm2ps3"},   {"env_z1", "km"},
        {"env_z2", "cmps"},     {"max_u", "umps2"},  {"T_idle", "days"}};
    for (const auto& [name, unit] : metrics) {
        const std::string key = std::string(name) + "_" + unit;
        const auto m = kv.find("mean." + key), s = kv.find("std." + key);
        if (m == kv.end() || s == kv.end()) throw ConfigError("report lacks '" + key + "'");
        t << name << ' ' << unit << ' ' << m->second << ' ' << s->second << '\n';
    }
    art.add("summary.txt", t.str());
    out << "verified " << checked << " artifact(s)\n" << t.str();
    return exit_ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Station-keeping of libration-point orbits: design, certification and simulation", "lpsk"};
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* s) {
        s->add_option("--config", o.config, "scenario configuration file")->check(CLI::ExistingFile);
        s->add_option("--out", o.out, "output directory");
        s->add_option("--seed", o.seed, "base random seed (overrides the config)");
        s->add_flag("-v,--verbose", o.verbosity, "progress messages on stderr");
    };
    auto* orbit = app.add_subcommand("orbit", "correct a periodic orbit of the restricted three-body problem");
    common(orbit);
    orbit->add_option("--family", o.family, "halo or lyapunov");
    orbit->add_option("--seed-fixture", o.seed_fixture, "initial guess file")->check(CLI::ExistingFile);
    orbit->add_option("--mu", o.mu, "mass ratio");

    auto* transition = app.add_subcommand("transition", "multiple shooting onto the ephemeris model");
    common(transition);
    transition->add_option("--revolutions", o.revolutions);
    transition->add_option("--patch-per-rev", o.patch_per_rev);
    transition->add_option("--tol", o.tol, "continuity tolerance");
    transition->add_option("--max-iterations", o.max_iterations);
    transition->add_flag("--pin-first-position", o.pin_first, "hold the first patch position fixed");

    auto gains = [&](CLI::App* s) {
        s->add_option("--k1", o.k1);
        s->add_option("--k2", o.k2);
        s->add_option("--z0-quantile", o.z0_quantile, "quantile of the insertion deviation norm");
        s->add_option("--z0", o.z0, "explicit nondimensional deviation budget");
    };
    auto* certify = app.add_subcommand("certify", "certify a gain pair for the relieved law");
    common(certify);
    gains(certify);
    auto* eta_opt = certify->add_option("--eta", o.eta);
    certify->add_option("--beta-min", o.beta_min)->excludes(eta_opt);

    auto* optimize = app.add_subcommand("optimize-eta", "minimize u_sat,min over eta");
    common(optimize);
    gains(optimize);

    auto* gainmap = app.add_subcommand("gainmap", "certificates over a (k1, k2) grid");
    common(gainmap);
    gainmap->add_option("--k1-range", o.k1_range, "lo:hi");
    gainmap->add_option("--k2-range", o.k2_range, "lo:hi");
    gainmap->add_option("--grid", o.grid, "NxM");
    gainmap->add_option("--eta-mode", o.eta_mode, "fixed or optimized");
    gainmap->add_option("--eta", o.eta);
    gainmap->add_option("--z0", o.z0);
    gainmap->add_flag("--log", o.log_spacing, "logarithmic grid spacing");

    auto* simulate = app.add_subcommand("simulate", "one closed-loop run with its time series");
    common(simulate);
    simulate->add_option("--run", o.run_index, "run index for the seed derivation");
    simulate->add_flag("--allow-divergence", o.allow_divergence);

    auto* montecarlo = app.add_subcommand("montecarlo", "Monte Carlo campaign");
    common(montecarlo);
    montecarlo->add_option("--runs", o.runs);
    montecarlo->add_flag("--allow-divergence", o.allow_divergence);

    auto* report = app.add_subcommand("report", "verify a result directory and tabulate its statistics");
    report->add_option("--in", o.in, "result directory")->required()->check(CLI::ExistingDirectory);
    report->add_option("--out", o.out, "output directory (defaults to --in)");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub == report && report->count("--out") == 0) o.out = o.in;
    // recorded arguments exclude the output location so manifests compare across directories
    std::vector<std::string> recorded;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--out") {
            ++i;
            continue;
        }
        recorded.push_back(args[i]);
    }
    Artifacts art(o.out, sub->get_name(), recorded);
    // report may write into the directory it verifies; keep that directory's manifest intact
    if (sub == report) art.set_manifest_name("summary_manifest.txt");
    try {
        int code = exit_ok;
        if (sub == orbit) code = cmd_orbit(o, art, out);
        else if (sub == transition) code = cmd_transition(o, art, out);
        else if (sub == certify) code = cmd_certify(o, art, out, err);
        else if (sub == optimize) code = cmd_optimize_eta(o, art, out, err);
        else if (sub == gainmap) code = cmd_gainmap(o, art, out, err);
        else if (sub == simulate) code = cmd_simulate(o, art, out);
        else if (sub == montecarlo) code = cmd_montecarlo(o, art, out, err);
        else if (sub == report) code = cmd_report(o, art, out);
        art.commit();
        return code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const CertificationError& e) {
        err << "certification failed: " << e.what() << '\n';
        return exit_infeasible;
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << '\n';
        return exit_divergence;
    } catch (const std::invalid_argument& e) {
        err << "invalid input: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

}  // namespace lpsk
