#include "lpsk/cli.hpp"
#include "lpsk/config.hpp"
#include "lpsk/stability.hpp"
#include "lpsk/units.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

using namespace lpsk;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("lpsk_test_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write_config() {
    ScenarioConfig c;
    c.model = EphemerisModel::Circular;
    c.revolutions = 2;
    c.duration_s = c.t_f_s = 3 * 86400.0;
    c.t_i_prime_s = 86400.0;
    c.measurement_interval_s = 86400.0;
    c.runs = 2;
    const fs::path p = scratch() / "short.ini";
    std::ofstream(p) << serialize_config(c);
    return p;
}

int run(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "lpsk");
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    return code;
}

}  // namespace

TEST_CASE("SHA-256 digests") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("orbit subcommand writes artifacts with a manifest") {
    const fs::path dir = scratch() / "orbit";
    CHECK(run({"orbit", "--family", "halo", "--out", dir.string()}) == exit_ok);
    CHECK(fs::exists(dir / "orbit.txt"));
    CHECK(fs::exists(dir / "orbit_samples.txt"));
    const std::string manifest = slurp(dir / "manifest.txt");
    CHECK(manifest.find("file orbit.txt sha256 " + sha256_file((dir / "orbit.txt").string())) !=
          std::string::npos);
    CHECK(manifest.find(dir.string()) == std::string::npos);
}

TEST_CASE("usage and configuration errors exit with code 2") {
    CHECK(run({"orbit", "--no-such-flag"}) == exit_config);
    CHECK(run({}) == exit_config);
    const fs::path bad = scratch() / "bad.ini";
    std::ofstream(bad) << "[timing]\nduration = 3 parsecs\n";
    CHECK(run({"montecarlo", "--config", bad.string(), "--out", (scratch() / "bad").string()}) ==
          exit_config);
    std::ofstream(bad) << "[nowhere]\nx = 1\n";
    CHECK(run({"montecarlo", "--config", bad.string(), "--out", (scratch() / "bad").string()}) ==
          exit_config);
}

TEST_CASE("gain map cells agree with single certificates") {
    const fs::path cfg = write_config();
    const fs::path dir = scratch() / "gainmap";
    REQUIRE(run({"gainmap", "--config", cfg.string(), "--k1-range", "0.3:0.9", "--k2-range", "0.5:2",
                 "--grid", "3x3", "--eta-mode", "fixed", "--eta", "0.5", "--z0", "1e-3", "--out",
                 dir.string()}) == exit_ok);
    std::istringstream rows(slurp(dir / "gainmap.txt"));
    std::string line;
    std::getline(rows, line);
    int n = 0;
    while (std::getline(rows, line)) {
        std::istringstream ls(line);
        double k1, k2, bc, eta, bmin, rho, theta, ell, phi, usat;
        ls >> k1 >> k2 >> bc >> eta >> bmin >> rho >> theta >> ell >> phi >> usat;
        ++n;
        if (n != 5) continue;
        // centre cell: certify the same pair directly
        CHECK(k1 == doctest::Approx(0.6));
        CHECK(k2 == doctest::Approx(1.25));
        const fs::path cdir = scratch() / "certify";
        REQUIRE(run({"certify", "--config", cfg.string(), "--k1", "0.6", "--k2", "1.25", "--eta", "0.5",
                     "--z0", "1e-3", "--out", cdir.string()}) == exit_ok);
        std::istringstream cert(slurp(cdir / "certificate.txt"));
        std::string key, eq;
        double value = 0, cert_usat = -1, cert_rho = -1;
        while (cert >> key >> eq >> value) {
            if (key == "u_sat_min") cert_usat = value;
            if (key == "rho") cert_rho = value;
        }
        CHECK(cert_usat == doctest::Approx(usat).epsilon(1e-9));
        CHECK(cert_rho == doctest::Approx(rho).epsilon(1e-9));
    }
    CHECK(n == 9);
}

TEST_CASE("monte carlo output is byte-identical across invocations") {
    const fs::path cfg = write_config();
    const fs::path a = scratch() / "mc_a", b = scratch() / "mc_b";
    REQUIRE(run({"montecarlo", "--config", cfg.string(), "--out", a.string()}) == exit_ok);
    REQUIRE(run({"montecarlo", "--config", cfg.string(), "--out", b.string()}) == exit_ok);
    for (const char* f : {"report.txt", "config.ini", "manifest.txt"}) CHECK(slurp(a / f) == slurp(b / f));
    const fs::path c = scratch() / "mc_c";
    REQUIRE(run({"montecarlo", "--config", cfg.string(), "--seed", "99", "--out", c.string()}) == exit_ok);
    CHECK(slurp(a / "report.txt") != slurp(c / "report.txt"));

    std::string text;
    CHECK(run({"report", "--in", a.string()}, &text) == exit_ok);
    CHECK(text.find("E_v") != std::string::npos);
    CHECK(fs::exists(a / "summary.txt"));
    // tampering is detected
    std::ofstream(a / "report.txt", std::ios::app) << "# edited\n";
    CHECK(run({"report", "--in", a.string(), "--out", (scratch() / "rep").string()}) == exit_config);
}

TEST_CASE("certify on the default halo scenario") {
    const fs::path dir = scratch() / "certify_default";
    REQUIRE(run({"certify", "--k1", "0.5", "--k2", "0.5", "--out", dir.string()}) == exit_ok);
    std::istringstream text(slurp(dir / "certificate.txt"));
    std::map<std::string, std::string> kv;
    std::string key, eq, value;
    while (text >> key >> eq >> value) kv[key] = value;
    CHECK(kv["feasible"] == "true");

    const Gains g{0.5, 0.5};
    const auto cc = convergence_constants(g, 1.0);
    CHECK(std::stod(kv["beta_crit"]) == doctest::Approx(beta_crit(g)).epsilon(1e-11));
    CHECK(std::stod(kv["rho"]) == doctest::Approx(cc.rho).epsilon(1e-11));
    CHECK(std::stod(kv["theta"]) == doctest::Approx(cc.theta).epsilon(1e-11));
    CHECK(std::stod(kv["ell"]) == doctest::Approx(gain_norm_ell(g)).epsilon(1e-11));

    const ScenarioConfig c;
    const UnitSystem u = UnitSystem::earth_moon();
    const double z0 = insertion_deviation_quantile(u.to_nondim(c.sigma_insertion_position_m, QuantityKind::Length),
                                                   u.to_nondim(c.sigma_insertion_velocity_mps, QuantityKind::Velocity),
                                                   c.z0_quantile);
    CHECK(std::stod(kv["z0_norm"]) == doctest::Approx(z0).epsilon(1e-9));
    const double usat = std::stod(kv["u_sat_min"]);
    CHECK(usat == doctest::Approx(cc.rho * gain_norm_ell(g) * z0 + std::stod(kv["phi"])).epsilon(1e-9));
    CHECK(std::stod(kv["phi"]) > 0.0);
}
