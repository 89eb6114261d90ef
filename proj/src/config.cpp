#include "lpsk/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

namespace lpsk {

EphemerisModel parse_ephemeris_model(const std::string& s) {
    if (s == "circular") return EphemerisModel::Circular;
    if (s == "bicircular") return EphemerisModel::Bicircular;
    if (s == "elliptic") return EphemerisModel::Elliptic;
    throw std::invalid_argument("unknown ephemeris model '" + s + "'");
}

const char* to_string(EphemerisModel m) {
    switch (m) {
        case EphemerisModel::Circular: return "circular";
        case EphemerisModel::Bicircular: return "bicircular";
        case EphemerisModel::Elliptic: return "elliptic";
    }
    return "?";
}

ControlLaw parse_control_law(const std::string& s) {
    if (s == "base") return ControlLaw::Base;
    if (s == "relieved") return ControlLaw::Relieved;
    throw std::invalid_argument("unknown control law '" + s + "'");
}

const char* to_string(ControlLaw law) {
    return law == ControlLaw::Base ? "base" : "relieved";
}

ApsisKind parse_apsis_kind(const std::string& s) {
    if (s == "apoapsis") return ApsisKind::Apoapsis;
    if (s == "periapsis") return ApsisKind::Periapsis;
    throw std::invalid_argument("unknown apsis kind '" + s + "'");
}

namespace {

const std::map<std::string, std::map<std::string, double>>& unit_table() {
    static const std::map<std::string, std::map<std::string, double>> t = {
        {"length", {{"m", 1.0}, {"km", 1e3}}},
        {"velocity", {{"m/s", 1.0}, {"km/s", 1e3}, {"cm/s", 1e-2}, {"mm/s", 1e-3}}},
        {"acceleration", {{"m/s^2", 1.0}, {"mm/s^2", 1e-3}, {"um/s^2", 1e-6}}},
        {"time", {{"s", 1.0}, {"min", 60.0}, {"h", 3600.0}, {"d", 86400.0}, {"day", 86400.0},
                  {"days", 86400.0}}},
        {"angle", {{"rad", 1.0}, {"deg", constants::pi / 180.0}}},
        {"mass", {{"kg", 1.0}}},
        {"area", {{"m^2", 1.0}}},
        {"fraction", {{"", 1.0}, {"%", 0.01}}},
        {"scalar", {{"", 1.0}}},
    };
    return t;
}

const char* si_unit(const std::string& dim) {
    static const std::map<std::string, const char*> si = {
        {"length", "m"}, {"velocity", "m/s"}, {"acceleration", "m/s^2"}, {"time", "s"},
        {"angle", "rad"}, {"mass", "kg"}, {"area", "m^2"}, {"fraction", ""}, {"scalar", ""}};
    return si.at(dim);
}

std::string fmt(double v) {
    std::ostringstream o;
    o.precision(17);
    o << v;
    return o.str();
}

std::string trim(std::string s) {
    s.erase(0, s.find_first_not_of(" \t\r"));
    const auto e = s.find_last_not_of(" \t\r");
    s.erase(e == std::string::npos ? 0 : e + 1);
    return s;
}

struct Field {
    const char* section;
    const char* key;
    const char* dim;  // unit dimension, or "int", "bool", "string", "enum"
    std::function<void(ScenarioConfig&, const std::string&)> set;
    std::function<std::optional<std::string>(const ScenarioConfig&)> get;
};

Field quantity(const char* sec, const char* key, const char* dim, double ScenarioConfig::*m) {
    return {sec, key, dim,
            [m, dim](ScenarioConfig& c, const std::string& v) { c.*m = parse_quantity(v, dim); },
            [m, dim](const ScenarioConfig& c) -> std::optional<std::string> {
                const std::string u = si_unit(dim);
                return fmt(c.*m) + (u.empty() ? "" : " " + u);
            }};
}

Field opt_quantity(const char* sec, const char* key, const char* dim,
                   std::optional<double> ScenarioConfig::*m) {
    return {sec, key, dim,
            [m, dim](ScenarioConfig& c, const std::string& v) { c.*m = parse_quantity(v, dim); },
            [m, dim](const ScenarioConfig& c) -> std::optional<std::string> {
                if (!(c.*m)) return std::nullopt;
                const std::string u = si_unit(dim);
                return fmt(*(c.*m)) + (u.empty() ? "" : " " + u);
            }};
}

Field integer(const char* sec, const char* key, int ScenarioConfig::*m) {
    return {sec, key, "int",
            [m](ScenarioConfig& c, const std::string& v) {
                std::size_t pos = 0;
                const int x = std::stoi(v, &pos);
                if (pos != v.size()) throw std::invalid_argument("expected an integer");
                c.*m = x;
            },
            [m](const ScenarioConfig& c) -> std::optional<std::string> { return std::to_string(c.*m); }};
}

Field boolean(const char* sec, const char* key, bool ScenarioConfig::*m) {
    return {sec, key, "bool",
            [m](ScenarioConfig& c, const std::string& v) {
                if (v == "true" || v == "yes" || v == "1") c.*m = true;
                else if (v == "false" || v == "no" || v == "0") c.*m = false;
                else throw std::invalid_argument("expected true or false");
            },
            [m](const ScenarioConfig& c) -> std::optional<std::string> {
                return std::string(c.*m ? "true" : "false");
            }};
}

Field text(const char* sec, const char* key, std::string ScenarioConfig::*m) {
    return {sec, key, "string", [m](ScenarioConfig& c, const std::string& v) { c.*m = v; },
            [m](const ScenarioConfig& c) -> std::optional<std::string> {
                if ((c.*m).empty()) return std::nullopt;
                return c.*m;
            }};
}

const std::vector<Field>& fields() {
    using C = ScenarioConfig;
    static const std::vector<Field> f = {
        quantity("system", "mass_ratio", "scalar", &C::mass_ratio_mu),
        quantity("system", "length_unit", "length", &C::length_unit_m),
        quantity("system", "sidereal_period", "time", &C::period_s),

        {"ephemeris", "model", "enum",
         [](C& c, const std::string& v) { c.model = parse_ephemeris_model(v); },
         [](const C& c) -> std::optional<std::string> { return std::string(to_string(c.model)); }},
        quantity("ephemeris", "sun_phase", "angle", &C::sun_phase_rad),
        quantity("ephemeris", "moon_eccentricity", "scalar", &C::moon_eccentricity),
        boolean("ephemeris", "jupiter", &C::jupiter),

        {"nominal", "family", "enum",
         [](C& c, const std::string& v) { c.family = parse_orbit_family(v); },
         [](const C& c) -> std::optional<std::string> { return std::string(to_string(c.family)); }},
        text("nominal", "seed_fixture", &C::seed_fixture),
        text("nominal", "file", &C::nominal_file),
        integer("nominal", "revolutions", &C::revolutions),
        integer("nominal", "patch_per_rev", &C::patch_per_rev),
        quantity("nominal", "continuity_tol", "scalar", &C::continuity_tol),
        integer("nominal", "max_iterations", &C::max_iterations),
        boolean("nominal", "pin_first_position", &C::pin_first_position),

        {"insertion", "apsis", "enum",
         [](C& c, const std::string& v) { c.insertion_apsis = parse_apsis_kind(v); },
         [](const C& c) -> std::optional<std::string> {
             return std::string(to_string(c.insertion_apsis));
         }},
        opt_quantity("insertion", "epoch", "time", &C::insertion_epoch_s),

        quantity("errors", "sigma_insertion_position", "length", &C::sigma_insertion_position_m),
        quantity("errors", "sigma_insertion_velocity", "velocity", &C::sigma_insertion_velocity_mps),
        quantity("errors", "sigma_navigation_position", "length", &C::sigma_navigation_position_m),
        quantity("errors", "sigma_navigation_velocity", "velocity", &C::sigma_navigation_velocity_mps),
        quantity("errors", "sigma_control", "fraction", &C::sigma_control),

        quantity("actuator", "u_min", "acceleration", &C::u_min_mps2),
        opt_quantity("actuator", "u_sat", "acceleration", &C::u_sat_mps2),
        quantity("actuator", "noise_resample_interval", "time", &C::noise_resample_s),

        {"control", "law", "enum", [](C& c, const std::string& v) { c.law = parse_control_law(v); },
         [](const C& c) -> std::optional<std::string> { return std::string(to_string(c.law)); }},
        quantity("control", "k1", "scalar", &C::k1),
        quantity("control", "k2", "scalar", &C::k2),
        opt_quantity("control", "beta_min", "scalar", &C::beta_min),
        opt_quantity("control", "eta", "scalar", &C::eta),
        quantity("control", "z0_quantile", "fraction", &C::z0_quantile),

        quantity("timing", "measurement_interval", "time", &C::measurement_interval_s),
        quantity("timing", "duration", "time", &C::duration_s),
        quantity("timing", "t_i", "time", &C::t_i_s),
        quantity("timing", "t_i_prime", "time", &C::t_i_prime_s),
        quantity("timing", "t_f", "time", &C::t_f_s),
        quantity("timing", "output_cadence", "scalar", &C::output_cadence),
        quantity("timing", "truth_tolerance", "scalar", &C::truth_tol),

        boolean("perturbations", "srp", &C::srp),
        quantity("perturbations", "spacecraft_mass", "mass", &C::spacecraft_mass_kg),
        quantity("perturbations", "srp_area", "area", &C::srp_area_m2),
        quantity("perturbations", "reflectivity", "scalar", &C::reflectivity),
        boolean("perturbations", "occultation", &C::occultation),

        integer("montecarlo", "runs", &C::runs),
        {"montecarlo", "seed", "int",
         [](C& c, const std::string& v) {
             std::size_t pos = 0;
             c.seed = std::stoull(v, &pos);
             if (pos != v.size()) throw std::invalid_argument("expected an unsigned integer");
         },
         [](const C& c) -> std::optional<std::string> { return std::to_string(c.seed); }},
    };
    return f;
}

}  // namespace

double parse_quantity(const std::string& raw, const std::string& dim) {
    const std::string s = trim(raw);
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("expected a number, got '" + s + "'");
    }
    const std::string unit = trim(s.substr(pos));
    const auto& table = unit_table().at(dim);
    const auto it = table.find(unit);
    if (it == table.end()) {
        std::string allowed;
        for (const auto& [u, _] : table) allowed += (allowed.empty() ? "" : ", ") + (u.empty() ? "<none>" : u);
        throw std::invalid_argument("unit '" + unit + "' is not a " + dim + " unit (allowed: " +
                                    allowed + ")");
    }
    if (!std::isfinite(v)) throw std::invalid_argument("value must be finite");
    return v * it->second;
}

UnitSystem ScenarioConfig::units() const {
    return UnitSystem(length_unit_m, period_s / (2.0 * constants::pi), mass_ratio_mu,
                      {1.0 - mass_ratio_mu, mass_ratio_mu, constants::sun_to_earth_moon_mass});
}

void ScenarioConfig::validate() const {
    auto req = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(what);
    };
    req(mass_ratio_mu > 0 && mass_ratio_mu < 0.5, "[system] mass_ratio must lie in (0, 0.5)");
    req(length_unit_m > 0 && period_s > 0, "[system] scales must be positive");
    req(moon_eccentricity >= 0 && moon_eccentricity < 1, "[ephemeris] moon_eccentricity must lie in [0, 1)");
    req(revolutions >= 1, "[nominal] revolutions must be >= 1");
    req(patch_per_rev >= 1, "[nominal] patch_per_rev must be >= 1");
    req(continuity_tol > 0, "[nominal] continuity_tol must be positive");
    req(max_iterations >= 1, "[nominal] max_iterations must be >= 1");
    req(sigma_insertion_position_m >= 0 && sigma_insertion_velocity_mps >= 0 &&
            sigma_navigation_position_m >= 0 && sigma_navigation_velocity_mps >= 0,
        "[errors] sigmas must be non-negative");
    req(sigma_control >= 0 && sigma_control < 1, "[errors] sigma_control must lie in [0, 1)");
    req(u_min_mps2 >= 0, "[actuator] u_min must be non-negative");
    req(!u_sat_mps2 || *u_sat_mps2 > u_min_mps2, "[actuator] u_sat must exceed u_min");
    req(noise_resample_s > 0, "[actuator] noise_resample_interval must be positive");
    req(k1 > 0 && k2 > 0, "[control] k1 and k2 must be positive");
    req(!beta_min || (*beta_min > 0 && *beta_min <= 1), "[control] beta_min must lie in (0, 1]");
    req(!eta || (*eta > 0 && *eta <= 1), "[control] eta must lie in (0, 1]");
    req(z0_quantile > 0 && z0_quantile < 1, "[control] z0_quantile must lie in (0, 1)");
    req(law == ControlLaw::Base || u_sat_mps2, "[control] relieved law requires [actuator] u_sat");
    req(measurement_interval_s > 0, "[timing] measurement_interval must be positive");
    req(duration_s > 0, "[timing] duration must be positive");
    req(0 <= t_i_s && t_i_s <= t_i_prime_s && t_i_prime_s <= t_f_s && t_f_s <= duration_s,
        "[timing] require 0 <= t_i <= t_i_prime <= t_f <= duration");
    req(output_cadence > 0, "[timing] output_cadence must be positive");
    req(truth_tol > 0 && truth_tol < 1e-2, "[timing] truth_tolerance must lie in (0, 1e-2)");
    req(spacecraft_mass_kg > 0, "[perturbations] spacecraft_mass must be positive");
    req(srp_area_m2 >= 0, "[perturbations] srp_area must be non-negative");
    req(reflectivity >= 1 && reflectivity <= 2, "[perturbations] reflectivity must lie in [1, 2]");
    req(!srp || model == EphemerisModel::Bicircular,
        "[perturbations] srp requires the bicircular model (a Sun)");
    req(!jupiter || model == EphemerisModel::Bicircular, "[ephemeris] jupiter requires the bicircular model");
    req(runs >= 1, "[montecarlo] runs must be >= 1");
}

ScenarioConfig parse_config(std::istream& in) {
    ScenarioConfig cfg;
    std::string line, section;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("malformed section header", lineno);
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& f : fields()) known = known || section == f.section;
            if (!known) throw ConfigError("unknown section [" + section + "]", lineno);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError("key '" + key + "' outside any section", lineno);
        const Field* field = nullptr;
        for (const auto& f : fields())
            if (section == f.section && key == f.key) field = &f;
        if (!field) throw ConfigError("unknown key '" + key + "' in [" + section + "]", lineno);
        const std::string full = section + "." + key;
        if (seen.count(full))
            throw ConfigError("duplicate key '" + full + "' (first on line " +
                              std::to_string(seen[full]) + ")", lineno);
        seen[full] = lineno;
        try {
            field->set(cfg, value);
        } catch (const std::exception& e) {
            throw ConfigError("[" + section + "] " + key + ": " + e.what(), lineno);
        }
    }
    cfg.validate();
    return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in);
}

std::string serialize_config(const ScenarioConfig& cfg) {
    std::ostringstream out;
    std::string section;
    for (const auto& f : fields()) {
        const auto v = f.get(cfg);
        if (!v) continue;
        if (section != f.section) {
            if (!section.empty()) out << '\n';
            section = f.section;
            out << '[' << section << "]\n";
        }
        out << f.key << " = " << *v << '\n';
    }
    return out.str();
}

}  // namespace lpsk
