#include "lpsk/ephemeris.hpp"

#include "lpsk/nominal.hpp"
#include "lpsk/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace lpsk {

namespace {

Mat3 orbit_orientation(double inclination, double node, double arg_periapsis) {
    return (Eigen::AngleAxisd(node, Vec3::UnitZ()) * Eigen::AngleAxisd(inclination, Vec3::UnitX()) *
            Eigen::AngleAxisd(arg_periapsis, Vec3::UnitZ()))
        .toRotationMatrix();
}

}  // namespace

// ----------------------------------------------------------------------------
// Providers
// ----------------------------------------------------------------------------

CircularProvider::CircularProvider(double radius, double rate, double phase, double inclination,
                                   double node)
    : radius_(radius), rate_(rate), phase_(phase), orient_(orbit_orientation(inclination, node, 0.0)) {
    if (!(radius > 0.0)) throw std::invalid_argument("circular provider radius must be positive");
}

PhaseState CircularProvider::state(double t) const {
    const double ang = phase_ + rate_ * t;
    const double c = std::cos(ang), s = std::sin(ang);
    const Vec3 r(radius_ * c, radius_ * s, 0.0);
    const Vec3 v(-radius_ * rate_ * s, radius_ * rate_ * c, 0.0);
    return {orient_ * r, orient_ * v};
}

Vec3 CircularProvider::acceleration(double t) const {
    return -rate_ * rate_ * state(t).position;
}

KeplerProvider::KeplerProvider(const Elements& el, double mu_sum)
    : el_(el), mu_(mu_sum), orient_(orbit_orientation(el.inclination, el.node, el.arg_periapsis)) {
    if (!(el.a > 0.0) || el.e < 0.0 || el.e >= 1.0)
        throw std::invalid_argument("Kepler provider requires a > 0 and 0 <= e < 1");
    if (!(mu_sum > 0.0)) throw std::invalid_argument("Kepler provider requires mu > 0");
    n_ = std::sqrt(mu_ / (el.a * el.a * el.a));
}

double KeplerProvider::solve_kepler(double mean_anomaly, double e) {
    const double two_pi = 2.0 * constants::pi;
    double m = std::fmod(mean_anomaly, two_pi);
    if (m < 0.0) m += two_pi;
    double ecc = e < 0.8 ? m : constants::pi;
    for (int i = 0; i < 50; ++i) {
        const double f = ecc - e * std::sin(ecc) - m;
        const double step = f / (1.0 - e * std::cos(ecc));
        ecc -= step;
        if (std::abs(step) < 1e-15 && std::abs(f) < 1e-13) break;
    }
    // restore the winding removed by fmod
    return ecc + (mean_anomaly - m);
}

PhaseState KeplerProvider::state(double t) const {
    const double m = el_.mean_anomaly + n_ * (t - el_.epoch);
    const double ecc = solve_kepler(m, el_.e);
    const double c = std::cos(ecc), s = std::sin(ecc);
    const double b = std::sqrt(1.0 - el_.e * el_.e);
    const Vec3 r(el_.a * (c - el_.e), el_.a * b * s, 0.0);
    const double edot = n_ / (1.0 - el_.e * c);
    const Vec3 v(-el_.a * s * edot, el_.a * b * c * edot, 0.0);
    return {orient_ * r, orient_ * v};
}

Vec3 KeplerProvider::acceleration(double t) const {
    const Vec3 r = state(t).position;
    return -mu_ * r / std::pow(r.norm(), 3);
}

TabulatedProvider::TabulatedProvider(std::vector<double> epochs, std::vector<PhaseState> states)
    : epochs_(std::move(epochs)), states_(std::move(states)) {
    if (epochs_.size() != states_.size())
        throw std::invalid_argument("tabulated provider: epoch/state count mismatch");
    if (epochs_.size() < 4) throw std::invalid_argument("tabulated provider needs at least 4 nodes");
    for (std::size_t i = 1; i < epochs_.size(); ++i)
        if (!(epochs_[i] > epochs_[i - 1]))
            throw std::invalid_argument("tabulated provider epochs must be strictly increasing");
}

std::size_t TabulatedProvider::locate(double t) const {
    if (t < epochs_.front() || t > epochs_.back()) {
        std::ostringstream msg;
        msg << "tabulated ephemeris queried at t=" << t << " outside [" << epochs_.front() << ", "
            << epochs_.back() << "]";
        throw RangeError(msg.str());
    }
    auto it = std::upper_bound(epochs_.begin(), epochs_.end(), t);
    std::size_t i = static_cast<std::size_t>(std::distance(epochs_.begin(), it));
    return std::min(i == 0 ? 0 : i - 1, epochs_.size() - 2);
}

PhaseState TabulatedProvider::state(double t) const {
    const std::size_t i = locate(t);
    const double h = epochs_[i + 1] - epochs_[i];
    const double s = (t - epochs_[i]) / h;
    const PhaseState& a = states_[i];
    const PhaseState& b = states_[i + 1];
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1;
    const double d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
    PhaseState out;
    out.position = h00 * a.position + h10 * h * a.velocity + h01 * b.position + h11 * h * b.velocity;
    out.velocity = (d00 * a.position + d01 * b.position) / h + d10 * a.velocity + d11 * b.velocity;
    return out;
}

Vec3 TabulatedProvider::acceleration(double t) const {
    const std::size_t i = locate(t);
    const double h = epochs_[i + 1] - epochs_[i];
    const double s = (t - epochs_[i]) / h;
    const PhaseState& a = states_[i];
    const PhaseState& b = states_[i + 1];
    const double e00 = 12 * s - 6, e10 = 6 * s - 4, e01 = -12 * s + 6, e11 = 6 * s - 2;
    return (e00 * a.position + e01 * b.position) / (h * h) + (e10 * a.velocity + e11 * b.velocity) / h;
}

std::pair<double, double> ComposedProvider::span() const {
    const auto a = parent_->span();
    const auto b = child_->span();
    return {std::max(a.first, b.first), std::min(a.second, b.second)};
}

// ----------------------------------------------------------------------------
// EphemerisSet
// ----------------------------------------------------------------------------

EphemerisSet::EphemerisSet(std::vector<Body> bodies, double t_start, double t_end)
    : bodies_(std::move(bodies)), t0_(t_start), t1_(t_end) {
    if (bodies_.empty()) throw std::invalid_argument("ephemeris set needs at least one body");
    if (!(t_end >= t_start)) throw std::invalid_argument("ephemeris span is empty");
    for (const Body& b : bodies_) {
        if (!b.provider) throw std::invalid_argument("body '" + b.name + "' has no provider");
        if (b.mu < 0.0) throw std::invalid_argument("body '" + b.name + "' has negative mu");
        const auto s = b.provider->span();
        if (s.first > t_start || s.second < t_end)
            throw std::invalid_argument("provider of '" + b.name + "' does not cover the span");
    }
    if (!dynamic_cast<const FixedProvider*>(bodies_.front().provider.get()))
        throw std::invalid_argument("body 0 must be the fixed frame center");
}

const Body& EphemerisSet::body(std::size_t j) const {
    if (j >= bodies_.size()) throw std::out_of_range("body index out of range");
    return bodies_[j];
}

std::optional<std::size_t> EphemerisSet::find(const std::string& name) const {
    for (std::size_t j = 0; j < bodies_.size(); ++j)
        if (bodies_[j].name == name) return j;
    return std::nullopt;
}

void EphemerisSet::check(std::size_t j, double t) const {
    if (j >= bodies_.size()) throw std::out_of_range("body index out of range");
    if (!covers(t)) {
        std::ostringstream msg;
        msg << "ephemeris queried at t=" << t << " outside [" << t0_ << ", " << t1_ << "]";
        throw RangeError(msg.str());
    }
}

PhaseState EphemerisSet::body_state(std::size_t j, double t) const {
    check(j, t);
    return bodies_[j].provider->state(t);
}

Vec3 EphemerisSet::body_acceleration(std::size_t j, double t) const {
    check(j, t);
    return bodies_[j].provider->acceleration(t);
}

EphemerisSet EphemerisSet::with_body(Body body) const {
    auto bodies = bodies_;
    bodies.push_back(std::move(body));
    return EphemerisSet(std::move(bodies), t0_, t1_);
}

EphemerisSet EphemerisSet::with_span(double t_start, double t_end) const {
    return EphemerisSet(bodies_, t_start, t_end);
}

// ----------------------------------------------------------------------------
// Standard configurations
// ----------------------------------------------------------------------------

Body center_body(const std::string& name, double mu, double radius) {
    return {name, mu, radius, std::make_shared<FixedProvider>()};
}

EphemerisSet earth_moon_circular(const UnitSystem& units, double t_start, double t_end) {
    const double mu = units.mass_ratio_mu;
    const double lu = units.length_unit;
    std::vector<Body> bodies;
    bodies.push_back(center_body("earth", 1.0 - mu, constants::earth_radius_m / lu));
    bodies.push_back({"moon", mu, constants::moon_radius_m / lu,
                      std::make_shared<CircularProvider>(1.0, 1.0)});
    return EphemerisSet(std::move(bodies), t_start, t_end);
}

EphemerisSet earth_moon_sun_bicircular(const UnitSystem& units, double t_start, double t_end,
                                       double sun_phase) {
    auto eph = earth_moon_circular(units, t_start, t_end);
    const double a = constants::astronomical_unit_m / units.length_unit;
    const double mu_sun = constants::sun_to_earth_moon_mass;
    const double rate = std::sqrt((mu_sun + 1.0) / (a * a * a));
    return eph.with_body({"sun", mu_sun, constants::sun_radius_m / units.length_unit,
                          std::make_shared<CircularProvider>(a, rate, sun_phase)});
}

EphemerisSet earth_moon_elliptic(const UnitSystem& units, double t_start, double t_end,
                                 double eccentricity, double inclination) {
    const double mu = units.mass_ratio_mu;
    const double lu = units.length_unit;
    KeplerProvider::Elements el;
    el.e = eccentricity;
    el.inclination = inclination;
    std::vector<Body> bodies;
    bodies.push_back(center_body("earth", 1.0 - mu, constants::earth_radius_m / lu));
    bodies.push_back({"moon", mu, constants::moon_radius_m / lu,
                      std::make_shared<KeplerProvider>(el, 1.0)});
    return EphemerisSet(std::move(bodies), t_start, t_end);
}

Body jupiter_about_sun(const UnitSystem& units, const EphemerisSet& eph, double phase) {
    const auto sun = eph.find("sun");
    if (!sun) throw std::invalid_argument("jupiter_about_sun requires a body named 'sun'");
    const double a = 5.2044 * constants::astronomical_unit_m / units.length_unit;
    const double mu_sun = eph.body(*sun).mu;
    const double rate = std::sqrt(mu_sun / (a * a * a));
    return {"jupiter", constants::jupiter_to_earth_moon_mass, 6.9911e7 / units.length_unit,
            std::make_shared<ComposedProvider>(eph.body(*sun).provider,
                                               std::make_shared<CircularProvider>(a, rate, phase))};
}

// ----------------------------------------------------------------------------
// Tabulated files
// ----------------------------------------------------------------------------

Body read_tabulated_body(std::istream& in, double radius) {
    std::string line;
    std::string name;
    double mu = -1.0;
    std::vector<double> epochs;
    std::vector<PhaseState> states;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (line[line.find_first_not_of(" \t")] == '#') {
            std::istringstream hs(line.substr(line.find('#') + 1));
            std::string k1, k2;
            std::string n;
            double m;
            if (hs >> k1 >> n >> k2 >> m && k1 == "body" && k2 == "mu") {
                name = n;
                mu = m;
            }
            continue;
        }
        std::istringstream ls(line);
        double t;
        Vec6 x;
        if (!(ls >> t >> x[0] >> x[1] >> x[2] >> x[3] >> x[4] >> x[5]))
            throw ConfigError("tabulated ephemeris: malformed row", lineno);
        epochs.push_back(t);
        states.emplace_back(x);
    }
    if (name.empty() || mu < 0.0)
        throw ConfigError("tabulated ephemeris: missing '# body <name> mu <value>' header");
    return {name, mu, radius, std::make_shared<TabulatedProvider>(std::move(epochs), std::move(states))};
}

Body read_tabulated_body_file(const std::string& path, double radius) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tabulated ephemeris '" + path + "'");
    return read_tabulated_body(in, radius);
}

void write_tabulated_body(std::ostream& out, const std::string& name, double mu,
                          const std::vector<double>& epochs, const std::vector<PhaseState>& states) {
    out << "# body " << name << " mu " << std::setprecision(17) << mu << "\n";
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        const Vec6 x = states[i].vec();
        out << epochs[i];
        for (int k = 0; k < 6; ++k) out << ' ' << x[k];
        out << '\n';
    }
}

std::shared_ptr<TabulatedProvider> tabulate(const BodyProvider& provider, double t_start,
                                            double t_end, double spacing) {
    const auto n = static_cast<std::size_t>(std::ceil((t_end - t_start) / spacing - 1e-9));
    std::vector<double> epochs;
    std::vector<PhaseState> states;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = i == n ? t_end : t_start + static_cast<double>(i) * spacing;
        epochs.push_back(t);
        states.push_back(provider.state(t));
    }
    return std::make_shared<TabulatedProvider>(std::move(epochs), std::move(states));
}

// ----------------------------------------------------------------------------
// Geometry relative to the nominal
// ----------------------------------------------------------------------------

Vec3 relative_body_vector(const EphemerisSet& eph, std::size_t j, double t,
                          const NominalTrajectory& nominal) {
    return eph.body_position(j, t) - nominal.state(t).r;
}

ClosestApproach closest_approach_radius(const EphemerisSet& eph, const NominalTrajectory& nominal,
                                        double t_start, double t_end, int samples_per_rev,
                                        double collision_tol) {
    if (t_end < t_start) throw std::invalid_argument("closest approach span is reversed");
    const double period = nominal.period() > 0.0 ? nominal.period() : 2.0 * constants::pi;
    const auto n = static_cast<std::size_t>(
        std::max(1.0, std::ceil((t_end - t_start) / period * samples_per_rev)));

    ClosestApproach best{std::numeric_limits<double>::infinity(), t_start, 0};
    for (std::size_t j = 0; j < eph.size(); ++j) {
        auto dist = [&](double t) { return relative_body_vector(eph, j, t, nominal).norm(); };
        if (t_end == t_start) {
            const double d = dist(t_start);
            if (d < best.r) best = {d, t_start, j};
            continue;
        }
        const double h = (t_end - t_start) / static_cast<double>(n);
        std::vector<double> d(n + 1);
        for (std::size_t i = 0; i <= n; ++i)
            d[i] = dist(i == n ? t_end : t_start + static_cast<double>(i) * h);
        for (std::size_t i = 0; i <= n; ++i) {
            const bool left = i == 0 || d[i] <= d[i - 1];
            const bool right = i == n || d[i] <= d[i + 1];
            if (!(left && right)) continue;
            const double a = std::max(t_start, t_start + (static_cast<double>(i) - 1.0) * h);
            const double b = std::min(t_end, t_start + (static_cast<double>(i) + 1.0) * h);
            ScalarMin m = golden_section_minimize(dist, a, b, 1e-10);
            if (d[i] < m.f) m = {i == n ? t_end : t_start + static_cast<double>(i) * h, d[i]};
            if (m.f < best.r) best = {m.f, m.x, j};
        }
    }
    if (best.r <= collision_tol)
        throw DomainError("nominal trajectory not collision-free", static_cast<int>(best.body));
    return best;
}

}  // namespace lpsk
