/**
 *  @file ephemeris.hpp
 *  @brief Celestial body providers and the ephemeris set used by all vector fields
 *
 *  Every body state is expressed relative to the center body (index 0), so the
 *  center is always at the origin.
 */
#pragma once

#include "lpsk/types.hpp"
#include "lpsk/units.hpp"

#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lpsk {

class NominalTrajectory;

class BodyProvider {
public:
    virtual ~BodyProvider() = default;
    virtual PhaseState state(double t) const = 0;
    virtual Vec3 acceleration(double t) const = 0;
    /// Interval over which the provider can be queried.
    virtual std::pair<double, double> span() const {
        const double inf = std::numeric_limits<double>::infinity();
        return {-inf, inf};
    }
};

/// Center body: identically at the origin.
class FixedProvider final : public BodyProvider {
public:
    PhaseState state(double) const override { return {}; }
    Vec3 acceleration(double) const override { return Vec3::Zero(); }
};

/**
 *  @brief Uniform circular motion about the center
 *
 *  The orbit plane is obtained from the XY plane by rotating about X by the
 *  inclination and then about Z by the node longitude.
 */
class CircularProvider final : public BodyProvider {
public:
    CircularProvider(double radius, double rate, double phase = 0.0, double inclination = 0.0,
                     double node = 0.0);
    PhaseState state(double t) const override;
    Vec3 acceleration(double t) const override;
    double radius() const { return radius_; }
    double rate() const { return rate_; }

private:
    double radius_, rate_, phase_;
    Mat3 orient_;
};

/// Keplerian ellipse about the center with gravitational parameter @c mu_sum.
class KeplerProvider final : public BodyProvider {
public:
    struct Elements {
        double a = 1.0;
        double e = 0.0;
        double inclination = 0.0;
        double node = 0.0;
        double arg_periapsis = 0.0;
        double mean_anomaly = 0.0;  ///< at epoch
        double epoch = 0.0;
    };
    KeplerProvider(const Elements& el, double mu_sum);
    PhaseState state(double t) const override;
    Vec3 acceleration(double t) const override;
    double mean_motion() const { return n_; }
    const Elements& elements() const { return el_; }

    /// Solves E - e sin E = M to 1e-13 by safeguarded Newton iteration.
    static double solve_kepler(double mean_anomaly, double e);

private:
    Elements el_;
    double mu_;
    double n_;
    Mat3 orient_;
};

/// Cubic Hermite interpolation of tabulated position/velocity nodes.
class TabulatedProvider final : public BodyProvider {
public:
    TabulatedProvider(std::vector<double> epochs, std::vector<PhaseState> states);
    PhaseState state(double t) const override;
    Vec3 acceleration(double t) const override;
    std::pair<double, double> span() const override { return {epochs_.front(), epochs_.back()}; }
    const std::vector<double>& epochs() const { return epochs_; }
    const std::vector<PhaseState>& states() const { return states_; }

private:
    std::size_t locate(double t) const;
    std::vector<double> epochs_;
    std::vector<PhaseState> states_;
};

/// Sum of two providers (e.g. a planet on a circle about a body that itself moves).
class ComposedProvider final : public BodyProvider {
public:
    ComposedProvider(std::shared_ptr<const BodyProvider> parent,
                     std::shared_ptr<const BodyProvider> child)
        : parent_(std::move(parent)), child_(std::move(child)) {}
    PhaseState state(double t) const override { return parent_->state(t) + child_->state(t); }
    Vec3 acceleration(double t) const override {
        return parent_->acceleration(t) + child_->acceleration(t);
    }
    std::pair<double, double> span() const override;

private:
    std::shared_ptr<const BodyProvider> parent_, child_;
};

struct Body {
    std::string name;
    double mu = 0.0;      ///< nondimensional gravitational parameter
    double radius = 0.0;  ///< nondimensional mean radius (occlusion only)
    std::shared_ptr<const BodyProvider> provider;
};

/**
 *  @brief Time-indexed set of celestial bodies
 *
 *  Body 0 is the frame center. Immutable after construction.
 */
class EphemerisSet {
public:
    EphemerisSet() = default;
    EphemerisSet(std::vector<Body> bodies, double t_start, double t_end);

    std::size_t size() const { return bodies_.size(); }
    const Body& body(std::size_t j) const;
    const std::vector<Body>& bodies() const { return bodies_; }
    double t_start() const { return t0_; }
    double t_end() const { return t1_; }
    bool covers(double t) const { return t >= t0_ && t <= t1_; }
    std::optional<std::size_t> find(const std::string& name) const;

    PhaseState body_state(std::size_t j, double t) const;
    Vec3 body_position(std::size_t j, double t) const { return body_state(j, t).position; }
    Vec3 body_acceleration(std::size_t j, double t) const;

    /// Copy with an extra body appended.
    EphemerisSet with_body(Body body) const;
    EphemerisSet with_span(double t_start, double t_end) const;

private:
    void check(std::size_t j, double t) const;
    std::vector<Body> bodies_;
    double t0_ = 0.0, t1_ = 0.0;
};

// ----------------------------------------------------------------------------
// Standard configurations
// ----------------------------------------------------------------------------

Body center_body(const std::string& name, double mu, double radius);

/// Earth at the center, Moon on the unit circle at unit rate. Exactly the CR3BP.
EphemerisSet earth_moon_circular(const UnitSystem& units, double t_start, double t_end);

/// Earth-Moon circular plus a Sun on a coplanar circle (bicircular model).
EphemerisSet earth_moon_sun_bicircular(const UnitSystem& units, double t_start, double t_end,
                                       double sun_phase = 0.0);

/// Earth at the center with a Keplerian Moon of the given eccentricity (a = 1).
EphemerisSet earth_moon_elliptic(const UnitSystem& units, double t_start, double t_end,
                                 double eccentricity, double inclination = 0.0);

/// Jupiter on a circular heliocentric orbit, composed onto the Sun provider of @p eph.
Body jupiter_about_sun(const UnitSystem& units, const EphemerisSet& eph, double phase = 0.0);

// ----------------------------------------------------------------------------
// Tabulated files: "# body <name> mu <value>" then rows "t x y z vx vy vz"
// ----------------------------------------------------------------------------

Body read_tabulated_body(std::istream& in, double radius = 0.0);
Body read_tabulated_body_file(const std::string& path, double radius = 0.0);
void write_tabulated_body(std::ostream& out, const std::string& name, double mu,
                          const std::vector<double>& epochs,
                          const std::vector<PhaseState>& states);
/// Samples @p provider at a uniform spacing into a tabulated provider.
std::shared_ptr<TabulatedProvider> tabulate(const BodyProvider& provider, double t_start,
                                            double t_end, double spacing);

// ----------------------------------------------------------------------------
// Geometry relative to a nominal trajectory
// ----------------------------------------------------------------------------

/// w_j(t) = r_j(t) - r*(t)
Vec3 relative_body_vector(const EphemerisSet& eph, std::size_t j, double t,
                          const NominalTrajectory& nominal);

struct ClosestApproach {
    double r = 0.0;
    double t = 0.0;
    std::size_t body = 0;
};

/**
 *  @brief Minimum distance between the nominal and any body over [t_start, t_end]
 *
 *  Dense scan at @p samples_per_rev points per nominal revolution, refined by
 *  golden-section search around every local grid minimum.
 *  @throws DomainError if the minimum is below @p collision_tol
 */
ClosestApproach closest_approach_radius(const EphemerisSet& eph, const NominalTrajectory& nominal,
                                        double t_start, double t_end, int samples_per_rev = 2000,
                                        double collision_tol = 1e-6);

}  // namespace lpsk
