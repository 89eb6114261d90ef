/**
 *  @file types.hpp
 *  @brief Common vector types, phase states and the error hierarchy
 */
#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace lpsk {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/**
 *  @brief Position/velocity pair in nondimensional units
 *
 *  Also used for deviations (z1, z2) from a nominal trajectory.
 */
struct PhaseState {
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero();

    PhaseState() = default;
    PhaseState(const Vec3& r, const Vec3& v) : position(r), velocity(v) {}
    explicit PhaseState(const Vec6& x) : position(x.head<3>()), velocity(x.tail<3>()) {}

    Vec6 vec() const {
        Vec6 x;
        x << position, velocity;
        return x;
    }
    bool finite() const { return position.allFinite() && velocity.allFinite(); }
    double norm() const { return std::sqrt(position.squaredNorm() + velocity.squaredNorm()); }
};

inline PhaseState operator-(const PhaseState& a, const PhaseState& b) {
    return {a.position - b.position, a.velocity - b.velocity};
}
inline PhaseState operator+(const PhaseState& a, const PhaseState& b) {
    return {a.position + b.position, a.velocity + b.velocity};
}

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

/// Evaluation too close to a point-mass singularity.
class DomainError : public std::runtime_error {
public:
    DomainError(const std::string& what, int body = -1) : std::runtime_error(what), body_(body) {}
    int body() const { return body_; }

private:
    int body_;
};

/// Query outside the validity span of an ephemeris or nominal trajectory.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Step-size underflow or a failure raised inside the vector field.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, double t, bool domain = false)
        : std::runtime_error(what), t_(t), domain_(domain) {}
    double time() const { return t_; }
    /// True when the underlying cause was a singularity-guard violation.
    bool domain() const { return domain_; }

private:
    double t_;
    bool domain_;
};

/// Iterative solver did not converge.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gain/relief combination outside the certifiable region.
class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user configuration; carries the offending line when known.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

}  // namespace lpsk
