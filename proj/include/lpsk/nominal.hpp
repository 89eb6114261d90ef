/**
 *  @file nominal.hpp
 *  @brief Densely sampled target trajectory (r*, v*, a*) with quintic Hermite interpolation
 */
#pragma once

#include "lpsk/types.hpp"
#include "lpsk/units.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace lpsk {

struct NominalNode {
    double t = 0.0;
    Vec3 r = Vec3::Zero();
    Vec3 v = Vec3::Zero();
    Vec3 a = Vec3::Zero();
};

struct NominalSample {
    Vec3 r, v, a;
    PhaseState phase() const { return {r, v}; }
};

enum class ApsisKind { Apoapsis, Periapsis };

const char* to_string(ApsisKind kind);

struct Apsis {
    double t = 0.0;
    ApsisKind kind = ApsisKind::Apoapsis;
    std::size_t body = 0;
    double distance = 0.0;
};

/**
 *  @brief Target trajectory in the center-body inertial frame
 *
 *  Positions are interpolated with a quintic Hermite polynomial built from
 *  (r, v, a) at the bracketing nodes; velocity and acceleration are its
 *  derivatives. Immutable once built, apart from the cached apsis list.
 */
class NominalTrajectory {
public:
    NominalTrajectory() = default;
    /// @param period characteristic revolution period, used for grid densities
    NominalTrajectory(std::vector<NominalNode> nodes, double period);

    NominalSample state(double t) const;
    double t_start() const { return nodes_.front().t; }
    double t_end() const { return nodes_.back().t; }
    bool covers(double t) const { return !nodes_.empty() && t >= t_start() && t <= t_end(); }
    double period() const { return period_; }
    const std::vector<NominalNode>& nodes() const { return nodes_; }
    bool empty() const { return nodes_.empty(); }

    std::vector<Apsis> apsides;

    /// Lossless text form: header lines then "t rx ry rz vx vy vz ax ay az".
    void write(std::ostream& out, const UnitSystem& units) const;
    static NominalTrajectory read(std::istream& in);
    void write_file(const std::string& path, const UnitSystem& units) const;
    static NominalTrajectory read_file(const std::string& path);

private:
    std::vector<NominalNode> nodes_;
    double period_ = 0.0;
};

}  // namespace lpsk
