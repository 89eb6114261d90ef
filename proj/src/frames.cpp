#include "lpsk/frames.hpp"

#include <cmath>

namespace lpsk {

double pair_mass_ratio(const EphemerisSet& eph, std::size_t secondary) {
    const double m1 = eph.body(0).mu;
    const double m2 = eph.body(secondary).mu;
    return m2 / (m1 + m2);
}

SynodicFrame SynodicFrame::at(const EphemerisSet& eph, double t, std::size_t secondary) {
    const PhaseState s = eph.body_state(secondary, t);
    const Vec3 acc = eph.body_acceleration(secondary, t);
    const double mu = pair_mass_ratio(eph, secondary);

    const Vec3& R = s.position;
    const Vec3& V = s.velocity;
    const Vec3 h = R.cross(V);
    const double d = R.norm();
    const double hn = h.norm();
    if (!(d > 0.0) || !(hn > 0.0)) throw DomainError("degenerate primary geometry for synodic frame");

    SynodicFrame f;
    const Vec3 x = R / d;
    const Vec3 z = h / hn;
    f.C.col(0) = x;
    f.C.col(1) = z.cross(x);
    f.C.col(2) = z;
    f.scale = d;
    f.scale_dot = R.dot(V) / d;
    f.omega = Vec3(d * acc.dot(z) / hn, 0.0, hn / (d * d));
    f.origin = mu * R;
    f.origin_dot = mu * V;
    return f;
}

PhaseState SynodicFrame::to_synodic(const PhaseState& in) const {
    PhaseState out;
    out.position = C.transpose() * (in.position - origin) / scale;
    out.velocity = C.transpose() * (in.velocity - origin_dot) / scale -
                   (scale_dot / scale) * out.position - omega.cross(out.position);
    return out;
}

PhaseState SynodicFrame::to_inertial(const PhaseState& syn) const {
    PhaseState out;
    out.position = origin + scale * (C * syn.position);
    out.velocity = origin_dot + C * (scale_dot * syn.position +
                                     scale * (syn.velocity + omega.cross(syn.position)));
    return out;
}

PhaseState inertial_to_synodic(const PhaseState& state, double t, const EphemerisSet& eph) {
    return SynodicFrame::at(eph, t).to_synodic(state);
}

PhaseState synodic_to_inertial(const PhaseState& state, double t, const EphemerisSet& eph) {
    return SynodicFrame::at(eph, t).to_inertial(state);
}

}  // namespace lpsk
