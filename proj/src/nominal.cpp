#include "lpsk/nominal.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace lpsk {

const char* to_string(ApsisKind kind) {
    return kind == ApsisKind::Apoapsis ? "apoapsis" : "periapsis";
}

NominalTrajectory::NominalTrajectory(std::vector<NominalNode> nodes, double period)
    : nodes_(std::move(nodes)), period_(period) {
    if (nodes_.size() < 2) throw std::invalid_argument("nominal trajectory needs at least two nodes");
    for (std::size_t i = 1; i < nodes_.size(); ++i)
        if (!(nodes_[i].t > nodes_[i - 1].t))
            throw std::invalid_argument("nominal nodes must be strictly time-ordered");
}

NominalSample NominalTrajectory::state(double t) const {
    if (!covers(t)) {
        std::ostringstream msg;
        msg << "nominal queried at t=" << t << " outside ["
            << (nodes_.empty() ? 0.0 : t_start()) << ", " << (nodes_.empty() ? 0.0 : t_end()) << "]";
        throw RangeError(msg.str());
    }
    auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t,
                               [](const NominalNode& n, double tt) { return n.t < tt; });
    if (it->t == t) return {it->r, it->v, it->a};
    const NominalNode& n1 = *it;
    const NominalNode& n0 = *(it - 1);
    const double h = n1.t - n0.t;
    const double s = (t - n0.t) / h;
    const Vec3 D = n1.r - n0.r;
    const Vec3 c0 = n0.r;
    const Vec3 c1 = h * n0.v;
    const Vec3 c2 = 0.5 * h * h * n0.a;
    const Vec3 c3 = 10.0 * D - h * (6.0 * n0.v + 4.0 * n1.v) - 0.5 * h * h * (3.0 * n0.a - n1.a);
    const Vec3 c4 = -15.0 * D + h * (8.0 * n0.v + 7.0 * n1.v) + 0.5 * h * h * (3.0 * n0.a - 2.0 * n1.a);
    const Vec3 c5 = 6.0 * D - 3.0 * h * (n0.v + n1.v) - 0.5 * h * h * (n0.a - n1.a);
    NominalSample out;
    out.r = c0 + s * (c1 + s * (c2 + s * (c3 + s * (c4 + s * c5))));
    out.v = (c1 + s * (2.0 * c2 + s * (3.0 * c3 + s * (4.0 * c4 + s * 5.0 * c5)))) / h;
    out.a = (2.0 * c2 + s * (6.0 * c3 + s * (12.0 * c4 + s * 20.0 * c5))) / (h * h);
    return out;
}

void NominalTrajectory::write(std::ostream& out, const UnitSystem& units) const {
    out << std::setprecision(17);
    out << "# lpsk nominal trajectory\n";
    out << "# units length_m " << units.length_unit << " time_s " << units.time_unit << " mu "
        << units.mass_ratio_mu << "\n";
    out << "# period " << period_ << "\n";
    if (!nodes_.empty()) out << "# span " << t_start() << ' ' << t_end() << "\n";
    for (const Apsis& a : apsides)
        out << "# apsis " << a.t << ' ' << to_string(a.kind) << ' ' << a.body << ' ' << a.distance
            << "\n";
    out << "# t rx ry rz vx vy vz ax ay az\n";
    for (const NominalNode& n : nodes_) {
        out << n.t;
        for (int k = 0; k < 3; ++k) out << ' ' << n.r[k];
        for (int k = 0; k < 3; ++k) out << ' ' << n.v[k];
        for (int k = 0; k < 3; ++k) out << ' ' << n.a[k];
        out << '\n';
    }
}

NominalTrajectory NominalTrajectory::read(std::istream& in) {
    std::vector<NominalNode> nodes;
    std::vector<Apsis> aps;
    double period = 0.0;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "period") {
                hs >> period;
            } else if (key == "apsis") {
                Apsis a;
                std::string kind;
                if (!(hs >> a.t >> kind >> a.body >> a.distance))
                    throw ConfigError("nominal file: malformed apsis line", lineno);
                a.kind = kind == "apoapsis" ? ApsisKind::Apoapsis : ApsisKind::Periapsis;
                aps.push_back(a);
            }
            continue;
        }
        std::istringstream ls(line);
        NominalNode n;
        if (!(ls >> n.t >> n.r[0] >> n.r[1] >> n.r[2] >> n.v[0] >> n.v[1] >> n.v[2] >> n.a[0] >>
              n.a[1] >> n.a[2]))
            throw ConfigError("nominal file: malformed row", lineno);
        nodes.push_back(n);
    }
    NominalTrajectory traj(std::move(nodes), period);
    traj.apsides = std::move(aps);
    return traj;
}

void NominalTrajectory::write_file(const std::string& path, const UnitSystem& units) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write nominal file '" + path + "'");
    write(out, units);
}

NominalTrajectory NominalTrajectory::read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open nominal file '" + path + "'");
    return read(in);
}

}  // namespace lpsk
