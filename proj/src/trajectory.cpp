#include "lpsk/trajectory.hpp"

#include "lpsk/dynamics.hpp"
#include "lpsk/frames.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace lpsk {

using Vec42 = Eigen::Matrix<double, 42, 1>;

namespace {

Vec42 pack(const PhaseState& s, const Mat6& stm) {
    Vec42 y;
    y.head<6>() = s.vec();
    y.tail<36>() = Eigen::Map<const Eigen::Matrix<double, 36, 1>>(stm.data());
    return y;
}

StmState unpack(const Vec42& y) {
    StmState s;
    s.state = PhaseState(Vec6(y.head<6>()));
    s.stm = Eigen::Map<const Mat6>(y.tail<36>().data());
    return s;
}

/// d/dt Phi for A = [[0, I], [G, H]] without forming A.
Vec42 stm_rhs(const Vec42& y, const Vec3& acc, const Mat3& G, const Mat3* coriolis) {
    Vec42 dy;
    dy.head<3>() = y.segment<3>(3);
    dy.segment<3>(3) = acc;
    Eigen::Map<const Mat6> phi(y.tail<36>().data());
    Eigen::Map<Mat6> dphi(dy.tail<36>().data());
    dphi.topRows<3>() = phi.bottomRows<3>();
    dphi.bottomRows<3>() = G * phi.topRows<3>();
    if (coriolis) dphi.bottomRows<3>() += *coriolis * phi.bottomRows<3>();
    return dy;
}

}  // namespace

OrbitFamily parse_orbit_family(const std::string& name) {
    if (name == "halo") return OrbitFamily::Halo;
    if (name == "lyapunov" || name == "planar_lyapunov") return OrbitFamily::PlanarLyapunov;
    throw std::invalid_argument("unknown orbit family '" + name + "'");
}

const char* to_string(OrbitFamily family) {
    return family == OrbitFamily::Halo ? "halo" : "lyapunov";
}

OrbitSeed read_seed_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open seed fixture '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                throw ConfigError("seed fixture: expected 'key = value'", lineno);
            continue;
        }
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    auto num = [&](const std::string& k) {
        auto it = kv.find(k);
        if (it == kv.end()) throw ConfigError("seed fixture: missing key '" + k + "'");
        return std::stod(it->second);
    };
    OrbitSeed s;
    s.name = kv.count("name") ? kv["name"] : path;
    if (!kv.count("family")) throw ConfigError("seed fixture: missing key 'family'");
    s.family = parse_orbit_family(kv["family"]);
    s.mu = num("mu");
    s.state = PhaseState(Vec3(num("x"), num("y"), num("z")), Vec3(num("vx"), num("vy"), num("vz")));
    s.period = num("period");
    return s;
}

std::string builtin_seed_path(OrbitFamily family) {
    return std::string(LPSK_DATA_DIR) +
           (family == OrbitFamily::Halo ? "/seeds/l2_halo.seed" : "/seeds/l2_lyapunov.seed");
}

OrbitSeed builtin_seed(OrbitFamily family) {
    return read_seed_fixture(builtin_seed_path(family));
}

// ----------------------------------------------------------------------------
// CR3BP propagation and correction
// ----------------------------------------------------------------------------

StmState cr3bp_propagate_stm(const PhaseState& x0, double mu, double duration,
                             const IntegratorSpec& spec) {
    Mat3 cor;
    cor << 0, 2, 0, -2, 0, 0, 0, 0, 0;
    auto f = [mu, &cor](double, const Vec42& y) {
        const Vec3 r = y.head<3>();
        const Vec3 v = y.segment<3>(3);
        const Vec3 g = potential_gradient(r, mu);
        const Vec3 acc(2 * v.y() + g.x(), -2 * v.x() + g.y(), g.z());
        return stm_rhs(y, acc, potential_hessian(r, mu), &cor);
    };
    return unpack(propagate(f, pack(x0, Mat6::Identity()), 0.0, duration, spec, false).y);
}

PhaseState cr3bp_propagate(const PhaseState& x0, double mu, double duration,
                           const IntegratorSpec& spec) {
    auto f = [mu](double, const Vec6& y) { return cr3bp_derivative(PhaseState(y), mu).vec(); };
    return PhaseState(propagate(f, x0.vec(), 0.0, duration, spec, false).y);
}

PeriodicOrbit correct_periodic_orbit(const PhaseState& seed, double mu, OrbitFamily family,
                                     double period_guess, double tol, int max_iter) {
    if (!(period_guess > 0.0)) throw std::invalid_argument("period guess must be positive");
    IntegratorSpec spec;
    spec.abs_tol = spec.rel_tol = 1e-13;

    PhaseState x0 = seed;
    x0.position.y() = 0.0;
    x0.velocity.x() = 0.0;
    x0.velocity.z() = 0.0;
    if (family == OrbitFamily::PlanarLyapunov) x0.position.z() = 0.0;

    PeriodicOrbit out;
    out.mu = mu;
    out.family = family;
    double half = 0.5 * period_guess;

    for (int it = 0;; ++it) {
        // land on the y = 0 crossing near the current half period
        StmState s = cr3bp_propagate_stm(x0, mu, half, spec);
        for (int k = 0; k < 20; ++k) {
            const double ydot = s.state.velocity.y();
            if (ydot == 0.0) throw ConvergenceError("degenerate plane crossing");
            const double dt = -s.state.position.y() / ydot;
            if (std::abs(dt) < 1e-15) break;
            const StmState inc = cr3bp_propagate_stm(s.state, mu, dt, spec);
            s.state = inc.state;
            s.stm = inc.stm * s.stm;
            half += dt;
        }
        const PhaseState& xf = s.state;
        const Mat6& P = s.stm;
        const Vec6 d = cr3bp_derivative(xf, mu).vec();
        const double vy = xf.velocity.y();
        const double res = family == OrbitFamily::Halo
                               ? std::max(std::abs(xf.velocity.x()), std::abs(xf.velocity.z()))
                               : std::abs(xf.velocity.x());
        out.residual_history.push_back(res);
        if (res < tol) break;
        if (it >= max_iter) {
            std::ostringstream msg;
            msg << "periodic orbit correction did not converge in " << max_iter
                << " iterations (residual " << res << ")";
            throw ConvergenceError(msg.str());
        }
        // crossing-time sensitivity folded into the target rows
        auto row = [&](int target, int var) { return P(target, var) - d[target] * P(1, var) / vy; };
        if (family == OrbitFamily::Halo) {
            Eigen::Matrix2d M;
            M << row(3, 0), row(3, 4), row(5, 0), row(5, 4);
            if (std::abs(M.determinant()) < 1e-300) throw ConvergenceError("singular correction matrix");
            const Eigen::Vector2d dx = M.inverse() * (Eigen::Vector2d(-xf.velocity.x(), -xf.velocity.z()));
            x0.position.x() += dx[0];
            x0.velocity.y() += dx[1];
        } else {
            const double m = row(3, 4);
            if (m == 0.0) throw ConvergenceError("singular correction matrix");
            x0.velocity.y() += -xf.velocity.x() / m;
        }
        ++out.iterations;
    }
    out.state = x0;
    out.period = 2.0 * half;
    return out;
}

// ----------------------------------------------------------------------------
// N-body propagation
// ----------------------------------------------------------------------------

StmState nbody_propagate_stm(const PhaseState& x0, double t0, double t1, const EphemerisSet& eph,
                             const IntegratorSpec& spec) {
    auto f = [&eph](double t, const Vec42& y) {
        const Vec3 r = y.head<3>();
        return stm_rhs(y, nbody_gravity(r, t, eph), nbody_gravity_gradient(r, t, eph), nullptr);
    };
    return unpack(propagate(f, pack(x0, Mat6::Identity()), t0, t1, spec, false).y);
}

NominalTrajectory nominal_from_propagation(const PhaseState& x0, double t0, double t1,
                                           const EphemerisSet& eph, double max_spacing,
                                           double period) {
    auto f = [&eph](double t, const Vec6& y) {
        return Vec6((Vec6() << y.tail<3>(), nbody_gravity(y.head<3>(), t, eph)).finished());
    };
    const auto prop = propagate(f, x0.vec(), t0, t1, IntegratorSpec::fixed(max_spacing), true);
    std::vector<NominalNode> nodes;
    nodes.reserve(prop.nodes.size());
    for (const auto& n : prop.nodes)
        nodes.push_back({n.t, n.y.head<3>(), n.y.tail<3>(), n.dy.tail<3>()});
    return NominalTrajectory(std::move(nodes), period);
}

// ----------------------------------------------------------------------------
// Multiple shooting
// ----------------------------------------------------------------------------

namespace {

struct Sweep {
    std::vector<Vec6> defects;
    std::vector<Mat6> stms;
    double residual = 0.0;
};

Sweep shoot(const std::vector<double>& epochs, const std::vector<PhaseState>& X,
            const EphemerisSet& eph, double max_step, bool with_stm) {
    Sweep s;
    const std::size_t n = epochs.size() - 1;
    s.defects.resize(n);
    if (with_stm) s.stms.resize(n);
    const IntegratorSpec spec = IntegratorSpec::fixed(max_step);
    for (std::size_t i = 0; i < n; ++i) {
        PhaseState end;
        if (with_stm) {
            const StmState r = nbody_propagate_stm(X[i], epochs[i], epochs[i + 1], eph, spec);
            end = r.state;
            s.stms[i] = r.stm;
        } else {
            auto f = [&eph](double t, const Vec6& y) {
                return Vec6((Vec6() << y.tail<3>(), nbody_gravity(y.head<3>(), t, eph)).finished());
            };
            end = PhaseState(propagate(f, X[i].vec(), epochs[i], epochs[i + 1], spec, false).y);
        }
        s.defects[i] = end.vec() - X[i + 1].vec();
        s.residual = std::max(s.residual, s.defects[i].norm() / X[i + 1].vec().norm());
    }
    return s;
}

}  // namespace

double continuity_residual(const std::vector<double>& epochs, const std::vector<PhaseState>& patches,
                           const EphemerisSet& eph, double max_step) {
    if (epochs.size() != patches.size() || epochs.size() < 2)
        throw std::invalid_argument("continuity_residual: need matching epochs and patches");
    return shoot(epochs, patches, eph, max_step, false).residual;
}

TransitionResult transition_to_qpo(const PeriodicOrbit& orbit, const EphemerisSet& eph,
                                   const TransitionOptions& opt) {
    if (opt.revolutions < 1 || opt.patch_per_rev < 1)
        throw std::invalid_argument("transition needs at least one revolution and one patch point");
    const int n_seg = opt.revolutions * opt.patch_per_rev;
    const double dt = orbit.period / opt.patch_per_rev;
    const double t_end = opt.t0 + n_seg * dt;
    if (!eph.covers(opt.t0) || !eph.covers(t_end))
        throw std::invalid_argument("ephemeris span does not cover the transition");

    // CR3BP samples over one period, reused every revolution
    IntegratorSpec spec;
    spec.abs_tol = spec.rel_tol = 1e-13;
    std::vector<PhaseState> one_rev{orbit.state};
    for (int k = 1; k < opt.patch_per_rev; ++k)
        one_rev.push_back(cr3bp_propagate(one_rev.back(), orbit.mu, dt, spec));

    TransitionResult res;
    for (int k = 0; k <= n_seg; ++k) {
        const double t = opt.t0 + k * dt;
        res.epochs.push_back(t);
        res.patches.push_back(synodic_to_inertial(one_rev[k % opt.patch_per_rev], t, eph));
    }

    const std::size_t n = static_cast<std::size_t>(n_seg);
    const int skip = opt.pin_first_position ? 3 : 0;  // pinned columns of X_0

    // Newton on the continuity defects of model @p m; false when the defect grows
    // tenfold or @p tol is not reached within @p max_it updates.
    auto newton = [&](const EphemerisSet& m, double tol, int max_it) {
        double first = 0.0;
        for (int it = 0;; ++it) {
            const Sweep s = shoot(res.epochs, res.patches, m, opt.max_step, true);
            res.residual_history.push_back(s.residual);
            res.residual = s.residual;
            if (s.residual < tol) return true;
            if (it == 0) first = s.residual;
            if (it >= max_it || !(s.residual <= 10.0 * first) || res.iterations >= opt.max_iterations)
                return false;
            // J J^T is block tridiagonal: diag Phi_i Phi_i^T + I, upper -Phi_{i+1}^T
            Eigen::MatrixXd JJ = Eigen::MatrixXd::Zero(6 * n, 6 * n);
            Eigen::VectorXd F(6 * n);
            for (std::size_t i = 0; i < n; ++i) {
                const Mat6& P = s.stms[i];
                Mat6 d = Mat6::Identity();
                if (i == 0 && skip)
                    d += P.rightCols<3>() * P.rightCols<3>().transpose();
                else
                    d += P * P.transpose();
                JJ.block<6, 6>(6 * i, 6 * i) = d;
                if (i + 1 < n) {
                    JJ.block<6, 6>(6 * i, 6 * (i + 1)) = -s.stms[i + 1].transpose();
                    JJ.block<6, 6>(6 * (i + 1), 6 * i) = -s.stms[i + 1];
                }
                F.segment<6>(6 * i) = s.defects[i];
            }
            const Eigen::LDLT<Eigen::MatrixXd> ldlt(JJ);
            if (ldlt.info() != Eigen::Success)
                throw ConvergenceError("continuity normal matrix is singular");
            const Eigen::VectorXd lambda = ldlt.solve(F);
            for (std::size_t i = 0; i <= n; ++i) {
                Vec6 dx = Vec6::Zero();
                if (i < n) dx -= s.stms[i].transpose() * lambda.segment<6>(6 * i);
                if (i > 0) dx += lambda.segment<6>(6 * (i - 1));
                if (i == 0 && skip) dx.head<3>().setZero();
                res.patches[i] = PhaseState(Vec6(res.patches[i].vec() + dx));
            }
            ++res.iterations;
        }
    };

    // Homotopy on the masses of every body beyond the primary pair, used only
    // when plain Newton on the full model fails.
    auto scaled = [&eph](double lambda) {
        std::vector<Body> bodies = eph.bodies();
        for (std::size_t j = 2; j < bodies.size(); ++j) bodies[j].mu *= lambda;
        return EphemerisSet(std::move(bodies), eph.t_start(), eph.t_end());
    };
    const std::vector<PhaseState> initial = res.patches;
    bool ok = newton(eph, opt.continuity_tol, opt.max_iterations);
    if (!ok && eph.size() > 2) {
        res.patches = initial;
        double lambda = 0.0, dl = 0.25;
        std::vector<PhaseState> last = initial;
        while (res.iterations < opt.max_iterations) {
            const double next = std::min(1.0, lambda + dl);
            const bool final_stage = next == 1.0;
            if (newton(scaled(next), final_stage ? opt.continuity_tol : 1e-9, 8)) {
                lambda = next;
                last = res.patches;
                if (final_stage) {
                    ok = true;
                    break;
                }
                dl = std::min(2.0 * dl, 0.5);
            } else {
                res.patches = last;
                dl *= 0.5;
                if (dl < 1e-3) break;
            }
        }
    }
    if (!ok) {
        std::ostringstream msg;
        msg << "multiple shooting did not converge in " << res.iterations
            << " iterations (residual " << res.residual << ")";
        throw ConvergenceError(msg.str());
    }

    // nominal nodes from the converged segments
    std::vector<NominalNode> nodes;
    for (std::size_t i = 0; i < n; ++i) {
        const NominalTrajectory seg = nominal_from_propagation(
            res.patches[i], res.epochs[i], res.epochs[i + 1], eph, opt.max_step);
        const auto& sn = seg.nodes();
        const std::size_t stop = (i + 1 == n) ? sn.size() : sn.size() - 1;
        for (std::size_t k = 0; k < stop; ++k) nodes.push_back(sn[k]);
    }
    res.nominal = NominalTrajectory(std::move(nodes), orbit.period);
    if (eph.size() > 1) res.nominal.apsides = find_apsides(res.nominal, eph, 1);
    return res;
}

// ----------------------------------------------------------------------------
// Apsides
// ----------------------------------------------------------------------------

std::vector<Apsis> find_apsides(const NominalTrajectory& nominal, const EphemerisSet& eph,
                                std::size_t body) {
    struct Geo {
        double rate, curv, scale, dist;
    };
    auto geo = [&](double t) {
        const NominalSample s = nominal.state(t);
        const PhaseState b = eph.body_state(body, t);
        const Vec3 w = s.r - b.position;
        const Vec3 wd = s.v - b.velocity;
        const Vec3 wdd = s.a - eph.body_acceleration(body, t);
        const double rate = w.dot(wd);
        const double curv = wd.squaredNorm() + w.dot(wdd);
        const double scale = wd.squaredNorm() + w.norm() * wdd.norm();
        return Geo{rate, curv, scale, w.norm()};
    };
    std::vector<Apsis> out;
    auto accept = [&](double t) {
        const Geo g = geo(t);
        if (std::abs(g.curv) <= 1e-9 * g.scale) return;  // locally circular
        Apsis a;
        a.t = t;
        a.kind = g.curv > 0 ? ApsisKind::Periapsis : ApsisKind::Apoapsis;
        a.body = body;
        a.distance = g.dist;
        if (!out.empty() && std::abs(out.back().t - t) < 1e-9) return;
        out.push_back(a);
    };
    const auto& nodes = nominal.nodes();
    std::vector<Geo> g(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) g[i] = geo(nodes[i].t);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        // rates at round-off level relative to |w||w'| count as zero
        const double tiny = 1e-13 * g[i].scale;
        if (std::abs(g[i].rate) <= tiny) {
            accept(nodes[i].t);
            continue;
        }
        if (i + 1 == nodes.size()) break;
        if (std::abs(g[i + 1].rate) <= 1e-13 * g[i + 1].scale) continue;
        if ((g[i].rate < 0) == (g[i + 1].rate < 0)) continue;
        double a = nodes[i].t, b = nodes[i + 1].t;
        const bool neg_left = g[i].rate < 0;
        while (b - a > 1e-12) {
            const double m = 0.5 * (a + b);
            if ((geo(m).rate < 0) == neg_left) a = m; else b = m;
        }
        accept(0.5 * (a + b));
    }
    return out;
}

std::optional<Apsis> insertion_apsis(const NominalTrajectory& nominal, ApsisKind kind,
                                     double t_after) {
    for (const Apsis& a : nominal.apsides)
        if (a.kind == kind && a.t >= t_after) return a;
    return std::nullopt;
}

}  // namespace lpsk
