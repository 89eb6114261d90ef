#include "lpsk/stability.hpp"

#include "lpsk/numerics.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace lpsk {

namespace {

Mat6 blockwise(const Eigen::Matrix2d& m) {
    Mat6 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out.block<3, 3>(3 * i, 3 * j) = m(i, j) * Mat3::Identity();
    return out;
}

Eigen::Vector2d sym_eigenvalues(const Eigen::Matrix2d& m) {
    const double tr = 0.5 * (m(0, 0) + m(1, 1));
    const double d = std::hypot(0.5 * (m(0, 0) - m(1, 1)), m(0, 1));
    return {tr - d, tr + d};
}

Eigen::Matrix2d u_block(const Gains& g, double beta) {
    const double k1 = g.k1, k2 = g.k2;
    const double off = (k1 * k1 + 2 * k1 * k2 + 1) * beta - k1 * k1 - 1;
    Eigen::Matrix2d U;
    U << 2 * (k1 + k1 * k1 * k2) * beta, off, off, 2 * ((k1 + k2) * beta - k1);
    return U;
}

Eigen::Matrix2d x_block(const Gains& g) {
    Eigen::Matrix2d X;
    X << 1 + g.k1 * g.k1, g.k1, g.k1, 1;
    return X;
}

}  // namespace

LyapunovMatrices lyapunov_matrices(const Gains& g, double beta) {
    g.validate();
    if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1]");
    const double k1 = g.k1, k2 = g.k2;
    LyapunovMatrices m;
    m.X2 = x_block(g);
    m.Y2 << k1 + k1 * k1 * k2, k1 * k2, k1 * k2, k2;
    m.U2 = u_block(g, beta);
    m.X = blockwise(m.X2);
    m.Y = blockwise(m.Y2);
    m.U = blockwise(m.U2);
    return m;
}

BetaRoots beta_roots(const Gains& g) {
    g.validate();
    const double k1 = g.k1, k2 = g.k2;
    const double k1sq = k1 * k1;
    const double A = k1sq * k1sq + 2 * k1 * k2 + 1;
    const double B = 2 * std::sqrt((k1 * k2 + 1) * (k1 * k2 + k1sq * k1sq));
    const double C = (k1sq - 1) * (k1sq - 1);
    // (A - B)/C rewritten through the product of roots, which stays finite at k1 = 1
    const double beta1 = (k1sq + 1) * (k1sq + 1) / (A + B);
    const double beta2 = C > 0.0 ? (A + B) / C : std::numeric_limits<double>::infinity();
    return {beta1, beta2};
}

double beta_crit(const Gains& g) {
    return beta_roots(g).beta1;
}

bool sylvester_check(const Gains& g, double beta) {
    g.validate();
    const Eigen::Matrix2d U = u_block(g, beta);
    return U(0, 0) > 0.0 && U.determinant() > 0.0;
}

double beta_min_from_eta(const Gains& g, double eta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::invalid_argument("eta must lie in [0, 1]");
    const double bc = beta_crit(g);
    return bc + eta * (1.0 - bc);
}

ConvergenceConstants convergence_constants(const Gains& g, double beta_min) {
    const double bc = beta_crit(g);
    if (!(beta_min > bc) || beta_min > 1.0)
        throw CertificationError("beta_min must lie in (beta_crit, 1]");
    const Eigen::Vector2d ex = sym_eigenvalues(x_block(g));
    const Eigen::Vector2d eu = sym_eigenvalues(u_block(g, beta_min));
    return {std::sqrt(ex[1] / ex[0]), std::max(0.0, eu[0]) / (2.0 * ex[1])};
}

double psi_term(double w, double w1, double delta) {
    const double gap = w - delta;
    const double g3 = gap * gap * gap;
    return w1 / g3 - w1 / (w * w * w) + std::sqrt(3.0) * delta / g3;
}

// ----------------------------------------------------------------------------
// PhiEvaluator
// ----------------------------------------------------------------------------

PhiEvaluator::PhiEvaluator(std::vector<BodyDistance> bodies, double t0, double t1, double period,
                           int samples_per_rev)
    : bodies_(std::move(bodies)), t0_(t0), t1_(t1) {
    if (!(t1 >= t0)) throw std::invalid_argument("phi span is reversed");
    if (bodies_.empty()) throw std::invalid_argument("phi needs at least one body");
    const auto n = static_cast<std::size_t>(
        std::max(1.0, std::ceil((t1 - t0) / period * samples_per_rev)));
    grid_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        grid_[i] = i == n ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n);

    r_min_ = std::numeric_limits<double>::infinity();
    cache_.resize(bodies_.size());
    for (std::size_t j = 0; j < bodies_.size(); ++j) {
        auto& c = cache_[j];
        c.reserve(grid_.size());
        for (double t : grid_) c.push_back(bodies_[j].norms(t));
        for (std::size_t i = 0; i < c.size(); ++i) {
            const bool left = i == 0 || c[i].first <= c[i - 1].first;
            const bool right = i + 1 == c.size() || c[i].first <= c[i + 1].first;
            if (!(left && right)) continue;
            double best = c[i].first;
            if (grid_.size() > 1) {
                const double a = grid_[i == 0 ? 0 : i - 1];
                const double b = grid_[std::min(i + 1, grid_.size() - 1)];
                const auto m = golden_section_minimize(
                    [&](double t) { return bodies_[j].norms(t).first; }, a, b, 1e-10);
                best = std::min(best, m.f);
            }
            r_min_ = std::min(r_min_, best);
        }
    }
}

namespace {

std::vector<BodyDistance> nominal_distances(const NominalTrajectory& nominal, const EphemerisSet& eph) {
    std::vector<BodyDistance> out;
    for (std::size_t j = 0; j < eph.size(); ++j) {
        if (eph.body(j).mu == 0.0) continue;
        out.push_back({eph.body(j).mu, [&nominal, &eph, j](double t) {
                           const Vec3 w = relative_body_vector(eph, j, t, nominal);
                           return std::make_pair(w.norm(), w.lpNorm<1>());
                       }});
    }
    return out;
}

}  // namespace

PhiEvaluator::PhiEvaluator(const NominalTrajectory& nominal, const EphemerisSet& eph, double t0,
                           double t1, int samples_per_rev)
    : PhiEvaluator(nominal_distances(nominal, eph), t0, t1,
                   nominal.period() > 0.0 ? nominal.period() : 2.0 * constants::pi,
                   samples_per_rev) {}

double PhiEvaluator::total(double t, double z0, double rho, double theta) const {
    const double delta = rho * z0 * std::exp(-theta * (t - t0_));
    double s = 0.0;
    for (const auto& b : bodies_) {
        const auto [w, w1] = b.norms(t);
        s += b.mu * psi_term(w, w1, delta);
    }
    return s;
}

PhiResult PhiEvaluator::operator()(double z0, double rho, double theta) const {
    if (!(z0 >= 0.0) || !(rho >= 1.0) || !(theta >= 0.0))
        throw std::invalid_argument("phi requires z0 >= 0, rho >= 1, theta >= 0");
    if (!(rho * z0 < r_min_))
        throw CertificationError("initial deviation outside set B (rho |z0| >= r)");
    if (z0 == 0.0) return {0.0, t0_};

    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        const double delta = rho * z0 * std::exp(-theta * (grid_[i] - t0_));
        double s = 0.0;
        for (std::size_t j = 0; j < bodies_.size(); ++j)
            s += bodies_[j].mu * psi_term(cache_[j][i].first, cache_[j][i].second, delta);
        if (s > best_val) {
            best_val = s;
            best = i;
        }
    }
    PhiResult res{best_val, grid_[best]};
    if (grid_.size() > 1) {
        const double a = grid_[best == 0 ? 0 : best - 1];
        const double b = grid_[std::min(best + 1, grid_.size() - 1)];
        const auto m = golden_section_minimize(
            [&](double t) { return -total(t, z0, rho, theta); }, a, b, 1e-10);
        if (-m.f > res.phi) res = {-m.f, m.x};
    }
    return res;
}

PhiResult phi_bound(double z0_norm, double rho, double theta, const NominalTrajectory& nominal,
                    const EphemerisSet& eph, double t0, double t1) {
    return PhiEvaluator(nominal, eph, t0, t1)(z0_norm, rho, theta);
}

// ----------------------------------------------------------------------------
// Certificates
// ----------------------------------------------------------------------------

GainCertificate usat_min(const Gains& g, double beta_min, double z0_norm, const PhiEvaluator& phi) {
    if (!(z0_norm > 0.0)) throw std::invalid_argument("z0_norm must be positive");
    GainCertificate c;
    c.gains = g;
    c.beta_crit = beta_crit(g);
    c.beta_min = beta_min;
    c.eta = c.beta_crit < 1.0 ? (beta_min - c.beta_crit) / (1.0 - c.beta_crit) : 1.0;
    const auto cc = convergence_constants(g, beta_min);
    c.rho = cc.rho;
    c.theta = cc.theta;
    c.ell = gain_norm_ell(g);
    c.r = phi.closest_approach();
    c.z0_norm = z0_norm;
    c.feasible = c.rho * z0_norm < c.r;
    if (!c.feasible) {
        c.phi = c.u_sat_min = std::numeric_limits<double>::infinity();
        return c;
    }
    const PhiResult p = phi(z0_norm, c.rho, c.theta);
    c.phi = p.phi;
    c.phi_time = p.t;
    c.u_sat_min = beta_min * c.ell * c.rho * z0_norm + c.phi;
    return c;
}

EtaOptimum optimize_eta(const Gains& g, double z0_norm, const PhiEvaluator& phi) {
    constexpr double eta_lo = 1e-6;
    auto cert = [&](double eta) { return usat_min(g, beta_min_from_eta(g, eta), z0_norm, phi); };
    const GainCertificate top = cert(1.0);
    if (!top.feasible) return {1.0, top};

    constexpr int n = 32;
    std::vector<double> etas(n), vals(n);
    int best = 0;
    for (int i = 0; i < n; ++i) {
        etas[i] = eta_lo + (1.0 - eta_lo) * i / (n - 1.0);
        vals[i] = cert(etas[i]).u_sat_min;
        if (vals[i] < vals[best]) best = i;
    }
    const double a = etas[std::max(0, best - 1)];
    const double b = etas[std::min(n - 1, best + 1)];
    const auto m = golden_section_minimize([&](double e) { return cert(e).u_sat_min; }, a, b, 1e-4);
    double eta = m.f < vals[best] ? m.x : etas[best];
    return {eta, cert(eta)};
}

std::vector<GainCertificate> gain_map(const std::vector<double>& k1_grid,
                                      const std::vector<double>& k2_grid, double z0_norm,
                                      const PhiEvaluator& phi, EtaMode mode, double eta) {
    std::vector<GainCertificate> out;
    out.reserve(k1_grid.size() * k2_grid.size());
    for (double k1 : k1_grid)
        for (double k2 : k2_grid) {
            const Gains g{k1, k2};
            if (mode == EtaMode::Optimized)
                out.push_back(optimize_eta(g, z0_norm, phi).certificate);
            else
                out.push_back(usat_min(g, beta_min_from_eta(g, eta), z0_norm, phi));
        }
    return out;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
    if (n < 1) throw std::invalid_argument("grid needs at least one point");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1.0);
    return g;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi > 0.0)) throw std::invalid_argument("log grid bounds must be positive");
    std::vector<double> g = linear_grid(std::log10(lo), std::log10(hi), n);
    for (double& x : g) x = std::pow(10.0, x);
    return g;
}

void write_gain_map(std::ostream& out, const std::vector<GainCertificate>& cells) {
    out << "k1 k2 beta_crit eta beta_min rho theta ell phi usat_min feasible\n";
    out << std::setprecision(10);
    for (const auto& c : cells)
        out << c.gains.k1 << ' ' << c.gains.k2 << ' ' << c.beta_crit << ' ' << c.eta << ' '
            << c.beta_min << ' ' << c.rho << ' ' << c.theta << ' ' << c.ell << ' ' << c.phi << ' '
            << c.u_sat_min << ' ' << (c.feasible ? 1 : 0) << '\n';
}

double max_feasible_k1(double z0_norm, double r, double k1_hi) {
    auto rho = [](double k1) {
        const Eigen::Vector2d e = sym_eigenvalues(x_block({k1, 1.0}));
        return std::sqrt(e[1] / e[0]);
    };
    if (!(z0_norm < r)) return 0.0;
    if (rho(k1_hi) * z0_norm < r) return k1_hi;
    return bisect_root([&](double k1) { return rho(k1) * z0_norm - r; }, 0.0, k1_hi, 1e-12 * k1_hi);
}

double insertion_deviation_quantile(double sigma_r, double sigma_v, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
    if (!(sigma_r >= 0.0 && sigma_v >= 0.0) || sigma_r + sigma_v == 0.0)
        throw std::invalid_argument("insertion sigmas must be non-negative and not both zero");
    const boost::math::chi_squared chi3(3.0), chi6(6.0);
    const double sr2 = sigma_r * sigma_r, sv2 = sigma_v * sigma_v;
    if (sr2 == 0.0 || sv2 == 0.0) return std::sqrt((sr2 + sv2) * boost::math::quantile(chi3, q));

    // CDF of sr2 A + sv2 B, conditioning on the smaller-variance term
    const double big = std::max(sr2, sv2), small = std::min(sr2, sv2);
    auto cdf = [&](double x) {
        auto integrand = [&](double b) {
            return boost::math::cdf(chi3, std::max(0.0, (x - small * b) / big)) *
                   boost::math::pdf(chi3, b);
        };
        return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            integrand, 0.0, std::min(x / small, 200.0), 15, 1e-12);
    };
    // exact bounds: big A <= X <= big (A + B); quadrature error can blur the ends
    const double lo = big * boost::math::quantile(chi3, q);
    const double hi = big * boost::math::quantile(chi6, q);
    auto f = [&](double x) { return cdf(x) - q; };
    const double flo = f(lo), fhi = f(hi);
    if (flo >= 0.0) return std::sqrt(lo);
    if (fhi <= 0.0) return std::sqrt(hi);
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                        boost::math::tools::eps_tolerance<double>(50), iters);
    return std::sqrt(0.5 * (root.first + root.second));
}

}  // namespace lpsk
