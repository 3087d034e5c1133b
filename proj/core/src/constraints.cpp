#include "fnpde/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fnpde {

namespace {

bool finite(const SymMat2& a) {
    return std::isfinite(a.xx) && std::isfinite(a.xy) && std::isfinite(a.yy);
}

// Normalize the eigenbasis angle into (-pi/2, pi/2]; eigenvector signs are
// free, so this pins a deterministic representative.
double normalize_angle(double th) {
    while (th > 0.5 * M_PI) th -= M_PI;
    while (th <= -0.5 * M_PI) th += M_PI;
    return th;
}

}  // namespace

Eigen2 eigen2(const SymMat2& a) {
    const double half_tr = 0.5 * (a.xx + a.yy);
    const double half_diff = 0.5 * (a.xx - a.yy);
    const double disc = std::hypot(half_diff, a.xy);
    Eigen2 e;
    e.lambda1 = half_tr - disc;
    e.lambda2 = half_tr + disc;
    // Eigenvector of lambda1 from the better-conditioned row.
    const Vec2 v1{a.xy, e.lambda1 - a.xx};
    const Vec2 v2{e.lambda1 - a.yy, a.xy};
    const Vec2 v = v1.norm2() >= v2.norm2() ? v1 : v2;
    e.theta = v.norm2() == 0.0 ? 0.0 : normalize_angle(std::atan2(v.y, v.x));
    return e;
}

SymMat2 from_eigen(const Eigen2& e) {
    const double c = std::cos(e.theta), s = std::sin(e.theta);
    return {e.lambda1 * c * c + e.lambda2 * s * s,
            (e.lambda1 - e.lambda2) * c * s,
            e.lambda1 * s * s + e.lambda2 * c * c};
}

double det_branch_minimizer(double a1, double a2, double f) {
    const double half_logf = 0.5 * std::log(f);
    const auto g = [&](double t) {
        const double r = f / t;
        return (t - a1) * (t - a1) + (r - a2) * (r - a2);
    };
    const auto gp = [&](double t) {
        const double r = f / t;
        return 2.0 * (t - a1) - 2.0 * (r - a2) * r / t;
    };

    // Global bracketing scan in log t; the stationarity equation is quartic
    // and can have two separated local minima.
    const int n = 1200;
    const double lo = half_logf - 20.0, hi = half_logf + 20.0;
    double best_u = lo, best_g = g(std::exp(lo));
    for (int k = 1; k <= n; ++k) {
        const double u = lo + (hi - lo) * k / n;
        const double val = g(std::exp(u));
        if (val < best_g) {
            best_g = val;
            best_u = u;
        }
    }
    const double du = (hi - lo) / n;
    double ulo = std::max(lo, best_u - du), uhi = std::min(hi, best_u + du);

    // Golden section down to a width safely above the noise floor of g
    // (value comparisons below ~sqrt(eps) * scale are meaningless).
    const double shrink = 0.5 * (std::sqrt(5.0) - 1.0);
    double u1 = uhi - shrink * (uhi - ulo), u2 = ulo + shrink * (uhi - ulo);
    double g1 = g(std::exp(u1)), g2 = g(std::exp(u2));
    while (uhi - ulo > 1e-6) {
        if (g1 <= g2) {
            uhi = u2;
            u2 = u1;
            g2 = g1;
            u1 = uhi - shrink * (uhi - ulo);
            g1 = g(std::exp(u1));
        } else {
            ulo = u1;
            u1 = u2;
            g1 = g2;
            u2 = ulo + shrink * (uhi - ulo);
            g2 = g(std::exp(u2));
        }
    }

    // Newton polish on g'(t) = 0; the derivative is evaluated directly, so
    // it stays full precision where the values have already flattened out.
    const double cell_lo = std::exp(std::max(lo, best_u - du) - 1e-9);
    const double cell_hi = std::exp(std::min(hi, best_u + du) + 1e-9);
    double t = std::exp(0.5 * (ulo + uhi));
    double best_t = t, best_abs = std::abs(gp(t));
    for (int it = 0; it < 60; ++it) {
        const double d1 = gp(t);
        if (std::abs(d1) < best_abs) {
            best_abs = std::abs(d1);
            best_t = t;
        }
        if (std::abs(d1) < 1e-12) break;
        const double r = f / t;
        const double d2 = 2.0 + (2.0 * r * r + 4.0 * (r - a2) * r) / (t * t);
        if (!(d2 > 0.0)) break;
        double tn = t - d1 / d2;
        if (!(tn > cell_lo) || !(tn < cell_hi)) break;
        if (tn == t) break;
        t = tn;
    }
    return best_t;
}

SymMat2 project_monge_ampere(const SymMat2& a, double f) {
    if (!finite(a) || !std::isfinite(f)) throw std::invalid_argument("project_monge_ampere: non-finite input");
    if (f < 0.0) throw std::invalid_argument("project_monge_ampere: f must be nonnegative");
    Eigen2 e = eigen2(a);
    if (f == 0.0) {
        // Degenerate limit: one eigenvalue exactly zero, the other clamped.
        const double c1 = std::max(e.lambda2, 0.0);  // (0, c1)
        const double c2 = std::max(e.lambda1, 0.0);  // (c2, 0)
        const double d1 = e.lambda1 * e.lambda1 + (c1 - e.lambda2) * (c1 - e.lambda2);
        const double d2 = (c2 - e.lambda1) * (c2 - e.lambda1) + e.lambda2 * e.lambda2;
        if (d1 <= d2) {
            e.lambda1 = 0.0;
            e.lambda2 = c1;
        } else {
            e.lambda1 = c2;
            e.lambda2 = 0.0;
        }
        return from_eigen(e);
    }
    const double t = det_branch_minimizer(e.lambda1, e.lambda2, f);
    e.lambda1 = t;
    e.lambda2 = f / t;
    return from_eigen(e);
}

SymMat2 project_sigma2(const SymMat2& a, double f) {
    if (!finite(a) || !(f > 0.0)) throw std::invalid_argument("project_sigma2: need finite input and f > 0");
    Eigen2 e = eigen2(a);
    const double tp = det_branch_minimizer(e.lambda1, e.lambda2, f);
    const double tn = det_branch_minimizer(-e.lambda1, -e.lambda2, f);
    const auto dist2 = [&](double p, double q) {
        return (p - e.lambda1) * (p - e.lambda1) + (q - e.lambda2) * (q - e.lambda2);
    };
    const double dp = dist2(tp, f / tp);
    const double dn = dist2(-tn, -f / tn);
    if (dp <= dn) {
        e.lambda1 = tp;
        e.lambda2 = f / tp;
    } else {
        e.lambda1 = -tn;
        e.lambda2 = -f / tn;
    }
    return from_eigen(e);
}

SymMat2 project_pucci(const SymMat2& a, double f, double alpha) {
    if (!finite(a) || !std::isfinite(f)) throw std::invalid_argument("project_pucci: non-finite input");
    if (!(alpha > 1.0)) throw std::invalid_argument("project_pucci: alpha must exceed 1");
    const Eigen2 e = eigen2(a);
    const double a1 = e.lambda1, a2 = e.lambda2;

    // The constraint alpha*sum(lambda+) + sum(lambda-) = f is linear on each
    // sign orthant: normal n, offset f, box given by sign bounds. Project
    // onto the line, clamp the line parameter to the orthant, keep the best.
    struct Piece {
        double n1, n2;       // constraint normal
        double s1lo, s1hi;   // sign bounds on lambda1
        double s2lo, s2hi;   // sign bounds on lambda2
    };
    const double inf = std::numeric_limits<double>::infinity();
    const Piece pieces[4] = {
        {1.0, 1.0, -inf, 0.0, -inf, 0.0},      // both negative
        {alpha, alpha, 0.0, inf, 0.0, inf},    // both positive
        {1.0, alpha, -inf, 0.0, 0.0, inf},     // lambda1 <= 0 <= lambda2
        {alpha, 1.0, 0.0, inf, -inf, 0.0},     // lambda1 >= 0 >= lambda2
    };

    double best_d = inf, b1 = 0.0, b2 = 0.0;
    for (const Piece& p : pieces) {
        const double nn = p.n1 * p.n1 + p.n2 * p.n2;
        // Foot of the perpendicular from (a1, a2) onto the line.
        const double shift = (f - (p.n1 * a1 + p.n2 * a2)) / nn;
        const double p1 = a1 + shift * p.n1;
        const double p2 = a2 + shift * p.n2;
        // Line direction, then the feasible parameter interval from the box.
        const double d1 = -p.n2, d2 = p.n1;
        double slo = -inf, shi = inf;
        const auto bound = [&](double base, double dir, double blo, double bhi) {
            if (dir > 0.0) {
                slo = std::max(slo, (blo - base) / dir);
                shi = std::min(shi, (bhi - base) / dir);
            } else if (dir < 0.0) {
                slo = std::max(slo, (bhi - base) / dir);
                shi = std::min(shi, (blo - base) / dir);
            }
        };
        bound(p1, d1, p.s1lo, p.s1hi);
        bound(p2, d2, p.s2lo, p.s2hi);
        if (slo > shi) continue;  // line misses this orthant
        const double s = std::clamp(0.0, slo, shi);
        const double c1 = p1 + s * d1, c2 = p2 + s * d2;
        const double dist = (c1 - a1) * (c1 - a1) + (c2 - a2) * (c2 - a2);
        if (dist < best_d) {
            best_d = dist;
            b1 = c1;
            b2 = c2;
        }
    }

    Eigen2 out = e;
    out.lambda1 = b1;
    out.lambda2 = b2;
    return from_eigen(out);
}

double effective_rhs_minkowski(double k, const Vec2& grad) {
    if (!(k > 0.0)) throw std::invalid_argument("effective_rhs_minkowski: K must be positive");
    const double w = 1.0 + grad.norm2();
    return k * w * w;
}

double effective_rhs_transport(double mu0_at_x, double mu1_at_grad) {
    return mu0_at_x / std::max(mu1_at_grad, kTransportDensityFloor);
}

double residual_monge_ampere(const SymMat2& q, double f) { return q.det() - f; }

double residual_pucci(const SymMat2& q, double f, double alpha) {
    const Eigen2 e = eigen2(q);
    const double pos = std::max(e.lambda1, 0.0) + std::max(e.lambda2, 0.0);
    const double neg = std::min(e.lambda1, 0.0) + std::min(e.lambda2, 0.0);
    return alpha * pos + neg - f;
}

}  // namespace fnpde
