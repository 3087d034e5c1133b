#include "fnpde/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fnpde {

bool AdamState::step(std::span<double> params, std::span<const double> grad) {
    for (double g : grad)
        if (!std::isfinite(g)) return false;
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
        v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    return true;
}

void LbfgsState::push_pair(std::vector<double> s, std::vector<double> y, double sy) {
    if (s_.size() == static_cast<std::size_t>(cfg_.history)) {
        s_.erase(s_.begin());
        y_.erase(y_.begin());
        rho_.erase(rho_.begin());
    }
    s_.push_back(std::move(s));
    y_.push_back(std::move(y));
    rho_.push_back(1.0 / sy);
}

void LbfgsState::apply_inverse_hessian(std::span<const double> grad, std::span<double> dir) const {
    const std::size_t n = grad.size();
    std::copy(grad.begin(), grad.end(), dir.begin());
    const std::size_t k = s_.size();
    std::vector<double> alpha(k);
    for (std::size_t i = k; i-- > 0;) {
        double sq = 0.0;
        for (std::size_t j = 0; j < n; ++j) sq += s_[i][j] * dir[j];
        alpha[i] = rho_[i] * sq;
        for (std::size_t j = 0; j < n; ++j) dir[j] -= alpha[i] * y_[i][j];
    }
    if (k > 0) {
        double yy = 0.0, sy = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            yy += y_[k - 1][j] * y_[k - 1][j];
            sy += s_[k - 1][j] * y_[k - 1][j];
        }
        const double gamma = sy / yy;
        for (std::size_t j = 0; j < n; ++j) dir[j] *= gamma;
    }
    for (std::size_t i = 0; i < k; ++i) {
        double yq = 0.0;
        for (std::size_t j = 0; j < n; ++j) yq += y_[i][j] * dir[j];
        const double beta = rho_[i] * yq;
        for (std::size_t j = 0; j < n; ++j) dir[j] += (alpha[i] - beta) * s_[i][j];
    }
}

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Cubic minimizer of a function with values/derivatives at two points
// (Nocedal & Wright eq. 3.59); falls back to bisection when degenerate.
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
    const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
    const double disc = d1 * d1 - da * db;
    if (disc < 0.0) return 0.5 * (a + b);
    const double d2 = std::copysign(std::sqrt(disc), b - a);
    const double denom = db - da + 2.0 * d2;
    if (denom == 0.0) return 0.5 * (a + b);
    double t = b - (b - a) * (db + d2 - d1) / denom;
    const double lo = std::min(a, b), hi = std::max(a, b);
    const double margin = 0.1 * (hi - lo);
    if (!std::isfinite(t) || t < lo + margin || t > hi - margin) t = 0.5 * (a + b);
    return t;
}

struct LineSearchOutcome {
    bool success = false;
    double alpha = 0.0;
    double f = 0.0;
    double dphi = 0.0;
    int evals = 0;
};

}  // namespace

LbfgsResult lbfgs_minimize(
    const Objective& fg, std::span<double> params, LbfgsState& state, int max_iterations,
    const std::function<bool(std::span<double>)>& project,
    const std::function<void(int, double)>& per_iteration,
    const std::function<void(std::span<const double>, std::span<double>)>& direction_filter) {
    const std::size_t n = params.size();
    const LbfgsConfig& cfg = state.cfg_;
    const int iters = max_iterations >= 0 ? max_iterations : cfg.max_iterations;

    LbfgsResult res;
    std::vector<double> grad(n), dir(n), x_trial(n), g_trial(n), best_x(params.begin(), params.end());

    double f = fg(params, grad);
    ++res.evaluations;
    res.best_f = f;

    for (int it = 0; it < iters; ++it) {
        if (inf_norm(grad) < cfg.grad_tol) {
            res.converged = true;
            break;
        }

        state.apply_inverse_hessian(grad, dir);
        for (double& d : dir) d = -d;
        if (direction_filter) direction_filter(params, dir);
        double dphi0 = dot(grad, dir);
        if (!(dphi0 < 0.0)) {  // not a descent direction; fall back to steepest descent
            state.clear();
            for (std::size_t j = 0; j < n; ++j) dir[j] = -grad[j];
            if (direction_filter) direction_filter(params, dir);
            dphi0 = dot(grad, dir);
            if (!(dphi0 < 0.0)) break;  // stationary (possibly against the bounds)
        }

        // Strong Wolfe line search (bracket + zoom with cubic interpolation).
        const double f0 = f;
        const double alpha_init =
            state.history_size() == 0 ? std::min(1.0, 1.0 / std::max(1e-12, inf_norm(grad))) : 1.0;
        LineSearchOutcome ls;
        {
            const auto phi = [&](double a, double& dphi) {
                for (std::size_t j = 0; j < n; ++j) x_trial[j] = params[j] + a * dir[j];
                const double val = fg(x_trial, g_trial);
                ++res.evaluations;
                dphi = dot(g_trial, dir);
                return val;
            };
            int budget = cfg.max_line_search;
            double a_prev = 0.0, f_prev = f0, d_prev = dphi0;
            double a = alpha_init;
            double a_lo = -1.0, f_lo = 0.0, d_lo = 0.0;
            double a_hi = -1.0, f_hi = 0.0, d_hi = 0.0;
            bool bracketed = false;
            while (budget-- > 0) {
                double dp;
                const double fp = phi(a, dp);
                if (!std::isfinite(fp) || fp > f0 + cfg.c1 * a * dphi0 || (a_prev > 0.0 && fp >= f_prev)) {
                    a_lo = a_prev;
                    f_lo = f_prev;
                    d_lo = d_prev;
                    a_hi = a;
                    f_hi = fp;
                    d_hi = dp;
                    bracketed = true;
                    break;
                }
                if (std::abs(dp) <= cfg.c2 * std::abs(dphi0)) {
                    ls.success = true;
                    ls.alpha = a;
                    ls.f = fp;
                    ls.dphi = dp;
                    break;
                }
                if (dp >= 0.0) {
                    a_lo = a;
                    f_lo = fp;
                    d_lo = dp;
                    a_hi = a_prev;
                    f_hi = f_prev;
                    d_hi = d_prev;
                    bracketed = true;
                    break;
                }
                a_prev = a;
                f_prev = fp;
                d_prev = dp;
                a *= 2.0;
            }
            if (!ls.success && bracketed) {
                while (budget-- > 0) {
                    const double a_mid = cubic_minimizer(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi);
                    double dm;
                    const double fm = phi(a_mid, dm);
                    if (!std::isfinite(fm) || fm > f0 + cfg.c1 * a_mid * dphi0 || fm >= f_lo) {
                        a_hi = a_mid;
                        f_hi = fm;
                        d_hi = dm;
                    } else {
                        if (std::abs(dm) <= cfg.c2 * std::abs(dphi0)) {
                            ls.success = true;
                            ls.alpha = a_mid;
                            ls.f = fm;
                            ls.dphi = dm;
                            break;
                        }
                        if (dm * (a_hi - a_lo) >= 0.0) {
                            a_hi = a_lo;
                            f_hi = f_lo;
                            d_hi = d_lo;
                        }
                        a_lo = a_mid;
                        f_lo = fm;
                        d_lo = dm;
                    }
                    if (std::abs(a_hi - a_lo) < 1e-16 * std::max(1.0, std::abs(a_lo))) break;
                }
            }
        }

        if (!ls.success) {
            res.line_search_failed = true;
            break;
        }

        // Accept the step; x_trial/g_trial hold the accepted point already.
        for (std::size_t j = 0; j < n; ++j) x_trial[j] = params[j] + ls.alpha * dir[j];
        const double fv = ls.f;
        res.accepted_steps.push_back({f0, dphi0, ls.alpha, fv, ls.dphi});

        std::vector<double> s(n), y(n);
        for (std::size_t j = 0; j < n; ++j) {
            s[j] = x_trial[j] - params[j];
            y[j] = g_trial[j] - grad[j];
        }
        std::copy(x_trial.begin(), x_trial.end(), params.begin());
        f = fv;
        std::copy(g_trial.begin(), g_trial.end(), grad.begin());

        const double step_norm = inf_norm(s);
        bool projected = false;
        if (project && project(params)) {
            // Projection moved the iterate: secant pair is invalid, history
            // must not mix metrics across the clamp.
            state.clear();
            f = fg(params, grad);
            ++res.evaluations;
            projected = true;
        }
        if (!projected) {
            const double sy = dot(s, y);
            if (sy > 1e-12) state.push_pair(std::move(s), std::move(y), sy);
        }

        if (f < res.best_f) {
            res.best_f = f;
            std::copy(params.begin(), params.end(), best_x.begin());
        }
        ++res.iterations;
        if (per_iteration) per_iteration(it, f);

        // Change-based stops keep chained calls cheap once converged.
        if (std::abs(f0 - f) <= cfg.f_change_tol * std::max(1.0, std::abs(f)) ||
            (!projected && step_norm <= cfg.x_change_tol)) {
            res.converged = true;
            break;
        }
    }

    if (res.best_f < f) std::copy(best_x.begin(), best_x.end(), params.begin());
    return res;
}

}  // namespace fnpde
