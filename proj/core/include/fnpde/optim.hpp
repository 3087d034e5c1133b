#ifndef FNPDE_OPTIM_HPP
#define FNPDE_OPTIM_HPP

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace fnpde {

// Objective with gradient: returns f(x) and fills grad (same size as x).
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class AdamState {
public:
    AdamState(std::size_t n, AdamConfig cfg = {}) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

    const AdamConfig& config() const { return cfg_; }
    long steps() const { return step_; }

    // One bias-corrected update. Returns false (parameters untouched) if the
    // gradient is not finite.
    bool step(std::span<double> params, std::span<const double> grad);

private:
    AdamConfig cfg_;
    std::vector<double> m_, v_;
    long step_ = 0;
};

struct LbfgsConfig {
    int history = 25;
    int max_iterations = 20;    // per call
    double grad_tol = 1e-7;     // infinity norm
    double f_change_tol = 1e-9; // relative objective-change stop
    double x_change_tol = 1e-9; // step infinity-norm stop
    double c1 = 1e-4;           // sufficient decrease
    double c2 = 0.9;            // curvature
    int max_line_search = 25;   // function evaluations per search
};

struct LbfgsResult {
    int iterations = 0;
    int evaluations = 0;
    bool converged = false;          // gradient tolerance reached
    bool line_search_failed = false; // degraded-progress flag
    double best_f = 0.0;
    // (f0, dphi0, alpha, f_alpha, dphi_alpha) of each accepted step.
    std::vector<std::array<double, 5>> accepted_steps;
};

// Persistent curvature history; survives across calls until cleared.
class LbfgsState {
public:
    explicit LbfgsState(std::size_t n, LbfgsConfig cfg = {}) : cfg_(cfg), n_(n) {}

    const LbfgsConfig& config() const { return cfg_; }
    LbfgsConfig& config() { return cfg_; }
    void clear() {
        s_.clear();
        y_.clear();
        rho_.clear();
    }
    std::size_t history_size() const { return s_.size(); }

    friend LbfgsResult lbfgs_minimize(
        const Objective& fg, std::span<double> params, LbfgsState& state, int max_iterations,
        const std::function<bool(std::span<double>)>& project,
        const std::function<void(int, double)>& per_iteration,
        const std::function<void(std::span<const double>, std::span<double>)>& direction_filter);

private:
    void push_pair(std::vector<double> s, std::vector<double> y, double sy);
    void apply_inverse_hessian(std::span<const double> grad, std::span<double> dir) const;

    LbfgsConfig cfg_;
    std::size_t n_;
    std::vector<std::vector<double>> s_, y_;
    std::vector<double> rho_;
};

// Up to max_iterations (default: config) two-loop-recursion steps with a
// strong Wolfe cubic-interpolation line search; stops early once the
// gradient infinity norm falls under the tolerance. Returns the best-seen
// iterate in params. `project`, if given, is applied after each accepted
// step; when it reports a change the curvature pair of that step is
// discarded and the history cleared. `direction_filter`, if given, may zero
// direction components that would leave a feasible set (bound-constrained
// problems keep their history usable this way). `per_iteration` is invoked
// after every completed iteration with (iteration index, current f).
LbfgsResult lbfgs_minimize(
    const Objective& fg, std::span<double> params, LbfgsState& state, int max_iterations = -1,
    const std::function<bool(std::span<double>)>& project = nullptr,
    const std::function<void(int, double)>& per_iteration = nullptr,
    const std::function<void(std::span<const double>, std::span<double>)>& direction_filter = nullptr);

}  // namespace fnpde

#endif
