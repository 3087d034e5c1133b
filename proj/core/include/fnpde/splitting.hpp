#ifndef FNPDE_SPLITTING_HPP
#define FNPDE_SPLITTING_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fnpde/geometry.hpp"
#include "fnpde/network.hpp"
#include "fnpde/ritz.hpp"

// Outer least-squares iteration: alternate the pointwise constrained
// projection of the current Hessian field with a Deep Ritz solve of the
// linear variational subproblem, warm-starting each solve from the previous
// network.

namespace fnpde {

enum class OperatorKind { MongeAmpere, Sigma2, Pucci, Minkowski, Transport };

// Closed-form reference solution evaluated through the jet algebra, so the
// gradient and Hessian come from the same expression as the values.
struct ExactSolution {
    std::function<Jet2(const Vec2&)> jet;

    double value(const Vec2& x) const { return jet(x).value; }
    Vec2 grad(const Vec2& x) const { return jet(x).grad; }
    SymMat2 hess(const Vec2& x) const { return jet(x).hess; }
};

struct ProblemSpec {
    std::string name;
    OperatorKind op = OperatorKind::MongeAmpere;
    Domain domain = Domain::square();
    std::optional<Domain> target;  // transport target
    std::function<double(const Vec2&)> f;        // MA / sigma2 / Pucci data
    std::function<double(const Vec2&)> phi;      // Dirichlet boundary data
    std::function<double(const Vec2&)> gauss_k;  // Minkowski curvature
    std::function<double(const Vec2&)> mu0;      // transport source density
    std::function<double(const Vec2&)> mu1;      // transport target density
    double pucci_alpha = 2.0;
    double lambda = 100.0;
    std::optional<ExactSolution> exact;
};

struct ErrorReport {
    double rel_l2{0.0};
    double rel_h2{0.0};
    std::vector<std::vector<double>> pointwise;  // |u_nn - u_ex| on the grid, 0 outside
    int outer_iter{0};
};

struct SolveOptions {
    std::size_t n_c = 3000;
    std::size_t n_b = 300;
    int n_iters = 10;
    bool adaptive = false;
    double seed_fraction = 0.01;
    int resample_every = 10;
    int grid_n = 100;
    TrainSchedule init_schedule{200, 70, 10, 0.01, false};
    int adam_epochs_per_iter = 50;
    // L-BFGS budget of outer iteration n (1-based); defaults to
    // max(4, round(70 * 0.7^(n-1))).
    std::function<int(int)> lbfgs_epochs;

    TrainSchedule schedule_for_iteration(int n) const;
};

struct SolveSinks {
    TrainSinks train;
    std::function<void(const ErrorReport&)> on_error;
    std::function<void(int, const NetworkParams&)> on_iteration_done;
};

struct SolveResult {
    NetworkParams net;
    std::vector<ErrorReport> errors;
    std::vector<LossReport> history;
    bool aborted = false;
};

// Warm start per kind: Poisson with rhs 2 sqrt(f) for the Dirichlet
// operators (Minkowski uses its effective right-hand side with the gradient
// frozen at x - center), quadratic fit (grad u = Id) for transport.
NetworkParams initialize(const ProblemSpec& spec, const Architecture& arch, const SolveOptions& opts,
                         Rng& rng, std::vector<LossReport>* history = nullptr,
                         const SolveSinks* sinks = nullptr);

// Pointwise projections of D^2 u at the given points, including the
// explicit-gradient right-hand sides of the gradient-dependent operators.
ProjectionField project_step(const NetworkParams& net, const std::vector<Vec2>& points,
                             const ProblemSpec& spec);

// Relative L2 / H2 errors against the exact solution on a fixed uniform
// grid clipped to the domain.
ErrorReport error_report(const NetworkParams& net, const ProblemSpec& spec, int grid_n = 100);

SolveResult outer_solve(const ProblemSpec& spec, const Architecture& arch, const SolveOptions& opts,
                        Rng& rng, const SolveSinks* sinks = nullptr);

// PINN baseline at matched epoch budget: the same warm start and the same
// per-iteration schedule, but every "iteration" trains the full nonlinear
// residual loss instead of projecting + solving the variational problem.
SolveResult pinn_solve(const ProblemSpec& spec, const Architecture& arch, const SolveOptions& opts,
                       Rng& rng, const SolveSinks* sinks = nullptr);

// Architecture used for a problem unless overridden: ICNN for the convex
// problems, plain MLP for Pucci.
Architecture default_architecture(const ProblemSpec& spec);

}  // namespace fnpde

#endif
