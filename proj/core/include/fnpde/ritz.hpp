#ifndef FNPDE_RITZ_HPP
#define FNPDE_RITZ_HPP

#include <functional>
#include <span>
#include <vector>

#include "fnpde/network.hpp"
#include "fnpde/sampling.hpp"
#include "fnpde/tensor.hpp"

// Loss assembly for the variational (biharmonic) subproblem and the inner
// two-stage training loop (Adam pre-training, L-BFGS refinement) with
// optional seed-based adaptive resampling of the collocation points.

namespace fnpde {

// Target matrices of the splitting step, with the gradients they were
// computed from, at a fixed point set.
struct ProjectionField {
    std::vector<Vec2> points;
    std::vector<SymMat2> p;
    std::vector<Vec2> grads;

    std::size_t size() const { return points.size(); }
};

enum class Stage { Adam, Lbfgs };

struct LossReport {
    double total{0.0};
    double pde_term{0.0};
    double bc_term{0.0};
    long epoch{0};
    int outer_iter{0};
    Stage stage{Stage::Adam};
    bool resampled{false};
    double wall_seconds{0.0};
};

// One Adam epoch is a single full-batch gradient step; one L-BFGS epoch is
// one optimizer call of up to 20 iterations with a strong Wolfe line search
// (tolerance-based early stopping makes converged calls cheap).
struct TrainSchedule {
    int adam_epochs = 200;
    int lbfgs_epochs = 70;
    int resample_every = 10;
    double seed_fraction = 0.01;
    bool adaptive = false;
};

// pde = (1/n_c) sum_i w_i |D^2 v(x_i) - P_i|_F^2,
// bc  = (1/n_b) sum_i (v(x_b,i) - phi(x_b,i))^2, total = pde + lambda * bc.
// When grad is non-empty the parameter gradient of the total is accumulated
// into it (caller zeroes).
LossReport loss_dirichlet(const NetworkParams& net, const CollocationSet& colloc,
                          std::span<const SymMat2> p, const std::function<double(const Vec2&)>& phi,
                          double lambda, std::span<double> grad = {});

// Same pde term; the boundary term is the discrete bidirectional Hausdorff
// penalty on grad v between the source boundary sample (colloc.boundary_points)
// and the target boundary sample. Gradients flow only through the nearest
// pairs (first index on ties).
LossReport loss_transport(const NetworkParams& net, const CollocationSet& colloc,
                          std::span<const SymMat2> p, const std::vector<Vec2>& target_boundary,
                          double lambda, std::span<double> grad = {});

// Deep Ritz energy whose minimizer solves laplace v = rhs weakly:
// pde = (1/n_c) sum_i w_i (0.5 |grad v|^2 + rhs(x_i) v(x_i)).
LossReport loss_poisson_init(const NetworkParams& net, const CollocationSet& colloc,
                             const std::function<double(const Vec2&)>& rhs,
                             const std::function<double(const Vec2&)>& phi, double lambda,
                             std::span<double> grad = {});

// Value-and-gradient fit of the quadratic 0.5 |x|^2 (transport warm start,
// grad u = Id): pde = (1/n_c) sum_i w_i ((v - 0.5|x|^2)^2 + |grad v - x|^2).
LossReport loss_quadratic_fit(const NetworkParams& net, const CollocationSet& colloc,
                              std::span<double> grad = {});

// Full PINN residual for the Monge-Ampere baseline:
// pde = (1/n_c) sum_i w_i (det D^2 v(x_i) - f(x_i))^2.
LossReport loss_pinn_baseline(const NetworkParams& net, const CollocationSet& colloc,
                              const std::function<double(const Vec2&)>& f,
                              const std::function<double(const Vec2&)>& phi, double lambda,
                              std::span<double> grad = {});

enum class LossKind { Dirichlet, Transport, PoissonInit, QuadraticFit, PinnBaseline };

struct TrainProblem {
    LossKind kind = LossKind::Dirichlet;
    const Domain* domain = nullptr;
    const ProjectionField* field = nullptr;  // Dirichlet / Transport
    std::function<double(const Vec2&)> phi;  // Dirichlet-type boundary data
    std::function<double(const Vec2&)> rhs;  // Poisson right-hand side or PINN data f
    std::vector<Vec2> target_boundary;       // Transport
    double lambda = 100.0;
};

struct TrainSinks {
    std::function<void(const LossReport&)> on_epoch;
    std::function<void(const SeedDensity&, const std::vector<Vec2>&)> on_resample;
};

struct TrainOutput {
    std::vector<LossReport> history;
    bool aborted = false;
};

// Runs adam_epochs Adam steps followed by lbfgs_epochs L-BFGS iterations on
// the problem's loss over the given collocation set. With sched.adaptive and
// a projection field present, the interior points are importance-resampled
// every resample_every epochs (pool of 10 n_c fresh uniform points, seeds at
// sched.seed_fraction * n_c); the projection targets follow by nearest point
// of the original field. ICNN weight constraints are re-imposed after every
// optimizer step and the L-BFGS memory is dropped whenever a clamp changes a
// parameter. A non-finite loss aborts with the last good parameters.
TrainOutput train(NetworkParams& net, const TrainProblem& prob, const CollocationSet& colloc0,
                  const TrainSchedule& sched, Rng& rng, long epoch_offset = 0, int outer_iter = 0,
                  const TrainSinks* sinks = nullptr);

}  // namespace fnpde

#endif
