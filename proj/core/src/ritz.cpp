#include "fnpde/ritz.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "fnpde/autodiff.hpp"
#include "fnpde/optim.hpp"

namespace fnpde {

namespace {

void check_sizes(const CollocationSet& colloc, std::span<const SymMat2> p) {
    if (colloc.points.size() != p.size() || colloc.points.size() != colloc.weights.size())
        throw std::invalid_argument("loss: collocation/projection size mismatch");
}

// Interior + boundary split shared by the Dirichlet-type losses. The
// boundary functional is pre-scaled by lambda so one gradient buffer serves
// both terms; the report keeps the unscaled bc term.
template <class FInt, class FBc>
LossReport assemble(const NetworkParams& net, const CollocationSet& colloc, double lambda,
                    FInt&& f_int, FBc&& f_bc_scaled, std::span<double> grad) {
    LossReport r;
    if (grad.empty()) {
        r.pde_term = batch_objective(net, colloc.points, f_int);
        const double bc_scaled = batch_objective(net, colloc.boundary_points, f_bc_scaled);
        r.bc_term = lambda != 0.0 ? bc_scaled / lambda : 0.0;
        r.total = r.pde_term + bc_scaled;
    } else {
        r.pde_term = batch_objective_gradient(net, colloc.points, f_int, grad);
        const double bc_scaled =
            batch_objective_gradient(net, colloc.boundary_points, f_bc_scaled, grad);
        r.bc_term = lambda != 0.0 ? bc_scaled / lambda : 0.0;
        r.total = r.pde_term + bc_scaled;
    }
    return r;
}

std::vector<double> eval_on(const std::vector<Vec2>& pts,
                            const std::function<double(const Vec2&)>& f) {
    std::vector<double> v(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) v[i] = f(pts[i]);
    return v;
}

}  // namespace

LossReport loss_dirichlet(const NetworkParams& net, const CollocationSet& colloc,
                          std::span<const SymMat2> p, const std::function<double(const Vec2&)>& phi,
                          double lambda, std::span<double> grad) {
    check_sizes(colloc, p);
    const double inv_nc = 1.0 / static_cast<double>(colloc.points.size());
    const double inv_nb = 1.0 / static_cast<double>(colloc.boundary_points.size());
    const std::vector<double> phi_b = eval_on(colloc.boundary_points, phi);

    auto f_int = [&](const auto& j, std::size_t i) {
        const auto dxx = j.hxx - p[i].xx;
        const auto dxy = j.hxy - p[i].xy;
        const auto dyy = j.hyy - p[i].yy;
        return (dxx * dxx + 2.0 * (dxy * dxy) + dyy * dyy) * (colloc.weights[i] * inv_nc);
    };
    auto f_bc = [&](const auto& j, std::size_t i) {
        const auto d = j.value - phi_b[i];
        return d * d * (lambda * inv_nb);
    };
    return assemble(net, colloc, lambda, f_int, f_bc, grad);
}

LossReport loss_transport(const NetworkParams& net, const CollocationSet& colloc,
                          std::span<const SymMat2> p, const std::vector<Vec2>& target_boundary,
                          double lambda, std::span<double> grad) {
    check_sizes(colloc, p);
    if (colloc.boundary_points.empty() || target_boundary.empty())
        throw std::invalid_argument("loss_transport: empty boundary sample");
    const double inv_nc = 1.0 / static_cast<double>(colloc.points.size());
    const double inv_nbx = 1.0 / static_cast<double>(colloc.boundary_points.size());
    const double inv_nby = 1.0 / static_cast<double>(target_boundary.size());

    // Match up the two boundary samples through grad v: for each source
    // point its nearest target, and for each target its nearest mapped
    // source. Gradients later flow only through these pairs.
    const std::size_t nbx = colloc.boundary_points.size();
    const std::size_t nby = target_boundary.size();
    std::vector<Vec2> mapped(nbx);
    for (std::size_t i = 0; i < nbx; ++i) mapped[i] = eval_grad(net, colloc.boundary_points[i]);
    std::vector<std::size_t> nearest_target(nbx);
    for (std::size_t i = 0; i < nbx; ++i) nearest_target[i] = nearest_index(mapped[i], target_boundary);
    std::vector<std::vector<std::size_t>> matched_targets(nbx);
    for (std::size_t j = 0; j < nby; ++j) {
        const std::size_t i = nearest_index(target_boundary[j], mapped);
        matched_targets[i].push_back(j);
    }

    auto f_int = [&](const auto& j, std::size_t i) {
        const auto dxx = j.hxx - p[i].xx;
        const auto dxy = j.hxy - p[i].xy;
        const auto dyy = j.hyy - p[i].yy;
        return (dxx * dxx + 2.0 * (dxy * dxy) + dyy * dyy) * (colloc.weights[i] * inv_nc);
    };
    auto f_bc = [&](const auto& j, std::size_t i) {
        const Vec2 yt = target_boundary[nearest_target[i]];
        auto dx = j.gx - yt.x;
        auto dy = j.gy - yt.y;
        auto term = (dx * dx + dy * dy) * inv_nbx;
        for (std::size_t t : matched_targets[i]) {
            auto ex = j.gx - target_boundary[t].x;
            auto ey = j.gy - target_boundary[t].y;
            term += (ex * ex + ey * ey) * inv_nby;
        }
        return term * lambda;
    };
    return assemble(net, colloc, lambda, f_int, f_bc, grad);
}

LossReport loss_poisson_init(const NetworkParams& net, const CollocationSet& colloc,
                             const std::function<double(const Vec2&)>& rhs,
                             const std::function<double(const Vec2&)>& phi, double lambda,
                             std::span<double> grad) {
    const double inv_nc = 1.0 / static_cast<double>(colloc.points.size());
    const double inv_nb = 1.0 / static_cast<double>(colloc.boundary_points.size());
    const std::vector<double> g_int = eval_on(colloc.points, rhs);
    const std::vector<double> phi_b = eval_on(colloc.boundary_points, phi);

    auto f_int = [&](const auto& j, std::size_t i) {
        return (0.5 * (j.gx * j.gx + j.gy * j.gy) + j.value * g_int[i]) * (colloc.weights[i] * inv_nc);
    };
    auto f_bc = [&](const auto& j, std::size_t i) {
        const auto d = j.value - phi_b[i];
        return d * d * (lambda * inv_nb);
    };
    return assemble(net, colloc, lambda, f_int, f_bc, grad);
}

LossReport loss_quadratic_fit(const NetworkParams& net, const CollocationSet& colloc,
                              std::span<double> grad) {
    const double inv_nc = 1.0 / static_cast<double>(colloc.points.size());
    auto f_int = [&](const auto& j, std::size_t i) {
        const Vec2& x = colloc.points[i];
        const auto dv = j.value - 0.5 * x.norm2();
        const auto dx = j.gx - x.x;
        const auto dy = j.gy - x.y;
        return (dv * dv + dx * dx + dy * dy) * (colloc.weights[i] * inv_nc);
    };
    LossReport r;
    if (grad.empty())
        r.pde_term = batch_objective(net, colloc.points, f_int);
    else
        r.pde_term = batch_objective_gradient(net, colloc.points, f_int, grad);
    r.total = r.pde_term;
    return r;
}

LossReport loss_pinn_baseline(const NetworkParams& net, const CollocationSet& colloc,
                              const std::function<double(const Vec2&)>& f,
                              const std::function<double(const Vec2&)>& phi, double lambda,
                              std::span<double> grad) {
    const double inv_nc = 1.0 / static_cast<double>(colloc.points.size());
    const double inv_nb = 1.0 / static_cast<double>(colloc.boundary_points.size());
    const std::vector<double> f_int_vals = eval_on(colloc.points, f);
    const std::vector<double> phi_b = eval_on(colloc.boundary_points, phi);

    auto f_res = [&](const auto& j, std::size_t i) {
        const auto det = j.hxx * j.hyy - j.hxy * j.hxy;
        const auto r = det - f_int_vals[i];
        return r * r * (colloc.weights[i] * inv_nc);
    };
    auto f_bc = [&](const auto& j, std::size_t i) {
        const auto d = j.value - phi_b[i];
        return d * d * (lambda * inv_nb);
    };
    return assemble(net, colloc, lambda, f_res, f_bc, grad);
}

namespace {

struct BoundLoss {
    const TrainProblem* prob;
    const CollocationSet* colloc;
    std::vector<SymMat2> p_bound;  // aligned with colloc->points when a field is used

    LossReport eval(const NetworkParams& net, std::span<double> grad) const {
        switch (prob->kind) {
            case LossKind::Dirichlet:
                return loss_dirichlet(net, *colloc, p_bound, prob->phi, prob->lambda, grad);
            case LossKind::Transport:
                return loss_transport(net, *colloc, p_bound, prob->target_boundary, prob->lambda, grad);
            case LossKind::PoissonInit:
                return loss_poisson_init(net, *colloc, prob->rhs, prob->phi, prob->lambda, grad);
            case LossKind::QuadraticFit:
                return loss_quadratic_fit(net, *colloc, grad);
            case LossKind::PinnBaseline:
                return loss_pinn_baseline(net, *colloc, prob->rhs, prob->phi, prob->lambda, grad);
        }
        throw std::logic_error("train: unknown loss kind");
    }
};

}  // namespace

TrainOutput train(NetworkParams& net, const TrainProblem& prob, const CollocationSet& colloc0,
                  const TrainSchedule& sched, Rng& rng, long epoch_offset, int outer_iter,
                  const TrainSinks* sinks) {
    const bool has_field = prob.field != nullptr;
    const bool adaptive = sched.adaptive && has_field && prob.domain != nullptr;
    if (has_field && colloc0.points.size() != prob.field->size())
        throw std::invalid_argument("train: collocation set must start on the projection field points");

    TrainOutput out;
    CollocationSet colloc = colloc0;
    BoundLoss loss{&prob, &colloc, {}};
    if (has_field) loss.p_bound = prob.field->p;

    // ICNN weights stay nonnegative by optimizing the square root of the
    // constrained entries; both optimizers then run unconstrained and the
    // network is convex at every step.
    const bool icnn = net.arch().kind == NetKind::ICNN;
    const std::vector<std::uint8_t> mask = net.constrained_mask();
    if (icnn) net.enforce_nonneg();

    const auto sync_net = [&](std::span<const double> th) {
        auto& w = net.values();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = mask[i] ? th[i] * th[i] : th[i];
    };
    std::vector<double> theta(net.size());
    for (std::size_t i = 0; i < theta.size(); ++i)
        theta[i] = mask[i] ? std::sqrt(net.values()[i]) : net.values()[i];

    std::vector<double> theta_good(theta);
    std::vector<double> grad(theta.size());

    LossReport last;
    const auto objective = [&](std::span<const double> x, std::span<double> g) {
        sync_net(x);
        std::fill(g.begin(), g.end(), 0.0);
        last = loss.eval(net, g);
        for (std::size_t i = 0; i < g.size(); ++i)
            if (mask[i]) g[i] *= 2.0 * x[i];
        return last.total;
    };

    long local_epoch = 0;
    bool pending_resample_flag = false;

    const auto resample = [&]() {
        if (!adaptive) return;
        sync_net(theta);
        const std::size_t n_c = colloc0.points.size();
        const std::vector<Vec2> pool = sample_interior(*prob.domain, 10 * n_c, rng);
        const std::size_t n_seeds = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(sched.seed_fraction * static_cast<double>(n_c))));
        const auto indicator = [&](const Vec2& xs) {
            const Jet2 j = eval_jet(net, xs);
            const SymMat2& p = prob.field->p[nearest_index(xs, prob.field->points)];
            return (j.hess - p).frob();
        };
        ResampleResult rr = adaptive_resample(pool, indicator, n_seeds, n_c, rng);
        colloc.points = std::move(rr.colloc.points);
        colloc.weights = std::move(rr.colloc.weights);
        for (std::size_t i = 0; i < colloc.points.size(); ++i)
            loss.p_bound[i] = prob.field->p[nearest_index(colloc.points[i], prob.field->points)];
        if (sinks && sinks->on_resample) sinks->on_resample(rr.density, pool);
        pending_resample_flag = true;
    };

    const auto record = [&](Stage stage, double wall) {
        LossReport r = last;
        r.epoch = epoch_offset + local_epoch;
        r.outer_iter = outer_iter;
        r.stage = stage;
        r.resampled = pending_resample_flag;
        r.wall_seconds = wall;
        pending_resample_flag = false;
        out.history.push_back(r);
        if (sinks && sinks->on_epoch) sinks->on_epoch(r);
        ++local_epoch;
    };

    using Clock = std::chrono::steady_clock;

    const auto abort_with_last_good = [&]() {
        sync_net(theta_good);
        out.aborted = true;
    };

    // Stage 1: Adam pre-training.
    AdamState adam(theta.size());
    for (int e = 0; e < sched.adam_epochs; ++e) {
        if (local_epoch > 0 && sched.resample_every > 0 && local_epoch % sched.resample_every == 0)
            resample();
        const auto t0 = Clock::now();
        const double f = objective(theta, grad);
        if (!std::isfinite(f)) {
            abort_with_last_good();
            return out;
        }
        theta_good = theta;
        if (!adam.step(theta, grad)) {
            abort_with_last_good();
            return out;
        }
        record(Stage::Adam, std::chrono::duration<double>(Clock::now() - t0).count());
    }

    // Stage 2: L-BFGS refinement. One epoch is one optimizer call of up to
    // 20 iterations; converged calls return cheaply, so chained calls act as
    // a budget rather than a fixed amount of work.
    LbfgsState lbfgs(theta.size());
    for (int call = 0; call < sched.lbfgs_epochs; ++call) {
        if (local_epoch > 0 && sched.resample_every > 0 && local_epoch % sched.resample_every == 0) {
            resample();
            lbfgs.clear();  // objective changed under the history
        }
        const auto t0 = Clock::now();
        const LbfgsResult res = lbfgs_minimize(objective, theta, lbfgs);
        if (!std::isfinite(res.best_f)) {
            abort_with_last_good();
            return out;
        }
        theta_good = theta;
        record(Stage::Lbfgs, std::chrono::duration<double>(Clock::now() - t0).count());
        if (res.line_search_failed) break;  // no further progress possible
    }

    sync_net(theta);
    return out;
}

}  // namespace fnpde
