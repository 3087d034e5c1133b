#include <doctest.h>

#include <cmath>
#include <vector>

#include "fnpde/autodiff.hpp"
#include "fnpde/network.hpp"
#include "fnpde/ritz.hpp"
#include "fnpde/rng.hpp"

using namespace fnpde;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

CollocationSet small_colloc(Rng& rng, std::size_t n_c = 40, std::size_t n_b = 16) {
    return uniform_collocation(Domain::square(), n_c, n_b, rng);
}

// Directional finite-difference check of an accumulated loss gradient.
template <class EvalFn>
void check_gradient(const NetworkParams& net0, EvalFn&& eval, Rng& rng, double tol = 1e-5) {
    NetworkParams net = net0;
    std::vector<double> grad(net.size(), 0.0);
    eval(net, std::span<double>(grad));

    for (int k = 0; k < 10; ++k) {
        std::vector<double> dir(net.size());
        double nrm = 0.0;
        for (auto& d : dir) {
            d = rng.uniform(-1.0, 1.0);
            nrm += d * d;
        }
        nrm = std::sqrt(nrm);
        for (auto& d : dir) d /= nrm;

        const double h = 1e-5;
        const std::vector<double> base = net.values();
        for (std::size_t i = 0; i < base.size(); ++i) net.values()[i] = base[i] + h * dir[i];
        const double fp = eval(net, std::span<double>{});
        for (std::size_t i = 0; i < base.size(); ++i) net.values()[i] = base[i] - h * dir[i];
        const double fm = eval(net, std::span<double>{});
        net.values() = base;

        double an = 0.0;
        for (std::size_t i = 0; i < dir.size(); ++i) an += dir[i] * grad[i];
        CHECK(rel_err(an, (fp - fm) / (2.0 * h)) < tol);
    }
}

}  // namespace

TEST_CASE("dirichlet loss on hand-built inputs") {
    Rng rng(1);
    const CollocationSet colloc = small_colloc(rng);
    NetworkParams zero((Architecture::mlp()));

    // Zero network against P = I: every interior term is |0 - I|^2 = 2.
    const std::vector<SymMat2> p(colloc.size(), SymMat2::identity());
    const auto zero_phi = [](const Vec2&) { return 0.0; };
    const LossReport r = loss_dirichlet(zero, colloc, p, zero_phi, 100.0);
    CHECK(r.pde_term == doctest::Approx(2.0));
    CHECK(r.bc_term == doctest::Approx(0.0));
    CHECK(r.total == doctest::Approx(2.0));

    // Linearity in lambda.
    const auto phi = [](const Vec2& v) { return v.x + 0.3; };
    const LossReport r1 = loss_dirichlet(zero, colloc, p, phi, 1.0);
    const LossReport r2 = loss_dirichlet(zero, colloc, p, phi, 2.0);
    CHECK(r2.total - r1.total == doctest::Approx(r1.bc_term));
    CHECK(r1.total == doctest::Approx(r1.pde_term + 1.0 * r1.bc_term).epsilon(1e-12));
    CHECK(r2.total == doctest::Approx(r2.pde_term + 2.0 * r2.bc_term).epsilon(1e-12));
}

TEST_CASE("dirichlet loss vanishes when the network already interpolates") {
    Rng rng(2);
    const CollocationSet colloc = small_colloc(rng);
    const NetworkParams net = init_network(Architecture::mlp(), rng);
    // Take P and phi from the network itself.
    std::vector<SymMat2> p(colloc.size());
    for (std::size_t i = 0; i < colloc.size(); ++i) p[i] = eval_jet(net, colloc.points[i]).hess;
    const auto phi = [&](const Vec2& x) { return forward(net, x); };
    const LossReport r = loss_dirichlet(net, colloc, p, phi, 100.0);
    CHECK(r.total == doctest::Approx(0.0).epsilon(1e-20));
}

TEST_CASE("dirichlet loss is permutation invariant with uniform weights") {
    Rng rng(3);
    CollocationSet colloc = small_colloc(rng);
    const NetworkParams net = init_network(Architecture::mlp(), rng);
    std::vector<SymMat2> p(colloc.size());
    for (std::size_t i = 0; i < colloc.size(); ++i) p[i] = SymMat2{1.0, 0.1, 0.5};
    const auto phi = [](const Vec2& v) { return v.x * v.y; };
    const double before = loss_dirichlet(net, colloc, p, phi, 10.0).total;
    std::reverse(colloc.points.begin(), colloc.points.end());
    const double after = loss_dirichlet(net, colloc, p, phi, 10.0).total;
    CHECK(before == doctest::Approx(after).epsilon(1e-13));
}

TEST_CASE("loss gradients match finite differences") {
    Rng rng(4);
    const CollocationSet colloc = small_colloc(rng, 25, 10);
    const NetworkParams net = init_network(Architecture::mlp(3, 8), rng);
    std::vector<SymMat2> p(colloc.size(), SymMat2{0.7, -0.2, 1.3});
    const auto phi = [](const Vec2& v) { return std::sin(v.x) + v.y; };
    const auto rhs = [](const Vec2& v) { return 2.0 * std::sqrt(std::abs(v.x) + 0.5); };
    const auto fdata = [](const Vec2& v) { return 1.0 + v.x * v.y; };

    SUBCASE("dirichlet") {
        check_gradient(net,
                       [&](const NetworkParams& n, std::span<double> g) {
                           return loss_dirichlet(n, colloc, p, phi, 50.0, g).total;
                       },
                       rng);
    }
    SUBCASE("poisson") {
        check_gradient(net,
                       [&](const NetworkParams& n, std::span<double> g) {
                           return loss_poisson_init(n, colloc, rhs, phi, 50.0, g).total;
                       },
                       rng);
    }
    SUBCASE("pinn") {
        check_gradient(net,
                       [&](const NetworkParams& n, std::span<double> g) {
                           return loss_pinn_baseline(n, colloc, fdata, phi, 100.0, g).total;
                       },
                       rng);
    }
    SUBCASE("quadratic fit") {
        check_gradient(net,
                       [&](const NetworkParams& n, std::span<double> g) {
                           return loss_quadratic_fit(n, colloc, g).total;
                       },
                       rng);
    }
    SUBCASE("transport") {
        Rng trng(5);
        std::vector<Vec2> target = sample_boundary(Domain::ellipse({3.5, 0.0}, 2.0, 0.5), 12, trng);
        check_gradient(net,
                       [&](const NetworkParams& n, std::span<double> g) {
                           return loss_transport(n, colloc, p, target, 50.0, g).total;
                       },
                       rng);
    }
}

TEST_CASE("transport boundary term on a single mismatched pair") {
    Rng rng(6);
    CollocationSet colloc = small_colloc(rng, 10, 1);
    std::vector<SymMat2> p(colloc.size());
    // One source point whose image sits 0.5 away from the only target: both
    // Hausdorff sums see the same squared distance.
    NetworkParams lin(Architecture{NetKind::MLP, {2, 1}});
    lin.values() = {0.25, 0.0, 0.0};  // v = 0.25 x -> grad v = (0.25, 0)
    colloc.boundary_points = {{0.0, 0.0}};
    for (auto& q : p) q = SymMat2{};
    const std::vector<Vec2> target{{0.75, 0.0}};  // distance 0.5 from (0.25, 0)
    const LossReport r = loss_transport(lin, colloc, p, target, 1.0);
    CHECK(r.bc_term == doctest::Approx(0.25 + 0.25));
}

TEST_CASE("transport boundary term vanishes when the mapped sample covers the targets") {
    // grad v constant, target sample = that constant: both Hausdorff sums are 0.
    NetworkParams lin(Architecture{NetKind::MLP, {2, 1}});
    lin.values() = {0.3, -0.2, 0.1};  // grad v = (0.3, -0.2) everywhere
    CollocationSet colloc;
    colloc.points = {{0.1, 0.1}};
    colloc.weights = {1.0};
    colloc.boundary_points = {{0.4, 0.9}, {-0.3, 0.2}};
    const std::vector<SymMat2> p(1);
    const std::vector<Vec2> target{{0.3, -0.2}};  // exactly grad v
    const LossReport r = loss_transport(lin, colloc, p, target, 1.0);
    CHECK(r.bc_term == doctest::Approx(0.0));
}

TEST_CASE("poisson energy of the zero network with zero data is zero") {
    Rng rng(8);
    const CollocationSet colloc = small_colloc(rng);
    NetworkParams zero((Architecture::mlp()));
    const auto zf = [](const Vec2&) { return 0.0; };
    const LossReport r = loss_poisson_init(zero, colloc, zf, zf, 100.0);
    CHECK(r.total == 0.0);
}

TEST_CASE("poisson energy decreases along its own gradient") {
    Rng rng(9);
    const CollocationSet colloc = small_colloc(rng);
    NetworkParams net = init_network(Architecture::mlp(), rng);
    const auto rhs = [](const Vec2& v) { return 2.0 * std::sqrt(1.0 + v.norm2()); };
    const auto phi = [](const Vec2&) { return 0.0; };
    std::vector<double> grad(net.size(), 0.0);
    const double f0 = loss_poisson_init(net, colloc, rhs, phi, 100.0, grad).total;
    double norm2 = 0.0;
    for (double g : grad) norm2 += g * g;
    const double step = 1e-3 / std::sqrt(norm2);
    for (std::size_t i = 0; i < net.size(); ++i) net.values()[i] -= step * grad[i];
    const double f1 = loss_poisson_init(net, colloc, rhs, phi, 100.0).total;
    CHECK(f1 < f0);
}

TEST_CASE("pinn loss on the zero network with unit data") {
    Rng rng(10);
    const CollocationSet colloc = small_colloc(rng);
    NetworkParams zero((Architecture::mlp()));
    const auto one = [](const Vec2&) { return 1.0; };
    const auto zf = [](const Vec2&) { return 0.0; };
    const LossReport r = loss_pinn_baseline(zero, colloc, one, zf, 100.0);
    CHECK(r.pde_term == doctest::Approx(1.0));
}

TEST_CASE("train produces a monotone best loss on a quadratic-fit toy problem") {
    Rng rng(11);
    const CollocationSet colloc = small_colloc(rng, 60, 10);
    NetworkParams net = init_network(Architecture::icnn(2, 6), rng);
    TrainProblem prob;
    prob.kind = LossKind::QuadraticFit;
    const Domain dom = Domain::square();
    prob.domain = &dom;

    TrainSchedule sched;
    sched.adam_epochs = 0;
    sched.lbfgs_epochs = 3;
    sched.adaptive = false;
    const TrainOutput out = train(net, prob, colloc, sched, rng);
    REQUIRE(out.history.size() >= 1);
    double best = out.history.front().total;
    for (const auto& r : out.history) {
        CHECK(r.total <= best + 1e-6);
        best = std::min(best, r.total);
    }
    CHECK_FALSE(out.aborted);
}

TEST_CASE("non-adaptive training keeps weights at one") {
    Rng rng(12);
    const CollocationSet colloc = small_colloc(rng, 30, 8);
    NetworkParams net = init_network(Architecture::mlp(2, 6), rng);

    ProjectionField field;
    field.points = colloc.points;
    field.p.assign(colloc.size(), SymMat2::identity());
    field.grads.assign(colloc.size(), Vec2{});

    TrainProblem prob;
    prob.kind = LossKind::Dirichlet;
    const Domain dom = Domain::square();
    prob.domain = &dom;
    prob.field = &field;
    prob.phi = [](const Vec2&) { return 0.0; };
    prob.lambda = 10.0;

    TrainSchedule sched;
    sched.adam_epochs = 5;
    sched.lbfgs_epochs = 5;
    sched.adaptive = false;
    const TrainOutput out = train(net, prob, colloc, sched, rng);
    for (const auto& r : out.history) CHECK_FALSE(r.resampled);
}

TEST_CASE("adaptive training resamples on cadence and stays finite") {
    Rng rng(13);
    const CollocationSet colloc = small_colloc(rng, 50, 10);
    NetworkParams net = init_network(Architecture::mlp(2, 6), rng);

    ProjectionField field;
    field.points = colloc.points;
    field.p.assign(colloc.size(), SymMat2::identity());
    field.grads.assign(colloc.size(), Vec2{});

    TrainProblem prob;
    prob.kind = LossKind::Dirichlet;
    const Domain dom = Domain::square();
    prob.domain = &dom;
    prob.field = &field;
    prob.phi = [](const Vec2&) { return 0.0; };
    prob.lambda = 10.0;

    TrainSchedule sched;
    sched.adam_epochs = 12;
    sched.lbfgs_epochs = 15;
    sched.resample_every = 10;
    sched.seed_fraction = 0.1;
    sched.adaptive = true;

    int resamples = 0;
    TrainSinks sinks;
    sinks.on_resample = [&](const SeedDensity&, const std::vector<Vec2>&) { ++resamples; };
    const TrainOutput out = train(net, prob, colloc, sched, rng, 0, 1, &sinks);
    CHECK(resamples >= 2);
    int flagged = 0;
    for (const auto& r : out.history) {
        CHECK(std::isfinite(r.total));
        if (r.resampled) ++flagged;
    }
    CHECK(flagged == resamples);
}
