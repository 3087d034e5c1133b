#include <doctest.h>

#include <cmath>
#include <vector>

#include "fnpde/autodiff.hpp"
#include "fnpde/constraints.hpp"
#include "fnpde/network.hpp"
#include "fnpde/rng.hpp"

using namespace fnpde;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

NetworkParams linear_net(double w1, double w2, double b) {
    Architecture arch;
    arch.kind = NetKind::MLP;
    arch.widths = {2, 1};
    NetworkParams net(arch);
    net.values() = {w1, w2, b};
    return net;
}

NetworkParams random_mlp(Rng& rng, int layers = 4, int width = 10) {
    return init_network(Architecture::mlp(layers, width), rng);
}

// Central finite difference of a scalar network in a random parameter
// direction.
template <class F>
double directional_fd(NetworkParams net, const std::vector<double>& dir, F&& value, double h) {
    auto& v = net.values();
    std::vector<double> base = v;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = base[i] + h * dir[i];
    const double fp = value(net);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = base[i] - h * dir[i];
    const double fm = value(net);
    return (fp - fm) / (2.0 * h);
}

}  // namespace

TEST_CASE("linear network jet") {
    const NetworkParams net = linear_net(2.0, 3.0, 1.0);
    const Jet2 j = eval_jet(net, {1.0, 1.0});
    CHECK(j.value == doctest::Approx(6.0));
    CHECK(j.grad.x == doctest::Approx(2.0));
    CHECK(j.grad.y == doctest::Approx(3.0));
    CHECK(j.hess.frob2() == doctest::Approx(0.0));
}

TEST_CASE("one-hidden-unit softplus icnn") {
    Architecture arch;
    arch.kind = NetKind::ICNN;
    arch.widths = {2, 1, 1};
    NetworkParams net(arch);
    // layer 0: skip (1, 0), bias 0; layer 1: w 1, skip 0, bias 0.
    net.values().assign(net.size(), 0.0);
    net.values()[net.layout()[0].skip] = 1.0;
    net.values()[net.layout()[1].w] = 1.0;

    const Jet2 j = eval_jet(net, {0.0, 0.0});
    CHECK(j.value == doctest::Approx(std::log(2.0)));
    CHECK(j.grad.x == doctest::Approx(0.5));
    CHECK(j.grad.y == doctest::Approx(0.0));
    CHECK(j.hess.xx == doctest::Approx(0.25));
    CHECK(j.hess.yy == doctest::Approx(0.0));
    CHECK(forward(net, {0.3, 0.9}) == doctest::Approx(softplus(0.3)));
}

TEST_CASE("mlp jet hessian matches finite differences") {
    Rng rng(1234);
    for (int trial = 0; trial < 5; ++trial) {
        const NetworkParams net = random_mlp(rng);
        const Vec2 x{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
        const Jet2 j = eval_jet(net, x);
        const double h = 1e-4;
        const auto f = [&](double a, double b) { return forward(net, {a, b}); };
        const double hxx = (f(x.x + h, x.y) - 2 * f(x.x, x.y) + f(x.x - h, x.y)) / (h * h);
        const double hyy = (f(x.x, x.y + h) - 2 * f(x.x, x.y) + f(x.x, x.y - h)) / (h * h);
        const double hxy =
            (f(x.x + h, x.y + h) - f(x.x + h, x.y - h) - f(x.x - h, x.y + h) + f(x.x - h, x.y - h)) /
            (4 * h * h);
        CHECK(rel_err(j.hess.xx, hxx) < 1e-5);
        CHECK(rel_err(j.hess.yy, hyy) < 1e-5);
        CHECK(rel_err(j.hess.xy, hxy) < 1e-5);
        const double gx = (f(x.x + h, x.y) - f(x.x - h, x.y)) / (2 * h);
        CHECK(rel_err(j.grad.x, gx) < 1e-7);
    }
}

TEST_CASE("parameter gradient of v(x)^2 on the linear net") {
    const NetworkParams net = linear_net(2.0, 3.0, 1.0);
    const std::vector<Vec2> pts{{1.0, 1.0}};
    const auto obj = [](const auto& j, std::size_t) { return j.value * j.value; };
    const std::vector<double> g = param_gradient(net, pts, obj);
    // d(v^2)/dtheta = 2 v dv/dtheta with dv/dw = x, dv/db = 1 and v = 6.
    CHECK(g[0] == doctest::Approx(12.0));
    CHECK(g[1] == doctest::Approx(12.0));
    CHECK(g[2] == doctest::Approx(12.0));
}

TEST_CASE("parameter gradient of |D2v - I|^2 matches directional fd") {
    Rng rng(77);
    const NetworkParams net = random_mlp(rng);
    const std::vector<Vec2> pts{{0.3, 0.7}, {0.6, 0.2}};
    const auto obj = [](const auto& j, std::size_t) {
        const auto dxx = j.hxx - 1.0;
        const auto dxy = j.hxy;
        const auto dyy = j.hyy - 1.0;
        return dxx * dxx + 2.0 * (dxy * dxy) + dyy * dyy;
    };
    const std::vector<double> grad = param_gradient(net, pts, obj);

    const auto value = [&](const NetworkParams& n) { return batch_objective(n, pts, obj); };
    for (int k = 0; k < 10; ++k) {
        std::vector<double> dir(net.size());
        double nrm = 0.0;
        for (auto& d : dir) {
            d = rng.uniform(-1.0, 1.0);
            nrm += d * d;
        }
        nrm = std::sqrt(nrm);
        for (auto& d : dir) d /= nrm;
        const double fd = directional_fd(net, dir, value, 1e-5);
        double an = 0.0;
        for (std::size_t i = 0; i < dir.size(); ++i) an += dir[i] * grad[i];
        CHECK(rel_err(an, fd) < 1e-5);
    }
}

TEST_CASE("zero objective yields a zero gradient") {
    Rng rng(3);
    const NetworkParams net = random_mlp(rng, 2, 6);
    const std::vector<Vec2> pts{{0.1, 0.2}, {0.5, 0.5}, {0.9, 0.4}};
    const auto zero = [](const auto& j, std::size_t) { return (j.value - j.value) * 0.0; };
    const std::vector<double> g = param_gradient(net, pts, zero);
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("gradient of a sum equals the sum of per-point gradients") {
    Rng rng(8);
    const NetworkParams net = random_mlp(rng, 3, 8);
    const std::vector<Vec2> pts{{0.2, 0.3}, {0.8, 0.1}, {0.4, 0.9}};
    const auto obj = [](const auto& j, std::size_t) { return j.value * j.value + j.gx * j.hyy; };

    const std::vector<double> g_all = param_gradient(net, pts, obj);
    std::vector<double> g_sum(net.size(), 0.0);
    for (const Vec2& p : pts) {
        const std::vector<Vec2> single{p};
        const std::vector<double> g = param_gradient(net, single, obj);
        for (std::size_t i = 0; i < g.size(); ++i) g_sum[i] += g[i];
    }
    for (std::size_t i = 0; i < g_all.size(); ++i)
        CHECK(g_all[i] == doctest::Approx(g_sum[i]).epsilon(1e-12));
}

TEST_CASE("icnn jets have positive semidefinite hessians") {
    Rng rng(99);
    const NetworkParams net = init_network(Architecture::icnn(), rng);
    REQUIRE(net.satisfies_constraints());
    for (int t = 0; t < 1000; ++t) {
        const Vec2 x{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)};
        const Eigen2 e = eigen2(eval_jet(net, x).hess);
        CHECK(e.lambda1 >= -1e-10);
    }
}

TEST_CASE("gradient-only evaluation agrees with the full jet") {
    Rng rng(12);
    const NetworkParams net = init_network(Architecture::icnn(), rng);
    for (int t = 0; t < 20; ++t) {
        const Vec2 x{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const Vec2 g = eval_grad(net, x);
        const Jet2 j = eval_jet(net, x);
        CHECK(g.x == doctest::Approx(j.grad.x).epsilon(1e-14));
        CHECK(g.y == doctest::Approx(j.grad.y).epsilon(1e-14));
    }
}
