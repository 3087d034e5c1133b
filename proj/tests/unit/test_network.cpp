#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "fnpde/autodiff.hpp"
#include "fnpde/network.hpp"
#include "fnpde/rng.hpp"

using namespace fnpde;

TEST_CASE("zero parameters give the zero function") {
    NetworkParams net((Architecture::mlp()));
    CHECK(forward(net, {0.3, -0.8}) == 0.0);
    CHECK(forward(net, {2.0, 5.0}) == 0.0);
}

TEST_CASE("layout covers the flat vector exactly once") {
    for (const Architecture arch : {Architecture::mlp(3, 7), Architecture::icnn(4, 10)}) {
        const NetworkParams net(arch);
        std::vector<int> hits(net.size(), 0);
        for (std::size_t l = 0; l < net.layout().size(); ++l) {
            const LayerLayout& lay = net.layout()[l];
            if (lay.w >= 0)
                for (long i = 0; i < static_cast<long>(lay.out) * lay.in; ++i) ++hits[lay.w + i];
            if (lay.skip >= 0)
                for (long i = 0; i < 2L * lay.out; ++i) ++hits[lay.skip + i];
            for (long i = 0; i < lay.out; ++i) ++hits[lay.bias + i];
        }
        for (int h : hits) CHECK(h == 1);
    }
}

TEST_CASE("icnn init squares the constrained weights") {
    Rng rng(4);
    const NetworkParams net = init_network(Architecture::icnn(), rng);
    for (std::size_t l = 0; l < net.layout().size(); ++l) {
        if (!net.has_w(static_cast<int>(l))) continue;
        const LayerLayout& lay = net.layout()[l];
        for (long i = 0; i < static_cast<long>(lay.out) * lay.in; ++i)
            CHECK(net.w(static_cast<int>(l))[i] >= 0.0);
    }
}

TEST_CASE("init is deterministic under a fixed seed") {
    Rng a(123), b(123);
    const NetworkParams n1 = init_network(Architecture::mlp(), a);
    const NetworkParams n2 = init_network(Architecture::mlp(), b);
    CHECK(n1.values() == n2.values());
}

TEST_CASE("glorot scaling: sample variance close to 1/fan_in") {
    Rng rng(99);
    const Architecture arch = Architecture::mlp(4, 60);
    const NetworkParams net = init_network(arch, rng);
    double sum = 0.0, sum2 = 0.0;
    long count = 0;
    for (int l = 1; l <= 2; ++l) {  // the two 60x60 blocks
        const LayerLayout& lay = net.layout()[l];
        for (long i = 0; i < static_cast<long>(lay.out) * lay.in; ++i) {
            const double w = net.w(l)[i];
            sum += w;
            sum2 += w * w;
            ++count;
        }
    }
    CHECK(count >= 7000);
    const double mean = sum / count;
    const double var = sum2 / count - mean * mean;
    CHECK(var == doctest::Approx(1.0 / 60.0).epsilon(0.2));
}

TEST_CASE("enforce_nonneg clamps only the constrained blocks") {
    Rng rng(5);
    NetworkParams net = init_network(Architecture::icnn(), rng);
    // Inject negatives into a constrained block and into a skip block.
    net.w(1)[0] = -0.3;
    net.w(1)[1] = 0.7;
    const double skip_before = net.skip(1)[0];
    CHECK(net.enforce_nonneg());
    CHECK(net.w(1)[0] == 0.0);
    CHECK(net.w(1)[1] == 0.7);
    CHECK(net.skip(1)[0] == skip_before);
    CHECK(net.satisfies_constraints());
    CHECK_FALSE(net.enforce_nonneg());  // already feasible

    NetworkParams mlp = init_network(Architecture::mlp(), rng);
    CHECK_FALSE(mlp.enforce_nonneg());  // no-op on plain networks
}

TEST_CASE("random icnn is midpoint convex") {
    Rng rng(6);
    const NetworkParams net = init_network(Architecture::icnn(), rng);
    for (int t = 0; t < 1000; ++t) {
        const Vec2 a{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
        const Vec2 b{rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
        const Vec2 m = (a + b) * 0.5;
        CHECK(forward(net, m) <= 0.5 * (forward(net, a) + forward(net, b)) + 1e-10);
    }
}

TEST_CASE("passthrough layers are wired") {
    Rng rng(7);
    const NetworkParams net = init_network(Architecture::icnn(), rng);
    NetworkParams stripped = net;
    for (std::size_t l = 0; l < stripped.layout().size(); ++l) {
        const LayerLayout& lay = stripped.layout()[l];
        if (lay.skip < 0) continue;
        for (long i = 0; i < 2L * lay.out; ++i) stripped.values()[lay.skip + i] = 0.0;
    }
    const Vec2 x{0.4, -0.2};
    CHECK(forward(net, x) != forward(stripped, x));
}

TEST_CASE("softplus network is smooth under tiny perturbations") {
    Rng rng(8);
    const NetworkParams net = init_network(Architecture::mlp(), rng);
    const Vec2 x{0.37, 0.64};
    const Jet2 j0 = eval_jet(net, x);
    const Jet2 j1 = eval_jet(net, {x.x + 1e-6, x.y});
    CHECK(std::abs(j1.hess.xx - j0.hess.xx) <= 1e-3);
    CHECK(std::abs(j1.hess.xy - j0.hess.xy) <= 1e-3);
    CHECK(std::abs(j1.hess.yy - j0.hess.yy) <= 1e-3);
}

TEST_CASE("checkpoint round-trip is exact") {
    Rng rng(9);
    const NetworkParams net = init_network(Architecture::icnn(3, 8), rng);
    const std::string prefix =
        (std::filesystem::temp_directory_path() / "fnpde_ckpt_test").string();
    save_checkpoint(net, prefix);
    const NetworkParams back = load_checkpoint(prefix);
    CHECK(back.arch().kind == NetKind::ICNN);
    CHECK(back.arch().widths == net.arch().widths);
    CHECK(back.values() == net.values());
    std::remove((prefix + ".json").c_str());
    std::remove((prefix + ".bin").c_str());
}

TEST_CASE("shape validation") {
    Architecture bad;
    bad.widths = {3, 10, 1};
    CHECK_THROWS(NetworkParams(bad));
    Architecture wide;
    wide.widths = {2, 1000, 1};
    CHECK_THROWS(NetworkParams(wide));
}
