#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fnpde/geometry.hpp"
#include "fnpde/rng.hpp"

using namespace fnpde;

TEST_CASE("interior samples stay inside and are deterministic") {
    Rng rng(1);
    const Domain sq = Domain::square();
    const auto pts = sample_interior(sq, 4, rng);
    REQUIRE(pts.size() == 4);
    for (const Vec2& p : pts) CHECK(sq.contains(p));

    Rng r2(1);
    const auto again = sample_interior(sq, 4, r2);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(pts[i].x == again[i].x);
        CHECK(pts[i].y == again[i].y);
    }
}

TEST_CASE("disk sampling is uniform in area") {
    Rng rng(2);
    const Domain disk = Domain::disk();
    int inside_half = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Vec2 p = disk.sample_interior(rng);
        if (!disk.contains(p)) {
            CHECK(disk.contains(p));
            break;
        }
        if (p.norm2() < 0.25) ++inside_half;
    }
    CHECK(std::abs(inside_half / static_cast<double>(n) - 0.25) < 0.01);
}

TEST_CASE("ellipse samples satisfy the ellipse inequality") {
    Rng rng(3);
    const Domain el = Domain::ellipse({3.5, 0.0}, 2.0, 0.5);
    for (int i = 0; i < 2000; ++i) {
        const Vec2 p = el.sample_interior(rng);
        const double u = (p.x - 3.5) / 2.0, v = p.y / 0.5;
        CHECK(u * u + v * v <= 1.0 + 1e-12);
    }
    CHECK(el.area() == doctest::Approx(M_PI));
}

TEST_CASE("square boundary sampling splits mass between the edges") {
    Rng rng(4);
    const Domain sq = Domain::square();
    const int n = 40000;
    int edge_counts[4] = {0, 0, 0, 0};
    for (int i = 0; i < n; ++i) {
        const Vec2 p = sq.sample_boundary(rng);
        const bool on_b = p.y == 0.0, on_t = p.y == 1.0, on_l = p.x == 0.0, on_r = p.x == 1.0;
        if (!(on_b || on_t || on_l || on_r)) {
            CHECK((on_b || on_t || on_l || on_r));
            break;
        }
        if (on_b)
            ++edge_counts[0];
        else if (on_r)
            ++edge_counts[1];
        else if (on_t)
            ++edge_counts[2];
        else
            ++edge_counts[3];
    }
    for (int c : edge_counts) CHECK(std::abs(c - n / 4) < 5 * std::sqrt(n / 4.0));
}

TEST_CASE("disk boundary angles pass a kolmogorov-smirnov check") {
    Rng rng(5);
    const Domain disk = Domain::disk();
    const int n = 10000;
    std::vector<double> angles(n);
    for (int i = 0; i < n; ++i) {
        const Vec2 p = disk.sample_boundary(rng);
        angles[i] = std::atan2(p.y, p.x) / (2.0 * M_PI) + 0.5;  // uniform on [0, 1)
    }
    std::sort(angles.begin(), angles.end());
    double d_stat = 0.0;
    for (int i = 0; i < n; ++i) {
        d_stat = std::max(d_stat, std::abs(angles[i] - (i + 1.0) / n));
        d_stat = std::max(d_stat, std::abs(angles[i] - i / static_cast<double>(n)));
    }
    // p > 0.01 corresponds to D < 1.628 / sqrt(n).
    CHECK(d_stat < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("ellipse boundary sampling is arclength uniform") {
    Rng rng(6);
    const Domain el = Domain::ellipse({0.0, 0.0}, 2.0, 0.5);

    // Dense-polyline arclength oracle, independent of the sampler's table.
    const int nv = 1 << 20;
    std::vector<double> cum(nv + 1, 0.0);
    Vec2 prev{2.0, 0.0};
    for (int i = 1; i <= nv; ++i) {
        const double th = 2.0 * M_PI * i / nv;
        const Vec2 p{2.0 * std::cos(th), 0.5 * std::sin(th)};
        cum[i] = cum[i - 1] + (p - prev).norm();
        prev = p;
    }
    const double perimeter = cum.back();

    const int n = 100000, bins = 10;
    std::vector<int> hist(bins, 0);
    for (int i = 0; i < n; ++i) {
        const Vec2 p = el.sample_boundary(rng);
        double th = std::atan2(p.y / 0.5, p.x / 2.0);
        if (th < 0.0) th += 2.0 * M_PI;
        const int vi = std::min(nv, static_cast<int>(th / (2.0 * M_PI) * nv));
        const double s = cum[vi] / perimeter;
        ++hist[std::min(bins - 1, static_cast<int>(s * bins))];
    }
    for (int b = 0; b < bins; ++b) CHECK(std::abs(hist[b] - n / bins) < 0.02 * (n / bins));
}

TEST_CASE("bounding boxes and membership") {
    const Domain d = Domain::disk({1.0, 2.0}, 3.0);
    CHECK(d.bbox_lo().x == doctest::Approx(-2.0));
    CHECK(d.bbox_hi().y == doctest::Approx(5.0));
    CHECK(d.contains({1.0, 2.0}));
    CHECK_FALSE(d.contains({4.5, 2.0}));
    CHECK(Domain::square().center().x == doctest::Approx(0.5));
}
