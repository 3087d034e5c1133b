#include "fnpde/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace fnpde {

Domain Domain::square(double side, Vec2 origin) {
    if (!(side > 0.0)) throw std::invalid_argument("domain: square side must be positive");
    Domain d;
    d.kind_ = Kind::Square;
    d.origin_ = origin;
    d.p1_ = side;
    return d;
}

Domain Domain::disk(Vec2 center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("domain: disk radius must be positive");
    Domain d;
    d.kind_ = Kind::Disk;
    d.origin_ = center;
    d.p1_ = radius;
    return d;
}

Domain Domain::ellipse(Vec2 center, double semi_x, double semi_y) {
    if (!(semi_x > 0.0) || !(semi_y > 0.0))
        throw std::invalid_argument("domain: ellipse semi-axes must be positive");
    Domain d;
    d.kind_ = Kind::Ellipse;
    d.origin_ = center;
    d.p1_ = semi_x;
    d.p2_ = semi_y;
    // Cumulative arclength s(theta) on a fine grid; fine enough that linear
    // interpolation of the inverse stays below 1e-6 relative error.
    const int n = 1 << 16;
    d.arc_.resize(n + 1);
    d.arc_[0] = 0.0;
    auto speed = [&](double th) {
        const double sx = semi_x * std::sin(th);
        const double cy = semi_y * std::cos(th);
        return std::sqrt(sx * sx + cy * cy);
    };
    const double h = 2.0 * M_PI / n;
    for (int i = 1; i <= n; ++i) {
        const double t0 = (i - 1) * h, t1 = i * h;
        // Simpson increment
        d.arc_[i] = d.arc_[i - 1] + h / 6.0 * (speed(t0) + 4.0 * speed(0.5 * (t0 + t1)) + speed(t1));
    }
    d.perimeter_ = d.arc_.back();
    return d;
}

double Domain::area() const {
    switch (kind_) {
        case Kind::Square: return p1_ * p1_;
        case Kind::Disk: return M_PI * p1_ * p1_;
        case Kind::Ellipse: return M_PI * p1_ * p2_;
    }
    return 0.0;
}

Vec2 Domain::center() const {
    if (kind_ == Kind::Square) return {origin_.x + 0.5 * p1_, origin_.y + 0.5 * p1_};
    return origin_;
}

bool Domain::contains(const Vec2& p) const {
    switch (kind_) {
        case Kind::Square:
            return p.x >= origin_.x && p.x <= origin_.x + p1_ && p.y >= origin_.y && p.y <= origin_.y + p1_;
        case Kind::Disk: {
            const Vec2 d = p - origin_;
            return d.norm2() <= p1_ * p1_;
        }
        case Kind::Ellipse: {
            const double u = (p.x - origin_.x) / p1_;
            const double v = (p.y - origin_.y) / p2_;
            return u * u + v * v <= 1.0;
        }
    }
    return false;
}

Vec2 Domain::bbox_lo() const {
    if (kind_ == Kind::Square) return origin_;
    if (kind_ == Kind::Disk) return origin_ - Vec2{p1_, p1_};
    return origin_ - Vec2{p1_, p2_};
}

Vec2 Domain::bbox_hi() const {
    if (kind_ == Kind::Square) return origin_ + Vec2{p1_, p1_};
    if (kind_ == Kind::Disk) return origin_ + Vec2{p1_, p1_};
    return origin_ + Vec2{p1_, p2_};
}

Vec2 Domain::sample_interior(Rng& rng) const {
    if (kind_ == Kind::Square)
        return {origin_.x + p1_ * rng.uniform(), origin_.y + p1_ * rng.uniform()};
    const Vec2 lo = bbox_lo(), hi = bbox_hi();
    for (;;) {
        const Vec2 p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y)};
        if (contains(p)) return p;
    }
}

double Domain::ellipse_angle_at_arclength(double s) const {
    // Binary search the cumulative table, then interpolate linearly.
    std::size_t lo = 0, hi = arc_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (arc_[mid] <= s)
            lo = mid;
        else
            hi = mid;
    }
    const double seg = arc_[hi] - arc_[lo];
    const double frac = seg > 0.0 ? (s - arc_[lo]) / seg : 0.0;
    const double h = 2.0 * M_PI / static_cast<double>(arc_.size() - 1);
    return (static_cast<double>(lo) + frac) * h;
}

Vec2 Domain::sample_boundary(Rng& rng) const {
    switch (kind_) {
        case Kind::Square: {
            const double t = rng.uniform() * 4.0 * p1_;
            const int edge = std::min(3, static_cast<int>(t / p1_));
            const double u = t - edge * p1_;
            switch (edge) {
                case 0: return {origin_.x + u, origin_.y};
                case 1: return {origin_.x + p1_, origin_.y + u};
                case 2: return {origin_.x + p1_ - u, origin_.y + p1_};
                default: return {origin_.x, origin_.y + p1_ - u};
            }
        }
        case Kind::Disk: {
            const double th = rng.uniform() * 2.0 * M_PI;
            return {origin_.x + p1_ * std::cos(th), origin_.y + p1_ * std::sin(th)};
        }
        case Kind::Ellipse: {
            const double s = rng.uniform() * perimeter_;
            const double th = ellipse_angle_at_arclength(s);
            return {origin_.x + p1_ * std::cos(th), origin_.y + p2_ * std::sin(th)};
        }
    }
    return {};
}

std::vector<Vec2> sample_interior(const Domain& d, std::size_t n, Rng& rng) {
    std::vector<Vec2> pts(n);
    for (auto& p : pts) p = d.sample_interior(rng);
    return pts;
}

std::vector<Vec2> sample_boundary(const Domain& d, std::size_t n, Rng& rng) {
    std::vector<Vec2> pts(n);
    for (auto& p : pts) p = d.sample_boundary(rng);
    return pts;
}

}  // namespace fnpde
