#ifndef FNPDE_GEOMETRY_HPP
#define FNPDE_GEOMETRY_HPP

#include <vector>

#include "fnpde/rng.hpp"
#include "fnpde/tensor.hpp"

namespace fnpde {

// Axis-aligned square, disk, or axis-aligned ellipse. Interior sampling is
// uniform w.r.t. area (rejection from the bounding box for curved domains);
// boundary sampling is uniform w.r.t. arclength.
class Domain {
public:
    enum class Kind { Square, Disk, Ellipse };

    static Domain square(double side = 1.0, Vec2 origin = {0.0, 0.0});
    static Domain disk(Vec2 center = {0.0, 0.0}, double radius = 1.0);
    static Domain ellipse(Vec2 center, double semi_x, double semi_y);

    Kind kind() const { return kind_; }
    double area() const;
    Vec2 center() const;
    bool contains(const Vec2& p) const;
    // Bounding box corners.
    Vec2 bbox_lo() const;
    Vec2 bbox_hi() const;

    Vec2 sample_interior(Rng& rng) const;
    Vec2 sample_boundary(Rng& rng) const;

private:
    Kind kind_{Kind::Square};
    Vec2 origin_{};   // square corner or center
    double p1_{1.0};  // side / radius / semi-axis x
    double p2_{1.0};  // semi-axis y
    // Inverse-CDF table of the ellipse perimeter integral.
    std::vector<double> arc_;
    double perimeter_{0.0};

    double ellipse_angle_at_arclength(double s) const;
};

std::vector<Vec2> sample_interior(const Domain& d, std::size_t n, Rng& rng);
std::vector<Vec2> sample_boundary(const Domain& d, std::size_t n, Rng& rng);

}  // namespace fnpde

#endif
