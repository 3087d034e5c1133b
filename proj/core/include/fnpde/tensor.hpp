#ifndef FNPDE_TENSOR_HPP
#define FNPDE_TENSOR_HPP

#include <cmath>

// Small fixed-size types for 2D problems: points, symmetric 2x2 matrices and
// second-order jets (value, gradient, Hessian of a scalar field at a point).
// Jet2 doubles as the element of the truncated Taylor algebra used by the
// forward-mode evaluator: arithmetic on Jet2 propagates gradients and
// Hessians exactly.

namespace fnpde {

struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }

    constexpr double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    constexpr double norm2() const { return x * x + y * y; }
    double norm() const { return std::sqrt(norm2()); }
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Symmetric 2x2 matrix, off-diagonal stored once.
struct SymMat2 {
    double xx{0.0};
    double xy{0.0};
    double yy{0.0};

    constexpr SymMat2() = default;
    constexpr SymMat2(double xx_, double xy_, double yy_) : xx(xx_), xy(xy_), yy(yy_) {}

    static constexpr SymMat2 identity() { return {1.0, 0.0, 1.0}; }

    constexpr SymMat2 operator+(const SymMat2& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
    constexpr SymMat2 operator-(const SymMat2& o) const { return {xx - o.xx, xy - o.xy, yy - o.yy}; }
    constexpr SymMat2 operator*(double s) const { return {xx * s, xy * s, yy * s}; }
    constexpr SymMat2 operator-() const { return {-xx, -xy, -yy}; }

    constexpr double det() const { return xx * yy - xy * xy; }
    constexpr double trace() const { return xx + yy; }
    // Frobenius norm squared; the off-diagonal entry counts twice.
    constexpr double frob2() const { return xx * xx + 2.0 * xy * xy + yy * yy; }
    double frob() const { return std::sqrt(frob2()); }

    constexpr Vec2 apply(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
};

constexpr SymMat2 operator*(double s, const SymMat2& m) { return m * s; }

// Symmetric outer product a b^T + b a^T.
constexpr SymMat2 sym_outer(const Vec2& a, const Vec2& b) {
    return {2.0 * a.x * b.x, a.x * b.y + a.y * b.x, 2.0 * a.y * b.y};
}

// Second-order jet of a scalar function of (x, y): value, gradient, Hessian.
// Arithmetic implements the truncated Taylor (Leibniz/chain) rules, so
// composing jets of elementary functions yields exact derivatives.
struct Jet2 {
    double value{0.0};
    Vec2 grad{};
    SymMat2 hess{};

    constexpr Jet2() = default;
    constexpr Jet2(double v) : value(v) {}
    constexpr Jet2(double v, Vec2 g, SymMat2 h) : value(v), grad(g), hess(h) {}

    // Independent-variable seeds at a point.
    static constexpr Jet2 var_x(double v) { return {v, {1.0, 0.0}, {}}; }
    static constexpr Jet2 var_y(double v) { return {v, {0.0, 1.0}, {}}; }

    constexpr Jet2 operator-() const { return {-value, -grad, -hess}; }

    Jet2& operator+=(const Jet2& o) {
        value += o.value;
        grad += o.grad;
        hess = hess + o.hess;
        return *this;
    }
};

constexpr Jet2 operator+(const Jet2& a, const Jet2& b) {
    return {a.value + b.value, a.grad + b.grad, a.hess + b.hess};
}
constexpr Jet2 operator-(const Jet2& a, const Jet2& b) {
    return {a.value - b.value, a.grad - b.grad, a.hess - b.hess};
}
constexpr Jet2 operator+(const Jet2& a, double c) { return {a.value + c, a.grad, a.hess}; }
constexpr Jet2 operator+(double c, const Jet2& a) { return a + c; }
constexpr Jet2 operator-(const Jet2& a, double c) { return {a.value - c, a.grad, a.hess}; }
constexpr Jet2 operator-(double c, const Jet2& a) { return {c - a.value, -a.grad, -a.hess}; }

constexpr Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.value * b.value,
            a.grad * b.value + b.grad * a.value,
            a.hess * b.value + b.hess * a.value + sym_outer(a.grad, b.grad)};
}
constexpr Jet2 operator*(const Jet2& a, double c) { return {a.value * c, a.grad * c, a.hess * c}; }
constexpr Jet2 operator*(double c, const Jet2& a) { return a * c; }

// f(a) for scalar f with value/first/second derivative (f0, f1, f2) at a.value.
constexpr Jet2 jet_chain(const Jet2& a, double f0, double f1, double f2) {
    return {f0, a.grad * f1, a.hess * f1 + sym_outer(a.grad, a.grad) * (0.5 * f2)};
}

inline Jet2 inv(const Jet2& a) {
    const double w = 1.0 / a.value;
    return jet_chain(a, w, -w * w, 2.0 * w * w * w);
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inv(b); }
inline Jet2 operator/(const Jet2& a, double c) { return a * (1.0 / c); }
inline Jet2 operator/(double c, const Jet2& b) { return inv(b) * c; }

inline Jet2 exp(const Jet2& a) {
    const double e = std::exp(a.value);
    return jet_chain(a, e, e, e);
}
inline Jet2 log(const Jet2& a) {
    const double w = 1.0 / a.value;
    return jet_chain(a, std::log(a.value), w, -w * w);
}
inline Jet2 sqrt(const Jet2& a) {
    const double s = std::sqrt(a.value);
    const double f1 = 0.5 / s;
    return jet_chain(a, s, f1, -0.5 * f1 / a.value);
}
inline Jet2 pow(const Jet2& a, double p) {
    const double f0 = std::pow(a.value, p);
    const double f1 = p * std::pow(a.value, p - 1.0);
    const double f2 = p * (p - 1.0) * std::pow(a.value, p - 2.0);
    return jet_chain(a, f0, f1, f2);
}
inline Jet2 sin(const Jet2& a) {
    const double s = std::sin(a.value), c = std::cos(a.value);
    return jet_chain(a, s, c, -s);
}
inline Jet2 cos(const Jet2& a) {
    const double s = std::sin(a.value), c = std::cos(a.value);
    return jet_chain(a, c, -s, -c);
}

// Numerically stable softplus log(1 + e^x) and logistic sigmoid.
inline double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}
inline double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline Jet2 softplus(const Jet2& a) {
    const double s = sigmoid(a.value);
    return jet_chain(a, softplus(a.value), s, s * (1.0 - s));
}

}  // namespace fnpde

#endif
