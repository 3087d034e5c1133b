#ifndef FNPDE_AUTODIFF_HPP
#define FNPDE_AUTODIFF_HPP

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "fnpde/network.hpp"
#include "fnpde/tensor.hpp"

// Nested automatic differentiation for the scalar networks: forward-mode
// second-order jets in the spatial input produce (v, grad v, D^2 v) exactly;
// a hand-written reverse sweep through the layers produces parameter
// gradients of any smooth per-point functional of those jets. The functional
// itself is differentiated with a 6-tangent forward dual (one tangent per jet
// slot), so callers write it once as a template over the scalar type.

namespace fnpde {

// First-order dual (value + spatial gradient), for cheap map evaluations.
struct Dual3 {
    double v{0.0}, gx{0.0}, gy{0.0};
    constexpr Dual3() = default;
    constexpr Dual3(double v_) : v(v_) {}
    constexpr Dual3(double v_, double gx_, double gy_) : v(v_), gx(gx_), gy(gy_) {}
    Dual3& operator+=(const Dual3& o) {
        v += o.v;
        gx += o.gx;
        gy += o.gy;
        return *this;
    }
};
constexpr Dual3 operator+(const Dual3& a, const Dual3& b) { return {a.v + b.v, a.gx + b.gx, a.gy + b.gy}; }
constexpr Dual3 operator*(const Dual3& a, double c) { return {a.v * c, a.gx * c, a.gy * c}; }
inline Dual3 softplus(const Dual3& a) {
    const double s = sigmoid(a.v);
    return {softplus(a.v), s * a.gx, s * a.gy};
}

// Scalar with 6 forward tangents; used to differentiate local functionals
// with respect to the 6 jet slots (value, gx, gy, hxx, hxy, hyy).
struct Dual6 {
    double v{0.0};
    std::array<double, 6> d{};

    constexpr Dual6() = default;
    constexpr Dual6(double v_) : v(v_) {}

    Dual6& operator+=(const Dual6& o) {
        v += o.v;
        for (int k = 0; k < 6; ++k) d[k] += o.d[k];
        return *this;
    }
    Dual6& operator-=(const Dual6& o) {
        v -= o.v;
        for (int k = 0; k < 6; ++k) d[k] -= o.d[k];
        return *this;
    }
    Dual6 operator-() const {
        Dual6 r(-v);
        for (int k = 0; k < 6; ++k) r.d[k] = -d[k];
        return r;
    }
};

inline Dual6 operator+(Dual6 a, const Dual6& b) { return a += b; }
inline Dual6 operator-(Dual6 a, const Dual6& b) { return a -= b; }
inline Dual6 operator+(Dual6 a, double c) {
    a.v += c;
    return a;
}
inline Dual6 operator+(double c, Dual6 a) { return a + c; }
inline Dual6 operator-(Dual6 a, double c) {
    a.v -= c;
    return a;
}
inline Dual6 operator-(double c, const Dual6& a) { return -a + c; }
inline Dual6 operator*(const Dual6& a, const Dual6& b) {
    Dual6 r(a.v * b.v);
    for (int k = 0; k < 6; ++k) r.d[k] = a.d[k] * b.v + b.d[k] * a.v;
    return r;
}
inline Dual6 operator*(Dual6 a, double c) {
    a.v *= c;
    for (int k = 0; k < 6; ++k) a.d[k] *= c;
    return a;
}
inline Dual6 operator*(double c, Dual6 a) { return a * c; }
inline Dual6 chain(const Dual6& a, double f0, double f1) {
    Dual6 r(f0);
    for (int k = 0; k < 6; ++k) r.d[k] = f1 * a.d[k];
    return r;
}
inline Dual6 operator/(const Dual6& a, const Dual6& b) { return a * chain(b, 1.0 / b.v, -1.0 / (b.v * b.v)); }
inline Dual6 operator/(Dual6 a, double c) { return a * (1.0 / c); }
inline Dual6 operator/(double c, const Dual6& b) { return chain(b, c / b.v, -c / (b.v * b.v)); }
inline Dual6 sqrt(const Dual6& a) {
    const double s = std::sqrt(a.v);
    return chain(a, s, 0.5 / s);
}
inline Dual6 exp(const Dual6& a) {
    const double e = std::exp(a.v);
    return chain(a, e, e);
}
inline Dual6 log(const Dual6& a) { return chain(a, std::log(a.v), 1.0 / a.v); }
inline double value_of(double s) { return s; }
inline double value_of(const Dual6& s) { return s.v; }

// A network jet at one point, with slot type S (double for evaluation,
// Dual6 for differentiating a functional of the slots).
template <class S>
struct JetView {
    S value, gx, gy, hxx, hxy, hyy;
};

inline JetView<double> jet_view(const Jet2& j) {
    return {j.value, j.grad.x, j.grad.y, j.hess.xx, j.hess.xy, j.hess.yy};
}

inline JetView<Dual6> jet_dual_view(const Jet2& j) {
    JetView<Dual6> v{Dual6(j.value), Dual6(j.grad.x),  Dual6(j.grad.y),
                     Dual6(j.hess.xx), Dual6(j.hess.xy), Dual6(j.hess.yy)};
    v.value.d[0] = 1.0;
    v.gx.d[1] = 1.0;
    v.gy.d[2] = 1.0;
    v.hxx.d[3] = 1.0;
    v.hxy.d[4] = 1.0;
    v.hyy.d[5] = 1.0;
    return v;
}

// Forward propagation with activation scalar T (double, Dual3 or Jet2).
template <class T>
T forward_pass(const NetworkParams& net, const T& x1, const T& x2) {
    const auto& layers = net.layout();
    const int n_layers = static_cast<int>(layers.size());
    std::array<T, kMaxWidth> buf_a, buf_b;
    T* cur = buf_a.data();
    T* nxt = buf_b.data();
    cur[0] = x1;
    cur[1] = x2;
    for (int l = 0; l < n_layers; ++l) {
        const LayerLayout& lay = layers[l];
        for (int i = 0; i < lay.out; ++i) {
            T z(net.bias(l)[i]);
            if (net.has_w(l)) {
                const double* w = net.w(l) + static_cast<long>(i) * lay.in;
                for (int j = 0; j < lay.in; ++j) z += cur[j] * w[j];
            }
            if (net.has_skip(l)) {
                const double* s = net.skip(l) + 2L * i;
                z += x1 * s[0] + x2 * s[1];
            }
            nxt[i] = (l + 1 < n_layers) ? softplus(z) : z;
        }
        std::swap(cur, nxt);
    }
    return cur[0];
}

// Exact value, gradient and Hessian of the network at x.
inline Jet2 eval_jet(const NetworkParams& net, const Vec2& x) {
    return forward_pass<Jet2>(net, Jet2::var_x(x.x), Jet2::var_y(x.y));
}

// Gradient-only evaluation (the transport map).
inline Vec2 eval_grad(const NetworkParams& net, const Vec2& x) {
    const Dual3 out = forward_pass<Dual3>(net, Dual3(x.x, 1.0, 0.0), Dual3(x.y, 0.0, 1.0));
    return {out.gx, out.gy};
}

// Forward/backward workspace for parameter gradients. forward() caches the
// per-layer jets; backward() pulls a seed (d objective / d output-jet slots)
// back through the layers and accumulates d objective / d theta.
class JetBackprop {
public:
    explicit JetBackprop(const NetworkParams& net) : net_(&net) {
        const auto& layers = net.layout();
        z_.resize(layers.size());
        a_.resize(layers.size() + 1);
        bar_.resize(layers.size() + 1);
        a_[0].resize(2);
        bar_[0].resize(2);
        for (std::size_t l = 0; l < layers.size(); ++l) {
            z_[l].resize(layers[l].out);
            a_[l + 1].resize(layers[l].out);
            bar_[l + 1].resize(layers[l].out);
        }
    }

    Jet2 forward(const Vec2& x) {
        const auto& layers = net_->layout();
        a_[0][0] = Jet2::var_x(x.x);
        a_[0][1] = Jet2::var_y(x.y);
        const int n_layers = static_cast<int>(layers.size());
        for (int l = 0; l < n_layers; ++l) {
            const LayerLayout& lay = layers[l];
            for (int i = 0; i < lay.out; ++i) {
                Jet2 z(net_->bias(l)[i]);
                if (net_->has_w(l)) {
                    const double* w = net_->w(l) + static_cast<long>(i) * lay.in;
                    for (int j = 0; j < lay.in; ++j) z += a_[l][j] * w[j];
                }
                if (net_->has_skip(l)) {
                    const double* s = net_->skip(l) + 2L * i;
                    z += a_[0][0] * s[0] + a_[0][1] * s[1];
                }
                z_[l][i] = z;
                a_[l + 1][i] = (l + 1 < n_layers) ? softplus(z) : z;
            }
        }
        return a_[n_layers][0];
    }

    // Accumulates into grad (size net.size()); forward() must have run for
    // the same parameters.
    void backward(const Jet2& seed, std::span<double> grad) {
        const auto& layers = net_->layout();
        const int n_layers = static_cast<int>(layers.size());
        for (auto& level : bar_)
            for (auto& j : level) j = Jet2();
        bar_[n_layers][0] = seed;

        for (int l = n_layers - 1; l >= 0; --l) {
            const LayerLayout& lay = layers[l];
            for (int i = 0; i < lay.out; ++i) {
                const Jet2 zbar = (l + 1 < n_layers) ? softplus_pullback(z_[l][i], bar_[l + 1][i])
                                                     : bar_[l + 1][i];
                grad[static_cast<std::size_t>(layers[l].bias + i)] += zbar.value;
                if (net_->has_w(l)) {
                    const double* w = net_->w(l) + static_cast<long>(i) * lay.in;
                    double* gw = grad.data() + layers[l].w + static_cast<long>(i) * lay.in;
                    for (int j = 0; j < lay.in; ++j) {
                        gw[j] += dot6(zbar, a_[l][j]);
                        if (l > 0) bar_[l][j] += zbar * w[j];
                    }
                }
                if (net_->has_skip(l)) {
                    double* gs = grad.data() + layers[l].skip + 2L * i;
                    gs[0] += dot6(zbar, a_[0][0]);
                    gs[1] += dot6(zbar, a_[0][1]);
                }
            }
        }
    }

private:
    static double dot6(const Jet2& p, const Jet2& q) {
        return p.value * q.value + p.grad.x * q.grad.x + p.grad.y * q.grad.y +
               p.hess.xx * q.hess.xx + p.hess.xy * q.hess.xy + p.hess.yy * q.hess.yy;
    }

    // Pullback of a = softplus(z) as a map on jet slots.
    static Jet2 softplus_pullback(const Jet2& z, const Jet2& abar) {
        const double s = sigmoid(z.value);
        const double f1 = s;
        const double f2 = s * (1.0 - s);
        const double f3 = f2 * (1.0 - 2.0 * s);
        Jet2 zbar;
        zbar.value = abar.value * f1 + f2 * (abar.grad.x * z.grad.x + abar.grad.y * z.grad.y) +
                     f3 * (abar.hess.xx * z.grad.x * z.grad.x + abar.hess.xy * z.grad.x * z.grad.y +
                           abar.hess.yy * z.grad.y * z.grad.y) +
                     f2 * (abar.hess.xx * z.hess.xx + abar.hess.xy * z.hess.xy + abar.hess.yy * z.hess.yy);
        zbar.grad.x = abar.grad.x * f1 + f2 * (2.0 * abar.hess.xx * z.grad.x + abar.hess.xy * z.grad.y);
        zbar.grad.y = abar.grad.y * f1 + f2 * (2.0 * abar.hess.yy * z.grad.y + abar.hess.xy * z.grad.x);
        zbar.hess.xx = abar.hess.xx * f1;
        zbar.hess.xy = abar.hess.xy * f1;
        zbar.hess.yy = abar.hess.yy * f1;
        return zbar;
    }

    const NetworkParams* net_;
    std::vector<std::vector<Jet2>> z_;
    std::vector<std::vector<Jet2>> a_;
    std::vector<std::vector<Jet2>> bar_;
};

// Sum over points of a local functional of the network jet. F is callable as
// S f(const JetView<S>&, std::size_t i) for S = double and S = Dual6.
template <class F>
double batch_objective(const NetworkParams& net, std::span<const Vec2> pts, F&& f) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Jet2 jet = eval_jet(net, pts[i]);
        total += f(jet_view(jet), i);
    }
    return total;
}

// Same sum, also accumulating its parameter gradient into grad (not zeroed
// here, so several terms can share one buffer).
template <class F>
double batch_objective_gradient(const NetworkParams& net, std::span<const Vec2> pts, F&& f,
                                std::span<double> grad) {
    if (grad.size() != net.size()) throw std::invalid_argument("gradient buffer size mismatch");
    JetBackprop engine(net);
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const Jet2 jet = engine.forward(pts[i]);
        const Dual6 r = f(jet_dual_view(jet), i);
        total += r.v;
        Jet2 seed;
        seed.value = r.d[0];
        seed.grad = {r.d[1], r.d[2]};
        seed.hess = {r.d[3], r.d[4], r.d[5]};
        engine.backward(seed, grad);
    }
    return total;
}

// Parameter gradient of a point-set objective as a fresh vector.
template <class F>
std::vector<double> param_gradient(const NetworkParams& net, std::span<const Vec2> pts, F&& f) {
    std::vector<double> grad(net.size(), 0.0);
    batch_objective_gradient(net, pts, f, grad);
    return grad;
}

}  // namespace fnpde

#endif
