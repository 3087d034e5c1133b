#ifndef FNPDE_NETWORK_HPP
#define FNPDE_NETWORK_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "fnpde/rng.hpp"
#include "fnpde/tensor.hpp"

namespace fnpde {

enum class NetKind { MLP, ICNN };

// Widest supported layer; the AD evaluators use fixed stack buffers.
inline constexpr int kMaxWidth = 64;

// Scalar feedforward network acting on R^2. Widths include the input (2) and
// output (1) layers, so widths.size() == L + 2 with L hidden layers.
//
// MLP:   x^1 = sp(W^0 x + b^0), x^l = sp(W^{l-1} x^{l-1} + b^{l-1}),
//        y = W^L x^L + b^L
// ICNN:  x^1 = sp(L^0 x + b^0), x^l = sp(W^{l-1} x^{l-1} + L^{l-1} x + b^{l-1}),
//        y = W^L x^L + L^L x + b^L,  entries of W^(l) kept nonnegative.
//
// The activation is softplus throughout; the ICNN output is convex in x.
struct Architecture {
    NetKind kind{NetKind::MLP};
    std::vector<int> widths{2, 10, 10, 10, 10, 1};

    int hidden_layers() const { return static_cast<int>(widths.size()) - 2; }
    // Solver architectures have at least one hidden layer; a bare affine map
    // (widths {2, 1}) is accepted for testing the evaluators.
    bool valid() const {
        return widths.size() >= 2 && widths.front() == 2 && widths.back() == 1;
    }

    static Architecture mlp(int layers = 4, int width = 10);
    static Architecture icnn(int layers = 4, int width = 10);
};

// Offsets of one layer's blocks inside the flat parameter vector. Entries are
// -1 when the block does not exist (W^0 for ICNN, skip matrices for MLP).
struct LayerLayout {
    int in = 0;        // fan-in of the W block
    int out = 0;       // layer output width
    long w = -1;       // W^(l), row-major out x in
    long skip = -1;    // L^(l), row-major out x 2
    long bias = -1;    // b^(l)
};

// Network parameters stored as one flat vector of doubles plus a layout map;
// optimizers treat the flat vector as the optimization variable.
class NetworkParams {
public:
    NetworkParams() = default;
    explicit NetworkParams(const Architecture& arch);

    const Architecture& arch() const { return arch_; }
    const std::vector<LayerLayout>& layout() const { return layout_; }
    std::size_t size() const { return values_.size(); }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    const double* w(int layer) const { return values_.data() + layout_[layer].w; }
    double* w(int layer) { return values_.data() + layout_[layer].w; }
    const double* skip(int layer) const { return values_.data() + layout_[layer].skip; }
    const double* bias(int layer) const { return values_.data() + layout_[layer].bias; }

    bool has_w(int layer) const { return layout_[layer].w >= 0; }
    bool has_skip(int layer) const { return layout_[layer].skip >= 0; }

    // Clamps the constrained W blocks of an ICNN to [0, inf). Returns true if
    // any entry changed; no-op (returns false) for an MLP.
    bool enforce_nonneg();

    bool satisfies_constraints(double tol = 0.0) const;

    // 1 for every entry subject to the nonnegativity constraint, else 0.
    std::vector<std::uint8_t> constrained_mask() const;

private:
    Architecture arch_;
    std::vector<LayerLayout> layout_;
    std::vector<double> values_;
};

// Glorot-style uniform init scaled by 1/sqrt(fan_in); biases zero. For an
// ICNN the constrained W entries are squared element-wise after drawing.
NetworkParams init_network(const Architecture& arch, Rng& rng);

// Plain forward evaluation (value only).
double forward(const NetworkParams& net, const Vec2& x);

// Checkpoint I/O: a JSON architecture header next to a little-endian binary
// dump of the flat parameter vector. Round-trips bit-exactly.
void save_checkpoint(const NetworkParams& net, const std::string& path_prefix);
NetworkParams load_checkpoint(const std::string& path_prefix);

}  // namespace fnpde

#endif
