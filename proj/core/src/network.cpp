#include "fnpde/network.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "fnpde/autodiff.hpp"

namespace fnpde {

Architecture Architecture::mlp(int layers, int width) {
    Architecture a;
    a.kind = NetKind::MLP;
    a.widths.assign(static_cast<std::size_t>(layers) + 2, width);
    a.widths.front() = 2;
    a.widths.back() = 1;
    return a;
}

Architecture Architecture::icnn(int layers, int width) {
    Architecture a = mlp(layers, width);
    a.kind = NetKind::ICNN;
    return a;
}

NetworkParams::NetworkParams(const Architecture& arch) : arch_(arch) {
    if (!arch.valid()) throw std::invalid_argument("network: bad architecture widths");
    for (int w : arch.widths)
        if (w < 1 || w > kMaxWidth) throw std::invalid_argument("network: layer width out of range");
    const int n_layers = static_cast<int>(arch.widths.size()) - 1;
    layout_.resize(n_layers);
    long off = 0;
    for (int l = 0; l < n_layers; ++l) {
        LayerLayout& lay = layout_[l];
        lay.in = arch.widths[l];
        lay.out = arch.widths[l + 1];
        const bool icnn = arch.kind == NetKind::ICNN;
        if (!(icnn && l == 0)) {  // ICNN first layer has no W block
            lay.w = off;
            off += static_cast<long>(lay.out) * lay.in;
        }
        if (icnn) {
            lay.skip = off;
            off += static_cast<long>(lay.out) * 2;
        }
        lay.bias = off;
        off += lay.out;
    }
    values_.assign(static_cast<std::size_t>(off), 0.0);
}

bool NetworkParams::enforce_nonneg() {
    if (arch_.kind != NetKind::ICNN) return false;
    bool changed = false;
    for (std::size_t l = 0; l < layout_.size(); ++l) {
        if (layout_[l].w < 0) continue;
        double* w = values_.data() + layout_[l].w;
        const long n = static_cast<long>(layout_[l].out) * layout_[l].in;
        for (long i = 0; i < n; ++i) {
            if (w[i] < 0.0) {
                w[i] = 0.0;
                changed = true;
            }
        }
    }
    return changed;
}

std::vector<std::uint8_t> NetworkParams::constrained_mask() const {
    std::vector<std::uint8_t> mask(values_.size(), 0);
    if (arch_.kind != NetKind::ICNN) return mask;
    for (const LayerLayout& lay : layout_) {
        if (lay.w < 0) continue;
        const long n = static_cast<long>(lay.out) * lay.in;
        for (long i = 0; i < n; ++i) mask[static_cast<std::size_t>(lay.w + i)] = 1;
    }
    return mask;
}

bool NetworkParams::satisfies_constraints(double tol) const {
    if (arch_.kind != NetKind::ICNN) return true;
    for (std::size_t l = 0; l < layout_.size(); ++l) {
        if (layout_[l].w < 0) continue;
        const double* w = values_.data() + layout_[l].w;
        const long n = static_cast<long>(layout_[l].out) * layout_[l].in;
        for (long i = 0; i < n; ++i)
            if (w[i] < -tol) return false;
    }
    return true;
}

NetworkParams init_network(const Architecture& arch, Rng& rng) {
    NetworkParams net(arch);
    auto& v = net.values();
    for (std::size_t l = 0; l < net.layout().size(); ++l) {
        const LayerLayout& lay = net.layout()[l];
        if (lay.w >= 0) {
            const double bound = std::sqrt(3.0 / lay.in);
            const long n = static_cast<long>(lay.out) * lay.in;
            for (long i = 0; i < n; ++i) {
                double draw = rng.uniform(-bound, bound);
                if (arch.kind == NetKind::ICNN) draw = draw * draw;
                v[static_cast<std::size_t>(lay.w + i)] = draw;
            }
        }
        if (lay.skip >= 0) {
            const double bound = std::sqrt(3.0 / 2.0);
            const long n = static_cast<long>(lay.out) * 2;
            for (long i = 0; i < n; ++i)
                v[static_cast<std::size_t>(lay.skip + i)] = rng.uniform(-bound, bound);
        }
        // biases stay zero
    }
    return net;
}

double forward(const NetworkParams& net, const Vec2& x) {
    return forward_pass<double>(net, x.x, x.y);
}

void save_checkpoint(const NetworkParams& net, const std::string& path_prefix) {
    nlohmann::json j;
    j["kind"] = net.arch().kind == NetKind::ICNN ? "ICNN" : "MLP";
    j["hidden_layers"] = net.arch().hidden_layers();
    j["widths"] = net.arch().widths;
    j["count"] = net.size();
    std::ofstream jf(path_prefix + ".json", std::ios::binary);
    if (!jf) throw std::runtime_error("checkpoint: cannot write " + path_prefix + ".json");
    jf << j.dump(2) << "\n";

    std::ofstream bf(path_prefix + ".bin", std::ios::binary);
    if (!bf) throw std::runtime_error("checkpoint: cannot write " + path_prefix + ".bin");
    static_assert(sizeof(double) == 8);
    bf.write(reinterpret_cast<const char*>(net.values().data()),
             static_cast<std::streamsize>(net.size() * sizeof(double)));
}

NetworkParams load_checkpoint(const std::string& path_prefix) {
    std::ifstream jf(path_prefix + ".json");
    if (!jf) throw std::runtime_error("checkpoint: cannot read " + path_prefix + ".json");
    nlohmann::json j;
    jf >> j;

    Architecture arch;
    arch.kind = j.at("kind").get<std::string>() == "ICNN" ? NetKind::ICNN : NetKind::MLP;
    arch.widths = j.at("widths").get<std::vector<int>>();
    NetworkParams net(arch);
    if (net.size() != j.at("count").get<std::size_t>())
        throw std::runtime_error("checkpoint: parameter count mismatch in " + path_prefix);

    std::ifstream bf(path_prefix + ".bin", std::ios::binary);
    if (!bf) throw std::runtime_error("checkpoint: cannot read " + path_prefix + ".bin");
    bf.read(reinterpret_cast<char*>(net.values().data()),
            static_cast<std::streamsize>(net.size() * sizeof(double)));
    if (static_cast<std::size_t>(bf.gcount()) != net.size() * sizeof(double))
        throw std::runtime_error("checkpoint: truncated binary in " + path_prefix);
    return net;
}

}  // namespace fnpde
