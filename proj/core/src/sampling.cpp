#include "fnpde/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fnpde {

CollocationSet uniform_collocation(const Domain& d, std::size_t n_interior, std::size_t n_boundary,
                                   Rng& rng) {
    CollocationSet c;
    c.points = sample_interior(d, n_interior, rng);
    c.weights.assign(n_interior, 1.0);
    c.boundary_points = sample_boundary(d, n_boundary, rng);
    return c;
}

std::size_t nearest_index(const Vec2& p, const std::vector<Vec2>& pts) {
    std::size_t best = 0;
    double best_d = (p - pts[0]).norm2();
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double d = (p - pts[i]).norm2();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

ResampleResult adaptive_resample(const std::vector<Vec2>& pool,
                                 const std::function<double(const Vec2&)>& indicator_at_seed,
                                 std::size_t n_seeds, std::size_t n_c, Rng& rng) {
    if (pool.empty() || n_seeds == 0 || n_c == 0)
        throw std::invalid_argument("adaptive_resample: empty pool or zero sizes");
    const std::size_t m = pool.size();

    ResampleResult out;
    SeedDensity& den = out.density;

    // Seeds: uniform draws from the (uniform) pool, without replacement.
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const std::size_t s_count = std::min(n_seeds, m);
    for (std::size_t k = 0; k < s_count; ++k) {
        const std::size_t j = k + static_cast<std::size_t>(rng.index(m - k));
        std::swap(idx[k], idx[j]);
    }
    den.seeds.resize(s_count);
    den.seed_values.resize(s_count);
    for (std::size_t k = 0; k < s_count; ++k) {
        den.seeds[k] = pool[idx[k]];
        den.seed_values[k] = std::max(0.0, indicator_at_seed(den.seeds[k]));
    }

    // Nearest-seed (Voronoi) assignment of the pool, then the mixture
    // probabilities.
    den.pool_probabilities.resize(m);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        const double v = den.seed_values[nearest_index(pool[j], den.seeds)];
        den.pool_probabilities[j] = v;
        total += v;
    }
    const double uniform_p = 1.0 / static_cast<double>(m);
    if (total > 0.0) {
        for (double& p : den.pool_probabilities) p = 0.9 * p / total + 0.1 * uniform_p;
    } else {
        std::fill(den.pool_probabilities.begin(), den.pool_probabilities.end(), uniform_p);
    }

    // Inverse-CDF draws with replacement.
    std::vector<double> cdf(m);
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        acc += den.pool_probabilities[j];
        cdf[j] = acc;
    }
    cdf.back() = 1.0;

    CollocationSet& c = out.colloc;
    c.points.resize(n_c);
    c.weights.resize(n_c);
    for (std::size_t i = 0; i < n_c; ++i) {
        const double u = rng.uniform();
        const std::size_t j =
            static_cast<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        c.points[i] = pool[j];
        c.weights[i] = uniform_p / den.pool_probabilities[j];
    }
    return out;
}

}  // namespace fnpde
