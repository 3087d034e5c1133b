#ifndef FNPDE_SAMPLING_HPP
#define FNPDE_SAMPLING_HPP

#include <functional>
#include <vector>

#include "fnpde/geometry.hpp"
#include "fnpde/rng.hpp"
#include "fnpde/tensor.hpp"

namespace fnpde {

// Interior collocation points with importance weights plus boundary points.
// Uniform sampling has all weights equal to one; importance-resampled sets
// carry weights w_i = 1 / (M p_i) so that weighted means over the set are
// unbiased estimators of uniform means over the candidate pool.
struct CollocationSet {
    std::vector<Vec2> points;
    std::vector<double> weights;
    std::vector<Vec2> boundary_points;

    std::size_t size() const { return points.size(); }
};

CollocationSet uniform_collocation(const Domain& d, std::size_t n_interior, std::size_t n_boundary,
                                   Rng& rng);

// Piecewise-constant sampling density induced by a small seed set: every
// candidate carries the error-indicator value of its nearest seed.
struct SeedDensity {
    std::vector<Vec2> seeds;
    std::vector<double> seed_values;
    std::vector<double> pool_probabilities;  // aligned with the candidate pool
};

struct ResampleResult {
    CollocationSet colloc;
    SeedDensity density;
};

std::size_t nearest_index(const Vec2& p, const std::vector<Vec2>& pts);

// Draws S seeds uniformly from the pool (the pool itself is uniform in the
// domain), evaluates the indicator there, assigns each pool point the value
// of its nearest seed, then resamples n_c points from the pool with
// probabilities p_j = 0.9 * d_j / sum(d) + 0.1 / M. The uniform mixture
// bounds the importance weights by 10. A vanishing indicator falls back to
// uniform probabilities (all weights one).
ResampleResult adaptive_resample(const std::vector<Vec2>& pool,
                                 const std::function<double(const Vec2&)>& indicator_at_seed,
                                 std::size_t n_seeds, std::size_t n_c, Rng& rng);

}  // namespace fnpde

#endif
