#ifndef FNPDE_BENCH_HPP
#define FNPDE_BENCH_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fnpde/splitting.hpp"

// Benchmark catalog with closed-form data and exact solutions, plus the
// runner that reproduces the experiments and writes CSV artifacts.

namespace fnpde {

struct BenchmarkCase {
    std::string name;
    ProblemSpec spec;
    SolveOptions defaults;
    int default_repeats = 5;
    // Draws from the source density (pushforward visualization, OT cases).
    std::function<Vec2(Rng&)> mu0_sampler;
};

const std::vector<BenchmarkCase>& catalog();
const BenchmarkCase* find_case(const std::string& name);

struct RunConfig {
    std::string case_name;
    std::size_t n_c = 0;           // 0 keeps the case default
    std::size_t n_b = 0;
    double seed_fraction = -1.0;   // negative keeps the default
    bool adaptive = false;
    int n_iters = 0;
    int repeats = 0;
    std::uint64_t seed = 1;
    std::string mode = "deep_ritz";  // or "pinn_baseline"
    double lambda = -1.0;
    std::string out_dir = "out";
    int parallel_repeats = 1;
    bool dump_sampling = false;
    std::size_t pushforward_samples = 1000000;
};

// Mirrors the CLI flags; absent keys keep the defaults above.
RunConfig run_config_from_json_file(const std::string& path);
void apply_json_overrides(RunConfig& cfg, const std::string& json_text);

enum class RunStatus { Ok = 0, ConfigError = 2, NumericalAbort = 3 };

// Executes the configured repeats and writes, per repeat, history.csv,
// errors.csv, pointwise_iterK.csv, checkpoint_iterK.{json,bin} and (for
// transport cases) hist_iterK.csv under <out>/run_<r>/, plus an aggregate
// quantiles.csv (5th/50th/95th percentiles per epoch and per iteration).
RunStatus run(const RunConfig& cfg);

// 100x100 pushforward histogram of the source density under grad u over the
// target bounding box (samples falling outside are clamped to edge bins, so
// the total mass equals the sample count).
std::vector<std::vector<double>> pushforward_histogram(const NetworkParams& net,
                                                       const BenchmarkCase& bc, std::size_t n_samples,
                                                       Rng& rng, int bins = 100);

}  // namespace fnpde

#endif
