#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "fnpde/bench.hpp"
#include "fnpde/csv.hpp"
#include "fnpde/heatmap.hpp"

using namespace fnpde;

int main(int argc, char** argv) {
    CLI::App app{"Least-squares / Deep Ritz solver for 2D fully nonlinear PDEs"};
    app.require_subcommand(1);

    // --- run ---
    auto* run_cmd = app.add_subcommand("run", "Run a benchmark case");
    std::string config_path;
    RunConfig cfg;
    long points = 0, boundary_points = 0;
    run_cmd->add_option("--config", config_path, "JSON config file (flags win over file values)");
    auto* case_opt = run_cmd->add_option("--case", cfg.case_name, "Benchmark case name");
    auto* pts_opt = run_cmd->add_option("--points", points, "Interior collocation points");
    auto* bpts_opt = run_cmd->add_option("--boundary-points", boundary_points, "Boundary points");
    auto* seeds_opt = run_cmd->add_option("--seeds", cfg.seed_fraction, "Seed fraction (e.g. 0.01)");
    auto* adaptive_opt = run_cmd->add_flag("--adaptive", cfg.adaptive, "Adaptive collocation resampling");
    auto* iters_opt = run_cmd->add_option("--iters", cfg.n_iters, "Outer splitting iterations");
    auto* repeats_opt = run_cmd->add_option("--repeats", cfg.repeats, "Independent seeded repeats");
    auto* seed_opt = run_cmd->add_option("--seed", cfg.seed, "Base random seed");
    auto* mode_opt = run_cmd->add_option("--mode", cfg.mode, "deep_ritz or pinn_baseline");
    auto* lambda_opt = run_cmd->add_option("--lambda", cfg.lambda, "Boundary penalty weight");
    auto* out_opt = run_cmd->add_option("--out", cfg.out_dir, "Output directory");
    auto* par_opt = run_cmd->add_option("--parallel-repeats", cfg.parallel_repeats,
                                        "Run this many repeats concurrently");
    auto* dump_opt = run_cmd->add_flag("--dump-sampling", cfg.dump_sampling,
                                       "Write per-event seed/pool CSV dumps");
    auto* push_opt = run_cmd->add_option("--pushforward-samples", cfg.pushforward_samples,
                                         "Samples for transport histograms");

    // --- list ---
    auto* list_cmd = app.add_subcommand("list", "List the benchmark catalog");

    // --- heatmap ---
    auto* heat_cmd = app.add_subcommand("heatmap", "Render a CSV grid as a PNM image");
    std::string grid_path, image_path;
    bool color = false;
    heat_cmd->add_option("grid", grid_path, "Input grid CSV")->required();
    heat_cmd->add_option("image", image_path, "Output .pgm/.ppm path")->required();
    heat_cmd->add_flag("--color", color, "Blue-to-red ramp instead of grayscale");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (list_cmd->parsed()) {
            std::printf("%-20s %-12s %7s %6s %6s %8s\n", "case", "operator", "points", "bdry",
                        "iters", "repeats");
            for (const auto& c : catalog()) {
                const char* op = "";
                switch (c.spec.op) {
                    case OperatorKind::MongeAmpere: op = "monge-ampere"; break;
                    case OperatorKind::Sigma2: op = "sigma2"; break;
                    case OperatorKind::Pucci: op = "pucci"; break;
                    case OperatorKind::Minkowski: op = "minkowski"; break;
                    case OperatorKind::Transport: op = "transport"; break;
                }
                std::printf("%-20s %-12s %7zu %6zu %6d %8d\n", c.name.c_str(), op, c.defaults.n_c,
                            c.defaults.n_b, c.defaults.n_iters, c.default_repeats);
            }
            return 0;
        }

        if (heat_cmd->parsed()) {
            render_heatmap(read_grid_csv(grid_path), image_path, color);
            return 0;
        }

        // run: start from the config file when given, then let flags win.
        RunConfig effective;
        if (!config_path.empty()) effective = run_config_from_json_file(config_path);
        if (*case_opt) effective.case_name = cfg.case_name;
        if (*pts_opt) effective.n_c = static_cast<std::size_t>(points);
        if (*bpts_opt) effective.n_b = static_cast<std::size_t>(boundary_points);
        if (*seeds_opt) effective.seed_fraction = cfg.seed_fraction;
        if (*adaptive_opt) effective.adaptive = cfg.adaptive;
        if (*iters_opt) effective.n_iters = cfg.n_iters;
        if (*repeats_opt) effective.repeats = cfg.repeats;
        if (*seed_opt) effective.seed = cfg.seed;
        if (*mode_opt) effective.mode = cfg.mode;
        if (*lambda_opt) effective.lambda = cfg.lambda;
        if (*out_opt) effective.out_dir = cfg.out_dir;
        if (*par_opt) effective.parallel_repeats = cfg.parallel_repeats;
        if (*dump_opt) effective.dump_sampling = cfg.dump_sampling;
        if (*push_opt) effective.pushforward_samples = cfg.pushforward_samples;

        if (effective.case_name.empty()) {
            std::fprintf(stderr, "error: no benchmark case given (--case or config file)\n");
            return 2;
        }
        const RunStatus status = run(effective);
        if (status == RunStatus::ConfigError)
            std::fprintf(stderr, "error: bad configuration (unknown case or mode)\n");
        if (status == RunStatus::NumericalAbort)
            std::fprintf(stderr, "error: run aborted on non-finite values\n");
        return static_cast<int>(status);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
