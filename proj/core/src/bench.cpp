#include "fnpde/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "fnpde/autodiff.hpp"
#include "fnpde/constraints.hpp"
#include "fnpde/csv.hpp"

namespace fnpde {

namespace {

// integral over [0,1] of exp(-(t-a)^2 / (2 sigma^2))
double trunc_gauss_integral(double a, double sigma) {
    const double s = sigma * std::sqrt(2.0);
    return sigma * std::sqrt(M_PI / 2.0) * (std::erf((1.0 - a) / s) + std::erf(a / s));
}

ExactSolution exact_from(std::function<Jet2(const Vec2&)> jet) {
    ExactSolution e;
    e.jet = std::move(jet);
    return e;
}

// Data functions generated from the exact solution through the jet algebra,
// which keeps them consistent with the stated closed forms.
void derive_dirichlet_data(ProblemSpec& spec) {
    const auto exact = spec.exact->jet;
    spec.phi = [exact](const Vec2& x) { return exact(x).value; };
    if (spec.op == OperatorKind::Pucci) {
        const double alpha = spec.pucci_alpha;
        spec.f = [exact, alpha](const Vec2& x) {
            const Eigen2 e = eigen2(exact(x).hess);
            return alpha * (std::max(e.lambda1, 0.0) + std::max(e.lambda2, 0.0)) +
                   std::min(e.lambda1, 0.0) + std::min(e.lambda2, 0.0);
        };
    } else {
        spec.f = [exact](const Vec2& x) { return exact(x).hess.det(); };
    }
}

// Rejection sampler for a density on the unit square, with the bound taken
// from a fine grid scan (densities here are smooth at the grid scale).
std::function<Vec2(Rng&)> square_rejection_sampler(std::function<double(const Vec2&)> density) {
    double bound = 0.0;
    for (int i = 0; i <= 200; ++i)
        for (int j = 0; j <= 200; ++j)
            bound = std::max(bound, density({i / 200.0, j / 200.0}));
    bound *= 1.05;
    return [density, bound](Rng& rng) {
        for (;;) {
            const Vec2 p{rng.uniform(), rng.uniform()};
            if (rng.uniform() * bound <= density(p)) return p;
        }
    };
}

std::vector<BenchmarkCase> build_catalog() {
    std::vector<BenchmarkCase> cases;

    const auto dirichlet_defaults = [] {
        SolveOptions o;
        o.n_c = 3000;
        o.n_b = 300;
        o.n_iters = 10;
        return o;
    };

    // Smooth exponential Monge-Ampere benchmarks, u = exp(alpha/2 (x^2+y^2)).
    for (double alpha : {1.0, 4.0}) {
        BenchmarkCase c;
        c.name = alpha == 1.0 ? "exp_alpha1" : "exp_alpha4";
        c.spec.name = c.name;
        c.spec.op = OperatorKind::MongeAmpere;
        c.spec.domain = Domain::square();
        c.spec.lambda = 100.0;
        c.spec.exact = exact_from([alpha](const Vec2& v) {
            const Jet2 x = Jet2::var_x(v.x), y = Jet2::var_y(v.y);
            return exp((x * x + y * y) * (0.5 * alpha));
        });
        derive_dirichlet_data(c.spec);
        c.defaults = dirichlet_defaults();
        cases.push_back(std::move(c));
    }

    // u = -sqrt(R^2 - |x|^2); R = 2 smooth, R = sqrt(2)+0.01 near-singular.
    for (bool critical : {false, true}) {
        const double r = critical ? std::sqrt(2.0) + 0.01 : 2.0;
        BenchmarkCase c;
        c.name = critical ? "sqrt_Rcrit" : "sqrt_R2";
        c.spec.name = c.name;
        c.spec.op = OperatorKind::MongeAmpere;
        c.spec.domain = Domain::square();
        c.spec.lambda = 100.0;
        c.spec.exact = exact_from([r](const Vec2& v) {
            const Jet2 x = Jet2::var_x(v.x), y = Jet2::var_y(v.y);
            return -sqrt(r * r - (x * x + y * y));
        });
        derive_dirichlet_data(c.spec);
        c.defaults = dirichlet_defaults();
        cases.push_back(std::move(c));
    }

    // Unit disk, u = (|x|^2 - 1) / 2.
    {
        BenchmarkCase c;
        c.name = "disk_degenerate";
        c.spec.name = c.name;
        c.spec.op = OperatorKind::MongeAmpere;
        c.spec.domain = Domain::disk();
        c.spec.lambda = 100.0;
        c.spec.exact = exact_from([](const Vec2& v) {
            const Jet2 x = Jet2::var_x(v.x), y = Jet2::var_y(v.y);
            return (x * x + y * y - 1.0) * 0.5;
        });
        derive_dirichlet_data(c.spec);
        c.defaults = dirichlet_defaults();
        cases.push_back(std::move(c));
    }

    // Pucci, u = -((x+1)^2 + (y+1)^2)^((1-alpha)/2).
    for (double alpha : {2.0, 3.0, 5.0}) {
        BenchmarkCase c;
        c.name = "pucci_alpha" + std::to_string(static_cast<int>(alpha));
        c.spec.name = c.name;
        c.spec.op = OperatorKind::Pucci;
        c.spec.pucci_alpha = alpha;
        c.spec.domain = Domain::square();
        c.spec.lambda = 1000.0;
        c.spec.exact = exact_from([alpha](const Vec2& v) {
            const Jet2 x = Jet2::var_x(v.x), y = Jet2::var_y(v.y);
            const Jet2 r2 = (x + 1.0) * (x + 1.0) + (y + 1.0) * (y + 1.0);
            return -pow(r2, 0.5 * (1.0 - alpha));
        });
        derive_dirichlet_data(c.spec);
        c.defaults = dirichlet_defaults();
        cases.push_back(std::move(c));
    }

    // Prescribed Gauss curvature with b = (1/2, 1/2), u = |x - b|^2.
    {
        BenchmarkCase c;
        c.name = "minkowski";
        c.spec.name = c.name;
        c.spec.op = OperatorKind::Minkowski;
        c.spec.domain = Domain::square();
        c.spec.lambda = 100.0;
        const Vec2 b{0.5, 0.5};
        c.spec.exact = exact_from([b](const Vec2& v) {
            const Jet2 x = Jet2::var_x(v.x), y = Jet2::var_y(v.y);
            return (x - b.x) * (x - b.x) + (y - b.y) * (y - b.y);
        });
        c.spec.gauss_k = [b](const Vec2& x) {
            const double r2 = (x - b).norm2();
            const double w = 1.0 + 4.0 * r2;
            return 4.0 / (w * w);
        };
        const auto exact = c.spec.exact->jet;
        c.spec.phi = [exact](const Vec2& x) { return exact(x).value; };
        c.defaults = dirichlet_defaults();
        cases.push_back(std::move(c));
    }

    // Transport: uniform disk onto uniform ellipse,
    // u = x1^2 + x2^2/4 + 7/2 x1.
    {
        BenchmarkCase c;
        c.name = "ot_disk_ellipse";
        c.spec.name = c.name;
        c.spec.op = OperatorKind::Transport;
        c.spec.domain = Domain::disk();
        c.spec.target = Domain::ellipse({3.5, 0.0}, 2.0, 0.5);
        c.spec.lambda = 100.0;
        // Constant densities; the indicator factors only delimit supports,
        // the splitting evaluates the smooth extension.
        c.spec.mu0 = [](const Vec2&) { return 1.0 / M_PI; };
        c.spec.mu1 = [](const Vec2&) { return 1.0 / M_PI; };
        c.spec.exact = exact_from([](const Vec2& v) {
            const Jet2 x = Jet2::var_x(v.x), y = Jet2::var_y(v.y);
            return x * x + y * y * 0.25 + x * 3.5;
        });
        c.defaults.n_c = 1000;
        c.defaults.n_b = 1000;
        c.defaults.n_iters = 30;
        c.default_repeats = 1;
        c.mu0_sampler = [](Rng& rng) { return Domain::disk().sample_interior(rng); };
        cases.push_back(std::move(c));
    }

    // Gaussian source(s) on the unit square.
    const double sq2 = std::sqrt(0.25);          // sigma of the isotropic source
    const double sxx = std::sqrt(0.25);          // anisotropic sigmas
    const double syy = std::sqrt(0.015625);
    const double sg = 0.2;                       // Gaussian target

    const auto gauss1 = [sq2](const Vec2& x) {
        const Vec2 x0{0.25, 0.75};
        const double c0 = 1.0 / (trunc_gauss_integral(x0.x, sq2) * trunc_gauss_integral(x0.y, sq2));
        return c0 * std::exp(-(x - x0).norm2() / (2.0 * sq2 * sq2));
    };
    const auto gauss2 = [sxx, syy](const Vec2& x) {
        const double ix = trunc_gauss_integral(0.5, sxx);
        const double c0 =
            1.0 / (ix * (trunc_gauss_integral(0.2, syy) + trunc_gauss_integral(0.8, syy)));
        const double ex = -(x.x - 0.5) * (x.x - 0.5) / (2.0 * sxx * sxx);
        const double e1 = ex - (x.y - 0.2) * (x.y - 0.2) / (2.0 * syy * syy);
        const double e2 = ex - (x.y - 0.8) * (x.y - 0.8) / (2.0 * syy * syy);
        return c0 * (std::exp(e1) + std::exp(e2));
    };
    const auto gauss_target = [sg](const Vec2& x) {
        const double cg = 1.0 / (trunc_gauss_integral(0.5, sg) * trunc_gauss_integral(0.5, sg));
        return cg * std::exp(-((x.x - 0.5) * (x.x - 0.5) + (x.y - 0.5) * (x.y - 0.5)) / (2.0 * sg * sg));
    };

    const auto ot_square_case = [&](const std::string& name, std::function<double(const Vec2&)> mu0,
                                    std::function<double(const Vec2&)> mu1) {
        BenchmarkCase c;
        c.name = name;
        c.spec.name = name;
        c.spec.op = OperatorKind::Transport;
        c.spec.domain = Domain::square();
        c.spec.target = Domain::square();
        c.spec.lambda = 100.0;
        c.spec.mu0 = mu0;
        c.spec.mu1 = std::move(mu1);
        c.defaults.n_c = 1000;
        c.defaults.n_b = 1000;
        c.defaults.n_iters = 20;
        c.default_repeats = 1;
        c.mu0_sampler = square_rejection_sampler(std::move(mu0));
        return c;
    };
    cases.push_back(ot_square_case("ot_gauss_uniform", gauss1, [](const Vec2&) { return 1.0; }));
    cases.push_back(ot_square_case("ot_twogauss_uniform", gauss2, [](const Vec2&) { return 1.0; }));
    cases.push_back(ot_square_case("ot_twogauss_gauss", gauss2, gauss_target));

    return cases;
}

}  // namespace

const std::vector<BenchmarkCase>& catalog() {
    static const std::vector<BenchmarkCase> cases = build_catalog();
    return cases;
}

const BenchmarkCase* find_case(const std::string& name) {
    for (const auto& c : catalog())
        if (c.name == name) return &c;
    return nullptr;
}

void apply_json_overrides(RunConfig& cfg, const std::string& json_text) {
    const nlohmann::json j = nlohmann::json::parse(json_text);
    if (j.contains("case")) cfg.case_name = j["case"].get<std::string>();
    if (j.contains("points")) cfg.n_c = j["points"].get<std::size_t>();
    if (j.contains("boundary_points")) cfg.n_b = j["boundary_points"].get<std::size_t>();
    if (j.contains("seeds")) cfg.seed_fraction = j["seeds"].get<double>();
    if (j.contains("adaptive")) cfg.adaptive = j["adaptive"].get<bool>();
    if (j.contains("iters")) cfg.n_iters = j["iters"].get<int>();
    if (j.contains("repeats")) cfg.repeats = j["repeats"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("mode")) cfg.mode = j["mode"].get<std::string>();
    if (j.contains("lambda")) cfg.lambda = j["lambda"].get<double>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("parallel_repeats")) cfg.parallel_repeats = j["parallel_repeats"].get<int>();
    if (j.contains("dump_sampling")) cfg.dump_sampling = j["dump_sampling"].get<bool>();
    if (j.contains("pushforward_samples"))
        cfg.pushforward_samples = j["pushforward_samples"].get<std::size_t>();
}

RunConfig run_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    RunConfig cfg;
    apply_json_overrides(cfg, text);
    return cfg;
}

std::vector<std::vector<double>> pushforward_histogram(const NetworkParams& net,
                                                       const BenchmarkCase& bc, std::size_t n_samples,
                                                       Rng& rng, int bins) {
    if (!bc.mu0_sampler || !bc.spec.target) throw std::invalid_argument("pushforward: not a transport case");
    const Vec2 lo = bc.spec.target->bbox_lo(), hi = bc.spec.target->bbox_hi();
    std::vector<std::vector<double>> hist(bins, std::vector<double>(bins, 0.0));
    for (std::size_t s = 0; s < n_samples; ++s) {
        const Vec2 x = bc.mu0_sampler(rng);
        const Vec2 y = eval_grad(net, x);
        const int ix = std::clamp(static_cast<int>((y.x - lo.x) / (hi.x - lo.x) * bins), 0, bins - 1);
        const int iy = std::clamp(static_cast<int>((y.y - lo.y) / (hi.y - lo.y) * bins), 0, bins - 1);
        hist[iy][ix] += 1.0;
    }
    return hist;
}

namespace {

struct RepeatData {
    std::vector<LossReport> history;
    std::vector<ErrorReport> errors;
    bool aborted = false;
};

SolveOptions materialize_options(const BenchmarkCase& bc, const RunConfig& cfg) {
    SolveOptions o = bc.defaults;
    if (cfg.n_c) o.n_c = cfg.n_c;
    if (cfg.n_b) o.n_b = cfg.n_b;
    if (cfg.n_iters) o.n_iters = cfg.n_iters;
    o.adaptive = cfg.adaptive;
    if (cfg.seed_fraction >= 0.0) o.seed_fraction = cfg.seed_fraction;
    return o;
}

RepeatData run_one_repeat(const BenchmarkCase& bc, const RunConfig& cfg, const SolveOptions& opts,
                          int repeat, const std::string& dir) {
    std::filesystem::create_directories(dir);
    ProblemSpec spec = bc.spec;
    if (cfg.lambda >= 0.0) spec.lambda = cfg.lambda;

    CsvWriter history_csv(dir + "/history.csv",
                          {"epoch", "total", "pde_term", "bc_term", "stage", "resample_flag"});
    CsvWriter errors_csv(dir + "/errors.csv", {"iter", "rel_l2", "rel_h2"});
    long resample_events = 0;

    RepeatData data;
    SolveSinks sinks;
    sinks.train.on_epoch = [&](const LossReport& r) {
        history_csv.row({CsvWriter::num(r.epoch), CsvWriter::num(r.total), CsvWriter::num(r.pde_term),
                         CsvWriter::num(r.bc_term), r.stage == Stage::Adam ? "adam" : "lbfgs",
                         r.resampled ? "1" : "0"});
    };
    if (cfg.dump_sampling) {
        sinks.train.on_resample = [&, dir](const SeedDensity& den, const std::vector<Vec2>& pool) {
            CsvWriter ev(dir + "/sampling_event" + std::to_string(resample_events++) + ".csv",
                         {"type", "x", "y", "value"});
            for (std::size_t s = 0; s < den.seeds.size(); ++s)
                ev.row({"seed", CsvWriter::num(den.seeds[s].x), CsvWriter::num(den.seeds[s].y),
                        CsvWriter::num(den.seed_values[s])});
            for (std::size_t j = 0; j < pool.size(); ++j)
                ev.row({"pool", CsvWriter::num(pool[j].x), CsvWriter::num(pool[j].y),
                        CsvWriter::num(den.pool_probabilities[j])});
        };
    }
    sinks.on_error = [&](const ErrorReport& er) {
        errors_csv.row({CsvWriter::num(static_cast<long>(er.outer_iter)), CsvWriter::num(er.rel_l2),
                        CsvWriter::num(er.rel_h2)});
        write_grid_csv(dir + "/pointwise_iter" + std::to_string(er.outer_iter) + ".csv", er.pointwise);
    };
    Rng hist_rng(cfg.seed * 0x9e3779b97f4a7c15ULL + 0xb5ad4eceda1ce2a9ULL + repeat);
    sinks.on_iteration_done = [&](int iter, const NetworkParams& net) {
        save_checkpoint(net, dir + "/checkpoint_iter" + std::to_string(iter));
        if (spec.op == OperatorKind::Transport && cfg.pushforward_samples > 0) {
            const auto hist = pushforward_histogram(net, bc, cfg.pushforward_samples, hist_rng);
            write_grid_csv(dir + "/hist_iter" + std::to_string(iter) + ".csv", hist);
        }
    };

    Rng rng(cfg.seed + static_cast<std::uint64_t>(repeat));
    const Architecture arch = default_architecture(spec);
    SolveResult result;
    if (cfg.mode == "pinn_baseline")
        result = pinn_solve(spec, arch, opts, rng, &sinks);
    else
        result = outer_solve(spec, arch, opts, rng, &sinks);

    data.history = std::move(result.history);
    data.errors = std::move(result.errors);
    for (auto& er : data.errors) er.pointwise.clear();  // already on disk
    data.aborted = result.aborted;
    return data;
}

double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.empty()) return 0.0;
    const double idx = p * static_cast<double>(v.size() - 1);
    const std::size_t i0 = static_cast<std::size_t>(idx);
    const std::size_t i1 = std::min(i0 + 1, v.size() - 1);
    const double frac = idx - static_cast<double>(i0);
    return v[i0] * (1.0 - frac) + v[i1] * frac;
}

void write_quantiles(const std::string& path, const std::vector<RepeatData>& repeats) {
    CsvWriter q(path, {"kind", "index", "metric", "q05", "q50", "q95"});
    std::size_t max_epochs = 0, max_iters = 0;
    for (const auto& r : repeats) {
        max_epochs = std::max(max_epochs, r.history.size());
        max_iters = std::max(max_iters, r.errors.size());
    }
    for (std::size_t e = 0; e < max_epochs; ++e) {
        std::vector<double> losses;
        for (const auto& r : repeats)
            if (e < r.history.size()) losses.push_back(r.history[e].total);
        q.row({"epoch", CsvWriter::num(static_cast<long>(e)), "loss",
               CsvWriter::num(percentile(losses, 0.05)), CsvWriter::num(percentile(losses, 0.50)),
               CsvWriter::num(percentile(losses, 0.95))});
    }
    for (const char* metric : {"rel_l2", "rel_h2"}) {
        for (std::size_t it = 0; it < max_iters; ++it) {
            std::vector<double> vals;
            for (const auto& r : repeats)
                if (it < r.errors.size())
                    vals.push_back(std::string(metric) == "rel_l2" ? r.errors[it].rel_l2
                                                                   : r.errors[it].rel_h2);
            q.row({"iter", CsvWriter::num(static_cast<long>(it)), metric,
                   CsvWriter::num(percentile(vals, 0.05)), CsvWriter::num(percentile(vals, 0.50)),
                   CsvWriter::num(percentile(vals, 0.95))});
        }
    }
}

}  // namespace

RunStatus run(const RunConfig& cfg) {
    const BenchmarkCase* bc = find_case(cfg.case_name);
    if (!bc) return RunStatus::ConfigError;
    if (cfg.mode != "deep_ritz" && cfg.mode != "pinn_baseline") return RunStatus::ConfigError;
    if (cfg.mode == "pinn_baseline" && bc->spec.op != OperatorKind::MongeAmpere)
        return RunStatus::ConfigError;

    const SolveOptions opts = materialize_options(*bc, cfg);
    const int repeats = cfg.repeats > 0 ? cfg.repeats : bc->default_repeats;

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) return RunStatus::ConfigError;

    {
        nlohmann::json meta;
        meta["case"] = cfg.case_name;
        meta["mode"] = cfg.mode;
        meta["points"] = opts.n_c;
        meta["boundary_points"] = opts.n_b;
        meta["iters"] = opts.n_iters;
        meta["adaptive"] = opts.adaptive;
        meta["seeds"] = opts.seed_fraction;
        meta["repeats"] = repeats;
        meta["seed"] = cfg.seed;
        meta["lambda"] = cfg.lambda >= 0.0 ? cfg.lambda : bc->spec.lambda;
        std::ofstream mf(cfg.out_dir + "/run_meta.json", std::ios::binary);
        mf << meta.dump(2) << "\n";
    }

    std::vector<RepeatData> data(repeats);
    bool failed = false;
    const auto worker = [&](int r) {
        try {
            data[r] = run_one_repeat(*bc, cfg, opts, r, cfg.out_dir + "/run_" + std::to_string(r));
        } catch (const std::exception&) {
            data[r].aborted = true;
        }
    };
    if (cfg.parallel_repeats > 1) {
        for (int base = 0; base < repeats; base += cfg.parallel_repeats) {
            std::vector<std::thread> pool;
            for (int r = base; r < std::min(repeats, base + cfg.parallel_repeats); ++r)
                pool.emplace_back(worker, r);
            for (auto& t : pool) t.join();
        }
    } else {
        for (int r = 0; r < repeats; ++r) worker(r);
    }
    for (const auto& d : data) failed = failed || d.aborted;

    write_quantiles(cfg.out_dir + "/quantiles.csv", data);
    return failed ? RunStatus::NumericalAbort : RunStatus::Ok;
}

}  // namespace fnpde
