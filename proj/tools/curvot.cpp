// curvot: semi-discrete optimal transport between weighted point clouds and
// polyline-supported measures, and polyline fitting ("curvling") on top of it.
//
// Subcommands:
//   transport  solve the dual potentials for a fixed polyline
//   curvle     optimize the polyline vertices against the point cloud
//   filaments  curvle with disjoint segments (every odd density zero)
//   bench      solver comparison and multithreaded-evaluation scaling
//   check      genericity scan and finite-difference self-tests

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "curvot/errors.hpp"
#include "curvot/io.hpp"
#include "curvot/measures.hpp"
#include "curvot/power_diagram.hpp"
#include "curvot/shape_opt.hpp"
#include "curvot/solvers.hpp"
#include "curvot/synthetic.hpp"
#include "curvot/transport.hpp"

using nlohmann::json;
using namespace curvot;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
    // input
    std::string points_csv;
    std::string image_path;
    std::string image_mode = "bright";
    double image_threshold = 0.0;
    int dim = 2;
    // polyline
    std::string polyline_json;
    std::string init = "random-walk";  // random-walk | serpentine | <file.json>
    int segments = 100;
    int filaments = 0;
    double init_step = 0.0;  // 0 = auto
    // solver
    std::string method = "hybrid";
    double grad_tol = 0.0;
    int max_iters = 5000;
    int lbfgs_memory = 10;
    double fixed_step = 0.0;
    double nesterov_L = 0.0;
    std::string oracle = "adjacency";
    int threads = 0;  // 0 = hardware
    // shape
    double k1 = 0.0;  // 0 = unconstrained
    double k2 = 0.0;
    int outer_max = 200;
    double shape_tol = 1e-3;
    int dump_every = 0;
    bool backtracking = false;
    // misc
    std::uint64_t seed = 1;
    std::string out_prefix = "curvot_out";
    std::string config_path;
    // bench
    std::string bench_mode = "solvers";
    int bench_n = 1000;
    int bench_p = 100;
    std::string threads_list = "1,2,4,8";
    // check
    double gen_tol = 1e-12;
    bool fd_selftest = false;
    bool force = false;
};

void merge_config(Options& o, const CLI::App& app) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw IoError("cannot open config " + o.config_path);
    json cfg = json::parse(in);

    auto absent = [&](const std::string& flag) {
        const CLI::Option* opt = app.get_option_no_throw("--" + flag);
        return opt == nullptr || opt->count() == 0;
    };
    auto load = [&](const char* key, auto& field) {
        if (cfg.contains(key) && absent(key)) field = cfg[key].get<std::decay_t<decltype(field)>>();
    };
    load("points", o.points_csv);
    load("image", o.image_path);
    load("image-mode", o.image_mode);
    load("image-threshold", o.image_threshold);
    load("dim", o.dim);
    load("polyline", o.polyline_json);
    load("init", o.init);
    load("segments", o.segments);
    load("filaments", o.filaments);
    load("init-step", o.init_step);
    load("method", o.method);
    load("grad-tol", o.grad_tol);
    load("max-iters", o.max_iters);
    load("lbfgs-memory", o.lbfgs_memory);
    load("fixed-step", o.fixed_step);
    load("nesterov-L", o.nesterov_L);
    load("oracle", o.oracle);
    load("threads", o.threads);
    load("k1", o.k1);
    load("k2", o.k2);
    load("outer-max", o.outer_max);
    load("shape-tol", o.shape_tol);
    load("dump-every", o.dump_every);
    load("seed", o.seed);
    load("out-prefix", o.out_prefix);
}

json options_json(const Options& o) {
    return json{{"points", o.points_csv},
                {"image", o.image_path},
                {"image-mode", o.image_mode},
                {"image-threshold", o.image_threshold},
                {"dim", o.dim},
                {"polyline", o.polyline_json},
                {"init", o.init},
                {"segments", o.segments},
                {"filaments", o.filaments},
                {"init-step", o.init_step},
                {"method", o.method},
                {"grad-tol", o.grad_tol},
                {"max-iters", o.max_iters},
                {"lbfgs-memory", o.lbfgs_memory},
                {"fixed-step", o.fixed_step},
                {"nesterov-L", o.nesterov_L},
                {"oracle", o.oracle},
                {"threads", o.threads},
                {"k1", o.k1},
                {"k2", o.k2},
                {"outer-max", o.outer_max},
                {"shape-tol", o.shape_tol},
                {"dump-every", o.dump_every},
                {"seed", o.seed},
                {"out-prefix", o.out_prefix}};
}

void write_manifest(const Options& o, const std::string& subcommand,
                    const std::vector<std::string>& outputs) {
    json m;
    m["tool"] = "curvot";
    m["version"] = kVersion;
    m["subcommand"] = subcommand;
    m["seed"] = o.seed;
    m["options"] = options_json(o);
    m["outputs"] = outputs;
    std::ofstream out(o.out_prefix + ".manifest.json");
    out << m.dump(2) << '\n';
}

SolveMethod parse_method(const std::string& name) {
    if (name == "gradient") return SolveMethod::gradient;
    if (name == "bb") return SolveMethod::bb;
    if (name == "nesterov") return SolveMethod::nesterov;
    if (name == "lbfgs") return SolveMethod::lbfgs;
    if (name == "hybrid") return SolveMethod::hybrid;
    throw Error("unknown method '" + name + "'");
}

SolverConfig solver_config(const Options& o) {
    SolverConfig cfg;
    cfg.method = parse_method(o.method);
    cfg.grad_tol = o.grad_tol;
    cfg.outer_max = o.max_iters;
    cfg.lbfgs_memory = o.lbfgs_memory;
    cfg.fixed_step = o.fixed_step;
    cfg.nesterov_L = o.nesterov_L;
    cfg.oracle_mode = o.oracle == "brute-force" ? OracleMode::brute_force : OracleMode::adjacency;
    cfg.eval.threads =
        o.threads > 0 ? o.threads : static_cast<int>(std::thread::hardware_concurrency());
    return cfg;
}

template <int D>
AtomicMeasure<D> load_cloud(const Options& o) {
    if (!o.points_csv.empty()) return io::load_catalog<D>(o.points_csv);
    if constexpr (D == 2) {
        if (!o.image_path.empty()) {
            const auto img = io::read_pgm(o.image_path);
            const auto mode = o.image_mode == "dark" ? io::IntensityMode::dark
                                                     : io::IntensityMode::bright;
            return io::image_to_diracs(img, mode, o.image_threshold);
        }
    }
    throw Error("no input: pass --points or --image");
}

template <int D>
PolylineMeasure<D> serpentine(int p, const Box<D>& box) {
    // boustrophedon path across the box, sampled at p+1 evenly spaced points
    PolylineMeasure<D> nu;
    const int rows = std::max(1, static_cast<int>(std::round(std::sqrt(p / 2.0))));
    const double w = box.hi[0] - box.lo[0];
    const double total = rows * w + (box.hi[1] - box.lo[1]);
    for (int k = 0; k <= p; ++k) {
        const double s = total * k / p;
        const int row = std::min(rows - 1, static_cast<int>(s / (w + (box.hi[1] - box.lo[1]) / rows)));
        const double in_row = s - row * (w + (box.hi[1] - box.lo[1]) / rows);
        Vec<D> v{};
        const double x = std::min(in_row, w);
        v[0] = box.lo[0] + (row % 2 == 0 ? x : w - x);
        v[1] = box.lo[1] + (box.hi[1] - box.lo[1]) * (row + std::max(0.0, in_row - w) /
                           ((box.hi[1] - box.lo[1]) / rows)) / rows;
        nu.vertices.push_back(v);
    }
    nu.densities = density_from_lengths(nu.vertices);
    return nu;
}

template <int D>
PolylineMeasure<D> initial_polyline(const Options& o, const AtomicMeasure<D>& mu, bool disjoint) {
    if (!o.polyline_json.empty()) {
        auto nu = io::read_polyline_json<D>(o.polyline_json);
        if (disjoint && !nu.disjoint_mode) throw Error("polyline file is not in disjoint mode");
        return nu;
    }
    int p = o.segments;
    if (disjoint && o.filaments > 0) p = 2 * o.filaments - 1;
    const Box<D> box = bounding_box(mu.positions);
    if (o.init == "serpentine" && !disjoint) {
        auto nu = serpentine<D>(p, box);
        return nu;
    }
    if (o.init != "random-walk" && o.init != "serpentine")
        return io::read_polyline_json<D>(o.init);
    double step = o.init_step;
    if (!(step > 0.0)) {
        step = 1.5 * std::max(box.max_extent(), 1e-9) / std::sqrt(double(p));
        if (o.k1 > 0.0) step = std::min(step, 0.95 * o.k1);  // start feasible
    }
    double max_turn = 3.14159265358979323846;
    if (o.k2 > 0.0) max_turn = 2.0 * std::asin(std::min(1.0, 0.45 * o.k2 / step));
    auto nu = random_walk_polyline<D>(p, o.seed, step, disjoint, max_turn);
    // the walk lives in the unit box; map it onto the data bounding box
    for (auto& v : nu.vertices)
        for (int c = 0; c < D; ++c) v[c] = box.lo[c] + v[c] * std::max(box.hi[c] - box.lo[c], 1e-9);
    nu.densities = density_from_lengths(nu.vertices, disjoint);
    return nu;
}

template <int D>
int run_transport(const Options& o) {
    const auto mu = load_cloud<D>(o);
    auto nu = normalize(io::read_polyline_json<D>(o.polyline_json));
    validate(mu);
    validate(nu);

    const SolverConfig cfg = solver_config(o);
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult r = solve(mu, nu, {}, cfg);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

    io::write_potential_json(r.phi, o.out_prefix + ".phi.json");
    io::write_history_csv(r.history, o.out_prefix + ".history.csv");
    write_manifest(o, "transport", {o.out_prefix + ".phi.json", o.out_prefix + ".history.csv"});

    std::printf("n=%d p=%d method=%s\n", mu.size(), nu.segment_count(), o.method.c_str());
    std::printf("W2^2 = %.12g\n", r.final_cost);
    std::printf("gradient norm = %.3e after %zu iterations (%s)\n", r.final_grad_norm,
                r.history.records.size() - 1, r.converged ? "converged" : "iteration cap");
    std::printf("empty cells = %d, evaluations = %d, %.2fs\n", r.final_empty_cells,
                r.evaluations, dt.count());
    return r.converged ? 0 : 2;
}

template <int D>
int run_curvle(const Options& o, bool disjoint, const char* name) {
    auto mu = normalize(load_cloud<D>(o));
    validate(mu);
    auto nu = initial_polyline<D>(o, mu, disjoint);
    validate(nu);

    SolverConfig inner = solver_config(o);
    ShapeConfig shape;
    shape.grad_tol_inf = o.shape_tol;
    shape.outer_max = o.outer_max;
    if (o.k1 > 0.0) shape.constraints.k1 = o.k1;
    if (o.k2 > 0.0) shape.constraints.k2 = o.k2;
    shape.backtracking = o.backtracking;

    std::vector<std::string> outputs;
    ShapeObserver<D> observer;
    if (o.dump_every > 0) {
        observer = [&](int it, const PolylineMeasure<D>& poly, const DualPotential&) {
            if (it % o.dump_every != 0) return;
            char buf[32];
            std::snprintf(buf, sizeof(buf), ".iter%06d.json", it);
            io::write_polyline_json(poly, o.out_prefix + buf);
        };
    }

    const auto t0 = std::chrono::steady_clock::now();
    ShapeResult<D> r = optimize_polyline(mu, nu, inner, shape, observer);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;

    io::write_polyline_json(r.polyline, o.out_prefix + ".polyline.json");
    io::write_shape_history_csv(r.history, o.out_prefix + ".shape_history.csv");
    outputs = {o.out_prefix + ".polyline.json", o.out_prefix + ".shape_history.csv"};
    if constexpr (D == 2) {
        io::render_svg(r.polyline, &mu, o.out_prefix + ".svg");
        outputs.push_back(o.out_prefix + ".svg");
    }
    write_manifest(o, name, outputs);

    const char* status = r.status == ShapeStatus::converged         ? "converged"
                         : r.status == ShapeStatus::iteration_cap   ? "iteration cap"
                                                                    : "inner solve failed";
    std::printf("n=%d p=%d outer iterations=%zu (%s), %.2fs\n", mu.size(),
                r.polyline.segment_count(), r.history.size(), status, dt.count());
    if (!r.history.empty())
        std::printf("G: %.9g -> %.9g, final |grad|_inf = %.3e\n", r.history.front().cost,
                    r.history.back().cost, r.history.back().grad_inf);
    return r.status == ShapeStatus::inner_solve_failed ? 2 : 0;
}

int run_bench_scaling(const Options& o) {
    std::printf("scaling benchmark: n=%d p=%d seed=%llu\n", o.bench_n, o.bench_p,
                static_cast<unsigned long long>(o.seed));
    auto mu = random_cloud<2>(o.bench_n, o.seed);
    auto nu = random_polyline<2>(o.bench_p, o.seed + 1);
    DualPotential phi(o.bench_n, 0.0);  // every cell active: the heavy tracing regime
    const NeighborOracle oracle = build_oracle(mu, phi);

    std::vector<int> counts;
    for (std::size_t pos = 0; pos < o.threads_list.size();) {
        const std::size_t comma = o.threads_list.find(',', pos);
        counts.push_back(std::stoi(o.threads_list.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }

    std::ofstream csv(o.out_prefix + ".scaling.csv");
    csv << "threads,seconds,speedup,bit_identical\n";
    double t1 = 0.0;
    TransportEvaluation ref;
    bool all_identical = true;
    for (int threads : counts) {
        EvalOptions opt;
        opt.threads = threads;
        TransportEvaluation ev;
        double best = 1e300;
        for (int rep = 0; rep < 5; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            ev = evaluate(mu, nu, phi, oracle, opt);
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            best = std::min(best, dt.count());
        }
        bool identical = true;
        if (threads == counts.front()) {
            ref = ev;
            t1 = best;
        } else {
            identical = std::memcmp(&ev.cost, &ref.cost, sizeof(double)) == 0 &&
                        std::memcmp(ev.gradient.data(), ref.gradient.data(),
                                    ev.gradient.size() * sizeof(double)) == 0;
        }
        all_identical = all_identical && identical;
        std::printf("threads=%2d  %8.4fs  speedup %.3f  %s\n", threads, best, t1 / best,
                    identical ? "bit-identical" : "MISMATCH");
        csv << threads << ',' << best << ',' << t1 / best << ',' << (identical ? 1 : 0) << '\n';
    }
    write_manifest(o, "bench-scaling", {o.out_prefix + ".scaling.csv"});
    return all_identical ? 0 : 2;
}

int run_bench_solvers(const Options& o) {
    std::printf("solver benchmark: n=%d p=%d iters=%d seed=%llu\n", o.bench_n, o.bench_p,
                o.max_iters, static_cast<unsigned long long>(o.seed));
    auto [mu, nu] = generic_instance<2>(o.bench_n, o.bench_p, o.seed);

    std::ofstream csv(o.out_prefix + ".solvers.csv");
    csv << "method,iterations,ms_per_iteration,grad_norm,cost,converged\n";
    for (const char* name : {"bb", "nesterov", "lbfgs", "hybrid"}) {
        SolverConfig cfg;
        cfg.method = parse_method(name);
        cfg.outer_max = o.max_iters;
        cfg.grad_tol = 1e-15;
        cfg.eval.threads =
            o.threads > 0 ? o.threads : static_cast<int>(std::thread::hardware_concurrency());
        const auto t0 = std::chrono::steady_clock::now();
        SolveResult r = solve(mu, nu, {}, cfg);
        const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        const std::size_t iters = r.history.records.size() - 1;
        const double ms = 1000.0 * dt.count() / std::max<std::size_t>(1, iters);
        std::printf("%-9s %5zu iterations  %8.2f ms/it  |grad| = %.3e\n", name, iters, ms,
                    r.final_grad_norm);
        csv << name << ',' << iters << ',' << ms << ',' << r.final_grad_norm << ','
            << r.final_cost << ',' << (r.converged ? 1 : 0) << '\n';
    }
    write_manifest(o, "bench-solvers", {o.out_prefix + ".solvers.csv"});
    return 0;
}

template <int D>
int run_check(const Options& o) {
    auto mu = normalize(load_cloud<D>(o));
    validate(mu);
    auto nu = normalize(io::read_polyline_json<D>(o.polyline_json));
    validate(nu);
    const long n = mu.size(), p = nu.segment_count();

    int status = 0;
    const double work = static_cast<double>(p) * n * n;
    if (work > 2e8 && !o.force) {
        std::printf("genericity scan skipped: p*n^2 = %.2g is above the 2e8 threshold "
                    "(pass --force to run it)\n",
                    work);
    } else {
        auto v = check_genericity(mu, nu, o.gen_tol);
        std::printf("genericity: %zu violating (segment,i,j) triples at tolerance %g\n",
                    v.size(), o.gen_tol);
        for (std::size_t k = 0; k < std::min<std::size_t>(v.size(), 20); ++k)
            std::printf("  segment %d, Diracs (%d, %d)\n", v[k].segment, v[k].i, v[k].j);
        if (!v.empty()) status = 2;
    }

    if (o.fd_selftest) {
        DualPotential phi = random_potential(mu.size(), o.seed, 0.01);
        auto ev = evaluate(mu, nu, phi, build_oracle(mu, phi));
        double worst = 0.0;
        for (int i = 0; i < mu.size(); ++i) {
            const double eps = 1e-5;
            DualPotential pp = phi, pm = phi;
            pp[i] += eps;
            pm[i] -= eps;
            const double cp = evaluate(mu, nu, pp, build_oracle(mu, pp)).cost;
            const double cm = evaluate(mu, nu, pm, build_oracle(mu, pm)).cost;
            worst = std::max(worst, std::abs((cp - cm) / (2 * eps) - ev.gradient[i]));
        }
        std::printf("fd-selftest: max |gradient - fd| = %.3e (%s)\n", worst,
                    worst <= 1e-6 ? "ok" : "FAIL");
        if (worst > 1e-6) status = 2;
        double gsum = 0.0;
        for (double g : ev.gradient) gsum += g;
        std::printf("fd-selftest: |sum gradient| = %.3e (%s)\n", std::abs(gsum),
                    std::abs(gsum) <= 1e-10 ? "ok" : "FAIL");
        if (std::abs(gsum) > 1e-10) status = 2;
    }
    return status;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-discrete transport from point clouds to polylines"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", o.config_path, "JSON config file; flags override it");
        cmd->add_option("--points", o.points_csv, "point cloud CSV (x,y[,z][,mass])");
        cmd->add_option("--dim", o.dim, "point dimension for CSV inputs (2 or 3)")
            ->check(CLI::IsMember({2, 3}));
        cmd->add_option("--seed", o.seed, "seed for every randomized choice");
        cmd->add_option("--out-prefix", o.out_prefix, "prefix for all output files");
        cmd->add_option("--threads", o.threads, "worker threads for evaluation (0 = cores)");
        return cmd;
    };
    auto add_image = [&](CLI::App* cmd) {
        cmd->add_option("--image", o.image_path, "grayscale PGM image input");
        cmd->add_option("--image-mode", o.image_mode, "bright or dark pixels carry mass")
            ->check(CLI::IsMember({"bright", "dark"}));
        cmd->add_option("--image-threshold", o.image_threshold,
                        "drop pixels with weight <= threshold * maxval");
    };
    auto add_solver = [&](CLI::App* cmd) {
        cmd->add_option("--method", o.method, "gradient|bb|nesterov|lbfgs|hybrid")
            ->check(CLI::IsMember({"gradient", "bb", "nesterov", "lbfgs", "hybrid"}));
        cmd->add_option("--grad-tol", o.grad_tol, "L2 gradient tolerance (0 = method default)");
        cmd->add_option("--max-iters", o.max_iters, "inner iteration cap");
        cmd->add_option("--lbfgs-memory", o.lbfgs_memory, "L-BFGS memory size");
        cmd->add_option("--fixed-step", o.fixed_step, "fixed step for the gradient method");
        cmd->add_option("--nesterov-L", o.nesterov_L, "Lipschitz estimate for Nesterov");
        cmd->add_option("--oracle", o.oracle, "adjacency or brute-force neighbor oracle")
            ->check(CLI::IsMember({"adjacency", "brute-force"}));
    };
    auto add_shape = [&](CLI::App* cmd) {
        cmd->add_option("--segments", o.segments, "number of polyline segments");
        cmd->add_option("--init", o.init, "random-walk | serpentine | polyline JSON path");
        cmd->add_option("--init-step", o.init_step, "random-walk step length (0 = auto)");
        cmd->add_option("--k1", o.k1, "speed bound: max segment length (0 = off)");
        cmd->add_option("--k2", o.k2, "acceleration bound: max second difference (0 = off)");
        cmd->add_option("--outer-max", o.outer_max, "outer (shape) iteration cap");
        cmd->add_option("--shape-tol", o.shape_tol, "stop when |grad_P G|_inf drops below");
        cmd->add_option("--dump-every", o.dump_every, "dump the polyline every k iterations");
        cmd->add_flag("--backtracking", o.backtracking, "halve the metric step after an increase");
    };

    CLI::App* transport = add_common(app.add_subcommand(
        "transport", "solve the dual transport problem for a fixed polyline"));
    add_image(transport);
    add_solver(transport);
    transport->add_option("--polyline", o.polyline_json, "polyline JSON")->required();

    CLI::App* curvle = add_common(
        app.add_subcommand("curvle", "approximate a point cloud or image by a polyline"));
    add_image(curvle);
    add_solver(curvle);
    add_shape(curvle);

    CLI::App* fil = add_common(
        app.add_subcommand("filaments", "fit disjoint segments (odd densities zero)"));
    add_solver(fil);
    add_shape(fil);
    fil->add_option("--filaments", o.filaments, "number of active segments (sets --segments)");

    CLI::App* bench = add_common(app.add_subcommand("bench", "benchmark harness"));
    bench->add_option("--bench-mode", o.bench_mode, "solvers or scaling")
        ->check(CLI::IsMember({"solvers", "scaling"}));
    bench->add_option("--n", o.bench_n, "number of Diracs");
    bench->add_option("--p", o.bench_p, "number of segments");
    bench->add_option("--max-iters", o.max_iters, "iterations for the solver comparison");
    bench->add_option("--threads-list", o.threads_list, "thread counts for scaling mode");

    CLI::App* check = add_common(
        app.add_subcommand("check", "genericity scan and finite-difference self-tests"));
    check->add_option("--polyline", o.polyline_json, "polyline JSON")->required();
    check->add_option("--tol", o.gen_tol, "relative genericity tolerance");
    check->add_flag("--fd-selftest", o.fd_selftest, "run finite-difference gradient checks");
    check->add_flag("--force", o.force, "run the O(p n^2) scan regardless of size");

    CLI11_PARSE(app, argc, argv);

    try {
        if (transport->parsed()) {
            merge_config(o, *transport);
            return o.dim == 3 ? run_transport<3>(o) : run_transport<2>(o);
        }
        if (curvle->parsed()) {
            merge_config(o, *curvle);
            return o.dim == 3 ? run_curvle<3>(o, false, "curvle")
                              : run_curvle<2>(o, false, "curvle");
        }
        if (fil->parsed()) {
            merge_config(o, *fil);
            return o.dim == 3 ? run_curvle<3>(o, true, "filaments")
                              : run_curvle<2>(o, true, "filaments");
        }
        if (bench->parsed()) {
            merge_config(o, *bench);
            return o.bench_mode == "scaling" ? run_bench_scaling(o) : run_bench_solvers(o);
        }
        if (check->parsed()) {
            merge_config(o, *check);
            return o.dim == 3 ? run_check<3>(o) : run_check<2>(o);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
