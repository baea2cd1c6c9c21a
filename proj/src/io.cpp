#include "haptofem/io.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;

namespace haptofem {

void add_run_options(CLI::App& app, RunConfig& cfg) {
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.set_config("--config", "", "line-oriented `key = value` config file; flags override it");
    app.add_option("--scheme", cfg.scheme, "time scheme: uvmsigma | uvms")
        ->check(CLI::IsMember({"uvmsigma", "uvms"}))
        ->capture_default_str();
    app.add_option("--problem", cfg.problem, "experiment: test1 | test2 | zero")
        ->check(CLI::IsMember({"test1", "test2", "zero"}))
        ->capture_default_str();
    app.add_option("--mu-u", cfg.mu_u, "proliferation rate mu_u (>= 0)")->capture_default_str();
    app.add_option("--n", cfg.n, "unit-square mesh subdivisions per side")->capture_default_str();
    app.add_option("--dt", cfg.dt, "time step")->capture_default_str();
    app.add_option("--t-end", cfg.t_end, "final time T")->capture_default_str();
    app.add_option("--snapshots", cfg.snapshots, "comma-separated snapshot times")
        ->delimiter(',')
        ->capture_default_str();
    app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
    app.add_option("--tol", cfg.tol, "linear solver relative tolerance")->capture_default_str();
    app.add_option("--mesh-file", cfg.mesh_file, "load the mesh from a file instead of --n");
}

RunConfig parse_config(const std::vector<std::string>& args) {
    RunConfig cfg;
    CLI::App app{"haptotaxis finite-element runner"};
    add_run_options(app, cfg);
    std::vector<const char*> argv;
    argv.push_back("haptofem");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& err) {
        throw std::invalid_argument(err.what());
    }
    cfg.threads = env_thread_cap();
    validate_config(cfg);
    return cfg;
}

void validate_config(const RunConfig& cfg) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("dt: must be positive");
    if (!(cfg.t_end > 0.0)) throw std::invalid_argument("t-end: must be positive");
    if (cfg.mu_u < 0.0) throw std::invalid_argument("mu-u: must be >= 0");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol: must be positive");
    if (cfg.mesh_file.empty() && cfg.n < 1) throw std::invalid_argument("n: must be >= 1");
    if (cfg.threads < 0) throw std::invalid_argument("threads: must be >= 0");
    make_time_config(cfg.dt, cfg.t_end, cfg.tol);  // dt divides t_end
    for (double t : cfg.snapshots)
        if (t < 0.0 || t > cfg.t_end)
            throw std::invalid_argument("snapshots: time " + fmt_g17(t) +
                                        " outside [0, t-end]");
}

std::vector<std::pair<double, int>> snapshot_steps(const RunConfig& cfg) {
    const int num_steps = make_time_config(cfg.dt, cfg.t_end, cfg.tol).num_steps;
    std::vector<std::pair<double, int>> out;
    out.reserve(cfg.snapshots.size());
    for (double t : cfg.snapshots) {
        // nearest grid time; always within dt/2 of the request
        const int step = std::clamp(static_cast<int>(std::llround(t / cfg.dt)), 0, num_steps);
        out.emplace_back(t, step);
    }
    return out;
}

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

} // namespace

void write_vtk(const TriMesh& mesh,
               const std::vector<std::pair<std::string, const FeScalarField*>>& scalars,
               const FeVectorField* vectors, const std::string& vector_name,
               const std::string& path, const std::string& title) {
    auto out = open_out(path);
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.num_vertices() << " double\n";
    for (int j = 0; j < mesh.num_vertices(); ++j) {
        const auto& p = mesh.vertex(j);
        out << fmt_g17(p[0]) << " " << fmt_g17(p[1]) << " 0\n";
    }
    out << "CELLS " << mesh.num_triangles() << " " << 4 * mesh.num_triangles() << "\n";
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const auto& t = mesh.triangle(e);
        out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    }
    out << "CELL_TYPES " << mesh.num_triangles() << "\n";
    for (int e = 0; e < mesh.num_triangles(); ++e) out << "5\n";
    out << "POINT_DATA " << mesh.num_vertices() << "\n";
    for (const auto& [name, field] : scalars) {
        if (!field || field->mesh != &mesh)
            throw std::invalid_argument("write_vtk: scalar field '" + name +
                                        "' missing or on a different mesh");
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : field->values) out << fmt_g17(v) << "\n";
    }
    if (vectors) {
        if (vectors->mesh != &mesh)
            throw std::invalid_argument("write_vtk: vector field on a different mesh");
        out << "VECTORS " << vector_name << " double\n";
        for (int j = 0; j < mesh.num_vertices(); ++j)
            out << fmt_g17(vectors->comp(j, 0)) << " " << fmt_g17(vectors->comp(j, 1)) << " 0\n";
    }
    finish(out, path);
}

void write_minima_csv(const MinimaSeries& series, const std::string& path) {
    auto out = open_out(path);
    out << "step,time,min_u,min_v,min_m";
    if (series.has_s) out << ",min_s";
    out << "\n";
    for (const auto& r : series.rows) {
        out << r.step << "," << fmt_g17(r.time) << "," << fmt_g17(r.min_u) << ","
            << fmt_g17(r.min_v) << "," << fmt_g17(r.min_m);
        if (series.has_s) out << "," << fmt_g17(r.min_s);
        out << "\n";
    }
    finish(out, path);
}

void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows, const std::string& path) {
    auto out = open_out(path);
    out << "step,time,v_linf,m_l2,dt_sum_m_h1_sq,dt_sum_dtm_l2_sq\n";
    for (const auto& r : rows)
        out << r.step << "," << fmt_g17(r.time) << "," << fmt_g17(r.v_linf) << ","
            << fmt_g17(r.m_l2) << "," << fmt_g17(r.cum_dt_m_h1_sq) << ","
            << fmt_g17(r.cum_dt_dtm_l2_sq) << "\n";
    finish(out, path);
}

void write_errors_csv(const ErrorTable& table, const std::string& path) {
    auto out = open_out(path);
    out << "level,n,h,dt,e_u_L2,e_v_L2,e_m_L2,e_sigma_L2,e_u_H1,e_m_H1,"
           "order_u,order_v,order_m,order_sigma\n";
    for (const auto& r : table.rows)
        out << r.level << "," << r.n << "," << fmt_g17(r.h) << "," << fmt_g17(r.dt) << ","
            << fmt_g17(r.e_u_l2) << "," << fmt_g17(r.e_v_l2) << "," << fmt_g17(r.e_m_l2) << ","
            << fmt_g17(r.e_sigma_l2) << "," << fmt_g17(r.e_u_h1) << "," << fmt_g17(r.e_m_h1)
            << "," << fmt_g17(r.order_u) << "," << fmt_g17(r.order_v) << ","
            << fmt_g17(r.order_m) << "," << fmt_g17(r.order_sigma) << "\n";
    finish(out, path);
}

void write_compare_csv(const CrossSchemeDiff& diff, const std::string& path) {
    auto out = open_out(path);
    out << "variable,n_coarse,n_fine,dist_coarse,dist_fine,ratio\n";
    const auto row = [&](const char* name, double c, double f) {
        out << name << "," << diff.n_coarse << "," << diff.n_fine << "," << fmt_g17(c) << ","
            << fmt_g17(f) << "," << fmt_g17(f / c) << "\n";
    };
    row("u", diff.du_coarse, diff.du_fine);
    row("v", diff.dv_coarse, diff.dv_fine);
    row("m", diff.dm_coarse, diff.dm_fine);
    finish(out, path);
}

int run_simulation(const RunConfig& cfg) {
    try {
        validate_config(cfg);
        fs::create_directories(cfg.out_dir);
        const TriMesh mesh =
            cfg.mesh_file.empty() ? generate_unit_square_mesh(cfg.n) : read_mesh(cfg.mesh_file);
        const ProblemSetup setup = setup_by_name(cfg.problem, cfg.mu_u);
        const TimeConfig time = make_time_config(cfg.dt, cfg.t_end, cfg.tol);
        const auto snaps = snapshot_steps(cfg);

        RunOptions opts;
        opts.scheme = scheme_from_name(cfg.scheme);
        opts.threads = cfg.threads;
        opts.u_init = UInit::Nodal;
        for (const auto& [t, step] : snaps) {
            (void)t;
            opts.snapshot_steps.push_back(step);
        }
        std::sort(opts.snapshot_steps.begin(), opts.snapshot_steps.end());
        opts.snapshot_steps.erase(
            std::unique(opts.snapshot_steps.begin(), opts.snapshot_steps.end()),
            opts.snapshot_steps.end());

        nlohmann::json written_snaps = nlohmann::json::array();
        opts.snapshot_hook = [&](int step, double t, const SnapshotFields& f) {
            const std::string file = "snapshot_" + std::to_string(step) + ".vtk";
            std::vector<std::pair<std::string, const FeScalarField*>> scalars = {
                {"u", f.u}, {"v", f.v}, {"m", f.m}};
            if (f.s) scalars.emplace_back("s", f.s);
            write_vtk(mesh, scalars, f.sigma, "sigma", (fs::path(cfg.out_dir) / file).string());
            written_snaps.push_back({{"step", step}, {"time", t}, {"file", file}});
        };

        const RunRecord rec = run_scheme(mesh, setup, time, opts);
        write_minima_csv(rec.minima, (fs::path(cfg.out_dir) / "minima.csv").string());
        write_diagnostics_csv(rec.diagnostics,
                              (fs::path(cfg.out_dir) / "diagnostics.csv").string());

        double min_u = 0.0, min_v = 0.0, min_m = 0.0, min_s = 0.0;
        if (!rec.minima.rows.empty()) {
            min_u = min_v = min_m = 1e300;
            min_s = rec.minima.has_s ? 1e300 : 0.0;
            for (const auto& r : rec.minima.rows) {
                min_u = std::min(min_u, r.min_u);
                min_v = std::min(min_v, r.min_v);
                min_m = std::min(min_m, r.min_m);
                if (rec.minima.has_s) min_s = std::min(min_s, r.min_s);
            }
        }

        nlohmann::json manifest;
        manifest["scheme"] = cfg.scheme;
        manifest["problem"] = cfg.problem;
        manifest["mu_u"] = cfg.mu_u;
        manifest["mesh"] = {{"source", cfg.mesh_file.empty() ? "generated" : "file"},
                            {"n", cfg.mesh_file.empty() ? cfg.n : 0},
                            {"file", cfg.mesh_file},
                            {"num_vertices", mesh.num_vertices()},
                            {"num_triangles", mesh.num_triangles()},
                            {"h", mesh.mesh_size()},
                            {"nonobtuse", mesh.nonobtuse()}};
        manifest["dt"] = cfg.dt;
        manifest["t_end"] = cfg.t_end;
        manifest["num_steps"] = time.num_steps;
        manifest["solver_tol"] = cfg.tol;
        manifest["threads"] = cfg.threads;
        nlohmann::json requested = nlohmann::json::array();
        for (const auto& [t, step] : snaps)
            requested.push_back({{"requested_time", t}, {"step", step}, {"time", step * cfg.dt}});
        manifest["snapshots_requested"] = requested;
        manifest["snapshots_written"] = written_snaps;
        manifest["outputs"] = {{"minima", "minima.csv"}, {"diagnostics", "diagnostics.csv"}};
        manifest["summary"] = {{"v0_linf", rec.report.v0_linf},
                               {"max_v_linf", rec.report.max_v_linf},
                               {"max_m_l2", rec.report.max_m_l2},
                               {"dt_sum_m_h1_sq", rec.report.dt_sum_m_h1_sq},
                               {"dt_sum_dtm_l2_sq", rec.report.dt_sum_dtm_l2_sq},
                               {"v_sup_violated", rec.report.v_sup_violated},
                               {"v_nodally_nonincreasing", rec.report.v_nodally_nonincreasing},
                               {"all_finite", rec.report.all_finite},
                               {"negative_m_steps", rec.report.negative_m_steps},
                               {"negative_s_steps", rec.report.negative_s_steps},
                               {"min_u", min_u},
                               {"min_v", min_v},
                               {"min_m", min_m},
                               {"min_s", min_s}};
        std::ofstream mf((fs::path(cfg.out_dir) / "run.json").string());
        mf << manifest.dump(2) << "\n";
        if (!mf) throw std::runtime_error("write failure on run.json");
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "haptofem run: " << err.what() << "\n";
        return 1;
    }
}

int run_convergence(const RunConfig& cfg, int num_levels, int ref_factor, double t_check) {
    try {
        if (num_levels < 2) throw std::invalid_argument("num-levels: need at least 2 levels");
        if (ref_factor < 4) throw std::invalid_argument("ref-factor: must be >= 4");
        if (!(t_check > 0.0)) throw std::invalid_argument("t-check: must be positive");
        std::vector<std::pair<int, double>> levels;
        for (int k = 0; k < num_levels; ++k)
            levels.emplace_back(cfg.n << k, cfg.dt / static_cast<double>(1 << k));
        const std::pair<int, double> reference{levels.back().first * ref_factor,
                                               levels.back().second / ref_factor};
        const ProblemSetup setup = setup_by_name(cfg.problem, cfg.mu_u);
        const ErrorTable table =
            convergence_study(scheme_from_name(cfg.scheme), setup, levels, reference, t_check,
                              cfg.tol, cfg.threads);
        fs::create_directories(cfg.out_dir);
        write_errors_csv(table, (fs::path(cfg.out_dir) / "errors.csv").string());
        std::printf("%6s %6s %12s %12s %10s %10s %10s %10s\n", "level", "n", "e_u_L2", "e_m_L2",
                    "ord_u", "ord_v", "ord_m", "ord_sig");
        for (const auto& r : table.rows)
            std::printf("%6d %6d %12.4e %12.4e %10.3f %10.3f %10.3f %10.3f\n", r.level, r.n,
                        r.e_u_l2, r.e_m_l2, r.order_u, r.order_v, r.order_m, r.order_sigma);
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "haptofem converge: " << err.what() << "\n";
        return 1;
    }
}

int run_compare(const RunConfig& cfg, double t_check) {
    try {
        if (!(t_check > 0.0)) throw std::invalid_argument("t-check: must be positive");
        const ProblemSetup setup = setup_by_name(cfg.problem, cfg.mu_u);
        const CrossSchemeDiff diff =
            cross_scheme_diff(setup, cfg.n, cfg.dt, t_check, cfg.tol, cfg.threads);
        fs::create_directories(cfg.out_dir);
        write_compare_csv(diff, (fs::path(cfg.out_dir) / "compare.csv").string());
        std::printf("scheme distance at t = %g (n = %d vs n = %d)\n", t_check, diff.n_coarse,
                    diff.n_fine);
        std::printf("  u: %10.4e -> %10.4e (ratio %.3f)\n", diff.du_coarse, diff.du_fine,
                    diff.ratio_u());
        std::printf("  v: %10.4e -> %10.4e (ratio %.3f)\n", diff.dv_coarse, diff.dv_fine,
                    diff.ratio_v());
        std::printf("  m: %10.4e -> %10.4e (ratio %.3f)\n", diff.dm_coarse, diff.dm_fine,
                    diff.ratio_m());
        return 0;
    } catch (const std::exception& err) {
        std::cerr << "haptofem compare: " << err.what() << "\n";
        return 1;
    }
}

int env_thread_cap() {
    const char* env = std::getenv("HAPTOFEM_THREADS");
    if (!env || *env == '\0') return 0;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 0)
        throw std::runtime_error("HAPTOFEM_THREADS: expected a nonnegative integer, got '" +
                                 std::string(env) + "'");
    return static_cast<int>(v);
}

} // namespace haptofem
