// Command-line driver: mesh-gen | run | converge | compare.
//
//   haptofem run --scheme uvms --problem test2 --mu-u 2 --out results/
//   haptofem converge --n 8 --dt 0.04 --num-levels 3 --t-check 1
//   haptofem compare --n 16 --dt 0.02 --t-check 1
//
// HAPTOFEM_THREADS caps assembly parallelism (0 = single-threaded
// deterministic mode, the default).

#include "haptofem/io.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    using namespace haptofem;

    CLI::App app{"finite-element simulator for a haptotaxis tumor-invasion model"};
    app.require_subcommand(1);

    // mesh-gen
    int gen_n = 50;
    std::string gen_out = "mesh.txt";
    auto* mesh_gen = app.add_subcommand("mesh-gen", "write a unit-square mesh file");
    mesh_gen->add_option("--n", gen_n, "subdivisions per side")->capture_default_str();
    mesh_gen->add_option("--out", gen_out, "output mesh file")->capture_default_str();

    // run
    RunConfig run_cfg;
    auto* run = app.add_subcommand("run", "run one simulation and write snapshots/CSV outputs");
    add_run_options(*run, run_cfg);

    // converge
    RunConfig conv_cfg;
    conv_cfg.n = 8;
    conv_cfg.dt = 0.04;
    int num_levels = 3;
    int ref_factor = 4;
    double conv_t_check = 1.0;
    auto* converge =
        app.add_subcommand("converge", "refinement study against a fine self-reference");
    add_run_options(*converge, conv_cfg);
    converge->add_option("--num-levels", num_levels, "number of halving levels")
        ->capture_default_str();
    converge->add_option("--ref-factor", ref_factor, "extra refinement of the reference (>= 4)")
        ->capture_default_str();
    converge->add_option("--t-check", conv_t_check, "comparison time")->capture_default_str();

    // compare
    RunConfig cmp_cfg;
    cmp_cfg.n = 16;
    cmp_cfg.dt = 0.02;
    double cmp_t_check = 1.0;
    auto* compare =
        app.add_subcommand("compare", "cross-scheme distances at (n, dt) and (2n, dt/2)");
    add_run_options(*compare, cmp_cfg);
    compare->add_option("--t-check", cmp_t_check, "comparison time")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        const int threads = env_thread_cap();
        if (mesh_gen->parsed()) {
            write_mesh(generate_unit_square_mesh(gen_n), gen_out);
            std::cout << "wrote " << gen_out << "\n";
            return 0;
        }
        if (run->parsed()) {
            run_cfg.threads = threads;
            return run_simulation(run_cfg);
        }
        if (converge->parsed()) {
            conv_cfg.threads = threads;
            return run_convergence(conv_cfg, num_levels, ref_factor, conv_t_check);
        }
        cmp_cfg.threads = threads;
        return run_compare(cmp_cfg, cmp_t_check);
    } catch (const std::exception& err) {
        std::cerr << "haptofem: " << err.what() << "\n";
        return 1;
    }
}
