#pragma once

#include "haptofem/verification.hpp"

#include <string>
#include <utility>
#include <vector>

namespace CLI {
class App;
}

namespace haptofem {

/// Resolved configuration of one simulation run. Defaults reproduce the
/// reference experiment setup: scheme uvmsigma, problem test1, mu_u = 0,
/// n = 50, dt = 0.01, T = 15, snapshots at t = 1, 5, 10, 15.
struct RunConfig {
    std::string scheme = "uvmsigma";
    std::string problem = "test1";
    double mu_u = 0.0;
    int n = 50;
    double dt = 0.01;
    double t_end = 15.0;
    std::vector<double> snapshots = {1.0, 5.0, 10.0, 15.0};
    std::string out_dir = "out";
    double tol = 1e-10;
    std::string mesh_file;  // empty: use the generated unit-square mesh
    int threads = 0;        // 0: single-threaded deterministic mode
};

/// Registers the shared flags (--scheme --problem --mu-u --n --dt --t-end
/// --snapshots --out --tol --mesh-file --config) on a CLI11 app.
void add_run_options(CLI::App& app, RunConfig& cfg);

/// Parses argv-style arguments for the `run` command, optionally backed by a
/// line-oriented `key = value` config file (--config; flags override the
/// file, unknown keys are rejected). Throws std::invalid_argument with the
/// offending key on malformed values or constraint violations.
RunConfig parse_config(const std::vector<std::string>& args);

/// Range/consistency checks shared by all entry points: dt > 0, t_end > 0,
/// t_end a multiple of dt, snapshot times inside [0, t_end].
void validate_config(const RunConfig& config);

/// Snapshot times snapped to the nearest time-grid index.
std::vector<std::pair<double, int>> snapshot_steps(const RunConfig& config);

/// Shortest exact decimal form of a double (17 significant digits).
std::string fmt_g17(double v);

/// Legacy ASCII VTK (unstructured grid, triangles as cell type 5, z = 0),
/// one SCALARS block per named scalar field and an optional VECTORS block.
void write_vtk(const TriMesh& mesh,
               const std::vector<std::pair<std::string, const FeScalarField*>>& scalars,
               const FeVectorField* vectors, const std::string& vector_name,
               const std::string& path, const std::string& title = "haptofem fields");

void write_minima_csv(const MinimaSeries& series, const std::string& path);
void write_diagnostics_csv(const std::vector<DiagnosticsRow>& rows, const std::string& path);
void write_errors_csv(const ErrorTable& table, const std::string& path);
void write_compare_csv(const CrossSchemeDiff& diff, const std::string& path);

/// Full simulation run: VTK snapshots, minima.csv, diagnostics.csv and a
/// run.json manifest with every resolved parameter. Returns a process exit
/// status (solver failures report the time step and return nonzero).
int run_simulation(const RunConfig& config);

/// Convergence study driver: levels (n 2^k, dt / 2^k) for k < num_levels,
/// reference (n_finest * ref_factor, dt_finest / ref_factor); writes
/// errors.csv under out_dir.
int run_convergence(const RunConfig& config, int num_levels, int ref_factor, double t_check);

/// Cross-scheme comparison at (n, dt) and (2n, dt/2); writes compare.csv.
int run_compare(const RunConfig& config, double t_check);

/// Thread cap from HAPTOFEM_THREADS (0 when unset; errors on junk values).
int env_thread_cap();

} // namespace haptofem
