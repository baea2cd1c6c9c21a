#pragma once

#include "haptofem/scheme_uvms.hpp"
#include "haptofem/scheme_uvmsigma.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace haptofem {

enum class SchemeId { UvmSigma, Uvms };

SchemeId scheme_from_name(const std::string& name);
std::string scheme_name(SchemeId id);

/// Per-step nodal minima of the discrete variables (rows 0..N).
struct MinimaRow {
    int step = 0;
    double time = 0.0;
    double min_u = 0.0;
    double min_v = 0.0;
    double min_m = 0.0;
    double min_s = 0.0;  // meaningful only when MinimaSeries::has_s
};

struct MinimaSeries {
    bool has_s = false;
    std::vector<MinimaRow> rows;
};

/// Per-step boundedness quantities: sup of v, L2 of m and the running sums
/// dt * sum ||m^k||_H1^2 and dt * sum ||delta_t m^k||_L2^2.
struct DiagnosticsRow {
    int step = 0;
    double time = 0.0;
    double v_linf = 0.0;
    double m_l2 = 0.0;
    double cum_dt_m_h1_sq = 0.0;
    double cum_dt_dtm_l2_sq = 0.0;
};

struct BoundednessReport {
    double v0_linf = 0.0;
    double max_v_linf = 0.0;
    double max_m_l2 = 0.0;
    double dt_sum_m_h1_sq = 0.0;
    double dt_sum_dtm_l2_sq = 0.0;
    bool v_sup_violated = false;         // max_n sup v^n > sup v^0 (exact comparison)
    bool v_nodally_nonincreasing = true; // v^n_j <= v^(n-1)_j at every node and step
    bool all_finite = true;
    int negative_m_steps = 0;  // steps whose min nodal m dips below 0 (solver slack)
    int negative_s_steps = 0;  // likewise for s (divergence-form scheme only)
};

struct SnapshotFields {
    const FeScalarField* u = nullptr;
    const FeScalarField* v = nullptr;
    const FeScalarField* m = nullptr;
    const FeScalarField* s = nullptr;
    const FeVectorField* sigma = nullptr;
};
using SnapshotHook = std::function<void(int step, double time, const SnapshotFields&)>;

struct RunOptions {
    SchemeId scheme = SchemeId::UvmSigma;
    UInit u_init = UInit::Nodal;
    int threads = 0;
    std::vector<int> snapshot_steps;  // sorted, deduplicated step indices
    SnapshotHook snapshot_hook;
};

struct RunRecord {
    MinimaSeries minima;
    std::vector<DiagnosticsRow> diagnostics;
    BoundednessReport report;
    FeScalarField final_u;
    FeScalarField final_v;
    FeScalarField final_m;
    std::optional<FeScalarField> final_s;
    std::optional<FeVectorField> final_sigma;
};

/// Runs one scheme over [0, T], recording minima and boundedness diagnostics
/// every step and firing the snapshot hook at the requested steps. Solver
/// failures are rethrown with the time-step index in the message.
RunRecord run_scheme(const TriMesh& mesh, const ProblemSetup& setup, const TimeConfig& time,
                     const RunOptions& opts = {});

/// One refinement level of a convergence table; orders are log2 ratios
/// against the previous row (NaN on the first row).
struct ErrorRow {
    int level = 0;
    int n = 0;
    double h = 0.0;
    double dt = 0.0;
    double e_u_l2 = 0.0;
    double e_v_l2 = 0.0;
    double e_m_l2 = 0.0;
    double e_sigma_l2 = 0.0;  // sigma for UVMsigma, the auxiliary s for UVMs
    double e_u_h1 = 0.0;
    double e_m_h1 = 0.0;
    double order_u = 0.0;
    double order_v = 0.0;
    double order_m = 0.0;
    double order_sigma = 0.0;
};

struct ErrorTable {
    std::vector<ErrorRow> rows;
};

/// Errors at t = t_check against a fine self-reference, coarse solutions
/// prolonged to the reference mesh by P1 evaluation. Levels must halve
/// (n doubles, dt halves) and the reference must satisfy n_ref >= 4 n_max,
/// dt_ref <= dt_min / 4 and n_ref divisible by every level n (nesting).
ErrorTable convergence_study(SchemeId scheme, const ProblemSetup& setup,
                             std::span<const std::pair<int, double>> levels,
                             std::pair<int, double> reference, double t_check,
                             double solver_tol = 1e-10, int threads = 0);

/// L2 distances between the two schemes' fields at t_check, at (n, dt) and at
/// the refined (2n, dt/2).
struct CrossSchemeDiff {
    int n_coarse = 0;
    int n_fine = 0;
    double du_coarse = 0.0, dv_coarse = 0.0, dm_coarse = 0.0;
    double du_fine = 0.0, dv_fine = 0.0, dm_fine = 0.0;

    double ratio_u() const { return du_fine / du_coarse; }
    double ratio_v() const { return dv_fine / dv_coarse; }
    double ratio_m() const { return dm_fine / dm_coarse; }
    /// distance halves within +-50% under refinement
    bool halves(double ratio) const { return ratio >= 0.25 && ratio <= 0.75; }
};

CrossSchemeDiff cross_scheme_diff(const ProblemSetup& setup, int n, double dt, double t_check,
                                  double solver_tol = 1e-10, int threads = 0);

/// Elementwise L2 distance between a sigma field and the piecewise-constant
/// gradient of v (degree-2 quadrature, exact for the quadratic integrand).
double sigma_gradv_distance(const FeVectorField& sigma, const FeScalarField& v);

} // namespace haptofem
