#include "haptofem/verification.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <type_traits>

namespace haptofem {

SchemeId scheme_from_name(const std::string& name) {
    if (name == "uvmsigma") return SchemeId::UvmSigma;
    if (name == "uvms") return SchemeId::Uvms;
    throw std::invalid_argument("unknown scheme '" + name + "' (expected uvmsigma or uvms)");
}

std::string scheme_name(SchemeId id) {
    return id == SchemeId::UvmSigma ? "uvmsigma" : "uvms";
}

namespace {

struct StepRecorder {
    const Assembler& assembler;
    double dt;
    RunRecord& record;
    const FeScalarField* prev_m = nullptr;
    const FeScalarField* prev_v = nullptr;

    void observe(int step, double time, const SnapshotFields& f) {
        MinimaRow row;
        row.step = step;
        row.time = time;
        row.min_u = min_nodal(*f.u);
        row.min_v = min_nodal(*f.v);
        row.min_m = min_nodal(*f.m);
        if (f.s) row.min_s = min_nodal(*f.s);
        record.minima.rows.push_back(row);

        DiagnosticsRow diag;
        diag.step = step;
        diag.time = time;
        diag.v_linf = std::max(std::abs(max_nodal(*f.v)), std::abs(min_nodal(*f.v)));
        diag.m_l2 = assembler.l2_norm(*f.m);
        if (step == 0) {
            diag.cum_dt_m_h1_sq = 0.0;
            diag.cum_dt_dtm_l2_sq = 0.0;
            record.report.v0_linf = diag.v_linf;
            record.report.max_v_linf = diag.v_linf;
            record.report.max_m_l2 = diag.m_l2;
        } else {
            const auto& last = record.diagnostics.back();
            const double h1 = assembler.h1_norm(*f.m);
            FeScalarField dtm = *f.m;
            axpy(-1.0, prev_m->values, dtm.values);
            for (double& x : dtm.values) x /= dt;
            const double dtm_l2 = assembler.l2_norm(dtm);
            diag.cum_dt_m_h1_sq = last.cum_dt_m_h1_sq + dt * h1 * h1;
            diag.cum_dt_dtm_l2_sq = last.cum_dt_dtm_l2_sq + dt * dtm_l2 * dtm_l2;

            if (diag.v_linf > record.report.v0_linf) record.report.v_sup_violated = true;
            record.report.max_v_linf = std::max(record.report.max_v_linf, diag.v_linf);
            record.report.max_m_l2 = std::max(record.report.max_m_l2, diag.m_l2);
            if (row.min_m < 0.0) ++record.report.negative_m_steps;
            if (f.s && row.min_s < 0.0) ++record.report.negative_s_steps;
            for (int j = 0; j < f.v->size(); ++j)
                if ((*f.v)[j] > (*prev_v)[j]) {
                    record.report.v_nodally_nonincreasing = false;
                    break;
                }
        }
        if (!all_finite(f.u->values) || !all_finite(f.v->values) || !all_finite(f.m->values) ||
            (f.s && !all_finite(f.s->values)) || (f.sigma && !all_finite(f.sigma->values)))
            record.report.all_finite = false;
        record.diagnostics.push_back(diag);
        record.report.dt_sum_m_h1_sq = diag.cum_dt_m_h1_sq;
        record.report.dt_sum_dtm_l2_sq = diag.cum_dt_dtm_l2_sq;
    }
};

bool wants_snapshot(const RunOptions& opts, int step) {
    return std::binary_search(opts.snapshot_steps.begin(), opts.snapshot_steps.end(), step);
}

template <class Scheme, class State>
RunRecord run_loop(const Scheme& scheme, State state, const TimeConfig& time,
                   const RunOptions& opts,
                   const std::function<SnapshotFields(const State&)>& view) {
    RunRecord record;
    record.minima.has_s = (opts.scheme == SchemeId::Uvms);
    StepRecorder rec{scheme.assembler(), time.dt, record};
    rec.observe(0, 0.0, view(state));
    if (opts.snapshot_hook && wants_snapshot(opts, 0)) opts.snapshot_hook(0, 0.0, view(state));

    for (int n = 1; n <= time.num_steps; ++n) {
        State next;
        try {
            next = scheme.advance(state);
        } catch (const SolverError& err) {
            throw SolverError("time step " + std::to_string(n) + ": " + err.what(),
                              err.residual(), err.iterations());
        }
        rec.prev_m = &state.m;
        rec.prev_v = &state.v;
        rec.observe(n, next.time, view(next));
        if (opts.snapshot_hook && wants_snapshot(opts, n))
            opts.snapshot_hook(n, next.time, view(next));
        state = std::move(next);
    }

    record.final_u = state.u;
    record.final_v = state.v;
    record.final_m = state.m;
    if constexpr (std::is_same_v<State, UvmsState>) {
        record.final_s = state.s;
    } else {
        record.final_sigma = state.sigma;
    }
    return record;
}

} // namespace

RunRecord run_scheme(const TriMesh& mesh, const ProblemSetup& setup, const TimeConfig& time,
                     const RunOptions& opts) {
    if (opts.scheme == SchemeId::UvmSigma) {
        UvmSigmaScheme scheme(mesh, setup.params, time.dt, time.solver_tol, opts.threads);
        UvmSigmaState state = scheme.initialize(setup, opts.u_init);
        std::function<SnapshotFields(const UvmSigmaState&)> view =
            [](const UvmSigmaState& s) {
                return SnapshotFields{&s.u, &s.v, &s.m, nullptr, &s.sigma};
            };
        return run_loop(scheme, std::move(state), time, opts, view);
    }
    UvmsScheme scheme(mesh, setup.params, time.dt, time.solver_tol, opts.threads);
    UvmsState state = scheme.initialize(setup);
    std::function<SnapshotFields(const UvmsState&)> view = [](const UvmsState& s) {
        return SnapshotFields{&s.u, &s.v, &s.m, &s.s, nullptr};
    };
    return run_loop(scheme, std::move(state), time, opts, view);
}

namespace {

double order_of(double coarse, double fine) {
    if (coarse <= 0.0 || fine <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::log2(coarse / fine);
}

} // namespace

ErrorTable convergence_study(SchemeId scheme, const ProblemSetup& setup,
                             std::span<const std::pair<int, double>> levels,
                             std::pair<int, double> reference, double t_check,
                             double solver_tol, int threads) {
    if (levels.empty()) throw std::invalid_argument("convergence_study: no levels");
    for (size_t k = 1; k < levels.size(); ++k) {
        if (levels[k].first != 2 * levels[k - 1].first ||
            std::abs(levels[k].second - 0.5 * levels[k - 1].second) > 1e-14)
            throw std::invalid_argument(
                "convergence_study: levels must halve (n doubles, dt halves)");
    }
    const int n_max = levels.back().first;
    const double dt_min = levels.back().second;
    const auto [n_ref, dt_ref] = reference;
    if (n_ref < 4 * n_max)
        throw std::invalid_argument("convergence_study: reference must satisfy n_ref >= 4 n_max");
    if (dt_ref > dt_min / 4.0 + 1e-15)
        throw std::invalid_argument("convergence_study: reference must satisfy dt_ref <= dt_min/4");
    for (const auto& [n, dt] : levels) {
        (void)dt;
        if (n_ref % n != 0)
            throw std::invalid_argument(
                "convergence_study: reference mesh must nest every level (n_ref % n == 0)");
    }

    const UInit u_init = (scheme == SchemeId::UvmSigma) ? UInit::Elliptic : UInit::Nodal;
    RunOptions run_opts;
    run_opts.scheme = scheme;
    run_opts.u_init = u_init;
    run_opts.threads = threads;

    const TriMesh ref_mesh = generate_unit_square_mesh(n_ref);
    const Assembler ref_asm(ref_mesh, threads);
    const RunRecord ref =
        run_scheme(ref_mesh, setup, make_time_config(dt_ref, t_check, solver_tol), run_opts);

    ErrorTable table;
    for (size_t k = 0; k < levels.size(); ++k) {
        const auto [n, dt] = levels[k];
        const TriMesh mesh = generate_unit_square_mesh(n);
        const RunRecord rec =
            run_scheme(mesh, setup, make_time_config(dt, t_check, solver_tol), run_opts);
        const PointLocator locator(mesh);

        ErrorRow row;
        row.level = static_cast<int>(k);
        row.n = n;
        row.h = mesh.mesh_size();
        row.dt = dt;
        const FeScalarField u_p = prolong(rec.final_u, locator, ref_mesh);
        const FeScalarField v_p = prolong(rec.final_v, locator, ref_mesh);
        const FeScalarField m_p = prolong(rec.final_m, locator, ref_mesh);
        row.e_u_l2 = ref_asm.l2_error(u_p, ref.final_u);
        row.e_v_l2 = ref_asm.l2_error(v_p, ref.final_v);
        row.e_m_l2 = ref_asm.l2_error(m_p, ref.final_m);
        row.e_u_h1 = ref_asm.h1_error(u_p, ref.final_u);
        row.e_m_h1 = ref_asm.h1_error(m_p, ref.final_m);
        if (scheme == SchemeId::UvmSigma) {
            const FeVectorField sig_p = prolong(*rec.final_sigma, locator, ref_mesh);
            row.e_sigma_l2 = ref_asm.l2_error(sig_p, *ref.final_sigma);
        } else {
            const FeScalarField s_p = prolong(*rec.final_s, locator, ref_mesh);
            row.e_sigma_l2 = ref_asm.l2_error(s_p, *ref.final_s);
        }
        if (k == 0) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            row.order_u = row.order_v = row.order_m = row.order_sigma = nan;
        } else {
            const auto& prev = table.rows.back();
            row.order_u = order_of(prev.e_u_l2, row.e_u_l2);
            row.order_v = order_of(prev.e_v_l2, row.e_v_l2);
            row.order_m = order_of(prev.e_m_l2, row.e_m_l2);
            row.order_sigma = order_of(prev.e_sigma_l2, row.e_sigma_l2);
        }
        table.rows.push_back(row);
    }
    return table;
}

namespace {

struct PairDiff {
    double du, dv, dm;
};

PairDiff scheme_pair_distance(const ProblemSetup& setup, int n, double dt, double t_check,
                              double solver_tol, int threads) {
    const TriMesh mesh = generate_unit_square_mesh(n);
    const TimeConfig time = make_time_config(dt, t_check, solver_tol);
    RunOptions opts;
    opts.threads = threads;
    opts.u_init = UInit::Nodal;  // identical initial u for both schemes
    opts.scheme = SchemeId::UvmSigma;
    const RunRecord a = run_scheme(mesh, setup, time, opts);
    opts.scheme = SchemeId::Uvms;
    const RunRecord b = run_scheme(mesh, setup, time, opts);
    const Assembler assembler(mesh, threads);
    return PairDiff{assembler.l2_error(a.final_u, b.final_u),
                    assembler.l2_error(a.final_v, b.final_v),
                    assembler.l2_error(a.final_m, b.final_m)};
}

} // namespace

CrossSchemeDiff cross_scheme_diff(const ProblemSetup& setup, int n, double dt, double t_check,
                                  double solver_tol, int threads) {
    CrossSchemeDiff out;
    out.n_coarse = n;
    out.n_fine = 2 * n;
    const PairDiff coarse = scheme_pair_distance(setup, n, dt, t_check, solver_tol, threads);
    const PairDiff fine =
        scheme_pair_distance(setup, 2 * n, dt / 2.0, t_check, solver_tol, threads);
    out.du_coarse = coarse.du;
    out.dv_coarse = coarse.dv;
    out.dm_coarse = coarse.dm;
    out.du_fine = fine.du;
    out.dv_fine = fine.dv;
    out.dm_fine = fine.dm;
    return out;
}

double sigma_gradv_distance(const FeVectorField& sigma, const FeScalarField& v) {
    if (sigma.mesh != v.mesh || !v.mesh)
        throw std::invalid_argument("sigma_gradv_distance: fields must share a mesh");
    const TriMesh& mesh = *v.mesh;
    const auto& q = QuadratureRule::degree2();
    double total = 0.0;
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const auto& t = mesh.triangle(e);
        const auto gv = element_gradient(v, e);
        const double area = mesh.area(e);
        for (const auto& qp : q.points) {
            const double sx = qp.bary[0] * sigma.comp(t[0], 0) + qp.bary[1] * sigma.comp(t[1], 0) +
                              qp.bary[2] * sigma.comp(t[2], 0);
            const double sy = qp.bary[0] * sigma.comp(t[0], 1) + qp.bary[1] * sigma.comp(t[1], 1) +
                              qp.bary[2] * sigma.comp(t[2], 1);
            const double dx = sx - gv[0];
            const double dy = sy - gv[1];
            total += area * qp.weight * (dx * dx + dy * dy);
        }
    }
    return std::sqrt(total);
}

} // namespace haptofem
