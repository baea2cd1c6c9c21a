#include "doctest.h"

#include "haptofem/verification.hpp"

#include <cmath>

using namespace haptofem;

TEST_CASE("scheme names resolve") {
    CHECK(scheme_from_name("uvmsigma") == SchemeId::UvmSigma);
    CHECK(scheme_from_name("uvms") == SchemeId::Uvms);
    CHECK(scheme_name(SchemeId::Uvms) == "uvms");
    CHECK_THROWS_AS(scheme_from_name("implicit-euler"), std::invalid_argument);
}

TEST_CASE("a zero-data run records all-zero minima and diagnostics") {
    const TriMesh mesh = generate_unit_square_mesh(4);
    const TimeConfig time = make_time_config(0.05, 0.2);
    for (SchemeId id : {SchemeId::UvmSigma, SchemeId::Uvms}) {
        RunOptions opts;
        opts.scheme = id;
        const RunRecord rec = run_scheme(mesh, zero_setup(), time, opts);
        REQUIRE(static_cast<int>(rec.minima.rows.size()) == time.num_steps + 1);
        for (size_t k = 0; k < rec.minima.rows.size(); ++k) {
            const auto& r = rec.minima.rows[k];
            CHECK(r.step == static_cast<int>(k));
            CHECK(r.time == doctest::Approx(k * time.dt).epsilon(1e-14));
            CHECK(r.min_u == 0.0);
            CHECK(r.min_v == 0.0);
            CHECK(r.min_m == 0.0);
        }
        CHECK(rec.report.max_v_linf == 0.0);
        CHECK(rec.report.max_m_l2 == 0.0);
        CHECK(rec.report.dt_sum_m_h1_sq == 0.0);
        CHECK(rec.report.dt_sum_dtm_l2_sq == 0.0);
        CHECK(!rec.report.v_sup_violated);
        CHECK(rec.report.all_finite);
    }
}

TEST_CASE("boundedness diagnostics on a short test1 run") {
    const TriMesh mesh = generate_unit_square_mesh(16);
    const TimeConfig time = make_time_config(0.01, 0.5, 1e-12);
    RunOptions opts;
    opts.scheme = SchemeId::UvmSigma;
    const RunRecord rec = run_scheme(mesh, test1_setup(0.0), time, opts);
    CHECK(rec.report.all_finite);
    CHECK(!rec.report.v_sup_violated);
    CHECK(rec.report.v_nodally_nonincreasing);
    CHECK(rec.report.max_v_linf <= rec.report.v0_linf);
    CHECK(rec.report.max_m_l2 > 0.0);
    CHECK(rec.report.dt_sum_m_h1_sq > 0.0);
    CHECK(std::isfinite(rec.report.dt_sum_dtm_l2_sq));
    // running sums are nondecreasing
    for (size_t k = 1; k < rec.diagnostics.size(); ++k) {
        CHECK(rec.diagnostics[k].cum_dt_m_h1_sq >= rec.diagnostics[k - 1].cum_dt_m_h1_sq);
        CHECK(rec.diagnostics[k].cum_dt_dtm_l2_sq >= rec.diagnostics[k - 1].cum_dt_dtm_l2_sq);
    }
}

TEST_CASE("snapshot hook fires exactly at the requested steps") {
    const TriMesh mesh = generate_unit_square_mesh(4);
    const TimeConfig time = make_time_config(0.05, 0.3);
    RunOptions opts;
    opts.scheme = SchemeId::Uvms;
    opts.snapshot_steps = {0, 3, 6};
    std::vector<int> seen;
    opts.snapshot_hook = [&](int step, double, const SnapshotFields& f) {
        seen.push_back(step);
        CHECK(f.u != nullptr);
        CHECK(f.s != nullptr);
        CHECK(f.sigma == nullptr);
    };
    run_scheme(mesh, test1_setup(0.0), time, opts);
    CHECK(seen == std::vector<int>{0, 3, 6});
}

TEST_CASE("self comparison through the prolongation pipeline gives zero error") {
    const TriMesh mesh = generate_unit_square_mesh(8);
    const TimeConfig time = make_time_config(0.04, 0.2, 1e-12);
    RunOptions opts;
    opts.scheme = SchemeId::UvmSigma;
    const RunRecord rec = run_scheme(mesh, test1_setup(0.0), time, opts);
    const PointLocator locator(mesh);
    const FeScalarField same = prolong(rec.final_u, locator, mesh);
    const Assembler assembler(mesh);
    CHECK(assembler.l2_error(same, rec.final_u) <= 1e-14);
}

TEST_CASE("convergence study validates its level lists") {
    const ProblemSetup setup = test1_setup(0.0);
    const std::vector<std::pair<int, double>> bad_n = {{8, 0.04}, {12, 0.02}};
    CHECK_THROWS_AS(
        convergence_study(SchemeId::UvmSigma, setup, bad_n, {64, 0.005}, 0.2),
        std::invalid_argument);
    const std::vector<std::pair<int, double>> bad_dt = {{8, 0.04}, {16, 0.03}};
    CHECK_THROWS_AS(
        convergence_study(SchemeId::UvmSigma, setup, bad_dt, {64, 0.005}, 0.2),
        std::invalid_argument);
    const std::vector<std::pair<int, double>> ok = {{8, 0.04}, {16, 0.02}};
    CHECK_THROWS_AS(convergence_study(SchemeId::UvmSigma, setup, ok, {32, 0.005}, 0.2),
                    std::invalid_argument);  // n_ref < 4 n_max
    CHECK_THROWS_AS(convergence_study(SchemeId::UvmSigma, setup, ok, {64, 0.02}, 0.2),
                    std::invalid_argument);  // dt_ref too large
}

TEST_CASE("a small convergence study shows decreasing errors for both schemes") {
    const ProblemSetup setup = test1_setup(0.0);
    const std::vector<std::pair<int, double>> levels = {{8, 0.04}, {16, 0.02}};
    for (SchemeId id : {SchemeId::UvmSigma, SchemeId::Uvms}) {
        const ErrorTable table = convergence_study(id, setup, levels, {64, 0.005}, 0.2, 1e-10);
        REQUIRE(table.rows.size() == 2);
        CHECK(std::isnan(table.rows[0].order_u));
        CHECK(table.rows[1].e_u_l2 < table.rows[0].e_u_l2);
        CHECK(table.rows[1].e_v_l2 < table.rows[0].e_v_l2);
        CHECK(table.rows[1].e_m_l2 < table.rows[0].e_m_l2);
        CHECK(table.rows[1].e_sigma_l2 < table.rows[0].e_sigma_l2);
        CHECK(table.rows[1].order_u > 0.0);
        CHECK(table.rows[0].h == doctest::Approx(std::sqrt(2.0) / 8.0));
    }
}

TEST_CASE("halving only dt at fixed h scales the error roughly linearly") {
    // temporal-order isolation: same mesh, reference dt much smaller
    const TriMesh mesh = generate_unit_square_mesh(32);
    const ProblemSetup setup = test1_setup(0.0);
    RunOptions opts;
    opts.scheme = SchemeId::UvmSigma;
    opts.u_init = UInit::Nodal;
    const RunRecord ref = run_scheme(mesh, setup, make_time_config(0.00125, 0.5, 1e-12), opts);
    const RunRecord a = run_scheme(mesh, setup, make_time_config(0.02, 0.5, 1e-12), opts);
    const RunRecord b = run_scheme(mesh, setup, make_time_config(0.01, 0.5, 1e-12), opts);
    const Assembler assembler(mesh);
    const double ea = assembler.l2_error(a.final_u, ref.final_u);
    const double eb = assembler.l2_error(b.final_u, ref.final_u);
    const double ratio = ea / eb;
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 2.5);
}

TEST_CASE("cross-scheme distances vanish for zero data and shrink under refinement") {
    const CrossSchemeDiff zero = cross_scheme_diff(zero_setup(), 4, 0.05, 0.2);
    CHECK(zero.du_coarse == 0.0);
    CHECK(zero.dv_coarse == 0.0);
    CHECK(zero.dm_coarse == 0.0);

    const CrossSchemeDiff diff = cross_scheme_diff(test1_setup(0.0), 8, 0.04, 0.2, 1e-11);
    CHECK(diff.n_fine == 16);
    CHECK(diff.du_fine < diff.du_coarse);
    CHECK(diff.dm_fine < diff.dm_coarse);
    // v is driven by the identical nodal update; the fields stay close
    CHECK(diff.dv_fine < diff.dv_coarse);
}

TEST_CASE("threaded assembly reproduces the single-threaded run within 1e-10") {
    const TriMesh mesh = generate_unit_square_mesh(12);
    const TimeConfig time = make_time_config(0.01, 0.2, 1e-12);
    for (SchemeId id : {SchemeId::UvmSigma, SchemeId::Uvms}) {
        RunOptions serial;
        serial.scheme = id;
        RunOptions parallel = serial;
        parallel.threads = 4;
        const RunRecord a = run_scheme(mesh, test1_setup(2.0), time, serial);
        const RunRecord b = run_scheme(mesh, test1_setup(2.0), time, parallel);
        for (size_t j = 0; j < a.final_u.values.size(); ++j)
            CHECK(std::abs(a.final_u.values[j] - b.final_u.values[j]) <= 1e-10);
        for (size_t j = 0; j < a.final_m.values.size(); ++j)
            CHECK(std::abs(a.final_m.values[j] - b.final_m.values[j]) <= 1e-10);
    }
}

TEST_CASE("sigma tracks the gradient of v under simultaneous refinement") {
    const ProblemSetup setup = test1_setup(0.0);
    double prev = 0.0;
    bool first = true;
    for (const auto& [n, dt] : std::vector<std::pair<int, double>>{{8, 0.02}, {16, 0.01}}) {
        const TriMesh mesh = generate_unit_square_mesh(n);
        RunOptions opts;
        opts.scheme = SchemeId::UvmSigma;
        const RunRecord rec = run_scheme(mesh, setup, make_time_config(dt, 0.5, 1e-12), opts);
        const double dist = sigma_gradv_distance(*rec.final_sigma, rec.final_v);
        if (!first) CHECK(dist < prev);
        prev = dist;
        first = false;
    }
}
