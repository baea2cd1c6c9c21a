#include "doctest.h"

#include "haptofem/problems.hpp"

#include <cmath>
#include <random>

using namespace haptofem;

TEST_CASE("simulation constants") {
    const ModelParams p0 = paper_params(0.0);
    CHECK(p0.D_u == 0.001);
    CHECK(p0.D_m == 0.001);
    CHECK(p0.alpha == 10.0);
    CHECK(p0.rho_m == 0.0);
    CHECK(p0.mu_m == 0.1);
    CHECK(p0.mu_u == 0.0);
    CHECK(p0.chi(0.0) == 0.005);
    CHECK(p0.chi(0.37) == 0.005);
    CHECK(p0.chi_antiderivative(1.0) == 0.005);
    CHECK(p0.chi_antiderivative(0.0) == 0.0);

    const ModelParams p2 = paper_params(2.0);
    CHECK(p2.mu_u == 2.0);
    CHECK(p2.D_u == p0.D_u);
    CHECK_THROWS_AS(paper_params(-1.0), std::invalid_argument);
}

TEST_CASE("test1 initial data") {
    const ProblemSetup s = test1_setup(0.0);
    CHECK(s.u0(0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s.v0(0.5, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(s.m0(0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    const auto sc = s.sigma0(0.5, 0.5);
    CHECK(sc[0] == 0.0);
    CHECK(sc[1] == 0.0);

    CHECK(s.u0(0.0, 0.0) == doctest::Approx(std::exp(-200.0)));
    CHECK(s.v0(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937 rng(17u);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const double x = dist(rng), y = dist(rng);
        const double v = s.v0(x, y);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(s.m0(x, y) == 0.5 * s.u0(x, y));
    }
}

TEST_CASE("test2 initial data: bump structure and clamping region") {
    const ProblemSetup s = test2_setup(2.0);
    CHECK(s.params.mu_u == 2.0);
    CHECK(s.clamp_negative_v0);
    // every bump center dips v0 at or below zero before clamping
    const double centers[7][2] = {{0.2, 0.2}, {0.5, 0.1}, {0.3, 0.5}, {0.6, 0.7},
                                  {0.8, 0.2}, {0.5, 0.9}, {0.8, 0.7}};
    for (const auto& c : centers) CHECK(s.v0(c[0], c[1]) <= 0.0);
    // far from all centers v0 is essentially 1
    CHECK(std::abs(s.v0(0.05, 0.95) - 1.0) <= 1e-3);
    CHECK(s.m0(0.3, 0.7) == 0.5 * s.u0(0.3, 0.7));
}

TEST_CASE("sigma0 matches a central finite difference of v0") {
    std::mt19937 rng(99u);
    std::uniform_real_distribution<double> dist(0.01, 0.99);
    const double h = 1e-6;
    for (const ProblemSetup& s : {test1_setup(0.0), test2_setup(0.0)}) {
        for (int k = 0; k < 100; ++k) {
            const double x = dist(rng), y = dist(rng);
            const auto g = s.sigma0(x, y);
            const double fdx = (s.v0(x + h, y) - s.v0(x - h, y)) / (2.0 * h);
            const double fdy = (s.v0(x, y + h) - s.v0(x, y - h)) / (2.0 * h);
            CHECK(std::abs(g[0] - fdx) <= 1e-6);
            CHECK(std::abs(g[1] - fdy) <= 1e-6);
        }
    }
}

TEST_CASE("grad_u0 matches a central finite difference of u0") {
    const ProblemSetup s = test1_setup(0.0);
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> dist(0.2, 0.8);
    const double h = 1e-6;
    for (int k = 0; k < 50; ++k) {
        const double x = dist(rng), y = dist(rng);
        const auto g = s.grad_u0(x, y);
        CHECK(std::abs(g[0] - (s.u0(x + h, y) - s.u0(x - h, y)) / (2.0 * h)) <= 1e-6);
        CHECK(std::abs(g[1] - (s.u0(x, y + h) - s.u0(x, y - h)) / (2.0 * h)) <= 1e-6);
    }
}

TEST_CASE("initial interpolation clamps test2's v0 and keeps everything nonnegative") {
    // n = 10 puts vertices exactly on every bump center
    const TriMesh mesh = generate_unit_square_mesh(10);
    const ProblemSetup s2 = test2_setup(0.0);
    const FeScalarField raw = nodal_interpolate(mesh, s2.v0);
    CHECK(min_nodal(raw) < 0.0);
    const InitialFields f = interpolate_initial_fields(mesh, s2);
    CHECK(min_nodal(f.v) == 0.0);
    CHECK(min_nodal(f.m) >= 0.0);
    CHECK(min_nodal(f.u) >= 0.0);

    const InitialFields f1 = interpolate_initial_fields(mesh, test1_setup(0.0));
    CHECK(min_nodal(f1.v) >= 0.0);
    for (int j = 0; j < mesh.num_vertices(); ++j) CHECK(f1.m[j] == 0.5 * f1.u[j]);

    // without clamping, negative nodal v0 is rejected
    ProblemSetup strict = s2;
    strict.clamp_negative_v0 = false;
    CHECK_THROWS_AS(interpolate_initial_fields(mesh, strict), std::runtime_error);
}

TEST_CASE("setups resolve by name") {
    CHECK(setup_by_name("test1", 0.0).name == "test1");
    CHECK(setup_by_name("test2", 2.0).name == "test2");
    CHECK(setup_by_name("zero", 0.0).name == "zero");
    CHECK_THROWS_AS(setup_by_name("test3", 0.0), std::invalid_argument);
}
