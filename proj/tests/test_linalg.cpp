#include "doctest.h"

#include "haptofem/linalg.hpp"

#include <cmath>
#include <random>

using namespace haptofem;

namespace {

CsrMatrix identity(int n) {
    std::vector<std::tuple<int, int, double>> trip;
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 1.0);
    return CsrMatrix::from_triplets(n, trip);
}

CsrMatrix from_dense(const std::vector<std::vector<double>>& a) {
    const int n = static_cast<int>(a.size());
    std::vector<std::tuple<int, int, double>> trip;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (a[i][j] != 0.0) trip.emplace_back(i, j, a[i][j]);
    return CsrMatrix::from_triplets(n, trip);
}

// Gaussian elimination with partial pivoting; the independent oracle for CG.
Vector dense_solve(std::vector<std::vector<double>> a, Vector b) {
    const int n = static_cast<int>(b.size());
    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
        std::swap(a[k], a[piv]);
        std::swap(b[k], b[piv]);
        for (int i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (int j = k; j < n; ++j) a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    Vector x(n);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
        x[i] = s / a[i][i];
    }
    return x;
}

std::vector<std::vector<double>> random_spd(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::vector<double>> b(n, std::vector<double>(n));
    for (auto& row : b)
        for (double& v : row) v = dist(rng);
    // B'B + I
    std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int k = 0; k < n; ++k) a[i][j] += b[k][i] * b[k][j];
            if (i == j) a[i][j] += 1.0;
        }
    return a;
}

} // namespace

TEST_CASE("vector kernels") {
    CHECK(norm2({3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(dot({1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}) == 0.0);
    CHECK(dot({0.0, 1.0, 0.0}, {0.0, 1.0, 0.0}) == 1.0);
    Vector y = {1.0, 1.0};
    axpy(2.0, {1.0, -1.0}, y);
    CHECK(y[0] == 3.0);
    CHECK(y[1] == -1.0);
    CHECK_THROWS_AS(dot({1.0}, {1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(axpy(1.0, {1.0}, y), std::invalid_argument);
}

TEST_CASE("spmv against the identity and explicit entries") {
    const CsrMatrix eye = identity(3);
    Vector y;
    eye.multiply({1.0, -2.0, 5.0}, y);
    CHECK(y == Vector{1.0, -2.0, 5.0});
    CHECK(eye.value_at(1, 1) == 1.0);
    CHECK(eye.value_at(0, 2) == 0.0);
    CHECK_THROWS_AS(eye.multiply({1.0}, y), std::invalid_argument);
}

TEST_CASE("from_triplets merges duplicates") {
    const CsrMatrix a = CsrMatrix::from_triplets(
        2, {{0, 0, 1.0}, {0, 0, 2.0}, {1, 0, -1.0}, {0, 1, 0.5}, {1, 1, 4.0}});
    CHECK(a.value_at(0, 0) == 3.0);
    CHECK(a.value_at(0, 1) == 0.5);
    CHECK(a.value_at(1, 0) == -1.0);
    CHECK(a.nnz() == 4);
}

TEST_CASE("matrix edits: scale, add_scaled, add_diagonal") {
    CsrMatrix a = from_dense({{2.0, 1.0}, {1.0, 2.0}});
    const CsrMatrix b = from_dense({{1.0, -1.0}, {-1.0, 1.0}});
    a.scale(2.0);
    CHECK(a.value_at(0, 0) == 4.0);
    a.add_scaled(0.5, b);
    CHECK(a.value_at(0, 1) == doctest::Approx(1.5));
    a.add_diagonal(DiagMatrix{{10.0, 20.0}});
    CHECK(a.value_at(0, 0) == doctest::Approx(14.5));
    CHECK(a.value_at(1, 1) == doctest::Approx(24.5));
    CHECK(max_asymmetry(a) <= 1e-15);
}

TEST_CASE("cg solves the identity in one iteration") {
    const CsrMatrix eye = identity(4);
    const Vector b = {1.0, -3.0, 0.25, 7.0};
    const CgResult res = cg_solve(eye, nullptr, b);
    CHECK(res.iterations == 1);
    for (int i = 0; i < 4; ++i) CHECK(res.x[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("cg solves a diagonal system") {
    const CsrMatrix a = from_dense({{2.0, 0.0}, {0.0, 4.0}});
    const CgResult res = cg_solve(a, nullptr, {2.0, 8.0});
    CHECK(res.x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(res.x[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("cg with a diagonal addend matches the folded matrix") {
    CsrMatrix a = from_dense({{2.0, 1.0, 0.0}, {1.0, 3.0, 0.5}, {0.0, 0.5, 1.5}});
    const DiagMatrix d{{1.0, 2.0, 3.0}};
    const Vector b = {1.0, 2.0, 3.0};
    const CgResult split = cg_solve(a, &d, b, CgOptions{1e-13});
    CsrMatrix folded = a;
    folded.add_diagonal(d);
    const CgResult whole = cg_solve(folded, nullptr, b, CgOptions{1e-13});
    for (int i = 0; i < 3; ++i) CHECK(split.x[i] == doctest::Approx(whole.x[i]).epsilon(1e-11));
}

TEST_CASE("cg matches the dense elimination oracle on a seeded SPD system") {
    const auto dense = random_spd(10, 42u);
    const CsrMatrix a = from_dense(dense);
    std::mt19937 rng(7u);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Vector b(10);
    for (double& v : b) v = dist(rng);

    const Vector oracle = dense_solve(dense, b);
    const CgResult res = cg_solve(a, nullptr, b);  // default tol 1e-10
    for (int i = 0; i < 10; ++i) CHECK(std::abs(res.x[i] - oracle[i]) <= 1e-8);

    // postcondition: ||Ax - b|| <= tol ||b||
    Vector ax;
    a.multiply(res.x, ax);
    axpy(-1.0, b, ax);
    CHECK(norm2(ax) <= 1e-10 * norm2(b));

    // jacobi path reaches the same solution
    const CgResult jac = cg_solve(a, nullptr, b, CgOptions{1e-10, 0, true});
    for (int i = 0; i < 10; ++i) CHECK(std::abs(jac.x[i] - oracle[i]) <= 1e-8);
}

TEST_CASE("cg failure modes") {
    const auto dense = random_spd(10, 3u);
    const CsrMatrix a = from_dense(dense);
    Vector b(10, 1.0);
    try {
        cg_solve(a, nullptr, b, CgOptions{1e-14, 2});
        FAIL("expected non-convergence");
    } catch (const SolverError& err) {
        CHECK(err.iterations() == 2);
        CHECK(err.residual() > 0.0);
    }
    // zero right-hand side short-circuits to the zero solution
    const CgResult res = cg_solve(a, nullptr, Vector(10, 0.0));
    CHECK(res.iterations == 0);
    CHECK(norm2(res.x) == 0.0);
    // an indefinite operator is reported
    const CsrMatrix indef = from_dense({{1.0, 0.0}, {0.0, -1.0}});
    CHECK_THROWS_AS(cg_solve(indef, nullptr, {0.0, 1.0}), std::runtime_error);
}
