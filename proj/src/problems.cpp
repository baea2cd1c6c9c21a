#include "haptofem/problems.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace haptofem {

ModelParams paper_params(double mu_u) {
    if (mu_u < 0.0) throw std::invalid_argument("paper_params: mu_u must be >= 0");
    ModelParams p;
    p.D_u = 0.001;
    p.D_m = 0.001;
    p.alpha = 10.0;
    p.rho_m = 0.0;
    p.mu_m = 0.1;
    p.mu_u = mu_u;
    p.chi = [](double) { return 0.005; };
    p.chi_antiderivative = [](double v) { return 0.005 * v; };
    return p;
}

namespace {

double gaussian_u0(double x, double y) {
    return std::exp(-400.0 * (x - 0.5) * (x - 0.5) - 400.0 * (y - 0.5) * (y - 0.5));
}

std::array<double, 2> grad_gaussian_u0(double x, double y) {
    const double g = gaussian_u0(x, y);
    return {g * (-800.0 * (x - 0.5)), g * (-800.0 * (y - 0.5))};
}

// Test 2 bump table: v0 = 1 - sum_i exp(-b_i (x - x_i)^2 - c_i (y - y_i)^2)
struct Bump {
    double b, c, x, y;
};
constexpr std::array<Bump, 7> kBumps = {{
    {800.0, 100.0, 0.2, 0.2},
    {800.0, 100.0, 0.5, 0.1},
    {600.0, 200.0, 0.3, 0.5},
    {600.0, 200.0, 0.6, 0.7},
    {600.0, 200.0, 0.8, 0.2},
    {400.0, 300.0, 0.5, 0.9},
    {100.0, 50.0, 0.8, 0.7},
}};

double bumps_v0(double x, double y) {
    double s = 0.0;
    for (const auto& b : kBumps)
        s += std::exp(-b.b * (x - b.x) * (x - b.x) - b.c * (y - b.y) * (y - b.y));
    return 1.0 - s;
}

std::array<double, 2> grad_bumps_v0(double x, double y) {
    double gx = 0.0, gy = 0.0;
    for (const auto& b : kBumps) {
        const double g = std::exp(-b.b * (x - b.x) * (x - b.x) - b.c * (y - b.y) * (y - b.y));
        gx += g * 2.0 * b.b * (x - b.x);
        gy += g * 2.0 * b.c * (y - b.y);
    }
    return {gx, gy};
}

} // namespace

ProblemSetup test1_setup(double mu_u) {
    ProblemSetup s;
    s.name = "test1";
    s.params = paper_params(mu_u);
    s.u0 = gaussian_u0;
    s.m0 = [](double x, double y) { return 0.5 * gaussian_u0(x, y); };
    s.v0 = [](double x, double y) { return 1.0 - gaussian_u0(x, y); };
    // sigma0 = grad v0 = -grad u0
    s.sigma0 = [](double x, double y) {
        const auto g = grad_gaussian_u0(x, y);
        return std::array<double, 2>{-g[0], -g[1]};
    };
    s.grad_u0 = grad_gaussian_u0;
    s.clamp_negative_v0 = false;
    return s;
}

ProblemSetup test2_setup(double mu_u) {
    ProblemSetup s;
    s.name = "test2";
    s.params = paper_params(mu_u);
    s.u0 = gaussian_u0;
    s.m0 = [](double x, double y) { return 0.5 * gaussian_u0(x, y); };
    s.v0 = bumps_v0;
    s.sigma0 = grad_bumps_v0;
    s.grad_u0 = grad_gaussian_u0;
    s.clamp_negative_v0 = true;
    return s;
}

ProblemSetup zero_setup(double mu_u) {
    ProblemSetup s;
    s.name = "zero";
    s.params = paper_params(mu_u);
    s.u0 = [](double, double) { return 0.0; };
    s.v0 = [](double, double) { return 0.0; };
    s.m0 = [](double, double) { return 0.0; };
    s.sigma0 = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
    s.grad_u0 = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
    return s;
}

ProblemSetup setup_by_name(const std::string& name, double mu_u) {
    if (name == "test1") return test1_setup(mu_u);
    if (name == "test2") return test2_setup(mu_u);
    if (name == "zero") return zero_setup(mu_u);
    throw std::invalid_argument("unknown problem '" + name + "' (expected test1, test2 or zero)");
}

InitialFields interpolate_initial_fields(const TriMesh& mesh, const ProblemSetup& setup) {
    InitialFields f{nodal_interpolate(mesh, setup.u0), nodal_interpolate(mesh, setup.v0),
                    nodal_interpolate(mesh, setup.m0),
                    nodal_interpolate_vector(mesh, setup.sigma0)};
    if (setup.clamp_negative_v0) {
        for (double& v : f.v.values) v = std::max(v, 0.0);
    } else if (min_nodal(f.v) < 0.0) {
        throw std::runtime_error("initial v is negative at a node and clamping is disabled");
    }
    if (min_nodal(f.m) < 0.0)
        throw std::runtime_error("initial m is negative at a node");
    return f;
}

} // namespace haptofem
