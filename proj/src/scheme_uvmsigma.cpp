#include "haptofem/scheme_uvmsigma.hpp"

#include <cmath>
#include <stdexcept>

namespace haptofem {

namespace {

double positive_part(double t) { return t > 0.0 ? t : 0.0; }

} // namespace

UvmSigmaScheme::UvmSigmaScheme(const TriMesh& mesh, const ModelParams& params, double dt,
                               double solver_tol, int threads)
    : mesh_(&mesh), params_(params), dt_(dt), tol_(solver_tol), asm_(mesh, threads) {
    validate(params_);
    if (!(dt_ > 0.0)) throw std::invalid_argument("UvmSigmaScheme: dt must be positive");
    if (!(tol_ > 0.0)) throw std::invalid_argument("UvmSigmaScheme: solver_tol must be positive");
    m_lhs_diag_ = asm_.lumped_mass();
    m_lhs_diag_.scale(1.0 / dt_ + params_.rho_m);
    m_lhs_csr_ = asm_.stiffness();
    m_lhs_csr_.scale(params_.D_m);
}

UvmSigmaState UvmSigmaScheme::initialize(const ProblemSetup& setup, UInit u_init) const {
    InitialFields f = interpolate_initial_fields(*mesh_, setup);
    UvmSigmaState s;
    s.m = std::move(f.m);
    s.v = std::move(f.v);
    s.sigma = std::move(f.sigma);
    s.u = (u_init == UInit::Elliptic)
              ? asm_.elliptic_projection(setup.u0, setup.grad_u0)
              : std::move(f.u);
    s.step = 0;
    s.time = 0.0;
    return s;
}

FeScalarField UvmSigmaScheme::step_m(const UvmSigmaState& prev) const {
    const auto& lumped = asm_.lumped_mass().d;
    Vector rhs(lumped.size());
    for (size_t j = 0; j < lumped.size(); ++j) rhs[j] = lumped[j] * prev.m.values[j] / dt_;
    if (params_.mu_m != 0.0) {
        const Vector load =
            asm_.product_load({LoadFactor{&prev.u, positive_part, -1}, LoadFactor{&prev.v, {}, -1}});
        axpy(params_.mu_m, load, rhs);
    }
    auto res = cg_solve(m_lhs_csr_, &m_lhs_diag_, rhs, CgOptions{tol_});
    return FeScalarField(*mesh_, std::move(res.x));
}

FeScalarField UvmSigmaScheme::step_v(const FeScalarField& v_prev,
                                     const FeScalarField& m_new) const {
    return nodal_v_update(v_prev, m_new, params_.alpha, dt_);
}

FeScalarField UvmSigmaScheme::step_u(const UvmSigmaState& prev, const FeScalarField& v_new) const {
    CsrMatrix a = asm_.mass();
    a.scale(1.0 / dt_);
    a.add_scaled(params_.D_u, asm_.stiffness());
    if (params_.mu_u != 0.0) a.add_scaled(params_.mu_u, asm_.weighted_mass(v_new));

    Vector rhs;
    asm_.mass().multiply(prev.u.values, rhs);
    for (double& r : rhs) r /= dt_;
    const Vector hapto = asm_.haptotaxis_load(v_new, prev.u, prev.sigma, params_.chi);
    axpy(1.0, hapto, rhs);
    if (params_.mu_u != 0.0) {
        const Vector logistic =
            asm_.product_load({LoadFactor{&prev.u, [](double t) { return t - t * t; }, -1}});
        axpy(params_.mu_u, logistic, rhs);
    }
    auto res = cg_solve(a, nullptr, rhs, CgOptions{tol_});
    return FeScalarField(*mesh_, std::move(res.x));
}

FeVectorField UvmSigmaScheme::step_sigma(const UvmSigmaState& prev, const FeScalarField& m_new,
                                         const FeScalarField& v_new) const {
    CsrMatrix a = asm_.mass();
    a.scale(1.0 / dt_);
    if (params_.alpha != 0.0) a.add_scaled(params_.alpha, asm_.weighted_mass(m_new));

    FeVectorField out(*mesh_);
    for (int c = 0; c < 2; ++c) {
        const Vector prev_c = prev.sigma.component(c);
        Vector rhs;
        asm_.mass().multiply(prev_c, rhs);
        for (double& r : rhs) r /= dt_;
        if (params_.alpha != 0.0) {
            const Vector load =
                asm_.product_load({LoadFactor{&v_new, {}, -1}, LoadFactor{&m_new, {}, c}});
            axpy(-params_.alpha, load, rhs);
        }
        auto res = cg_solve(a, nullptr, rhs, CgOptions{tol_});
        out.set_component(c, res.x);
    }
    return out;
}

UvmSigmaState UvmSigmaScheme::advance(const UvmSigmaState& state) const {
    UvmSigmaState next;
    next.m = step_m(state);
    next.v = step_v(state.v, next.m);
    next.u = step_u(state, next.v);
    next.sigma = step_sigma(state, next.m, next.v);
    next.step = state.step + 1;
    next.time = next.step * dt_;
    return next;
}

} // namespace haptofem
