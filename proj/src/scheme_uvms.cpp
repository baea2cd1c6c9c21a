#include "haptofem/scheme_uvms.hpp"

#include <cmath>
#include <stdexcept>

namespace haptofem {

UvmsScheme::UvmsScheme(const TriMesh& mesh, const ModelParams& params, double dt,
                       double solver_tol, int threads)
    : mesh_(&mesh), params_(params), dt_(dt), tol_(solver_tol), asm_(mesh, threads) {
    validate(params_);
    if (!(dt_ > 0.0)) throw std::invalid_argument("UvmsScheme: dt must be positive");
    if (!(tol_ > 0.0)) throw std::invalid_argument("UvmsScheme: solver_tol must be positive");
    m_lhs_diag_ = asm_.lumped_mass();
    m_lhs_diag_.scale(1.0 / dt_ + params_.rho_m);
    m_lhs_csr_ = asm_.stiffness();
    m_lhs_csr_.scale(params_.D_m);
}

FeScalarField UvmsScheme::nodal_phi(const FeScalarField& v) const {
    FeScalarField phi(*mesh_);
    for (int j = 0; j < phi.size(); ++j) phi[j] = phi_eval(v[j], params_);
    return phi;
}

UvmsState UvmsScheme::initialize(const ProblemSetup& setup) const {
    InitialFields f = interpolate_initial_fields(*mesh_, setup);
    UvmsState s;
    s.v = std::move(f.v);
    s.m = std::move(f.m);
    s.s = FeScalarField(*mesh_);
    for (int j = 0; j < s.s.size(); ++j) s.s[j] = f.u[j] / phi_eval(s.v[j], params_);
    if (min_nodal(s.s) < 0.0)
        throw std::runtime_error("UvmsScheme::initialize: initial s is negative at a node");
    s.u = recover_u(s.s, s.v);
    s.step = 0;
    s.time = 0.0;
    return s;
}

FeScalarField UvmsScheme::step_m(const UvmsState& prev) const {
    const auto& lumped = asm_.lumped_mass().d;
    Vector rhs(lumped.size());
    for (size_t j = 0; j < lumped.size(); ++j) rhs[j] = lumped[j] * prev.m.values[j] / dt_;
    if (params_.mu_m != 0.0) {
        const PointwiseMap phi_map = [this](double v) { return phi_eval(v, params_); };
        const Vector load = asm_.product_load({LoadFactor{&prev.s, {}, -1},
                                               LoadFactor{&prev.v, phi_map, -1},
                                               LoadFactor{&prev.v, {}, -1}});
        axpy(params_.mu_m, load, rhs);
    }
    auto res = cg_solve(m_lhs_csr_, &m_lhs_diag_, rhs, CgOptions{tol_});
    return FeScalarField(*mesh_, std::move(res.x));
}

FeScalarField UvmsScheme::step_v(const FeScalarField& v_prev, const FeScalarField& m_new) const {
    return nodal_v_update(v_prev, m_new, params_.alpha, dt_);
}

FeScalarField UvmsScheme::step_s(const UvmsState& prev, const FeScalarField& v_new,
                                 const FeScalarField& m_new) const {
    const double min_s_prev = min_nodal(prev.s);
    if (min_s_prev < -kNegativeSTolerance)
        throw std::runtime_error("UvmsScheme::step_s: previous s is negative beyond tolerance (" +
                                 std::to_string(min_s_prev) + ")");

    const FeScalarField phi = nodal_phi(v_new);
    const PointwiseMap phi_map = [this](double v) { return phi_eval(v, params_); };

    // diagonal part: (1/dt) D_phi + mu_u D_{s phi^2} + mu_u D_{phi v}
    const auto& lumped = asm_.lumped_mass().d;
    DiagMatrix diag;
    diag.d.resize(lumped.size());
    for (size_t j = 0; j < lumped.size(); ++j) {
        const double phij = phi.values[j];
        double dj = lumped[j] * phij / dt_;
        if (params_.mu_u != 0.0)
            dj += params_.mu_u * lumped[j] *
                  (prev.s.values[j] * phij * phij + phij * v_new.values[j]);
        diag.d[j] = dj;
    }

    CsrMatrix a = asm_.weighted_stiffness(v_new, phi_map);
    a.scale(params_.D_u);

    Vector rhs(lumped.size());
    for (size_t j = 0; j < lumped.size(); ++j)
        rhs[j] = lumped[j] * phi.values[j] * prev.s.values[j] / dt_;
    if (params_.alpha != 0.0) {
        const Vector load = asm_.product_load({LoadFactor{&prev.s, {}, -1},
                                               LoadFactor{&v_new, phi_map, -1},
                                               LoadFactor{&v_new, params_.chi, -1},
                                               LoadFactor{&v_new, {}, -1},
                                               LoadFactor{&m_new, {}, -1}});
        axpy(params_.alpha / params_.D_u, load, rhs);
    }
    if (params_.mu_u != 0.0) {
        const Vector load = asm_.product_load(
            {LoadFactor{&prev.s, {}, -1}, LoadFactor{&v_new, phi_map, -1}});
        axpy(params_.mu_u, load, rhs);
    }

    auto res = cg_solve(a, &diag, rhs, CgOptions{tol_});
    return FeScalarField(*mesh_, std::move(res.x));
}

FeScalarField UvmsScheme::recover_u(const FeScalarField& s, const FeScalarField& v) const {
    if (s.mesh != mesh_ || v.mesh != mesh_)
        throw std::invalid_argument("recover_u: fields live on a different mesh");
    FeScalarField u(*mesh_);
    for (int j = 0; j < u.size(); ++j) u[j] = phi_eval(v[j], params_) * s[j];
    return u;
}

UvmsState UvmsScheme::advance(const UvmsState& state) const {
    UvmsState next;
    next.m = step_m(state);
    next.v = step_v(state.v, next.m);
    next.s = step_s(state, next.v, next.m);
    next.u = recover_u(next.s, next.v);
    next.step = state.step + 1;
    next.time = next.step * dt_;
    return next;
}

} // namespace haptofem
