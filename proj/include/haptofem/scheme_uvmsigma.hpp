#pragma once

#include "haptofem/problems.hpp"

namespace haptofem {

/// One time level of the splitting scheme with sigma = grad v as an
/// independent unknown. Immutable snapshot; fields share the scheme's mesh.
struct UvmSigmaState {
    FeScalarField m;
    FeScalarField v;
    FeScalarField u;
    FeVectorField sigma;
    int step = 0;
    double time = 0.0;
};

/// Time stepper for the four-stage splitting: implicit lumped-mass solve for
/// m, nodal closed-form update for v, consistent-mass solve for u (haptotaxis
/// and logistic loads lagged, the -mu_u u v term implicit), then two scalar
/// solves for the sigma components sharing one matrix. Every linear system is
/// symmetric positive definite. On nonobtuse meshes m and v stay nonnegative
/// (up to solver tolerance); u carries no such guarantee.
class UvmSigmaScheme {
public:
    UvmSigmaScheme(const TriMesh& mesh, const ModelParams& params, double dt,
                   double solver_tol = 1e-10, int threads = 0);

    UvmSigmaState initialize(const ProblemSetup& setup, UInit u_init = UInit::Nodal) const;

    FeScalarField step_m(const UvmSigmaState& prev) const;
    FeScalarField step_v(const FeScalarField& v_prev, const FeScalarField& m_new) const;
    FeScalarField step_u(const UvmSigmaState& prev, const FeScalarField& v_new) const;
    FeVectorField step_sigma(const UvmSigmaState& prev, const FeScalarField& m_new,
                             const FeScalarField& v_new) const;

    /// step_m -> step_v -> step_u -> step_sigma
    UvmSigmaState advance(const UvmSigmaState& state) const;

    const TriMesh& mesh() const { return *mesh_; }
    const Assembler& assembler() const { return asm_; }
    const ModelParams& params() const { return params_; }
    double dt() const { return dt_; }
    double solver_tol() const { return tol_; }

private:
    const TriMesh* mesh_;
    ModelParams params_;
    double dt_;
    double tol_;
    Assembler asm_;
    // the m system never changes: ((1/dt + rho_m) M_L + D_m K) m = rhs
    DiagMatrix m_lhs_diag_;
    CsrMatrix m_lhs_csr_;
};

} // namespace haptofem
