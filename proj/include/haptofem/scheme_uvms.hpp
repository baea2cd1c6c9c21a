#pragma once

#include "haptofem/problems.hpp"

namespace haptofem {

/// One time level of the divergence-form scheme in the variables
/// (s, v, m) with u = phi(v) s recovered nodally after each step.
struct UvmsState {
    FeScalarField s;
    FeScalarField v;
    FeScalarField m;
    FeScalarField u;  // recovered
    int step = 0;
    double time = 0.0;
};

/// Time stepper for the divergence-form scheme: implicit lumped solve for m
/// (load lagged at the previous level), nodal update for v, then the s solve
/// with phi(v)-weighted lumped masses and phi(v)-weighted stiffness. All
/// variables stay nonnegative on nonobtuse meshes (up to solver tolerance),
/// and so does the recovered u.
class UvmsScheme {
public:
    UvmsScheme(const TriMesh& mesh, const ModelParams& params, double dt,
               double solver_tol = 1e-10, int threads = 0);

    /// s0 is built nodally as u0(x_j) / phi(v0_j) so that the recovered u0
    /// matches the nodal interpolant of u0.
    UvmsState initialize(const ProblemSetup& setup) const;

    FeScalarField step_m(const UvmsState& prev) const;
    FeScalarField step_v(const FeScalarField& v_prev, const FeScalarField& m_new) const;
    FeScalarField step_s(const UvmsState& prev, const FeScalarField& v_new,
                         const FeScalarField& m_new) const;
    FeScalarField recover_u(const FeScalarField& s, const FeScalarField& v) const;

    /// step_m -> step_v -> step_s -> recover u
    UvmsState advance(const UvmsState& state) const;

    const TriMesh& mesh() const { return *mesh_; }
    const Assembler& assembler() const { return asm_; }
    const ModelParams& params() const { return params_; }
    double dt() const { return dt_; }
    double solver_tol() const { return tol_; }

    /// Band below which a previous-level negative s node is a hard error
    /// (inside the band it is only flagged by the run diagnostics).
    static constexpr double kNegativeSTolerance = 1e-12;

private:
    const TriMesh* mesh_;
    ModelParams params_;
    double dt_;
    double tol_;
    Assembler asm_;
    DiagMatrix m_lhs_diag_;
    CsrMatrix m_lhs_csr_;

    FeScalarField nodal_phi(const FeScalarField& v) const;
};

} // namespace haptofem
