#pragma once

#include "haptofem/model.hpp"

#include <string>

namespace haptofem {

/// How the initial cancer-cell density enters the discrete space: nodal
/// interpolation for simulations (keeps the sign structure of u0), elliptic
/// projection for convergence studies.
enum class UInit { Nodal, Elliptic };

/// Experiment definition: model constants, initial data closures and the
/// exact gradient of the smooth v0 formula (used for sigma0). Test 2's v0 can
/// dip slightly below zero where bumps overlap; clamp_negative_v0 clips the
/// interpolated nodal values at zero while sigma0 keeps the smooth formula.
struct ProblemSetup {
    std::string name;
    ModelParams params;
    PointwiseFn u0;
    PointwiseFn v0;
    PointwiseFn m0;
    GradientFn sigma0;   // = grad v0
    GradientFn grad_u0;  // for the elliptic projection of u0
    bool clamp_negative_v0 = false;
};

/// The simulation constants: D_m = 0.001, rho_m = 0, mu_m = 0.1, alpha = 10,
/// D_u = 0.001, constant chi = 0.005; mu_u as given.
ModelParams paper_params(double mu_u);

/// Homogeneous matrix: u0 a sharp Gaussian at the center, m0 = 0.5 u0,
/// v0 = 1 - u0.
ProblemSetup test1_setup(double mu_u);

/// Heterogeneous matrix: same u0 and m0, v0 = 1 minus seven anisotropic
/// Gaussian bumps; nodal clamping of v0 enabled.
ProblemSetup test2_setup(double mu_u);

/// All-zero initial data (debug problem).
ProblemSetup zero_setup(double mu_u = 0.0);

ProblemSetup setup_by_name(const std::string& name, double mu_u);

/// Nodal interpolation of the initial data with v-clamping and positivity
/// validation (v and m must be nonnegative after interpolation).
struct InitialFields {
    FeScalarField u;
    FeScalarField v;
    FeScalarField m;
    FeVectorField sigma;
};

InitialFields interpolate_initial_fields(const TriMesh& mesh, const ProblemSetup& setup);

} // namespace haptofem
