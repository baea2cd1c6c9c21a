#pragma once

#include "haptofem/fem.hpp"

#include <functional>

namespace haptofem {

/// PDE constants and the haptotactic sensitivity chi(v). chi must be
/// continuous and positive for v >= 0; its antiderivative X (with X(0) = 0)
/// is supplied alongside so that phi(v) = exp(X(v)/D_u) carries no embedded
/// quadrature error.
struct ModelParams {
    double D_u = 0.0;
    double D_m = 0.0;
    double alpha = 0.0;
    double rho_m = 0.0;
    double mu_m = 0.0;
    double mu_u = 0.0;
    std::function<double(double)> chi;
    std::function<double(double)> chi_antiderivative;
};

void validate(const ModelParams& params);

/// phi(v) = exp(X(v)/D_u). Errors (rather than saturating to inf) when the
/// exponent overflows, reporting the offending v.
double phi_eval(double v, const ModelParams& params);

/// Uniform time grid t_n = n * dt covering [0, t_end] with num_steps * dt =
/// t_end within 1e-12.
struct TimeConfig {
    double dt = 0.0;
    double t_end = 0.0;
    int num_steps = 0;
    double solver_tol = 1e-10;
};

TimeConfig make_time_config(double dt, double t_end, double solver_tol = 1e-10);

/// Nodal closed-form update v <- v / (1 + alpha dt m), the exact solution of
/// the implicit step for dv/dt = -alpha m v with m frozen at the new time
/// level. Keeps v nonnegative and nonincreasing wherever m >= 0. Throws when
/// the denominator is nonpositive at some node.
FeScalarField nodal_v_update(const FeScalarField& v_prev, const FeScalarField& m_new,
                             double alpha, double dt);

} // namespace haptofem
