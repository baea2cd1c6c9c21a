#include "haptofem/model.hpp"

#include <cmath>
#include <stdexcept>

namespace haptofem {

void validate(const ModelParams& params) {
    if (!(params.D_u > 0.0)) throw std::invalid_argument("ModelParams: D_u must be positive");
    if (!(params.D_m > 0.0)) throw std::invalid_argument("ModelParams: D_m must be positive");
    if (params.alpha < 0.0) throw std::invalid_argument("ModelParams: alpha must be >= 0");
    if (params.rho_m < 0.0) throw std::invalid_argument("ModelParams: rho_m must be >= 0");
    if (params.mu_m < 0.0) throw std::invalid_argument("ModelParams: mu_m must be >= 0");
    if (params.mu_u < 0.0) throw std::invalid_argument("ModelParams: mu_u must be >= 0");
    if (!params.chi || !params.chi_antiderivative)
        throw std::invalid_argument("ModelParams: chi and its antiderivative are required");
}

double phi_eval(double v, const ModelParams& params) {
    const double exponent = params.chi_antiderivative(v) / params.D_u;
    if (exponent > 700.0)
        throw std::runtime_error("phi_eval: exponent overflow at v = " + std::to_string(v));
    return std::exp(exponent);
}

TimeConfig make_time_config(double dt, double t_end, double solver_tol) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeConfig: dt must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("TimeConfig: t_end must be positive");
    if (!(solver_tol > 0.0)) throw std::invalid_argument("TimeConfig: solver_tol must be positive");
    const double steps = t_end / dt;
    const int n = static_cast<int>(std::llround(steps));
    if (n < 1 || std::abs(n * dt - t_end) > 1e-12 * std::max(1.0, t_end))
        throw std::invalid_argument("TimeConfig: t_end must be an integer multiple of dt");
    return TimeConfig{dt, t_end, n, solver_tol};
}

FeScalarField nodal_v_update(const FeScalarField& v_prev, const FeScalarField& m_new,
                             double alpha, double dt) {
    if (v_prev.mesh != m_new.mesh || !v_prev.mesh)
        throw std::invalid_argument("nodal_v_update: fields must share a mesh");
    FeScalarField out(*v_prev.mesh);
    for (int j = 0; j < out.size(); ++j) {
        const double denom = 1.0 + alpha * dt * m_new[j];
        if (denom <= 0.0)
            throw std::runtime_error("nodal_v_update: positivity breach, 1 + alpha dt m = " +
                                     std::to_string(denom) + " at node " + std::to_string(j));
        out[j] = v_prev[j] / denom;
    }
    return out;
}

} // namespace haptofem
