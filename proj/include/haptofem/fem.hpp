#pragma once

#include "haptofem/linalg.hpp"
#include "haptofem/mesh.hpp"

#include <array>
#include <functional>
#include <initializer_list>
#include <span>

namespace haptofem {

/// P1 scalar field: one nodal value per mesh vertex.
struct FeScalarField {
    const TriMesh* mesh = nullptr;
    Vector values;

    FeScalarField() = default;
    explicit FeScalarField(const TriMesh& m, double fill = 0.0)
        : mesh(&m), values(static_cast<size_t>(m.num_vertices()), fill) {}
    FeScalarField(const TriMesh& m, Vector v);

    double operator[](int j) const { return values[static_cast<size_t>(j)]; }
    double& operator[](int j) { return values[static_cast<size_t>(j)]; }
    int size() const { return static_cast<int>(values.size()); }
};

/// P1 vector field with 2 components per vertex, stored interleaved.
struct FeVectorField {
    const TriMesh* mesh = nullptr;
    Vector values;

    FeVectorField() = default;
    explicit FeVectorField(const TriMesh& m, double fill = 0.0)
        : mesh(&m), values(2 * static_cast<size_t>(m.num_vertices()), fill) {}

    double comp(int j, int c) const { return values[2 * static_cast<size_t>(j) + static_cast<size_t>(c)]; }
    double& comp(int j, int c) { return values[2 * static_cast<size_t>(j) + static_cast<size_t>(c)]; }
    Vector component(int c) const;
    void set_component(int c, const Vector& v);
};

double min_nodal(const FeScalarField& f);
double max_nodal(const FeScalarField& f);

using PointwiseFn = std::function<double(double, double)>;
using GradientFn = std::function<std::array<double, 2>(double, double)>;
using PointwiseMap = std::function<double(double)>;

/// Nodal interpolation I_h: samples f at every vertex. Errors on non-finite
/// values.
FeScalarField nodal_interpolate(const TriMesh& mesh, const PointwiseFn& f);
FeVectorField nodal_interpolate_vector(const TriMesh& mesh, const GradientFn& f);

/// Nodal clipping: positive part max(., 0) and negative part min(., 0). The
/// two parts sum back to the original field at every node.
FeScalarField positive_part_nodal(const FeScalarField& f);
FeScalarField negative_part_nodal(const FeScalarField& f);

/// Quadrature on the reference triangle in barycentric coordinates; weights
/// are strictly positive and sum to 1 (so physical integration multiplies by
/// the element area).
struct QuadratureRule {
    struct Point {
        std::array<double, 3> bary;
        double weight;
    };
    std::vector<Point> points;
    int degree = 0;

    static const QuadratureRule& degree2();  // 3 interior points
    static const QuadratureRule& degree4();  // 6 points
};

/// One multiplicand of a right-hand-side product integrand. The factor value
/// at a quadrature point is map(field(q)) (map optional), or the constant
/// element-gradient component of the field when grad_component is 0 or 1.
struct LoadFactor {
    const FeScalarField* field = nullptr;
    PointwiseMap map;
    int grad_component = -1;
};

/// Piecewise-constant gradient of a P1 field on element e.
std::array<double, 2> element_gradient(const FeScalarField& f, int e);

/// P1 assembly engine for one mesh: owns the shared sparsity pattern, the
/// cached mass/stiffness/lumped-mass matrices and the quadrature rule.
/// Nonlinear coefficients are composed with the P1 field value at each
/// quadrature point, never interpolated as a composed function.
class Assembler {
public:
    explicit Assembler(const TriMesh& mesh, int threads = 0,
                       const QuadratureRule* rule = nullptr);

    const TriMesh& mesh() const { return *mesh_; }
    const QuadratureRule& quadrature() const { return *quad_; }
    int threads() const { return threads_; }

    /// Diagonal with entry j = sum of area/3 over triangles containing j.
    const DiagMatrix& lumped_mass() const { return lumped_; }
    const CsrMatrix& mass() const { return mass_; }
    const CsrMatrix& stiffness() const { return stiffness_; }

    CsrMatrix weighted_mass(const FeScalarField& w, const PointwiseMap& map = {}) const;
    CsrMatrix weighted_stiffness(const FeScalarField& w, const PointwiseMap& map = {}) const;
    /// Lumped mass scaled nodally: diag_j = M_L,jj * w_j.
    DiagMatrix weighted_lumped(const FeScalarField& w) const;

    Vector product_load(std::span<const LoadFactor> factors) const;
    Vector product_load(std::initializer_list<LoadFactor> factors) const;
    /// entry_i = sum_e int_e chi(v) u_prev (sigma_prev . grad lambda_i)
    Vector haptotaxis_load(const FeScalarField& v, const FeScalarField& u_prev,
                           const FeVectorField& sigma_prev, const PointwiseMap& chi) const;

    /// (a, b)^h = a' M_L b, evaluated with the exact floating-point expression
    /// sum_j a_j (M_L,jj * b_j).
    double inner_h(const FeScalarField& a, const FeScalarField& b) const;
    double l2_norm(const FeScalarField& a) const;
    double l2_norm(const FeVectorField& a) const;
    double h1_seminorm(const FeScalarField& a) const;
    double h1_norm(const FeScalarField& a) const;
    double l2_error(const FeScalarField& a, const FeScalarField& b) const;
    double l2_error(const FeVectorField& a, const FeVectorField& b) const;
    double h1_error(const FeScalarField& a, const FeScalarField& b) const;

    /// Solves (K + M) p = (grad f, grad phi_i) + (f, phi_i) with a degree-4
    /// load quadrature; reproduces P1 functions exactly. Requires the analytic
    /// gradient (no silent numerical differentiation).
    FeScalarField elliptic_projection(const PointwiseFn& f, const GradientFn& grad_f,
                                      double cg_tol = 1e-12) const;

private:
    const TriMesh* mesh_;
    int threads_;
    const QuadratureRule* quad_;
    std::vector<int> row_offsets_;
    std::vector<int> cols_;
    std::vector<std::array<int, 9>> slots_;  // CSR value index per element and local (i, j)
    DiagMatrix lumped_;
    CsrMatrix mass_;
    CsrMatrix stiffness_;

    CsrMatrix make_csr(Vector vals) const;
    template <class Kernel>
    Vector accumulate(size_t out_size, Kernel&& kernel) const;
};

// One-shot wrappers over a temporary Assembler.
DiagMatrix assemble_lumped_mass(const TriMesh& mesh);
CsrMatrix assemble_mass(const TriMesh& mesh);
CsrMatrix assemble_stiffness(const TriMesh& mesh);
CsrMatrix assemble_stiffness(const TriMesh& mesh, const FeScalarField& weight);
DiagMatrix assemble_weighted_lumped(const TriMesh& mesh, const FeScalarField& weight);
Vector assemble_product_load(const TriMesh& mesh, std::initializer_list<LoadFactor> factors);
Vector assemble_haptotaxis_load(const TriMesh& mesh, const FeScalarField& v,
                                const FeScalarField& u_prev, const FeVectorField& sigma_prev,
                                const PointwiseMap& chi);
double discrete_inner_h(const FeScalarField& a, const FeScalarField& b);

double evaluate(const FeScalarField& f, const PointLocator::Location& loc);

/// P1 evaluation of a coarse field at the vertices of another mesh. Exact for
/// nested meshes. Throws if a target vertex lies outside the source mesh.
FeScalarField prolong(const FeScalarField& coarse, const PointLocator& coarse_locator,
                      const TriMesh& fine);
FeVectorField prolong(const FeVectorField& coarse, const PointLocator& coarse_locator,
                      const TriMesh& fine);

} // namespace haptofem
