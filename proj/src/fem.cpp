#include "haptofem/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace haptofem {

FeScalarField::FeScalarField(const TriMesh& m, Vector v) : mesh(&m), values(std::move(v)) {
    if (values.size() != static_cast<size_t>(m.num_vertices()))
        throw std::invalid_argument("FeScalarField: value count does not match vertex count");
}

Vector FeVectorField::component(int c) const {
    Vector out(values.size() / 2);
    for (size_t j = 0; j < out.size(); ++j) out[j] = values[2 * j + static_cast<size_t>(c)];
    return out;
}

void FeVectorField::set_component(int c, const Vector& v) {
    if (2 * v.size() != values.size())
        throw std::invalid_argument("FeVectorField::set_component: size mismatch");
    for (size_t j = 0; j < v.size(); ++j) values[2 * j + static_cast<size_t>(c)] = v[j];
}

double min_nodal(const FeScalarField& f) {
    double m = f.values.empty() ? 0.0 : f.values[0];
    for (double v : f.values) m = std::min(m, v);
    return m;
}

double max_nodal(const FeScalarField& f) {
    double m = f.values.empty() ? 0.0 : f.values[0];
    for (double v : f.values) m = std::max(m, v);
    return m;
}

FeScalarField nodal_interpolate(const TriMesh& mesh, const PointwiseFn& f) {
    if (!f) throw std::invalid_argument("nodal_interpolate: empty function");
    FeScalarField out(mesh);
    for (int j = 0; j < mesh.num_vertices(); ++j) {
        const auto& p = mesh.vertex(j);
        const double v = f(p[0], p[1]);
        if (!std::isfinite(v))
            throw std::runtime_error("nodal_interpolate: non-finite value at vertex " +
                                     std::to_string(j) + " (" + std::to_string(p[0]) + ", " +
                                     std::to_string(p[1]) + ")");
        out[j] = v;
    }
    return out;
}

FeVectorField nodal_interpolate_vector(const TriMesh& mesh, const GradientFn& f) {
    if (!f) throw std::invalid_argument("nodal_interpolate_vector: empty function");
    FeVectorField out(mesh);
    for (int j = 0; j < mesh.num_vertices(); ++j) {
        const auto& p = mesh.vertex(j);
        const auto v = f(p[0], p[1]);
        if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
            throw std::runtime_error("nodal_interpolate_vector: non-finite value at vertex " +
                                     std::to_string(j));
        out.comp(j, 0) = v[0];
        out.comp(j, 1) = v[1];
    }
    return out;
}

FeScalarField positive_part_nodal(const FeScalarField& f) {
    FeScalarField out = f;
    for (double& v : out.values) v = std::max(v, 0.0);
    return out;
}

FeScalarField negative_part_nodal(const FeScalarField& f) {
    FeScalarField out = f;
    for (double& v : out.values) v = std::min(v, 0.0);
    return out;
}

const QuadratureRule& QuadratureRule::degree2() {
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        r.degree = 2;
        const double a = 2.0 / 3.0, b = 1.0 / 6.0, w = 1.0 / 3.0;
        r.points = {{{a, b, b}, w}, {{b, a, b}, w}, {{b, b, a}, w}};
        return r;
    }();
    return rule;
}

const QuadratureRule& QuadratureRule::degree4() {
    static const QuadratureRule rule = [] {
        QuadratureRule r;
        r.degree = 4;
        const double w1 = 0.223381589678011, a1 = 0.445948490915965,
                     b1 = 0.108103018168070;
        const double w2 = 0.109951743655322, a2 = 0.091576213509771,
                     b2 = 0.816847572980459;
        r.points = {{{b1, a1, a1}, w1}, {{a1, b1, a1}, w1}, {{a1, a1, b1}, w1},
                    {{b2, a2, a2}, w2}, {{a2, b2, a2}, w2}, {{a2, a2, b2}, w2}};
        return r;
    }();
    return rule;
}

std::array<double, 2> element_gradient(const FeScalarField& f, int e) {
    const auto& g = f.mesh->element_geometry(e);
    const auto& t = f.mesh->triangle(e);
    std::array<double, 2> out{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        const double v = f[t[static_cast<size_t>(i)]];
        out[0] += v * g.grad[static_cast<size_t>(i)][0];
        out[1] += v * g.grad[static_cast<size_t>(i)][1];
    }
    return out;
}

namespace {

void require_field(const TriMesh* mesh, const FeScalarField& f, const char* what) {
    if (f.mesh != mesh)
        throw std::invalid_argument(std::string(what) + ": field lives on a different mesh");
}

void require_field(const TriMesh* mesh, const FeVectorField& f, const char* what) {
    if (f.mesh != mesh)
        throw std::invalid_argument(std::string(what) + ": field lives on a different mesh");
}

} // namespace

Assembler::Assembler(const TriMesh& mesh, int threads, const QuadratureRule* rule)
    : mesh_(&mesh), threads_(std::max(threads, 0)),
      quad_(rule ? rule : &QuadratureRule::degree2()) {
    const int nv = mesh.num_vertices();
    const int nt = mesh.num_triangles();

    std::vector<std::vector<int>> adj(static_cast<size_t>(nv));
    for (int e = 0; e < nt; ++e) {
        const auto& t = mesh.triangle(e);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                adj[static_cast<size_t>(t[static_cast<size_t>(i)])].push_back(
                    t[static_cast<size_t>(j)]);
    }
    row_offsets_.assign(static_cast<size_t>(nv) + 1, 0);
    for (int r = 0; r < nv; ++r) {
        auto& row = adj[static_cast<size_t>(r)];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        row_offsets_[static_cast<size_t>(r) + 1] =
            row_offsets_[static_cast<size_t>(r)] + static_cast<int>(row.size());
    }
    cols_.reserve(static_cast<size_t>(row_offsets_.back()));
    for (int r = 0; r < nv; ++r)
        cols_.insert(cols_.end(), adj[static_cast<size_t>(r)].begin(),
                     adj[static_cast<size_t>(r)].end());

    auto slot_of = [&](int i, int j) {
        const auto begin = cols_.begin() + row_offsets_[static_cast<size_t>(i)];
        const auto end = cols_.begin() + row_offsets_[static_cast<size_t>(i) + 1];
        return static_cast<int>(std::lower_bound(begin, end, j) - cols_.begin());
    };
    slots_.resize(static_cast<size_t>(nt));
    for (int e = 0; e < nt; ++e) {
        const auto& t = mesh.triangle(e);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                slots_[static_cast<size_t>(e)][static_cast<size_t>(3 * i + j)] =
                    slot_of(t[static_cast<size_t>(i)], t[static_cast<size_t>(j)]);
    }

    lumped_.d.assign(static_cast<size_t>(nv), 0.0);
    for (int e = 0; e < nt; ++e) {
        const auto& t = mesh.triangle(e);
        const double third = mesh.area(e) / 3.0;
        for (int i = 0; i < 3; ++i) lumped_.d[static_cast<size_t>(t[static_cast<size_t>(i)])] += third;
    }

    // consistent mass: local (A/12) * [[2,1,1],[1,2,1],[1,1,2]]
    Vector mvals = accumulate(cols_.size(), [&](int e, double* out) {
        const double a12 = mesh_->area(e) / 12.0;
        const auto& slot = slots_[static_cast<size_t>(e)];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out[slot[static_cast<size_t>(3 * i + j)]] += a12 * (i == j ? 2.0 : 1.0);
    });
    mass_ = make_csr(std::move(mvals));

    Vector kvals = accumulate(cols_.size(), [&](int e, double* out) {
        const auto& g = mesh_->element_geometry(e);
        const double area = g.area;
        const auto& slot = slots_[static_cast<size_t>(e)];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out[slot[static_cast<size_t>(3 * i + j)]] +=
                    area * (g.grad[static_cast<size_t>(i)][0] * g.grad[static_cast<size_t>(j)][0] +
                            g.grad[static_cast<size_t>(i)][1] * g.grad[static_cast<size_t>(j)][1]);
    });
    stiffness_ = make_csr(std::move(kvals));
}

CsrMatrix Assembler::make_csr(Vector vals) const {
    return CsrMatrix(mesh_->num_vertices(), row_offsets_, cols_, std::move(vals));
}

template <class Kernel>
Vector Assembler::accumulate(size_t out_size, Kernel&& kernel) const {
    const int nt = mesh_->num_triangles();
    if (threads_ <= 1) {
        Vector out(out_size, 0.0);
        for (int e = 0; e < nt; ++e) kernel(e, out.data());
        return out;
    }
    const int nthreads = std::min(threads_, nt);
    const int chunk = (nt + nthreads - 1) / nthreads;
    std::vector<Vector> bufs(static_cast<size_t>(nthreads));
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        bufs[static_cast<size_t>(t)].assign(out_size, 0.0);
        workers.emplace_back([&, t] {
            const int begin = t * chunk;
            const int end = std::min(nt, begin + chunk);
            double* out = bufs[static_cast<size_t>(t)].data();
            for (int e = begin; e < end; ++e) kernel(e, out);
        });
    }
    for (auto& w : workers) w.join();
    // merge in fixed thread order so results are reproducible per thread count
    Vector out(out_size, 0.0);
    for (int t = 0; t < nthreads; ++t) axpy(1.0, bufs[static_cast<size_t>(t)], out);
    return out;
}

CsrMatrix Assembler::weighted_mass(const FeScalarField& w, const PointwiseMap& map) const {
    require_field(mesh_, w, "weighted_mass");
    const auto& q = *quad_;
    Vector vals = accumulate(cols_.size(), [&](int e, double* out) {
        const auto& t = mesh_->triangle(e);
        const double area = mesh_->area(e);
        const double v0 = w[t[0]], v1 = w[t[1]], v2 = w[t[2]];
        const auto& slot = slots_[static_cast<size_t>(e)];
        for (const auto& qp : q.points) {
            double c = qp.bary[0] * v0 + qp.bary[1] * v1 + qp.bary[2] * v2;
            if (map) c = map(c);
            const double s = area * qp.weight * c;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    out[slot[static_cast<size_t>(3 * i + j)]] +=
                        s * qp.bary[static_cast<size_t>(i)] * qp.bary[static_cast<size_t>(j)];
        }
    });
    return make_csr(std::move(vals));
}

CsrMatrix Assembler::weighted_stiffness(const FeScalarField& w, const PointwiseMap& map) const {
    require_field(mesh_, w, "weighted_stiffness");
    const auto& q = *quad_;
    // gradients are constant per element, so only the weight is integrated
    Vector vals = accumulate(cols_.size(), [&](int e, double* out) {
        const auto& t = mesh_->triangle(e);
        const auto& g = mesh_->element_geometry(e);
        const double v0 = w[t[0]], v1 = w[t[1]], v2 = w[t[2]];
        double cint = 0.0;
        for (const auto& qp : q.points) {
            double c = qp.bary[0] * v0 + qp.bary[1] * v1 + qp.bary[2] * v2;
            if (map) c = map(c);
            cint += qp.weight * c;
        }
        const double s = g.area * cint;
        const auto& slot = slots_[static_cast<size_t>(e)];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out[slot[static_cast<size_t>(3 * i + j)]] +=
                    s * (g.grad[static_cast<size_t>(i)][0] * g.grad[static_cast<size_t>(j)][0] +
                         g.grad[static_cast<size_t>(i)][1] * g.grad[static_cast<size_t>(j)][1]);
    });
    return make_csr(std::move(vals));
}

DiagMatrix Assembler::weighted_lumped(const FeScalarField& w) const {
    require_field(mesh_, w, "weighted_lumped");
    DiagMatrix out = lumped_;
    for (size_t j = 0; j < out.d.size(); ++j) out.d[j] *= w.values[j];
    return out;
}

Vector Assembler::product_load(std::span<const LoadFactor> factors) const {
    for (const auto& f : factors) {
        if (!f.field) throw std::invalid_argument("product_load: null factor field");
        require_field(mesh_, *f.field, "product_load");
        if (f.grad_component > 1)
            throw std::invalid_argument("product_load: gradient component must be 0 or 1");
        if (f.grad_component >= 0 && f.map)
            throw std::invalid_argument("product_load: gradient factors take no pointwise map");
    }
    const auto& q = *quad_;
    return accumulate(static_cast<size_t>(mesh_->num_vertices()), [&](int e, double* out) {
        const auto& t = mesh_->triangle(e);
        const double area = mesh_->area(e);
        for (const auto& qp : q.points) {
            double prod = 1.0;
            for (const auto& f : factors) {
                double val;
                if (f.grad_component >= 0) {
                    val = element_gradient(*f.field, e)[static_cast<size_t>(f.grad_component)];
                } else {
                    val = qp.bary[0] * (*f.field)[t[0]] + qp.bary[1] * (*f.field)[t[1]] +
                          qp.bary[2] * (*f.field)[t[2]];
                    if (f.map) val = f.map(val);
                }
                prod *= val;
            }
            const double s = area * qp.weight * prod;
            for (int i = 0; i < 3; ++i)
                out[t[static_cast<size_t>(i)]] += s * qp.bary[static_cast<size_t>(i)];
        }
    });
}

Vector Assembler::product_load(std::initializer_list<LoadFactor> factors) const {
    return product_load(std::span<const LoadFactor>(factors.begin(), factors.size()));
}

Vector Assembler::haptotaxis_load(const FeScalarField& v, const FeScalarField& u_prev,
                                  const FeVectorField& sigma_prev, const PointwiseMap& chi) const {
    require_field(mesh_, v, "haptotaxis_load");
    require_field(mesh_, u_prev, "haptotaxis_load");
    require_field(mesh_, sigma_prev, "haptotaxis_load");
    if (!chi) throw std::invalid_argument("haptotaxis_load: empty sensitivity function");
    const auto& q = *quad_;
    return accumulate(static_cast<size_t>(mesh_->num_vertices()), [&](int e, double* out) {
        const auto& t = mesh_->triangle(e);
        const auto& g = mesh_->element_geometry(e);
        for (const auto& qp : q.points) {
            const double vq = qp.bary[0] * v[t[0]] + qp.bary[1] * v[t[1]] + qp.bary[2] * v[t[2]];
            const double uq =
                qp.bary[0] * u_prev[t[0]] + qp.bary[1] * u_prev[t[1]] + qp.bary[2] * u_prev[t[2]];
            const double sx = qp.bary[0] * sigma_prev.comp(t[0], 0) +
                              qp.bary[1] * sigma_prev.comp(t[1], 0) +
                              qp.bary[2] * sigma_prev.comp(t[2], 0);
            const double sy = qp.bary[0] * sigma_prev.comp(t[0], 1) +
                              qp.bary[1] * sigma_prev.comp(t[1], 1) +
                              qp.bary[2] * sigma_prev.comp(t[2], 1);
            const double s = g.area * qp.weight * chi(vq) * uq;
            for (int i = 0; i < 3; ++i)
                out[t[static_cast<size_t>(i)]] += s * (sx * g.grad[static_cast<size_t>(i)][0] +
                                                       sy * g.grad[static_cast<size_t>(i)][1]);
        }
    });
}

double Assembler::inner_h(const FeScalarField& a, const FeScalarField& b) const {
    require_field(mesh_, a, "inner_h");
    require_field(mesh_, b, "inner_h");
    double s = 0.0;
    for (size_t j = 0; j < lumped_.d.size(); ++j) s += a.values[j] * (lumped_.d[j] * b.values[j]);
    return s;
}

double Assembler::l2_norm(const FeScalarField& a) const {
    require_field(mesh_, a, "l2_norm");
    Vector y;
    mass_.multiply(a.values, y);
    return std::sqrt(std::max(dot(a.values, y), 0.0));
}

double Assembler::l2_norm(const FeVectorField& a) const {
    require_field(mesh_, a, "l2_norm");
    double s = 0.0;
    Vector y;
    for (int c = 0; c < 2; ++c) {
        const Vector comp = a.component(c);
        mass_.multiply(comp, y);
        s += dot(comp, y);
    }
    return std::sqrt(std::max(s, 0.0));
}

double Assembler::h1_seminorm(const FeScalarField& a) const {
    require_field(mesh_, a, "h1_seminorm");
    Vector y;
    stiffness_.multiply(a.values, y);
    return std::sqrt(std::max(dot(a.values, y), 0.0));
}

double Assembler::h1_norm(const FeScalarField& a) const {
    const double l2 = l2_norm(a);
    const double semi = h1_seminorm(a);
    return std::sqrt(l2 * l2 + semi * semi);
}

double Assembler::l2_error(const FeScalarField& a, const FeScalarField& b) const {
    require_field(mesh_, a, "l2_error");
    require_field(mesh_, b, "l2_error");
    FeScalarField diff = a;
    axpy(-1.0, b.values, diff.values);
    return l2_norm(diff);
}

double Assembler::l2_error(const FeVectorField& a, const FeVectorField& b) const {
    require_field(mesh_, a, "l2_error");
    require_field(mesh_, b, "l2_error");
    FeVectorField diff = a;
    axpy(-1.0, b.values, diff.values);
    return l2_norm(diff);
}

double Assembler::h1_error(const FeScalarField& a, const FeScalarField& b) const {
    require_field(mesh_, a, "h1_error");
    require_field(mesh_, b, "h1_error");
    FeScalarField diff = a;
    axpy(-1.0, b.values, diff.values);
    return h1_seminorm(diff);
}

FeScalarField Assembler::elliptic_projection(const PointwiseFn& f, const GradientFn& grad_f,
                                             double cg_tol) const {
    if (!f || !grad_f)
        throw std::invalid_argument(
            "elliptic_projection: analytic value and gradient are both required");
    const auto& q = QuadratureRule::degree4();
    Vector rhs = accumulate(static_cast<size_t>(mesh_->num_vertices()), [&](int e, double* out) {
        const auto& t = mesh_->triangle(e);
        const auto& g = mesh_->element_geometry(e);
        const auto& p0 = mesh_->vertex(t[0]);
        const auto& p1 = mesh_->vertex(t[1]);
        const auto& p2 = mesh_->vertex(t[2]);
        for (const auto& qp : q.points) {
            const double x = qp.bary[0] * p0[0] + qp.bary[1] * p1[0] + qp.bary[2] * p2[0];
            const double y = qp.bary[0] * p0[1] + qp.bary[1] * p1[1] + qp.bary[2] * p2[1];
            const double val = f(x, y);
            const auto gr = grad_f(x, y);
            const double s = g.area * qp.weight;
            for (int i = 0; i < 3; ++i)
                out[t[static_cast<size_t>(i)]] +=
                    s * (gr[0] * g.grad[static_cast<size_t>(i)][0] +
                         gr[1] * g.grad[static_cast<size_t>(i)][1] +
                         val * qp.bary[static_cast<size_t>(i)]);
        }
    });
    if (!all_finite(rhs))
        throw std::runtime_error("elliptic_projection: non-finite load (bad f or grad_f)");
    CsrMatrix a = stiffness_;
    a.add_scaled(1.0, mass_);
    auto res = cg_solve(a, nullptr, rhs, CgOptions{cg_tol, 0, true});
    return FeScalarField(*mesh_, std::move(res.x));
}

DiagMatrix assemble_lumped_mass(const TriMesh& mesh) { return Assembler(mesh).lumped_mass(); }
CsrMatrix assemble_mass(const TriMesh& mesh) { return Assembler(mesh).mass(); }
CsrMatrix assemble_stiffness(const TriMesh& mesh) { return Assembler(mesh).stiffness(); }

CsrMatrix assemble_stiffness(const TriMesh& mesh, const FeScalarField& weight) {
    return Assembler(mesh).weighted_stiffness(weight);
}

DiagMatrix assemble_weighted_lumped(const TriMesh& mesh, const FeScalarField& weight) {
    return Assembler(mesh).weighted_lumped(weight);
}

Vector assemble_product_load(const TriMesh& mesh, std::initializer_list<LoadFactor> factors) {
    return Assembler(mesh).product_load(factors);
}

Vector assemble_haptotaxis_load(const TriMesh& mesh, const FeScalarField& v,
                                const FeScalarField& u_prev, const FeVectorField& sigma_prev,
                                const PointwiseMap& chi) {
    return Assembler(mesh).haptotaxis_load(v, u_prev, sigma_prev, chi);
}

double discrete_inner_h(const FeScalarField& a, const FeScalarField& b) {
    if (a.mesh != b.mesh || !a.mesh)
        throw std::invalid_argument("discrete_inner_h: fields must share a mesh");
    return Assembler(*a.mesh).inner_h(a, b);
}

double evaluate(const FeScalarField& f, const PointLocator::Location& loc) {
    const auto& t = f.mesh->triangle(loc.element);
    return loc.bary[0] * f[t[0]] + loc.bary[1] * f[t[1]] + loc.bary[2] * f[t[2]];
}

FeScalarField prolong(const FeScalarField& coarse, const PointLocator& coarse_locator,
                      const TriMesh& fine) {
    if (coarse.mesh != &coarse_locator.mesh())
        throw std::invalid_argument("prolong: locator built for a different mesh");
    FeScalarField out(fine);
    for (int j = 0; j < fine.num_vertices(); ++j) {
        const auto& p = fine.vertex(j);
        const auto loc = coarse_locator.locate(p[0], p[1]);
        if (!loc)
            throw std::runtime_error("prolong: target vertex (" + std::to_string(p[0]) + ", " +
                                     std::to_string(p[1]) + ") lies outside the source mesh");
        out[j] = evaluate(coarse, *loc);
    }
    return out;
}

FeVectorField prolong(const FeVectorField& coarse, const PointLocator& coarse_locator,
                      const TriMesh& fine) {
    if (coarse.mesh != &coarse_locator.mesh())
        throw std::invalid_argument("prolong: locator built for a different mesh");
    FeVectorField out(fine);
    for (int j = 0; j < fine.num_vertices(); ++j) {
        const auto& p = fine.vertex(j);
        const auto loc = coarse_locator.locate(p[0], p[1]);
        if (!loc)
            throw std::runtime_error("prolong: target vertex (" + std::to_string(p[0]) + ", " +
                                     std::to_string(p[1]) + ") lies outside the source mesh");
        const auto& t = coarse.mesh->triangle(loc->element);
        for (int c = 0; c < 2; ++c)
            out.comp(j, c) = loc->bary[0] * coarse.comp(t[0], c) +
                             loc->bary[1] * coarse.comp(t[1], c) +
                             loc->bary[2] * coarse.comp(t[2], c);
    }
    return out;
}

} // namespace haptofem
