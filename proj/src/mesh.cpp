#include "haptofem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace haptofem {

namespace {

double cross2(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return a[0] * b[1] - a[1] * b[0];
}

std::array<double, 2> sub(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return {a[0] - b[0], a[1] - b[1]};
}

double len(const std::array<double, 2>& a) {
    return std::sqrt(a[0] * a[0] + a[1] * a[1]);
}

long long edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<long long>(a) << 32) | static_cast<unsigned int>(b);
}

} // namespace

TriMesh::TriMesh(std::vector<std::array<double, 2>> vertices,
                 std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
    const int nv = num_vertices();
    const int nt = num_triangles();
    if (nv < 3 || nt < 1)
        throw std::invalid_argument("mesh needs at least 3 vertices and 1 triangle");

    std::vector<char> used(static_cast<size_t>(nv), 0);
    geometry_.resize(static_cast<size_t>(nt));
    total_area_ = 0.0;
    h_ = 0.0;
    nonobtuse_ = true;

    for (int e = 0; e < nt; ++e) {
        auto& t = triangles_[static_cast<size_t>(e)];
        for (int k = 0; k < 3; ++k) {
            if (t[static_cast<size_t>(k)] < 0 || t[static_cast<size_t>(k)] >= nv)
                throw std::invalid_argument("triangle " + std::to_string(e) +
                                            " references vertex " +
                                            std::to_string(t[static_cast<size_t>(k)]) +
                                            " out of range [0, " + std::to_string(nv - 1) + "]");
            used[static_cast<size_t>(t[static_cast<size_t>(k)])] = 1;
        }
        const auto& a = vertices_[static_cast<size_t>(t[0])];
        std::array<double, 2> b = vertices_[static_cast<size_t>(t[1])];
        std::array<double, 2> c = vertices_[static_cast<size_t>(t[2])];
        double twice_area = cross2(sub(b, a), sub(c, a));
        if (twice_area < 0.0) {
            std::swap(t[1], t[2]);  // normalize to counterclockwise
            std::swap(b, c);
            twice_area = -twice_area;
        }
        if (twice_area <= 0.0)
            throw std::invalid_argument("triangle " + std::to_string(e) + " has nonpositive area");

        auto& g = geometry_[static_cast<size_t>(e)];
        g.area = 0.5 * twice_area;
        total_area_ += g.area;
        // grad of the hat function at local vertex i: rotated opposite edge / (2A)
        const std::array<double, 2>* p[3] = {&a, &b, &c};
        for (int i = 0; i < 3; ++i) {
            const auto& pj = *p[(i + 1) % 3];
            const auto& pk = *p[(i + 2) % 3];
            g.grad[static_cast<size_t>(i)] = {(pj[1] - pk[1]) / twice_area,
                                              (pk[0] - pj[0]) / twice_area};
        }
        for (int i = 0; i < 3; ++i) {
            const auto e1 = sub(*p[(i + 1) % 3], *p[i]);
            const auto e2 = sub(*p[(i + 2) % 3], *p[i]);
            h_ = std::max(h_, len(e1));
            if (e1[0] * e2[0] + e1[1] * e2[1] < -1e-12 * len(e1) * len(e2)) nonobtuse_ = false;
        }
    }

    for (int j = 0; j < nv; ++j)
        if (!used[static_cast<size_t>(j)])
            throw std::invalid_argument("vertex " + std::to_string(j) +
                                        " is not referenced by any triangle");

    // Conformity: every undirected edge is used by at most two triangles, and
    // a shared edge is traversed once per direction (all triangles are CCW).
    struct EdgeUse {
        int count = 0;
        int balance = 0;
    };
    std::unordered_map<long long, EdgeUse> edges;
    edges.reserve(static_cast<size_t>(3 * nt));
    for (int e = 0; e < nt; ++e) {
        const auto& t = triangles_[static_cast<size_t>(e)];
        for (int k = 0; k < 3; ++k) {
            const int a = t[static_cast<size_t>(k)];
            const int b = t[static_cast<size_t>((k + 1) % 3)];
            auto& use = edges[edge_key(a, b)];
            use.count += 1;
            use.balance += (a < b) ? 1 : -1;
        }
    }
    double boundary_shoelace = 0.0;
    for (int e = 0; e < nt; ++e) {
        const auto& t = triangles_[static_cast<size_t>(e)];
        for (int k = 0; k < 3; ++k) {
            const int a = t[static_cast<size_t>(k)];
            const int b = t[static_cast<size_t>((k + 1) % 3)];
            const auto& use = edges.at(edge_key(a, b));
            if (use.count > 2)
                throw std::invalid_argument("nonconforming mesh: edge (" + std::to_string(a) +
                                            ", " + std::to_string(b) + ") used by " +
                                            std::to_string(use.count) + " triangles");
            if (use.count == 2 && use.balance != 0)
                throw std::invalid_argument("nonconforming mesh: edge (" + std::to_string(a) +
                                            ", " + std::to_string(b) +
                                            ") traversed twice in the same direction");
            if (use.count == 1)
                boundary_shoelace += 0.5 * cross2(vertices_[static_cast<size_t>(a)],
                                                  vertices_[static_cast<size_t>(b)]);
        }
    }
    if (std::abs(total_area_ - boundary_shoelace) > 1e-12 * total_area_)
        throw std::invalid_argument("triangle areas do not add up to the domain area (sum " +
                                    std::to_string(total_area_) + " vs boundary polygon " +
                                    std::to_string(boundary_shoelace) + ")");
}

const ElementGeometry& TriMesh::element_geometry(int e) const {
    if (e < 0 || e >= num_triangles())
        throw std::out_of_range("triangle index " + std::to_string(e) + " out of range [0, " +
                                std::to_string(num_triangles() - 1) + "]");
    return geometry_[static_cast<size_t>(e)];
}

TriMesh generate_unit_square_mesh(int n) {
    if (n < 1) throw std::invalid_argument("generate_unit_square_mesh: n must be >= 1");
    const int m = n + 1;
    std::vector<std::array<double, 2>> verts(static_cast<size_t>(m) * static_cast<size_t>(m));
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
            verts[static_cast<size_t>(j * m + i)] = {static_cast<double>(i) / n,
                                                     static_cast<double>(j) / n};
    std::vector<std::array<int, 3>> tris;
    tris.reserve(static_cast<size_t>(2) * n * n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int bl = j * m + i;
            const int br = bl + 1;
            const int tl = bl + m;
            const int tr = tl + 1;
            tris.push_back({bl, br, tr});  // below the bl-tr diagonal
            tris.push_back({bl, tr, tl});  // above it
        }
    }
    return TriMesh(std::move(verts), std::move(tris));
}

namespace {

[[noreturn]] void load_fail(const std::string& path, int line, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

} // namespace

TriMesh read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open mesh file '" + path + "'");

    int line_no = 0;
    std::string line;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    };

    if (!next_line()) load_fail(path, 1, "empty file, expected 'nv nt'");
    long nv = 0, nt = 0;
    {
        std::istringstream ss(line);
        std::string extra;
        if (!(ss >> nv >> nt) || (ss >> extra)) load_fail(path, line_no, "expected 'nv nt'");
        if (nv < 3 || nt < 1) load_fail(path, line_no, "mesh needs nv >= 3 and nt >= 1");
    }

    std::vector<std::array<double, 2>> verts(static_cast<size_t>(nv));
    for (long j = 0; j < nv; ++j) {
        if (!next_line()) load_fail(path, line_no + 1, "unexpected end of file in vertex list");
        std::istringstream ss(line);
        std::string extra;
        if (!(ss >> verts[static_cast<size_t>(j)][0] >> verts[static_cast<size_t>(j)][1]) ||
            (ss >> extra))
            load_fail(path, line_no, "expected vertex line 'x y'");
        if (!std::isfinite(verts[static_cast<size_t>(j)][0]) ||
            !std::isfinite(verts[static_cast<size_t>(j)][1]))
            load_fail(path, line_no, "non-finite vertex coordinate");
    }

    std::vector<std::array<int, 3>> tris(static_cast<size_t>(nt));
    for (long e = 0; e < nt; ++e) {
        if (!next_line()) load_fail(path, line_no + 1, "unexpected end of file in triangle list");
        std::istringstream ss(line);
        std::string extra;
        auto& t = tris[static_cast<size_t>(e)];
        if (!(ss >> t[0] >> t[1] >> t[2]) || (ss >> extra))
            load_fail(path, line_no, "expected triangle line 'i j k'");
        for (int k = 0; k < 3; ++k)
            if (t[static_cast<size_t>(k)] < 0 || t[static_cast<size_t>(k)] >= nv)
                load_fail(path, line_no,
                          "vertex index " + std::to_string(t[static_cast<size_t>(k)]) +
                              " out of range [0, " + std::to_string(nv - 1) + "]");
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
            load_fail(path, line_no, "zero-area triangle (repeated vertex index)");
        const auto& a = verts[static_cast<size_t>(t[0])];
        const auto& b = verts[static_cast<size_t>(t[1])];
        const auto& c = verts[static_cast<size_t>(t[2])];
        if (cross2(sub(b, a), sub(c, a)) == 0.0)
            load_fail(path, line_no, "zero-area triangle (collinear vertices)");
    }
    if (next_line()) load_fail(path, line_no, "trailing content after triangle list");

    try {
        return TriMesh(std::move(verts), std::move(tris));
    } catch (const std::invalid_argument& err) {
        throw std::runtime_error(path + ": " + err.what());
    }
}

void write_mesh(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    out << mesh.num_vertices() << " " << mesh.num_triangles() << "\n";
    char buf[80];
    for (int j = 0; j < mesh.num_vertices(); ++j) {
        const auto& v = mesh.vertex(j);
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v[0], v[1]);
        out << buf;
    }
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const auto& t = mesh.triangle(e);
        out << t[0] << " " << t[1] << " " << t[2] << "\n";
    }
    if (!out) throw std::runtime_error("write failure on '" + path + "'");
}

PointLocator::PointLocator(const TriMesh& mesh) : mesh_(&mesh) {
    double xmax = mesh.vertex(0)[0], ymax = mesh.vertex(0)[1];
    xmin_ = xmax;
    ymin_ = ymax;
    for (int j = 1; j < mesh.num_vertices(); ++j) {
        const auto& v = mesh.vertex(j);
        xmin_ = std::min(xmin_, v[0]);
        xmax = std::max(xmax, v[0]);
        ymin_ = std::min(ymin_, v[1]);
        ymax = std::max(ymax, v[1]);
    }
    const int target = std::clamp(
        static_cast<int>(std::sqrt(static_cast<double>(mesh.num_triangles()))), 1, 2048);
    nx_ = ny_ = target;
    cx_ = std::max((xmax - xmin_) / nx_, 1e-300);
    cy_ = std::max((ymax - ymin_) / ny_, 1e-300);
    bins_.resize(static_cast<size_t>(nx_) * static_cast<size_t>(ny_));
    for (int e = 0; e < mesh.num_triangles(); ++e) {
        const auto& t = mesh.triangle(e);
        double bx0 = 1e300, bx1 = -1e300, by0 = 1e300, by1 = -1e300;
        for (int k = 0; k < 3; ++k) {
            const auto& v = mesh.vertex(t[static_cast<size_t>(k)]);
            bx0 = std::min(bx0, v[0]);
            bx1 = std::max(bx1, v[0]);
            by0 = std::min(by0, v[1]);
            by1 = std::max(by1, v[1]);
        }
        const int ix0 = std::clamp(static_cast<int>((bx0 - xmin_) / cx_), 0, nx_ - 1);
        const int ix1 = std::clamp(static_cast<int>((bx1 - xmin_) / cx_), 0, nx_ - 1);
        const int iy0 = std::clamp(static_cast<int>((by0 - ymin_) / cy_), 0, ny_ - 1);
        const int iy1 = std::clamp(static_cast<int>((by1 - ymin_) / cy_), 0, ny_ - 1);
        for (int iy = iy0; iy <= iy1; ++iy)
            for (int ix = ix0; ix <= ix1; ++ix)
                bins_[static_cast<size_t>(iy) * nx_ + ix].push_back(e);
    }
}

std::optional<PointLocator::Location> PointLocator::try_bin(int bx, int by, double x,
                                                            double y) const {
    if (bx < 0 || bx >= nx_ || by < 0 || by >= ny_) return std::nullopt;
    for (int e : bins_[static_cast<size_t>(by) * nx_ + bx]) {
        const auto& t = mesh_->triangle(e);
        const auto& a = mesh_->vertex(t[0]);
        const auto& b = mesh_->vertex(t[1]);
        const auto& c = mesh_->vertex(t[2]);
        const double twice_area = 2.0 * mesh_->area(e);
        const double l1 = ((b[1] - c[1]) * (x - c[0]) + (c[0] - b[0]) * (y - c[1])) / twice_area;
        const double l2 = ((c[1] - a[1]) * (x - c[0]) + (a[0] - c[0]) * (y - c[1])) / twice_area;
        const double l3 = 1.0 - l1 - l2;
        if (l1 >= -1e-12 && l2 >= -1e-12 && l3 >= -1e-12)
            return Location{e, {l1, l2, l3}};
    }
    return std::nullopt;
}

std::optional<PointLocator::Location> PointLocator::locate(double x, double y) const {
    const int bx = std::clamp(static_cast<int>((x - xmin_) / cx_), 0, nx_ - 1);
    const int by = std::clamp(static_cast<int>((y - ymin_) / cy_), 0, ny_ - 1);
    if (auto loc = try_bin(bx, by, x, y)) return loc;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            if (auto loc = try_bin(bx + dx, by + dy, x, y)) return loc;
        }
    // last resort: best triangle by barycentric slack, for boundary roundoff
    int best = -1;
    double best_slack = -1e300;
    std::array<double, 3> best_bary{};
    for (int e = 0; e < mesh_->num_triangles(); ++e) {
        const auto& t = mesh_->triangle(e);
        const auto& a = mesh_->vertex(t[0]);
        const auto& b = mesh_->vertex(t[1]);
        const auto& c = mesh_->vertex(t[2]);
        const double twice_area = 2.0 * mesh_->area(e);
        const double l1 = ((b[1] - c[1]) * (x - c[0]) + (c[0] - b[0]) * (y - c[1])) / twice_area;
        const double l2 = ((c[1] - a[1]) * (x - c[0]) + (a[0] - c[0]) * (y - c[1])) / twice_area;
        const double l3 = 1.0 - l1 - l2;
        const double slack = std::min({l1, l2, l3});
        if (slack > best_slack) {
            best_slack = slack;
            best = e;
            best_bary = {l1, l2, l3};
        }
    }
    if (best >= 0 && best_slack >= -1e-9) return Location{best, best_bary};
    return std::nullopt;
}

} // namespace haptofem
