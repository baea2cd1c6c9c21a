#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace haptofem {

/// Per-triangle P1 geometry cache: area and the constant gradients of the
/// three barycentric hat functions, in local vertex order. The gradients of
/// any triangle sum to the zero vector.
struct ElementGeometry {
    double area = 0.0;
    std::array<std::array<double, 2>, 3> grad{};
};

/// Immutable conforming 2D triangulation. Construction normalizes the
/// orientation of every triangle to counterclockwise, validates the
/// connectivity (index ranges, conformity, consistent total area) and
/// computes the per-element caches used by P1 assembly.
class TriMesh {
public:
    TriMesh(std::vector<std::array<double, 2>> vertices,
            std::vector<std::array<int, 3>> triangles);

    int num_vertices() const { return static_cast<int>(vertices_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }

    const std::array<double, 2>& vertex(int j) const { return vertices_[static_cast<size_t>(j)]; }
    const std::array<int, 3>& triangle(int e) const { return triangles_[static_cast<size_t>(e)]; }
    const std::vector<std::array<double, 2>>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }

    double area(int e) const { return geometry_[static_cast<size_t>(e)].area; }
    /// Range-checked access to the cached element geometry.
    const ElementGeometry& element_geometry(int e) const;

    /// Max triangle diameter (longest edge over all triangles).
    double mesh_size() const { return h_; }
    double total_area() const { return total_area_; }
    /// True if every interior angle is <= 90 degrees (within 1e-12 slack).
    /// On nonobtuse meshes the P1 stiffness matrix has nonpositive
    /// off-diagonal entries, which the discrete positivity results need.
    bool nonobtuse() const { return nonobtuse_; }

private:
    std::vector<std::array<double, 2>> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<ElementGeometry> geometry_;
    double h_ = 0.0;
    double total_area_ = 0.0;
    bool nonobtuse_ = false;
};

/// Uniform mesh of [0,1]^2: (n+1)^2 grid vertices, each cell split along the
/// same diagonal into two right triangles (2n^2 total, all nonobtuse,
/// h = sqrt(2)/n). Using one diagonal direction everywhere makes the mesh for
/// 2n nest into the mesh for n, so P1 prolongation between levels is exact.
TriMesh generate_unit_square_mesh(int n);

/// Plain-text mesh format: first line "nv nt", then nv lines "x y", then nt
/// lines "i j k" (0-based vertex indices). Clockwise triangles are accepted
/// and reoriented. Errors name the offending line.
TriMesh read_mesh(const std::string& path);
void write_mesh(const TriMesh& mesh, const std::string& path);

/// Point-in-triangle queries against a fixed mesh, backed by a uniform
/// background grid of candidate lists.
class PointLocator {
public:
    struct Location {
        int element = -1;
        std::array<double, 3> bary{};
    };

    explicit PointLocator(const TriMesh& mesh);

    /// Barycentric location of (x, y); nullopt if the point lies outside the
    /// mesh beyond a 1e-9 barycentric tolerance.
    std::optional<Location> locate(double x, double y) const;

    const TriMesh& mesh() const { return *mesh_; }

private:
    const TriMesh* mesh_;
    double xmin_ = 0.0, ymin_ = 0.0;
    double cx_ = 1.0, cy_ = 1.0;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> bins_;

    std::optional<Location> try_bin(int bx, int by, double x, double y) const;
};

} // namespace haptofem
