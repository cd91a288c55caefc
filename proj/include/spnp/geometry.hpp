#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "spnp/types.hpp"

namespace spnp {

/// Unit cell Y = [0,1]^2 with a disk-shaped solid inclusion, approximated by an
/// inscribed regular polygon.
struct UnitCellSpec {
    double inclusion_radius = 0.25;
    Vec2 inclusion_center{0.5, 0.5};
    int n_interface_segments = 64;
    double target_edge_length = 1.0 / 32.0;

    /// Throws ConfigError when the inclusion does not fit strictly inside Y or the
    /// polygon resolution is invalid.
    void validate() const;
    bool has_inclusion() const { return inclusion_radius > 0.0; }
};

enum class Face : std::uint8_t { left, right, bottom, top };

struct BoundaryEdge {
    std::array<int, 2> v;
    Face face;
};

/// Triangulated unit cell with phase markers, interface facets and periodic pairing.
struct TemplateCell {
    UnitCellSpec spec;
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;  // counter-clockwise
    std::vector<Phase> phases;
    std::vector<std::array<int, 2>> interface_edges;
    std::vector<BoundaryEdge> boundary_edges;
    // Face vertex lists sorted along the face; left[i] pairs with right[i],
    // bottom[i] with top[i].
    std::vector<int> left, right, bottom, top;

    double triangle_area(int t) const;
    double fluid_area() const;
    double solid_area() const;
    double interface_length() const;
    double min_angle_degrees() const;
    double max_edge_length() const;

    /// Periodic class of every vertex: paired face vertices (and the four corners)
    /// share a class. Classes are numbered 0..count-1 in first-appearance order.
    std::vector<int> periodic_classes(int* count = nullptr) const;
};

/// Builds the conforming template triangulation. Centered inclusions whose polygon
/// has a multiple of 8 sides are meshed on one eighth of the cell and mirrored, so
/// the mesh carries the full symmetry group of the square.
TemplateCell build_template_cell(const UnitCellSpec& spec);

/// Uniform red refinement: every triangle split into four. The polygonal interface
/// geometry is unchanged; its facets are halved.
TemplateCell refine_uniform(const TemplateCell& cell);

enum class ExteriorClass : std::uint8_t { fext, sext };

struct ExteriorEdge {
    std::array<int, 2> v;
    ExteriorClass cls;
};

/// Bucketed point location inside the template cell.
class CellLocator {
public:
    explicit CellLocator(const TemplateCell& cell, int buckets_per_side = 0);
    /// All template triangles containing s (tolerance 1e-12 in barycentric terms),
    /// ascending.
    std::vector<int> containing(const Vec2& s) const;

private:
    const TemplateCell* cell_;
    int nb_;
    std::vector<std::vector<int>> buckets_;
};

/// Perforated macro domain Omega = (0,1)^2 tiled by n x n scaled copies of the
/// template (epsilon = 1/n). Triangles are ordered cell-major: cell (i,j) has id
/// j*n+i and owns triangles [id*T, (id+1)*T).
class PerforatedMesh {
public:
    int n = 1;
    double epsilon = 1.0;
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<Phase> phases;
    std::vector<int> cell_index;
    std::vector<std::array<int, 2>> interface_edges;
    std::vector<ExteriorEdge> exterior_edges;

    const TemplateCell& cell() const { return *cell_; }
    double triangle_area(int t) const;
    double fluid_area() const;
    double solid_area() const;
    double interface_length() const;

    /// Phase of the triangle containing x; ties on shared edges resolve to the
    /// lowest global triangle index. Throws DomainError outside the closed square.
    Phase locate_phase(const Vec2& x) const;
    /// Global index of the containing triangle (same tie-break).
    int locate_triangle(const Vec2& x) const;

private:
    friend PerforatedMesh tile_domain(const TemplateCell& cell, int n);
    std::shared_ptr<const TemplateCell> cell_;
    std::shared_ptr<const CellLocator> locator_;
};

PerforatedMesh tile_domain(const TemplateCell& cell, int n);

/// Plain-text dump: `v x y`, `t i j k phase`, `ei i j`, `eb i j class`.
void write_mesh(std::ostream& os, const PerforatedMesh& mesh);
void write_mesh(std::ostream& os, const TemplateCell& cell);

/// Exact area and perimeter of the inscribed regular polygon.
double regular_polygon_area(double radius, int sides);
double regular_polygon_perimeter(double radius, int sides);

}  // namespace spnp
