#include "spnp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "spnp/delaunay.hpp"

namespace spnp {

namespace {

constexpr double kMinTriangleArea = 1e-14;
constexpr double kMinAngleDegrees = 15.0;

std::string where(const Vec2& p) {
    std::ostringstream os;
    os.precision(6);
    os << "(" << p[0] << ", " << p[1] << ")";
    return os.str();
}

double seg_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double l2 = dot(ab, ab);
    double t = l2 > 0 ? dot(p - a, ab) / l2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

bool inside_convex(const std::vector<Vec2>& poly, const Vec2& p) {
    const std::size_t m = poly.size();
    for (std::size_t k = 0; k < m; ++k)
        if (cross(poly[(k + 1) % m] - poly[k], p - poly[k]) <= 0.0) return false;
    return true;
}

/// Point set + constraints for one convex meshing region.
struct RegionInput {
    std::vector<Vec2> fixed;                     // boundary and interface vertices
    std::vector<std::array<int, 2>> constraints;  // edges that must be recovered
    std::vector<Vec2> movable;                   // interior points
    // Interior points must keep this clearance from every constraint edge.
    std::function<bool(const Vec2&)> admissible;
    std::string label;
};

struct RegionMesh {
    std::vector<Vec2> points;
    std::vector<std::array<int, 3>> triangles;
};

std::set<std::pair<int, int>> edge_set(const std::vector<std::array<int, 3>>& tris) {
    std::set<std::pair<int, int>> es;
    for (const auto& t : tris)
        for (int e = 0; e < 3; ++e) {
            int a = t[e], b = t[(e + 1) % 3];
            es.insert({std::min(a, b), std::max(a, b)});
        }
    return es;
}

RegionMesh mesh_region(RegionInput in, int smoothing_sweeps) {
    const int nfixed = static_cast<int>(in.fixed.size());
    std::vector<Vec2> pts = in.fixed;
    pts.insert(pts.end(), in.movable.begin(), in.movable.end());

    auto tris = detail::delaunay_triangulate(pts);
    for (int sweep = 0; sweep < smoothing_sweeps; ++sweep) {
        std::vector<Vec2> acc(pts.size(), Vec2{0.0, 0.0});
        std::vector<int> cnt(pts.size(), 0);
        for (const auto& [a, b] : edge_set(tris)) {
            acc[a] = acc[a] + pts[b];
            acc[b] = acc[b] + pts[a];
            ++cnt[a];
            ++cnt[b];
        }
        bool moved = false;
        for (std::size_t i = nfixed; i < pts.size(); ++i) {
            if (cnt[i] == 0) continue;
            const Vec2 target = (1.0 / cnt[i]) * acc[i];
            if (in.admissible(target)) {
                pts[i] = target;
                moved = true;
            }
        }
        if (!moved) break;
        tris = detail::delaunay_triangulate(pts);
    }

    const auto es = edge_set(tris);
    for (const auto& c : in.constraints) {
        if (!es.count({std::min(c[0], c[1]), std::max(c[0], c[1])}))
            throw MeshError("meshing failure in " + in.label + ": constraint facet near " +
                            where(0.5 * (pts[c[0]] + pts[c[1]])) + " not recovered");
    }
    return {std::move(pts), std::move(tris)};
}

/// Points of a hexagonal lattice covering [lo, hi]^2.
std::vector<Vec2> hex_lattice(double h, Vec2 lo, Vec2 hi, Vec2 origin) {
    std::vector<Vec2> out;
    const double dy = h * std::sqrt(3.0) / 2.0;
    const int j0 = static_cast<int>(std::floor((lo[1] - origin[1]) / dy)) - 1;
    const int j1 = static_cast<int>(std::ceil((hi[1] - origin[1]) / dy)) + 1;
    for (int j = j0; j <= j1; ++j) {
        const double y = origin[1] + j * dy;
        const double shift = (j & 1) ? 0.5 * h : 0.0;
        const int i0 = static_cast<int>(std::floor((lo[0] - origin[0] - shift) / h)) - 1;
        const int i1 = static_cast<int>(std::ceil((hi[0] - origin[0] - shift) / h)) + 1;
        for (int i = i0; i <= i1; ++i) {
            const double x = origin[0] + shift + i * h;
            if (x >= lo[0] && x <= hi[0] && y >= lo[1] && y <= hi[1]) out.push_back({x, y});
        }
    }
    return out;
}

/// Appends the subdivision of segment [a, b] (excluding a, including b) to `pts`
/// and the matching chain of constraints.
void add_segment(RegionInput& in, int ia, const Vec2& b, int pieces, int* ib_out) {
    const Vec2 a = in.fixed[ia];
    int prev = ia;
    for (int k = 1; k <= pieces; ++k) {
        Vec2 q = (k == pieces) ? b : a + (static_cast<double>(k) / pieces) * (b - a);
        in.fixed.push_back(q);
        const int cur = static_cast<int>(in.fixed.size()) - 1;
        in.constraints.push_back({prev, cur});
        prev = cur;
    }
    *ib_out = prev;
}

int pieces_for(double length, double h) {
    return std::max(1, static_cast<int>(std::ceil(length / h - 1e-9)));
}

struct Polygon {
    Vec2 center;
    double r;
    int n;
    std::vector<Vec2> verts;  // absolute / relative depending on caller
};

std::vector<Vec2> polygon_vertices(const Vec2& c, double r, int n) {
    std::vector<Vec2> v(n);
    for (int k = 0; k < n; ++k) {
        const double a = kTwoPi * k / n;
        v[k] = {c[0] + r * std::cos(a), c[1] + r * std::sin(a)};
    }
    return v;
}

/// Common post-processing: triangles, phases, interface edges from a raw mesh in
/// absolute coordinates.
void finalize_cell(TemplateCell& cell, const std::vector<Vec2>& poly) {
    const auto& V = cell.vertices;
    cell.phases.resize(cell.triangles.size());
    for (std::size_t t = 0; t < cell.triangles.size(); ++t) {
        auto& tri = cell.triangles[t];
        const Vec2 &a = V[tri[0]], &b = V[tri[1]], &c = V[tri[2]];
        double area2 = cross(b - a, c - a);
        if (area2 < 0) {
            std::swap(tri[1], tri[2]);
            area2 = -area2;
        }
        const Vec2 g = (1.0 / 3.0) * (a + b + c);
        if (0.5 * area2 < kMinTriangleArea)
            throw MeshError("meshing failure: degenerate triangle near " + where(g) + " (" +
                            (poly.empty() || !inside_convex(poly, g) ? "fluid" : "solid") +
                            " region)");
        cell.phases[t] = (!poly.empty() && inside_convex(poly, g)) ? Phase::solid : Phase::fluid;
    }

    // interface edges: edges shared by one fluid and one solid triangle
    std::map<std::pair<int, int>, std::vector<int>> e2t;
    for (std::size_t t = 0; t < cell.triangles.size(); ++t)
        for (int e = 0; e < 3; ++e) {
            int a = cell.triangles[t][e], b = cell.triangles[t][(e + 1) % 3];
            e2t[{std::min(a, b), std::max(a, b)}].push_back(static_cast<int>(t));
        }
    cell.interface_edges.clear();
    cell.boundary_edges.clear();
    for (const auto& [e, ts] : e2t) {
        if (ts.size() == 2 && cell.phases[ts[0]] != cell.phases[ts[1]]) {
            cell.interface_edges.push_back({e.first, e.second});
        } else if (ts.size() == 1) {
            const Vec2 &p = V[e.first], &q = V[e.second];
            Face f;
            if (p[0] == 0.0 && q[0] == 0.0) f = Face::left;
            else if (p[0] == 1.0 && q[0] == 1.0) f = Face::right;
            else if (p[1] == 0.0 && q[1] == 0.0) f = Face::bottom;
            else if (p[1] == 1.0 && q[1] == 1.0) f = Face::top;
            else throw MeshError("meshing failure: open edge inside the cell near " + where(0.5 * (p + q)));
            cell.boundary_edges.push_back({{e.first, e.second}, f});
        } else if (ts.size() > 2) {
            throw MeshError("meshing failure: non-manifold edge near " + where(0.5 * (V[e.first] + V[e.second])));
        }
    }

    auto collect = [&](auto pred, int axis) {
        std::vector<int> ids;
        for (int i = 0; i < static_cast<int>(V.size()); ++i)
            if (pred(V[i])) ids.push_back(i);
        std::sort(ids.begin(), ids.end(), [&](int a, int b) { return V[a][axis] < V[b][axis]; });
        return ids;
    };
    cell.left = collect([](const Vec2& p) { return p[0] == 0.0; }, 1);
    cell.right = collect([](const Vec2& p) { return p[0] == 1.0; }, 1);
    cell.bottom = collect([](const Vec2& p) { return p[1] == 0.0; }, 0);
    cell.top = collect([](const Vec2& p) { return p[1] == 1.0; }, 0);
    auto check_pairing = [&](const std::vector<int>& a, const std::vector<int>& b, int axis, const char* name) {
        if (a.size() != b.size()) throw MeshError(std::string("periodic pairing violated on ") + name + " faces");
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::abs(V[a[i]][axis] - V[b[i]][axis]) > 1e-14)
                throw MeshError(std::string("periodic pairing violated on ") + name + " faces near " + where(V[a[i]]));
    };
    check_pairing(cell.left, cell.right, 1, "left/right");
    check_pairing(cell.bottom, cell.top, 0, "bottom/top");

    const double min_angle = cell.min_angle_degrees();
    if (min_angle < kMinAngleDegrees)
        throw MeshError("meshing failure: minimum angle " + std::to_string(min_angle) +
                        " deg below quality bound");
}

/// Symmetric construction: mesh the wedge 0 <= v <= u <= 1/2 (coordinates relative
/// to the cell center) and mirror it eight times.
TemplateCell build_symmetric(const UnitCellSpec& spec) {
    const double r = spec.inclusion_radius;
    const int n = spec.n_interface_segments;
    const double h = spec.target_edge_length;
    const double diag = std::sqrt(0.5);

    RegionInput in;
    in.label = "cell wedge";
    std::vector<int> poly_ids;  // arc vertices k = 0..n/8 in wedge-point indices
    in.fixed.push_back({0.0, 0.0});
    int cur = 0;
    if (r > 0) {
        // ray theta = 0: center -> polygon vertex -> cell face
        add_segment(in, 0, {r, 0.0}, pieces_for(r, h), &cur);
        poly_ids.push_back(cur);
        add_segment(in, cur, {0.5, 0.0}, pieces_for(0.5 - r, h), &cur);
    } else {
        add_segment(in, 0, {0.5, 0.0}, pieces_for(0.5, h), &cur);
    }
    add_segment(in, cur, {0.5, 0.5}, pieces_for(0.5, h), &cur);
    if (r > 0) {
        const double t = r * diag;
        add_segment(in, cur, {t, t}, pieces_for(std::sqrt(2.0) * (0.5 - t), h), &cur);
        const int diag_poly = cur;
        add_segment(in, cur, {0.0, 0.0}, pieces_for(r, h), &cur);
        // the last point duplicates the center; drop it and close on index 0
        in.fixed.pop_back();
        in.constraints.back()[1] = 0;
        // arc vertices strictly between the two mirror lines
        int prev = poly_ids[0];
        for (int k = 1; k < n / 8; ++k) {
            const double a = kTwoPi * k / n;
            in.fixed.push_back({r * std::cos(a), r * std::sin(a)});
            const int id = static_cast<int>(in.fixed.size()) - 1;
            in.constraints.push_back({prev, id});
            poly_ids.push_back(id);
            prev = id;
        }
        in.constraints.push_back({prev, diag_poly});
        poly_ids.push_back(diag_poly);
    } else {
        add_segment(in, cur, {0.0, 0.0}, pieces_for(std::sqrt(0.5), h), &cur);
        in.fixed.pop_back();
        in.constraints.back()[1] = 0;
    }

    const double arc_len = r > 0 ? 2.0 * r * std::sin(kPi / n) : 0.0;
    const double clear_bnd = 0.6 * h;
    const double clear_arc = 0.6 * std::max(h, arc_len);
    std::vector<Vec2> arc_pts;
    for (int id : poly_ids) arc_pts.push_back(in.fixed[id]);
    in.admissible = [=](const Vec2& p) {
        const double u = p[0], v = p[1];
        if (!(v > 0.0 && v < u && u < 0.5)) return false;
        // distance to the three wedge sides
        if (v < clear_bnd || 0.5 - u < clear_bnd || (u - v) * diag < clear_bnd) return false;
        for (std::size_t k = 0; k + 1 < arc_pts.size(); ++k)
            if (seg_distance(p, arc_pts[k], arc_pts[k + 1]) < clear_arc) return false;
        return true;
    };
    for (const auto& p : hex_lattice(h, {0.0, 0.0}, {0.5, 0.5}, {0.5 * h, 0.3 * h}))
        if (in.admissible(p)) in.movable.push_back(p);

    RegionMesh wedge = mesh_region(std::move(in), 12);

    // mirror eight times and weld on exact relative coordinates
    TemplateCell cell;
    cell.spec = spec;
    std::map<std::pair<double, double>, int> weld;
    auto key = [](double a, double b) { return std::make_pair(a + 0.0, b + 0.0); };
    const std::array<std::array<int, 4>, 8> maps = {{
        {0, 1, 1, 1}, {1, 0, 1, 1}, {1, 0, -1, 1}, {0, 1, -1, 1},
        {0, 1, -1, -1}, {1, 0, -1, -1}, {1, 0, 1, -1}, {0, 1, 1, -1},
    }};  // (source index for first coord, for second, sign first, sign second)
    std::vector<Vec2> rel;
    for (const auto& m : maps) {
        std::vector<int> local(wedge.points.size());
        for (std::size_t i = 0; i < wedge.points.size(); ++i) {
            const Vec2& p = wedge.points[i];
            const double a = m[2] * p[m[0]], b = m[3] * p[m[1]];
            auto k = key(a, b);
            auto it = weld.find(k);
            if (it == weld.end()) {
                it = weld.emplace(k, static_cast<int>(rel.size())).first;
                rel.push_back({k.first, k.second});
            }
            local[i] = it->second;
        }
        for (const auto& t : wedge.triangles) cell.triangles.push_back({local[t[0]], local[t[1]], local[t[2]]});
    }
    cell.vertices.resize(rel.size());
    for (std::size_t i = 0; i < rel.size(); ++i) {
        const double x = rel[i][0] == -0.5 ? 0.0 : rel[i][0] == 0.5 ? 1.0 : 0.5 + rel[i][0];
        const double y = rel[i][1] == -0.5 ? 0.0 : rel[i][1] == 0.5 ? 1.0 : 0.5 + rel[i][1];
        cell.vertices[i] = {x, y};
    }

    std::vector<Vec2> poly;
    if (r > 0) {
        // polygon in absolute coordinates, assembled from the mirrored arc so that
        // the phase test sees exactly the meshed vertices
        poly = polygon_vertices(spec.inclusion_center, r, n);
    }
    finalize_cell(cell, poly);
    return cell;
}

/// General construction over the whole cell (off-center inclusions or polygons
/// without the eightfold symmetry).
TemplateCell build_full(const UnitCellSpec& spec) {
    const double r = spec.inclusion_radius;
    const int n = spec.n_interface_segments;
    const double h = spec.target_edge_length;
    const Vec2 c = spec.inclusion_center;

    RegionInput in;
    in.label = "cell";
    in.fixed.push_back({0.0, 0.0});
    int cur = 0;
    const int m = pieces_for(1.0, h);
    add_segment(in, 0, {1.0, 0.0}, m, &cur);
    add_segment(in, cur, {1.0, 1.0}, m, &cur);
    add_segment(in, cur, {0.0, 1.0}, m, &cur);
    add_segment(in, cur, {0.0, 0.0}, m, &cur);
    in.fixed.pop_back();
    in.constraints.back()[1] = 0;
    // snap the face points exactly onto the faces
    for (auto& p : in.fixed) {
        for (auto& x : p) {
            if (std::abs(x) < 1e-15) x = 0.0;
            if (std::abs(x - 1.0) < 1e-15) x = 1.0;
        }
    }

    std::vector<Vec2> poly;
    if (r > 0) {
        poly = polygon_vertices(c, r, n);
        const int base = static_cast<int>(in.fixed.size());
        for (int k = 0; k < n; ++k) {
            in.fixed.push_back(poly[k]);
            in.constraints.push_back({base + k, base + (k + 1) % n});
        }
    }
    const double arc_len = r > 0 ? 2.0 * r * std::sin(kPi / n) : 0.0;
    const double clear_bnd = 0.6 * h;
    const double clear_arc = 0.6 * std::max(h, arc_len);
    in.admissible = [=](const Vec2& p) {
        if (p[0] < clear_bnd || p[1] < clear_bnd || 1.0 - p[0] < clear_bnd || 1.0 - p[1] < clear_bnd)
            return false;
        for (std::size_t k = 0; k < poly.size(); ++k)
            if (seg_distance(p, poly[k], poly[(k + 1) % poly.size()]) < clear_arc) return false;
        return true;
    };
    for (const auto& p : hex_lattice(h, {0.0, 0.0}, {1.0, 1.0}, {0.5 * h, 0.3 * h}))
        if (in.admissible(p)) in.movable.push_back(p);

    RegionMesh mesh = mesh_region(std::move(in), 12);
    TemplateCell cell;
    cell.spec = spec;
    cell.vertices = std::move(mesh.points);
    cell.triangles = std::move(mesh.triangles);
    finalize_cell(cell, poly);
    return cell;
}

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) { return 0.5 * cross(b - a, c - a); }

}  // namespace

// ---------------------------------------------------------------------------

void UnitCellSpec::validate() const {
    const double r = inclusion_radius;
    if (!(r >= 0.0 && r < 0.5)) throw ConfigError("inclusion_radius must lie in [0, 0.5)");
    if (!(target_edge_length > 0.0 && target_edge_length <= 0.5))
        throw ConfigError("target_edge_length must lie in (0, 0.5]");
    if (n_interface_segments < 16 || n_interface_segments % 2 != 0)
        throw ConfigError("n_interface_segments must be an even integer >= 16");
    if (r > 0) {
        const Vec2 c = inclusion_center;
        const double dmin = std::min({c[0], c[1], 1.0 - c[0], 1.0 - c[1]});
        if (!(r + target_edge_length < dmin))
            throw ConfigError("inclusion must lie strictly inside the cell: radius + edge length >= distance to the cell faces");
    }
}

double TemplateCell::triangle_area(int t) const {
    const auto& tri = triangles[t];
    return tri_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double TemplateCell::fluid_area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        if (phases[t] == Phase::fluid) s += triangle_area(static_cast<int>(t));
    return s;
}

double TemplateCell::solid_area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        if (phases[t] == Phase::solid) s += triangle_area(static_cast<int>(t));
    return s;
}

double TemplateCell::interface_length() const {
    double s = 0.0;
    for (const auto& e : interface_edges) s += norm(vertices[e[1]] - vertices[e[0]]);
    return s;
}

double TemplateCell::min_angle_degrees() const {
    double amin = 180.0;
    for (const auto& t : triangles) {
        for (int k = 0; k < 3; ++k) {
            const Vec2 a = vertices[t[k]], b = vertices[t[(k + 1) % 3]], c = vertices[t[(k + 2) % 3]];
            const Vec2 u = b - a, v = c - a;
            const double ang = std::atan2(std::abs(cross(u, v)), dot(u, v)) * 180.0 / kPi;
            amin = std::min(amin, ang);
        }
    }
    return amin;
}

double TemplateCell::max_edge_length() const {
    double l = 0.0;
    for (const auto& t : triangles)
        for (int k = 0; k < 3; ++k) l = std::max(l, norm(vertices[t[k]] - vertices[t[(k + 1) % 3]]));
    return l;
}

std::vector<int> TemplateCell::periodic_classes(int* count) const {
    std::vector<int> parent(vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
    auto unite = [&](int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };
    for (std::size_t i = 0; i < left.size(); ++i) unite(left[i], right[i]);
    for (std::size_t i = 0; i < bottom.size(); ++i) unite(bottom[i], top[i]);
    std::vector<int> cls(vertices.size(), -1);
    std::map<int, int> number;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const int root = find(static_cast<int>(i));
        auto it = number.find(root);
        if (it == number.end()) it = number.emplace(root, static_cast<int>(number.size())).first;
        cls[i] = it->second;
    }
    if (count) *count = static_cast<int>(number.size());
    return cls;
}

TemplateCell build_template_cell(const UnitCellSpec& spec) {
    spec.validate();
    const bool centered = spec.inclusion_center[0] == 0.5 && spec.inclusion_center[1] == 0.5;
    if (centered && spec.n_interface_segments % 8 == 0) return build_symmetric(spec);
    return build_full(spec);
}

TemplateCell refine_uniform(const TemplateCell& cell) {
    TemplateCell out;
    out.spec = cell.spec;
    out.spec.target_edge_length = 0.5 * cell.spec.target_edge_length;
    out.vertices = cell.vertices;
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
        const auto k = std::make_pair(std::min(a, b), std::max(a, b));
        auto it = mid.find(k);
        if (it != mid.end()) return it->second;
        const Vec2 &p = cell.vertices[k.first], &q = cell.vertices[k.second];
        Vec2 m = 0.5 * (p + q);
        // keep face points exactly on the faces
        for (int d = 0; d < 2; ++d)
            if (p[d] == q[d]) m[d] = p[d];
        out.vertices.push_back(m);
        const int id = static_cast<int>(out.vertices.size()) - 1;
        mid.emplace(k, id);
        return id;
    };
    for (std::size_t t = 0; t < cell.triangles.size(); ++t) {
        const auto [a, b, c] = cell.triangles[t];
        const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
        const Phase ph = cell.phases[t];
        for (const std::array<int, 3> child : {std::array<int, 3>{a, ab, ca}, std::array<int, 3>{ab, b, bc},
                                               std::array<int, 3>{ca, bc, c}, std::array<int, 3>{ab, bc, ca}}) {
            out.triangles.push_back(child);
            out.phases.push_back(ph);
        }
    }
    for (const auto& e : cell.interface_edges) {
        const int m = midpoint(e[0], e[1]);
        out.interface_edges.push_back({std::min(e[0], m), std::max(e[0], m)});
        out.interface_edges.push_back({std::min(m, e[1]), std::max(m, e[1])});
    }
    for (const auto& e : cell.boundary_edges) {
        const int m = midpoint(e.v[0], e.v[1]);
        out.boundary_edges.push_back({{e.v[0], m}, e.face});
        out.boundary_edges.push_back({{m, e.v[1]}, e.face});
    }
    const auto& V = out.vertices;
    auto collect = [&](auto pred, int axis) {
        std::vector<int> ids;
        for (int i = 0; i < static_cast<int>(V.size()); ++i)
            if (pred(V[i])) ids.push_back(i);
        std::sort(ids.begin(), ids.end(), [&](int x, int y) { return V[x][axis] < V[y][axis]; });
        return ids;
    };
    out.left = collect([](const Vec2& p) { return p[0] == 0.0; }, 1);
    out.right = collect([](const Vec2& p) { return p[0] == 1.0; }, 1);
    out.bottom = collect([](const Vec2& p) { return p[1] == 0.0; }, 0);
    out.top = collect([](const Vec2& p) { return p[1] == 1.0; }, 0);
    if (out.left.size() != out.right.size() || out.bottom.size() != out.top.size())
        throw MeshError("periodic pairing violated after refinement");
    return out;
}

double regular_polygon_area(double radius, int sides) {
    return 0.5 * sides * radius * radius * std::sin(kTwoPi / sides);
}

double regular_polygon_perimeter(double radius, int sides) {
    return sides * 2.0 * radius * std::sin(kPi / sides);
}

// ---------------------------------------------------------------------------

CellLocator::CellLocator(const TemplateCell& cell, int buckets_per_side) : cell_(&cell) {
    nb_ = buckets_per_side > 0
              ? buckets_per_side
              : std::max(1, static_cast<int>(std::sqrt(static_cast<double>(cell.triangles.size()) / 2.0)));
    buckets_.assign(static_cast<std::size_t>(nb_) * nb_, {});
    for (int t = 0; t < static_cast<int>(cell.triangles.size()); ++t) {
        double x0 = 1, x1 = 0, y0 = 1, y1 = 0;
        for (int v : cell.triangles[t]) {
            x0 = std::min(x0, cell.vertices[v][0]);
            x1 = std::max(x1, cell.vertices[v][0]);
            y0 = std::min(y0, cell.vertices[v][1]);
            y1 = std::max(y1, cell.vertices[v][1]);
        }
        const int i0 = std::clamp(static_cast<int>(std::floor((x0 - 1e-12) * nb_)), 0, nb_ - 1);
        const int i1 = std::clamp(static_cast<int>(std::floor((x1 + 1e-12) * nb_)), 0, nb_ - 1);
        const int j0 = std::clamp(static_cast<int>(std::floor((y0 - 1e-12) * nb_)), 0, nb_ - 1);
        const int j1 = std::clamp(static_cast<int>(std::floor((y1 + 1e-12) * nb_)), 0, nb_ - 1);
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nb_ + i].push_back(t);
    }
}

std::vector<int> CellLocator::containing(const Vec2& s) const {
    std::vector<int> out;
    const int i = std::clamp(static_cast<int>(std::floor(s[0] * nb_)), 0, nb_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor(s[1] * nb_)), 0, nb_ - 1);
    for (int t : buckets_[static_cast<std::size_t>(j) * nb_ + i]) {
        const auto& tri = cell_->triangles[t];
        const Vec2 &a = cell_->vertices[tri[0]], &b = cell_->vertices[tri[1]], &c = cell_->vertices[tri[2]];
        const double area2 = cross(b - a, c - a);
        const double l0 = cross(b - s, c - s) / area2;
        const double l1 = cross(c - s, a - s) / area2;
        const double l2 = 1.0 - l0 - l1;
        constexpr double tol = -1e-12;
        if (l0 >= tol && l1 >= tol && l2 >= tol) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------

PerforatedMesh tile_domain(const TemplateCell& cell, int n) {
    if (n < 1) throw ConfigError("tile_domain: n must be >= 1");
    PerforatedMesh mesh;
    mesh.n = n;
    mesh.epsilon = 1.0 / n;
    mesh.cell_ = std::make_shared<const TemplateCell>(cell);
    mesh.locator_ = std::make_shared<const CellLocator>(*mesh.cell_);
    const TemplateCell& tc = *mesh.cell_;
    const int nv = static_cast<int>(tc.vertices.size());
    const int nt = static_cast<int>(tc.triangles.size());

    std::vector<int> left_partner(nv, -1), bottom_partner(nv, -1);
    for (std::size_t i = 0; i < tc.left.size(); ++i) left_partner[tc.left[i]] = tc.right[i];
    for (std::size_t i = 0; i < tc.bottom.size(); ++i) bottom_partner[tc.bottom[i]] = tc.top[i];

    std::vector<std::vector<int>> gid(static_cast<std::size_t>(n) * n, std::vector<int>(nv, -1));
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            auto& map = gid[static_cast<std::size_t>(j) * n + i];
            for (int v = 0; v < nv; ++v) {
                const Vec2 x{(i + tc.vertices[v][0]) / n, (j + tc.vertices[v][1]) / n};
                int id = -1;
                if (i > 0 && left_partner[v] >= 0) {
                    id = gid[static_cast<std::size_t>(j) * n + i - 1][left_partner[v]];
                } else if (j > 0 && bottom_partner[v] >= 0) {
                    id = gid[static_cast<std::size_t>(j - 1) * n + i][bottom_partner[v]];
                }
                if (id >= 0) {
                    if (norm(mesh.vertices[id] - x) > 1e-12)
                        throw MeshError("vertex stitching mismatch at " + where(x));
                } else {
                    mesh.vertices.push_back(x);
                    id = static_cast<int>(mesh.vertices.size()) - 1;
                }
                map[v] = id;
            }
        }
    }

    // template edge -> owning triangle phase (boundary edges have one triangle)
    std::map<std::pair<int, int>, Phase> edge_phase;
    for (int t = 0; t < nt; ++t)
        for (int e = 0; e < 3; ++e) {
            int a = tc.triangles[t][e], b = tc.triangles[t][(e + 1) % 3];
            edge_phase[{std::min(a, b), std::max(a, b)}] = tc.phases[t];
        }

    mesh.triangles.reserve(static_cast<std::size_t>(n) * n * nt);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
            const int cid = j * n + i;
            const auto& map = gid[cid];
            for (int t = 0; t < nt; ++t) {
                const auto& tri = tc.triangles[t];
                mesh.triangles.push_back({map[tri[0]], map[tri[1]], map[tri[2]]});
                mesh.phases.push_back(tc.phases[t]);
                mesh.cell_index.push_back(cid);
            }
            for (const auto& e : tc.interface_edges) mesh.interface_edges.push_back({map[e[0]], map[e[1]]});
            for (const auto& e : tc.boundary_edges) {
                const bool exterior = (e.face == Face::left && i == 0) || (e.face == Face::right && i == n - 1) ||
                                      (e.face == Face::bottom && j == 0) || (e.face == Face::top && j == n - 1);
                if (!exterior) continue;
                const Phase ph = edge_phase.at({std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1])});
                mesh.exterior_edges.push_back(
                    {{map[e.v[0]], map[e.v[1]]}, ph == Phase::fluid ? ExteriorClass::fext : ExteriorClass::sext});
            }
        }
    }
    return mesh;
}

double PerforatedMesh::triangle_area(int t) const {
    const auto& tri = triangles[t];
    return tri_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

double PerforatedMesh::fluid_area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        if (phases[t] == Phase::fluid) s += triangle_area(static_cast<int>(t));
    return s;
}

double PerforatedMesh::solid_area() const {
    double s = 0.0;
    for (std::size_t t = 0; t < triangles.size(); ++t)
        if (phases[t] == Phase::solid) s += triangle_area(static_cast<int>(t));
    return s;
}

double PerforatedMesh::interface_length() const {
    double s = 0.0;
    for (const auto& e : interface_edges) s += norm(vertices[e[1]] - vertices[e[0]]);
    return s;
}

int PerforatedMesh::locate_triangle(const Vec2& x) const {
    constexpr double tol = 1e-14;
    if (!(x[0] >= -tol && x[0] <= 1.0 + tol && x[1] >= -tol && x[1] <= 1.0 + tol))
        throw DomainError("point " + where(x) + " lies outside the macro domain");
    const int nt = static_cast<int>(cell_->triangles.size());
    const double sx = std::clamp(x[0], 0.0, 1.0) * n, sy = std::clamp(x[1], 0.0, 1.0) * n;
    const int i = std::clamp(static_cast<int>(std::floor(sx)), 0, n - 1);
    const int j = std::clamp(static_cast<int>(std::floor(sy)), 0, n - 1);
    int best = std::numeric_limits<int>::max();
    constexpr double face_tol = 1e-12;
    for (int dj = -1; dj <= 1; ++dj) {
        for (int di = -1; di <= 1; ++di) {
            const int ci = i + di, cj = j + dj;
            if (ci < 0 || cj < 0 || ci >= n || cj >= n) continue;
            const Vec2 s{sx - ci, sy - cj};
            if (s[0] < -face_tol || s[0] > 1.0 + face_tol || s[1] < -face_tol || s[1] > 1.0 + face_tol) continue;
            const Vec2 sc{std::clamp(s[0], 0.0, 1.0), std::clamp(s[1], 0.0, 1.0)};
            for (int t : locator_->containing(sc)) best = std::min(best, (cj * n + ci) * nt + t);
        }
    }
    if (best == std::numeric_limits<int>::max())
        throw MeshError("point location failed at " + where(x));
    return best;
}

Phase PerforatedMesh::locate_phase(const Vec2& x) const { return phases[locate_triangle(x)]; }

// ---------------------------------------------------------------------------

namespace {

void write_vertices(std::ostream& os, const std::vector<Vec2>& V) {
    char buf[96];
    for (const auto& p : V) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", p[0], p[1]);
        os << buf;
    }
}

void write_triangles(std::ostream& os, const std::vector<std::array<int, 3>>& T, const std::vector<Phase>& P) {
    for (std::size_t t = 0; t < T.size(); ++t)
        os << "t " << T[t][0] << ' ' << T[t][1] << ' ' << T[t][2] << ' ' << to_string(P[t]) << '\n';
}

}  // namespace

void write_mesh(std::ostream& os, const PerforatedMesh& mesh) {
    write_vertices(os, mesh.vertices);
    write_triangles(os, mesh.triangles, mesh.phases);
    for (const auto& e : mesh.interface_edges) os << "ei " << e[0] << ' ' << e[1] << '\n';
    for (const auto& e : mesh.exterior_edges)
        os << "eb " << e.v[0] << ' ' << e.v[1] << ' ' << (e.cls == ExteriorClass::fext ? "fext" : "sext") << '\n';
}

void write_mesh(std::ostream& os, const TemplateCell& cell) {
    write_vertices(os, cell.vertices);
    write_triangles(os, cell.triangles, cell.phases);
    for (const auto& e : cell.interface_edges) os << "ei " << e[0] << ' ' << e[1] << '\n';
}

}  // namespace spnp
