#include "spnp/assembly.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace spnp {

DofMap DofMap::identity(int nv) {
    DofMap d;
    d.of_vertex.resize(nv);
    std::iota(d.of_vertex.begin(), d.of_vertex.end(), 0);
    d.count = nv;
    return d;
}

DofMap DofMap::restricted(int nv, const std::vector<std::array<int, 3>>& tris, const std::vector<int>& subset) {
    DofMap d;
    d.of_vertex.assign(nv, -1);
    std::vector<char> used(nv, 0);
    for (int t : subset)
        for (int v : tris[t]) used[v] = 1;
    for (int v = 0; v < nv; ++v)
        if (used[v]) d.of_vertex[v] = d.count++;
    return d;
}

Vec2 P1Element::map(const Vec2& st) const { return x[0] + st[0] * (x[1] - x[0]) + st[1] * (x[2] - x[0]); }

P1Element p1_element(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double det = cross(b - a, c - a);
    P1Element e;
    e.area = 0.5 * std::abs(det);
    if (e.area < 1e-14) {
        std::ostringstream os;
        os << "assembly error: degenerate triangle at (" << a[0] << ", " << a[1] << ")";
        throw MeshError(os.str());
    }
    e.x = {a, b, c};
    // grad phi_0 = perp(c - b)/det etc.
    const std::array<Vec2, 3> opp = {c - b, a - c, b - a};
    for (int i = 0; i < 3; ++i) e.grad[i] = {-opp[i][1] / det, opp[i][0] / det};
    return e;
}

std::vector<int> all_indices(std::size_t n) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

namespace {

double element_integral(const P1Element& e, const ScalarFn& f, const QuadratureRule& quad) {
    if (!f) return e.area;
    double s = 0.0;
    for (std::size_t q = 0; q < quad.points.size(); ++q) s += quad.weights[q] * f(e.map(quad.points[q]));
    return 2.0 * e.area * s;
}

}  // namespace

SparseMatrix assemble_stiffness(const std::vector<Vec2>& V, const std::vector<std::array<int, 3>>& T,
                                const std::vector<int>& tris, const DofMap& dofs, const ScalarFn& coef,
                                const QuadratureRule& quad) {
    TripletBuilder b(dofs.count);
    b.reserve(9 * tris.size());
    for (int t : tris) {
        const auto& tri = T[t];
        const P1Element e = p1_element(V[tri[0]], V[tri[1]], V[tri[2]]);
        const double a = element_integral(e, coef, quad);
        for (int i = 0; i < 3; ++i) {
            const int di = dofs.of_vertex[tri[i]];
            if (di < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int dj = dofs.of_vertex[tri[j]];
                if (dj < 0) continue;
                b.add(di, dj, a * dot(e.grad[i], e.grad[j]));
            }
        }
    }
    return b.build();
}

SparseMatrix assemble_stiffness_tensor(const std::vector<Vec2>& V, const std::vector<std::array<int, 3>>& T,
                                       const std::vector<int>& tris, const DofMap& dofs, const TensorFn& coef,
                                       const QuadratureRule& quad) {
    TripletBuilder b(dofs.count);
    b.reserve(9 * tris.size());
    for (int t : tris) {
        const auto& tri = T[t];
        const P1Element e = p1_element(V[tri[0]], V[tri[1]], V[tri[2]]);
        Mat2 a = zero_mat2();
        for (std::size_t q = 0; q < quad.points.size(); ++q) {
            const Mat2 m = coef(e.map(quad.points[q]));
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c) a[r][c] += 2.0 * e.area * quad.weights[q] * m[r][c];
        }
        for (int i = 0; i < 3; ++i) {
            const int di = dofs.of_vertex[tri[i]];
            if (di < 0) continue;
            for (int j = 0; j < 3; ++j) {
                const int dj = dofs.of_vertex[tri[j]];
                if (dj < 0) continue;
                b.add(di, dj, dot(mat_vec(a, e.grad[j]), e.grad[i]));
            }
        }
    }
    return b.build();
}

SparseMatrix assemble_mass(const std::vector<Vec2>& V, const std::vector<std::array<int, 3>>& T,
                           const std::vector<int>& tris, const DofMap& dofs, bool lumped) {
    TripletBuilder b(dofs.count);
    b.reserve(9 * tris.size());
    for (int t : tris) {
        const auto& tri = T[t];
        const P1Element e = p1_element(V[tri[0]], V[tri[1]], V[tri[2]]);
        for (int i = 0; i < 3; ++i) {
            const int di = dofs.of_vertex[tri[i]];
            if (di < 0) continue;
            if (lumped) {
                b.add(di, di, e.area / 3.0);
                continue;
            }
            for (int j = 0; j < 3; ++j) {
                const int dj = dofs.of_vertex[tri[j]];
                if (dj < 0) continue;
                b.add(di, dj, e.area * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
            }
        }
    }
    return b.build();
}

Vector assemble_load(const std::vector<Vec2>& V, const std::vector<std::array<int, 3>>& T,
                     const std::vector<int>& tris, const DofMap& dofs, const ScalarFn& f, const QuadratureRule& quad) {
    Vector out(dofs.count, 0.0);
    for (int t : tris) {
        const auto& tri = T[t];
        const P1Element e = p1_element(V[tri[0]], V[tri[1]], V[tri[2]]);
        for (std::size_t q = 0; q < quad.points.size(); ++q) {
            const Vec2 st = quad.points[q];
            const double phi[3] = {1.0 - st[0] - st[1], st[0], st[1]};
            const double w = 2.0 * e.area * quad.weights[q] * f(e.map(st));
            for (int i = 0; i < 3; ++i) {
                const int di = dofs.of_vertex[tri[i]];
                if (di >= 0) out[di] += w * phi[i];
            }
        }
    }
    return out;
}

namespace {

double edge_length_checked(const Vec2& a, const Vec2& b) {
    const double l = norm(b - a);
    if (l == 0.0) {
        std::ostringstream os;
        os << "assembly error: zero-length interface edge at (" << a[0] << ", " << a[1] << ")";
        throw MeshError(os.str());
    }
    return l;
}

}  // namespace

SparseMatrix assemble_interface_mass(const std::vector<Vec2>& V, const std::vector<std::array<int, 2>>& edges,
                                     const DofMap& dofs, const ScalarFn& density, const QuadratureRule& quad) {
    TripletBuilder b(dofs.count);
    b.reserve(4 * edges.size());
    for (const auto& e : edges) {
        const Vec2 &p = V[e[0]], &q = V[e[1]];
        const double len = edge_length_checked(p, q);
        double m[2][2] = {{0, 0}, {0, 0}};
        for (std::size_t k = 0; k < quad.points.size(); ++k) {
            const double s = quad.points[k][0];
            const double rho = density ? density(p + s * (q - p)) : 1.0;
            const double phi[2] = {1.0 - s, s};
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) m[i][j] += len * quad.weights[k] * rho * phi[i] * phi[j];
        }
        for (int i = 0; i < 2; ++i) {
            const int di = dofs.of_vertex[e[i]];
            if (di < 0) continue;
            for (int j = 0; j < 2; ++j) {
                const int dj = dofs.of_vertex[e[j]];
                if (dj >= 0) b.add(di, dj, m[i][j]);
            }
        }
    }
    return b.build();
}

Vector assemble_interface_load(const std::vector<Vec2>& V, const std::vector<std::array<int, 2>>& edges,
                               const DofMap& dofs, const ScalarFn& density, const QuadratureRule& quad) {
    Vector out(dofs.count, 0.0);
    for (const auto& e : edges) {
        const Vec2 &p = V[e[0]], &q = V[e[1]];
        const double len = edge_length_checked(p, q);
        for (std::size_t k = 0; k < quad.points.size(); ++k) {
            const double s = quad.points[k][0];
            const double w = len * quad.weights[k] * (density ? density(p + s * (q - p)) : 1.0);
            const int d0 = dofs.of_vertex[e[0]], d1 = dofs.of_vertex[e[1]];
            if (d0 >= 0) out[d0] += w * (1.0 - s);
            if (d1 >= 0) out[d1] += w * s;
        }
    }
    return out;
}

double integrate(const std::vector<Vec2>& V, const std::vector<std::array<int, 3>>& T, const std::vector<int>& tris,
                 const ScalarFn& f, const QuadratureRule& quad) {
    double s = 0.0;
    for (int t : tris) {
        const auto& tri = T[t];
        s += element_integral(p1_element(V[tri[0]], V[tri[1]], V[tri[2]]), f, quad);
    }
    return s;
}

double integrate_edges(const std::vector<Vec2>& V, const std::vector<std::array<int, 2>>& edges, const ScalarFn& f,
                       const QuadratureRule& quad) {
    double s = 0.0;
    for (const auto& e : edges) {
        const Vec2 &p = V[e[0]], &q = V[e[1]];
        const double len = edge_length_checked(p, q);
        for (std::size_t k = 0; k < quad.points.size(); ++k)
            s += len * quad.weights[k] * f(p + quad.points[k][0] * (q - p));
    }
    return s;
}

}  // namespace spnp

namespace spnp {

PatternAssembler::PatternAssembler(int ndof, const std::vector<std::array<int, 3>>& element_dofs) {
    TripletBuilder b(ndof);
    b.reserve(9 * element_dofs.size() + ndof);
    for (int i = 0; i < ndof; ++i) b.add(i, i, 1.0);
    for (const auto& d : element_dofs)
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (d[i] >= 0 && d[j] >= 0) b.add(d[i], d[j], 1.0);
    pattern_ = b.build();
    std::fill(pattern_.val.begin(), pattern_.val.end(), 0.0);
    auto find = [&](int i, int j) {
        auto beg = pattern_.col.begin() + pattern_.row_ptr[i], end = pattern_.col.begin() + pattern_.row_ptr[i + 1];
        return static_cast<int>(std::lower_bound(beg, end, j) - pattern_.col.begin());
    };
    pos_.resize(element_dofs.size());
    for (std::size_t e = 0; e < element_dofs.size(); ++e) {
        const auto& d = element_dofs[e];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) pos_[e][3 * i + j] = (d[i] >= 0 && d[j] >= 0) ? find(d[i], d[j]) : -1;
    }
    diag_.resize(ndof);
    for (int i = 0; i < ndof; ++i) diag_[i] = find(i, i);
}

SparseMatrix PatternAssembler::zero_matrix() const { return pattern_; }

void PatternAssembler::add(SparseMatrix& m, int e, const double ke[3][3]) const {
    const auto& p = pos_[e];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (p[3 * i + j] >= 0) m.val[p[3 * i + j]] += ke[i][j];
}

}  // namespace spnp
