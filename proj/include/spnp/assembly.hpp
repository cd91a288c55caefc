#pragma once

#include <array>
#include <functional>
#include <vector>

#include "spnp/quadrature.hpp"
#include "spnp/sparse.hpp"
#include "spnp/types.hpp"

namespace spnp {

using ScalarFn = std::function<double(const Vec2&)>;
using TensorFn = std::function<Mat2(const Vec2&)>;

/// Vertex -> degree of freedom map (-1: vertex carries no dof).
struct DofMap {
    std::vector<int> of_vertex;
    int count = 0;
    static DofMap identity(int nv);
    /// Dofs on the vertices touched by the listed triangles, numbered in vertex order.
    static DofMap restricted(int nv, const std::vector<std::array<int, 3>>& tris, const std::vector<int>& subset);
};

/// Affine P1 element data.
struct P1Element {
    std::array<Vec2, 3> grad;
    double area;
    std::array<Vec2, 3> x;
    /// Physical point for reference coordinates (s,t).
    Vec2 map(const Vec2& st) const;
};

/// Throws MeshError for area below 1e-14.
P1Element p1_element(const Vec2& a, const Vec2& b, const Vec2& c);

std::vector<int> all_indices(std::size_t n);

/// sum_T (int_T a) grad phi_i . grad phi_j; `coef` empty means a = 1.
SparseMatrix assemble_stiffness(const std::vector<Vec2>& V, const std::vector<std::array<int, 3>>& T,
                                const std::vector<int>& tris, const DofMap& dofs, const ScalarFn& coef,
                                const QuadratureRule& quad);

/// sum_T int_T (A grad phi_j) . grad phi_i.
SparseMatrix assemble_stiffness_tensor(const std::vector<Vec2>& V, const std::vector<std::array<int, 3>>& T,
                                       const std::vector<int>& tris, const DofMap& dofs, const TensorFn& coef,
                                       const QuadratureRule& quad);

/// Consistent or row-lumped P1 mass matrix.
SparseMatrix assemble_mass(const std::vector<Vec2>& V, const std::vector<std::array<int, 3>>& T,
                           const std::vector<int>& tris, const DofMap& dofs, bool lumped);

/// int f phi_i.
Vector assemble_load(const std::vector<Vec2>& V, const std::vector<std::array<int, 3>>& T,
                     const std::vector<int>& tris, const DofMap& dofs, const ScalarFn& f, const QuadratureRule& quad);

/// int_edges rho phi_i phi_j ds. Throws MeshError for a zero-length edge.
SparseMatrix assemble_interface_mass(const std::vector<Vec2>& V, const std::vector<std::array<int, 2>>& edges,
                                     const DofMap& dofs, const ScalarFn& density, const QuadratureRule& quad);

/// int_edges rho phi_i ds.
Vector assemble_interface_load(const std::vector<Vec2>& V, const std::vector<std::array<int, 2>>& edges,
                               const DofMap& dofs, const ScalarFn& density, const QuadratureRule& quad);

/// int over the listed triangles of f.
double integrate(const std::vector<Vec2>& V, const std::vector<std::array<int, 3>>& T, const std::vector<int>& tris,
                 const ScalarFn& f, const QuadratureRule& quad);

/// int over the edges of f.
double integrate_edges(const std::vector<Vec2>& V, const std::vector<std::array<int, 2>>& edges, const ScalarFn& f,
                       const QuadratureRule& quad);

}  // namespace spnp

namespace spnp {

/// Fixed sparsity pattern built from element dof triples (entries kept even when
/// zero), with per-element scatter positions for fast repeated assembly.
class PatternAssembler {
public:
    PatternAssembler() = default;
    PatternAssembler(int ndof, const std::vector<std::array<int, 3>>& element_dofs);
    /// Matrix with the pattern and all values zero.
    SparseMatrix zero_matrix() const;
    /// Adds the 3x3 element matrix of element e into m (same pattern).
    void add(SparseMatrix& m, int e, const double ke[3][3]) const;
    /// Value position of the diagonal entry of row i.
    int diagonal_position(int i) const { return diag_[i]; }

private:
    SparseMatrix pattern_;
    std::vector<std::array<int, 9>> pos_;
    std::vector<int> diag_;
};

}  // namespace spnp
