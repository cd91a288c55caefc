#pragma once

#include <string>
#include <vector>

#include "spnp/types.hpp"

namespace spnp {

/// Reference triangle {(s,t): s,t >= 0, s+t <= 1} (measure 1/2) or reference
/// segment [0,1] (measure 1).
struct QuadratureRule {
    enum class Kind { tri3, tri7, edge };
    Kind kind = Kind::tri3;
    int degree = 2;
    std::vector<Vec2> points;  // for edge rules only points[i][0] is used
    std::vector<double> weights;

    static QuadratureRule triangle3();
    static QuadratureRule triangle7();
    /// Gauss-Legendre with k in {2, 4, 8} points on [0,1].
    static QuadratureRule edge_gauss(int k);
    std::string name() const;
};

/// Gauss-Legendre nodes/weights on [-1,1] (Newton iteration on P_k).
void gauss_legendre(int k, std::vector<double>& nodes, std::vector<double>& weights);

}  // namespace spnp
