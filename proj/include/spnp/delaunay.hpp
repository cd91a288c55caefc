#pragma once

#include <array>
#include <vector>

#include "spnp/types.hpp"

namespace spnp::detail {

/// Bowyer-Watson Delaunay triangulation of a planar point set.
/// Returned triangles index into `points` and are counter-clockwise.
/// Intended for the small per-cell point sets of the template mesher.
std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& points);

}  // namespace spnp::detail
