#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>

#include "topam/errors.hpp"

namespace topam {

using Vector = Eigen::VectorXd;

/// Domain edges, in the order used by every per-edge array in the library.
enum class Edge { Left = 0, Right = 1, Bottom = 2, Top = 3 };

inline constexpr std::array<Edge, 4> kAllEdges = {Edge::Left, Edge::Right, Edge::Bottom, Edge::Top};

/// Rectangular tessellation of unit square elements.
///
/// Elements and nodes are numbered column-major starting at the top-left
/// corner, as in the classic 88-line code: element (ix, row) has index
/// ix * nely + row, where row 0 is the top row. Geometric coordinates put the
/// origin at the bottom-left corner with y pointing up, so the centroid of
/// element (ix, row) sits at (ix + 0.5, nely - row - 0.5) in element units.
struct Grid {
  int nelx = 0;
  int nely = 0;
  double element_size = 1.0;

  Grid() = default;
  Grid(int nx, int ny, double s = 1.0) : nelx(nx), nely(ny), element_size(s) { validate(); }

  void validate() const {
    if (nelx < 1 || nely < 1) throw InputError("grid needs at least one element in each direction");
    if (!(element_size > 0.0)) throw InputError("element size must be positive");
  }

  int elements() const { return nelx * nely; }
  int nodes() const { return (nelx + 1) * (nely + 1); }
  int dofs() const { return 2 * nodes(); }

  int element(int ix, int row) const { return ix * nely + row; }
  int column_of(int e) const { return e / nely; }
  int row_of(int e) const { return e % nely; }

  /// Node at column ix (0..nelx) and node row r (0 = top).
  int node(int ix, int r) const { return ix * (nely + 1) + r; }

  /// Node closest to the geometric point (x, y) in element units.
  int node_at(double x, double y) const {
    const int ix = static_cast<int>(std::lround(x));
    const int r = nely - static_cast<int>(std::lround(y));
    return node(ix, r);
  }

  double centroid_x(int e) const { return column_of(e) + 0.5; }
  double centroid_y(int e) const { return nely - row_of(e) - 0.5; }

  /// Degrees of freedom of element e, counter-clockwise from the bottom-left
  /// node (x then y for each node).
  std::array<int, 8> element_dofs(int e) const {
    const int ix = column_of(e);
    const int row = row_of(e);
    const int n1 = (nely + 1) * ix + row;
    const int n2 = (nely + 1) * (ix + 1) + row;
    return {2 * n1 + 2, 2 * n1 + 3, 2 * n2 + 2, 2 * n2 + 3, 2 * n2, 2 * n2 + 1, 2 * n1, 2 * n1 + 1};
  }
};

/// Reflects an out-of-range index back into [0, n) across the nearest
/// boundary, the way a mirror image across a symmetry line would.
inline int reflect_index(int i, int n) {
  if (i < 0) return -1 - i;
  if (i >= n) return 2 * n - 1 - i;
  return i;
}

}  // namespace topam
