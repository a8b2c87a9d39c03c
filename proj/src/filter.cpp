#include "topam/filter.hpp"

#include <cmath>
#include <vector>

namespace topam {

Vector FilterOperator::apply(const Vector& rho) const {
  if (rho.size() != h_.cols())
    throw InputError("filter input has " + std::to_string(rho.size()) + " entries, expected " +
                     std::to_string(h_.cols()));
  return h_ * rho;
}

Vector FilterOperator::apply_transpose(const Vector& g) const {
  if (g.size() != h_.rows())
    throw InputError("filter adjoint input has " + std::to_string(g.size()) + " entries, expected " +
                     std::to_string(h_.rows()));
  return h_.transpose() * g;
}

namespace {

// Which edge a ghost coordinate falls across, -1 when inside.
int crossed_x(int ix, int nelx) { return ix < 0 ? 0 : (ix >= nelx ? 1 : -1); }
int crossed_row(int row, int nely) { return row >= nely ? 2 : (row < 0 ? 3 : -1); }

}  // namespace

FilterOperator build_filter(const Grid& grid, double radius, const EdgeTreatments& edges) {
  grid.validate();
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InputError("filter radius must be positive");

  const int reach = static_cast<int>(std::ceil(radius)) - 1;
  struct Offset {
    int dx, dy;
    double w;
  };
  std::vector<Offset> stencil;
  for (int dx = -reach; dx <= reach; ++dx)
    for (int dy = -reach; dy <= reach; ++dy) {
      const double w = cone_weight(std::hypot(dx, dy), radius);
      if (w > 0.0) stencil.push_back({dx, dy, w});
    }

  const int nel = grid.elements();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nel) * stencil.size());
  Vector volume(nel);
  std::vector<std::pair<int, double>> row;
  for (int ix = 0; ix < grid.nelx; ++ix) {
    for (int r = 0; r < grid.nely; ++r) {
      row.clear();
      double denominator = 0.0;
      for (const auto& o : stencil) {
        int jx = ix + o.dx;
        int jr = r + o.dy;
        const int ex = crossed_x(jx, grid.nelx);
        const int er = crossed_row(jr, grid.nely);
        bool numerator = true;
        bool counted = true;
        for (int edge : {ex, er}) {
          if (edge < 0) continue;
          switch (edges[edge]) {
            case EdgeTreatment::Extend: numerator = false; break;
            case EdgeTreatment::Fix: counted = false; break;
            case EdgeTreatment::Mirror: break;
          }
        }
        if (!counted) continue;
        denominator += o.w;
        if (!numerator) continue;
        jx = reflect_index(jx, grid.nelx);
        jr = reflect_index(jr, grid.nely);
        row.emplace_back(grid.element(jx, jr), o.w);
      }
      const int i = grid.element(ix, r);
      volume[i] = denominator;
      for (const auto& [j, w] : row) triplets.emplace_back(i, j, w / denominator);
    }
  }
  SparseMatrix h(nel, nel);
  h.setFromTriplets(triplets.begin(), triplets.end());
  h.makeCompressed();
  return FilterOperator(std::move(h), radius, std::move(volume));
}

namespace {

// Cone weight integrated along a line at distance t from the centre.
double cone_marginal(double t, double radius) {
  const double a2 = radius * radius - t * t;
  if (a2 <= 0.0) return 0.0;
  const double a = std::sqrt(a2);
  if (t == 0.0) return a;
  return a - t * t / (2.0 * radius) * std::log((radius + a) / (radius - a));
}

double marginal_integral(double from, double to, double radius) {
  constexpr int kSteps = 2000;  // even, composite Simpson
  const double h = (to - from) / kSteps;
  double sum = cone_marginal(from, radius) + cone_marginal(to, radius);
  for (int k = 1; k < kSteps; ++k) sum += (k % 2 ? 4.0 : 2.0) * cone_marginal(from + k * h, radius);
  return sum * h / 3.0;
}

}  // namespace

double edge_profile(double d, double radius) {
  if (!(radius > 0.0)) throw InputError("filter radius must be positive");
  if (d <= -radius) return 0.0;
  if (d >= radius) return 1.0;
  return marginal_integral(-radius, d, radius) / marginal_integral(-radius, radius, radius);
}

double contour_offset(double radius, double level_from, double level_to) {
  auto contour = [&](double level) {
    if (!(level > 0.0 && level < 1.0)) throw InputError("contour level must lie in (0, 1)");
    double lo = -radius, hi = radius;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (edge_profile(mid, radius) < level ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };
  return contour(level_from) - contour(level_to);
}

}  // namespace topam
