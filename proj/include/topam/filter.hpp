#pragma once

#include <array>

#include "topam/grid.hpp"
#include "topam/grid_fem.hpp"

namespace topam {

/// How the filter disc is completed where it crosses a domain edge.
///   Extend: the edge is virtual; the denominator uses the full disc so the
///           missing part acts as void and minimum size holds up to the edge.
///   Fix:    the disc is cut at the edge (clamped or loaded boundaries that
///           must stay solid up to the edge).
///   Mirror: symmetry line; ghost elements are reflected back into the domain.
enum class EdgeTreatment { Extend, Fix, Mirror };

using EdgeTreatments = std::array<EdgeTreatment, 4>;

inline constexpr EdgeTreatments kExtendAll = {EdgeTreatment::Extend, EdgeTreatment::Extend,
                                              EdgeTreatment::Extend, EdgeTreatment::Extend};

/// Linear cone density filter rho_tilde = H rho.
class FilterOperator {
public:
  FilterOperator() = default;
  FilterOperator(SparseMatrix h, double radius, Vector weighted_volume)
      : h_(std::move(h)), radius_(radius), weighted_volume_(std::move(weighted_volume)) {}

  const SparseMatrix& matrix() const { return h_; }
  double radius() const { return radius_; }
  const Vector& weighted_volume() const { return weighted_volume_; }
  int size() const { return static_cast<int>(h_.rows()); }

  Vector apply(const Vector& rho) const;
  Vector apply_transpose(const Vector& g) const;

private:
  SparseMatrix h_;
  double radius_ = 0.0;
  Vector weighted_volume_;
};

/// Cone weight max(0, 1 - d / radius).
inline double cone_weight(double distance, double radius) {
  return std::max(0.0, 1.0 - distance / radius);
}

FilterOperator build_filter(const Grid& grid, double radius, const EdgeTreatments& edges = kExtendAll);

/// Filtered value at signed distance d inside a straight solid edge (d < 0 in
/// the void), for the continuous cone of the given radius.
double edge_profile(double d, double radius);

/// Distance between the level-from and level-to contours of a filtered
/// straight edge; positive when level_to < level_from (the contour moves into
/// the void).
double contour_offset(double radius, double level_from, double level_to);

}  // namespace topam
