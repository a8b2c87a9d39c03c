#pragma once

#include <array>
#include <map>
#include <vector>

#include "topam/filter.hpp"
#include "topam/grid.hpp"
#include "topam/grid_fem.hpp"

namespace topam {

/// Value assumed for mask cells outside the domain.
///   Solid:     density 1, the edge acts as base plate.
///   Void:      density 0.
///   Mirror:    symmetry line, the cell is reflected back into the domain.
///   Replicate: the nearest in-domain cell is repeated (zero normal gradient).
enum class GhostTreatment { Solid, Void, Mirror, Replicate };

using GhostTreatments = std::array<GhostTreatment, 4>;

inline constexpr GhostTreatments kSolidGhosts = {GhostTreatment::Solid, GhostTreatment::Solid,
                                                 GhostTreatment::Solid, GhostTreatment::Solid};

/// 3x3 Prewitt gradient, delta = D rho_bar + offset. The gradient points
/// from void towards solid; y points up.
struct PrewittOperator {
  SparseMatrix dx, dy;
  Vector offset_x, offset_y;  // every solid ghost cell

  // Solid ghost contributions keyed by the set of edges the ghost cell lies
  // beyond (bit e for Edge e; corner cells have two bits).
  std::map<unsigned, std::pair<Vector, Vector>> ghost_offsets;

  std::pair<Vector, Vector> gradient(const Vector& rho_bar) const;

  /// Gradient with a solid ghost cell only where one of the edges it lies
  /// beyond is in `base_edges`; the other solid ghosts read as void.
  std::pair<Vector, Vector> gradient(const Vector& rho_bar, unsigned base_edges) const;
};

PrewittOperator build_prewitt(const Grid& grid, const GhostTreatments& ghosts = kSolidGhosts);

struct GradientField {
  Vector dx, dy;        // raw gradient
  Vector scale;         // 1/|delta| above the cutoff, 0 below
  Vector dir_x, dir_y;  // normalized director
  double eps_n = 0.0;

  Vector norm() const;
  int size() const { return static_cast<int>(dx.size()); }
};

GradientField normalize(const Vector& dx, const Vector& dy, double eps_n);

/// Build vector and reference surface director for one build orientation
/// theta (radians, 0 = building along +y) and critical angle alpha.
struct BuildFrame {
  double bx = 0.0, by = 1.0;
  double rx = 0.0, ry = 0.0;

  static BuildFrame at(double theta, double alpha);
  double b_dot_ref() const { return bx * rx + by * ry; }
};

/// Which solid-ghost edges support the part for a build direction.
///   All:   every one of them.
///   Lower: those whose outward normal points against the build vector.
enum class BasePlate { All, Lower };

inline constexpr unsigned kAllEdgeBits = 0xF;

unsigned base_plate_edges(const BuildFrame& frame, BasePlate mode);

/// Normalized gradient fields of one density field, one per base-plate
/// layout, built when a build frame first asks for it.
class SurfaceFields {
 public:
  SurfaceFields(const PrewittOperator& prewitt, const Vector& rho_bar, double eps_n, BasePlate mode);

  /// One precomputed field shared by every frame.
  explicit SurfaceFields(GradientField field);

  const GradientField& at(const BuildFrame& frame) const;
  int size() const { return size_; }

 private:
  const PrewittOperator* prewitt_ = nullptr;
  Vector ddx_, ddy_;  // D rho_bar without ghost cells
  double eps_n_ = 0.0;
  BasePlate mode_ = BasePlate::All;
  int size_ = 0;
  mutable std::map<unsigned, GradientField> cache_;
};

struct LocalConstraints {
  Vector g;  // b.rho - b.rho_alpha, positive when violated
  Vector s;  // shifted to [0,1]
};

LocalConstraints local_constraints(const GradientField& field, const BuildFrame& frame);

/// ((1/N) sum s_i^p)^(1/p), evaluated without overflow or underflow.
double power_mean(const Vector& s, double p);

/// d power_mean / d s_i.
Vector power_mean_gradient(const Vector& s, double p);

/// Aggregated overhang value 2 M_p(s) - b.rho_alpha - 1.
double aggregate_pmean(const Vector& s, double p, double b_dot_ref);

/// Derivative of the aggregate with respect to the local constraints g.
Vector aggregate_pmean_gradient(const Vector& s, double p);

/// Weights for the transposed Prewitt products: dG/d delta_x = wx, dG/d delta_y = wy.
void director_adjoint(const GradientField& field, const BuildFrame& frame, const Vector& dg, Vector& wx,
                      Vector& wy);

/// Pulls a gradient with respect to delta back to the design variables:
/// H^T (slope .* (Dx^T wx + Dy^T wy)).
Vector pull_back(const PrewittOperator& prewitt, const FilterOperator& filter, const Vector& slope,
                 const Vector& wx, const Vector& wy);

struct OverhangValue {
  double value = 0.0;
  Vector gradient;  // d G / d rho (design variables)
};

/// Single-orientation aggregated constraint and its design sensitivity.
OverhangValue overhang_constraint(const GradientField& field, const BuildFrame& frame, double p,
                                  const PrewittOperator& prewitt, const FilterOperator& filter,
                                  const Vector& slope);

/// Mirror image of a build direction for half-domain models.
enum class SymmetryAxis { None, Vertical, Horizontal };

double mirror_angle(double theta, SymmetryAxis axis);

struct OrientationSet {
  std::vector<double> theta;  // radians
  double alpha = 0.785398163397448;
  double p = 60.0;
  double r = 20.0;
  double active_fraction = 0.1;
  int active_threshold = 100;  // active set used when more orientations than this
  SymmetryAxis symmetry = SymmetryAxis::None;

  void validate() const;
  int size() const { return static_cast<int>(theta.size()); }

  /// m equally spaced angles starting at 0 over the full circle.
  static OrientationSet uniform(int m, double alpha, double p, double r);
};

/// Union of base_plate_edges over every frame of the set, mirrored frames
/// included.
unsigned supporting_edges(const OrientationSet& set, BasePlate mode);

struct OverhangEval {
  Vector G;               // per orientation
  Vector t;               // transformed 1 - 0.5 (G + b.rho_alpha + 1)
  std::vector<int> active;
  double aggregate = 0.0; // B_G
  Vector gradient;        // d B_G / d rho
  int best = 0;           // index of the least restrictive orientation
  double theta_star = 0.0;
};

/// Aggregates the constraints of all orientations into one value that tracks
/// the least restrictive one.
OverhangEval multi_orientation(const SurfaceFields& fields, const OrientationSet& set,
                               const PrewittOperator& prewitt, const FilterOperator& filter,
                               const Vector& slope, bool with_gradient = true);
OverhangEval multi_orientation(const GradientField& field, const OrientationSet& set,
                               const PrewittOperator& prewitt, const FilterOperator& filter,
                               const Vector& slope, bool with_gradient = true);

/// Per-orientation G values only (no sensitivities).
Vector orientation_values(const SurfaceFields& fields, const OrientationSet& set);
Vector orientation_values(const GradientField& field, const OrientationSet& set);

}  // namespace topam
