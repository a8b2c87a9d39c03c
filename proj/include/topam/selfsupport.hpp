#pragma once

#include "topam/grid.hpp"
#include "topam/grid_fem.hpp"
#include "topam/overhang.hpp"

namespace topam {

struct FreeEvolutionSpec {
  int it_free = 10;
  double eps_m = 0.5;
  double frozen = 0.001;
  double freed = 1.0;
  bool invert_surface_test = false;

  void validate() const;
};

/// Per-variable move limits: `freed` where |delta| <= eps_m, `frozen`
/// elsewhere (the comparison flips with invert_surface_test).
Vector free_evolution_move_limits(const GradientField& field, const FreeEvolutionSpec& spec);

struct DetectionSpec {
  double eps_c = 0.0;          // compliance decay scale; <= 0 picks default_compliance_scale
  double eps_v = 0.0;          // void fraction threshold; <= 0 picks default_void_threshold
  double region_radius = 0.0;  // <= 0 uses the filter radius
  double alpha = 0.785398163397448;
  bool printed_void_test = false;  // I_v = 1 - h(.) : flags regions with little void
  bool material_only = true;       // weight the indicator by rho_bar so void never triggers removal
};

/// 0.5 (pi + 2 alpha) / (2 pi): half the void share seen at the tip of a wedge
/// whose faces sit exactly at the critical angle.
double default_void_threshold(double alpha);

/// Decay scale mapping the median compliance of solid elements (rho_bar > 0.5)
/// to an indicator value of 0.01.
double default_compliance_scale(const Vector& compliance, const Vector& rho_bar);

struct TriangleDetection {
  Vector c_p;  // low-compliance indicator
  Vector I_v;  // surrounding-void indicator
  Vector I_t;  // combined
  Vector I_r;  // removal indicator (dilated)
  double eps_c = 0.0;
  double eps_v = 0.0;
  int flagged = 0;  // elements with I_r > 0.5
};

/// Row i holds every in-domain element j with |x_i - x_j| < radius; rows
/// are scaled to unit sum when normalize is set.
SparseMatrix disc_operator(const Grid& grid, double radius, bool normalize);

/// Largest value of v over the disc of each element.
Vector disc_max(const SparseMatrix& disc, const Vector& v);

TriangleDetection detect_triangles(const Grid& grid, const Vector& s, const Vector& compliance,
                                   const Vector& rho_bar, double filter_radius, double beta, double mu,
                                   const DetectionSpec& spec = {});

/// rho_hat = clamp(rho - I_r, 0, 1).
Vector remove_triangles(const Vector& rho, const Vector& I_r);

}  // namespace topam
