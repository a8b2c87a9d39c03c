#pragma once

#include "topam/grid.hpp"
#include "topam/grid_fem.hpp"

namespace topam {

struct MaxSizeSpec {
  double r_max = 4.5;   // radius of the local test disc
  double eps_ms = 0.05; // minimum void fraction in every disc
  double p = 60.0;

  void validate() const;
};

/// Local volume operator: row i averages the density over the disc of
/// radius r_max around element i (in-domain elements only).
class MaxSizeOperator {
public:
  MaxSizeOperator() = default;
  MaxSizeOperator(const Grid& grid, const MaxSizeSpec& spec);

  const MaxSizeSpec& spec() const { return spec_; }
  const SparseMatrix& matrix() const { return d_; }

  /// Local solid fractions 1 - void fraction.
  Vector solid_fraction(const Vector& rho_bar) const;

  /// Aggregated violation M_p(solid fraction) - (1 - eps_ms); <= 0 when
  /// every disc holds at least eps_ms void.
  double evaluate(const Vector& rho_bar, Vector* d_rho_bar = nullptr) const;

private:
  MaxSizeSpec spec_;
  SparseMatrix d_;
};

}  // namespace topam
