#include "topam/maxsize.hpp"

#include <cmath>
#include <vector>

#include "topam/overhang.hpp"

namespace topam {

void MaxSizeSpec::validate() const {
  if (!(r_max > 0.0) || !std::isfinite(r_max)) throw InputError("maximum-size radius must be positive");
  if (!(eps_ms > 0.0 && eps_ms < 1.0)) throw InputError("maximum-size void fraction must lie in (0, 1)");
  if (!(p >= 1.0)) throw InputError("maximum-size aggregation exponent must be >= 1");
}

MaxSizeOperator::MaxSizeOperator(const Grid& grid, const MaxSizeSpec& spec) : spec_(spec) {
  grid.validate();
  spec_.validate();
  const int reach = static_cast<int>(std::ceil(spec_.r_max));
  const int nel = grid.elements();
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<int> cols;
  for (int ix = 0; ix < grid.nelx; ++ix) {
    for (int r = 0; r < grid.nely; ++r) {
      cols.clear();
      for (int dx = -reach; dx <= reach; ++dx) {
        for (int dy = -reach; dy <= reach; ++dy) {
          if (std::hypot(dx, dy) > spec_.r_max) continue;
          const int jx = ix + dx, jr = r + dy;
          if (jx < 0 || jx >= grid.nelx || jr < 0 || jr >= grid.nely) continue;
          cols.push_back(grid.element(jx, jr));
        }
      }
      if (cols.empty()) throw InputError("maximum-size region with zero volume");
      const int i = grid.element(ix, r);
      for (int j : cols) triplets.emplace_back(i, j, 1.0 / static_cast<double>(cols.size()));
    }
  }
  d_.resize(nel, nel);
  d_.setFromTriplets(triplets.begin(), triplets.end());
  d_.makeCompressed();
}

Vector MaxSizeOperator::solid_fraction(const Vector& rho_bar) const {
  if (rho_bar.size() != d_.cols()) throw InputError("maximum-size input length does not match grid");
  return d_ * rho_bar;
}

double MaxSizeOperator::evaluate(const Vector& rho_bar, Vector* d_rho_bar) const {
  const Vector s = solid_fraction(rho_bar);
  const double value = power_mean(s, spec_.p) - (1.0 - spec_.eps_ms);
  if (d_rho_bar) *d_rho_bar = d_.transpose() * power_mean_gradient(s, spec_.p);
  return value;
}

}  // namespace topam
