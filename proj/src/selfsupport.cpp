#include "topam/selfsupport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "topam/projection.hpp"

namespace topam {

void FreeEvolutionSpec::validate() const {
  if (it_free < 0) throw InputError("free-evolution iteration count must be >= 0");
  if (!(eps_m >= 0.0)) throw InputError("surface threshold eps_m must be >= 0");
  if (!(frozen > 0.0 && freed > 0.0)) throw InputError("free-evolution move limits must be positive");
}

Vector free_evolution_move_limits(const GradientField& field, const FreeEvolutionSpec& spec) {
  spec.validate();
  const Vector len = field.norm();
  Vector out(len.size());
  for (Eigen::Index i = 0; i < len.size(); ++i) {
    const bool flat = len[i] <= spec.eps_m;
    out[i] = (flat != spec.invert_surface_test) ? spec.freed : spec.frozen;
  }
  return out;
}

double default_void_threshold(double alpha) {
  constexpr double pi = 3.14159265358979323846;
  return 0.5 * (pi + 2.0 * alpha) / (2.0 * pi);
}

double default_compliance_scale(const Vector& compliance, const Vector& rho_bar) {
  std::vector<double> solid;
  for (Eigen::Index i = 0; i < compliance.size(); ++i)
    if (rho_bar[i] > 0.5) solid.push_back(compliance[i]);
  if (solid.empty()) solid.assign(compliance.data(), compliance.data() + compliance.size());
  auto mid = solid.begin() + static_cast<std::ptrdiff_t>(solid.size() / 2);
  std::nth_element(solid.begin(), mid, solid.end());
  const double median = *mid;
  if (!(median > 0.0)) return 1.0;
  return std::log(100.0) / median;
}

SparseMatrix disc_operator(const Grid& grid, double radius, bool normalize) {
  if (!(radius > 0.0)) throw InputError("region radius must be positive");
  const int reach = static_cast<int>(std::ceil(radius));
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<int> cols;
  for (int ix = 0; ix < grid.nelx; ++ix) {
    for (int r = 0; r < grid.nely; ++r) {
      cols.clear();
      for (int dx = -reach; dx <= reach; ++dx)
        for (int dy = -reach; dy <= reach; ++dy) {
          if (std::hypot(dx, dy) >= radius) continue;
          const int jx = ix + dx, jr = r + dy;
          if (jx < 0 || jx >= grid.nelx || jr < 0 || jr >= grid.nely) continue;
          cols.push_back(grid.element(jx, jr));
        }
      const double w = normalize ? 1.0 / static_cast<double>(cols.size()) : 1.0;
      for (int j : cols) triplets.emplace_back(grid.element(ix, r), j, w);
    }
  }
  SparseMatrix d(grid.elements(), grid.elements());
  d.setFromTriplets(triplets.begin(), triplets.end());
  d.makeCompressed();
  return d;
}

Vector disc_max(const SparseMatrix& disc, const Vector& v) {
  // column-major storage: column j lists the rows whose disc contains j
  Vector out = Vector::Constant(disc.rows(), -std::numeric_limits<double>::infinity());
  for (int j = 0; j < disc.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(disc, j); it; ++it) out[it.row()] = std::max(out[it.row()], v[j]);
  return out;
}

TriangleDetection detect_triangles(const Grid& grid, const Vector& s, const Vector& compliance,
                                   const Vector& rho_bar, double filter_radius, double beta, double mu,
                                   const DetectionSpec& spec) {
  const int n = grid.elements();
  if (s.size() != n || compliance.size() != n || rho_bar.size() != n)
    throw InputError("detection inputs must all have one entry per element");
  TriangleDetection out;
  out.eps_c = spec.eps_c > 0.0 ? spec.eps_c : default_compliance_scale(compliance, rho_bar);
  out.eps_v = spec.eps_v > 0.0 ? spec.eps_v : default_void_threshold(spec.alpha);
  const double radius = spec.region_radius > 0.0 ? spec.region_radius : filter_radius;

  out.c_p = (-out.eps_c * compliance.array().max(0.0)).exp().matrix();
  const SparseMatrix region = disc_operator(grid, radius, true);
  const Vector void_fraction = region * (Vector::Ones(n) - rho_bar);
  out.I_v = project(void_fraction.cwiseMax(0.0).cwiseMin(1.0), beta, out.eps_v);
  if (spec.printed_void_test) out.I_v = (Vector::Ones(n) - out.I_v).eval();

  out.I_t = s.cwiseProduct(out.c_p).cwiseProduct(out.I_v);
  if (spec.material_only) out.I_t = out.I_t.cwiseProduct(rho_bar.cwiseMax(0.0).cwiseMin(1.0));
  const Vector sharp = project(out.I_t.cwiseMax(0.0).cwiseMin(1.0), beta, mu);
  out.I_r = disc_max(disc_operator(grid, filter_radius, false), sharp);
  out.flagged = static_cast<int>((out.I_r.array() > 0.5).count());
  return out;
}

Vector remove_triangles(const Vector& rho, const Vector& I_r) {
  if (rho.size() != I_r.size()) throw InputError("removal indicator length does not match design");
  return (rho - I_r).cwiseMax(0.0).cwiseMin(1.0);
}

}  // namespace topam
