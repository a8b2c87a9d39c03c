#pragma once

#include <numbers>
#include <vector>

#include "topam/grid_fem.hpp"
#include "topam/overhang.hpp"
#include "topam/selfsupport.hpp"

namespace topam::testing {

/// A bar in uniform tension with an unloaded 45 degree triangle hanging
/// below it, apex down.
struct HangingTriangle {
  Grid grid;
  Vector rho;
  std::vector<int> bar, triangle;
  LoadCase load;
  double filter_radius = 3.0;
  double beta = 38.0;
  double mu = 0.75;

  explicit HangingTriangle(int height = 4, int width = 40, int bar_rows = 10)
      : grid(width, bar_rows + height + 6), rho(Vector::Zero(grid.elements())) {
    for (int ix = 0; ix < width; ++ix)
      for (int r = 0; r < bar_rows; ++r) {
        rho[grid.element(ix, r)] = 1.0;
        bar.push_back(grid.element(ix, r));
      }
    const int c0 = width / 2 - height, c1 = width / 2 + height - 1;
    for (int k = 0; k < height; ++k)
      for (int ix = c0 + k; ix <= c1 - k; ++ix) {
        rho[grid.element(ix, bar_rows + k)] = 1.0;
        triangle.push_back(grid.element(ix, bar_rows + k));
      }
    for (int r = 0; r <= bar_rows; ++r) {
      load.fixed_dofs.push_back(2 * grid.node(0, r));
      load.forces.emplace_back(2 * grid.node(width, r), (r == 0 || r == bar_rows) ? 0.5 : 1.0);
    }
    load.fixed_dofs.push_back(2 * grid.node(0, bar_rows / 2) + 1);
  }

  TriangleDetection detect(const DetectionSpec& spec = {}) const {
    const FemSolution sol = assemble_and_solve(grid, MaterialModel{}, rho, load);
    const PrewittOperator pw = build_prewitt(grid);
    const auto [dx, dy] = pw.gradient(rho);
    const GradientField gf = normalize(dx, dy, 0.9);
    const Vector s = local_constraints(gf, BuildFrame::at(0.0, std::numbers::pi / 4)).s;
    return detect_triangles(grid, s, sol.element_energy, rho, filter_radius, beta, mu, spec);
  }
};

}  // namespace topam::testing
