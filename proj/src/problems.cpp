#include "topam/problems.hpp"

#include <algorithm>
#include <cmath>

namespace topam {

std::vector<int> elements_near_node(const Grid& grid, int node, double radius) {
  const int ix = node / (grid.nely + 1);
  const int r = node % (grid.nely + 1);
  const double x = ix, y = grid.nely - r;
  std::vector<int> out;
  if (radius <= 0.0) return out;
  for (int e = 0; e < grid.elements(); ++e)
    if (std::hypot(grid.centroid_x(e) - x, grid.centroid_y(e) - y) <= radius) out.push_back(e);
  return out;
}

ProblemSetup cantilever_problem(int nelx, int nely, double force) {
  ProblemSetup s;
  s.grid = Grid(nelx, nely);
  for (int r = 0; r <= nely; ++r) {
    s.load.fixed_dofs.push_back(2 * s.grid.node(0, r));
    s.load.fixed_dofs.push_back(2 * s.grid.node(0, r) + 1);
  }
  s.load.forces.emplace_back(2 * s.grid.node(nelx, nely / 2) + 1, -force);
  s.filter_edges = {EdgeTreatment::Fix, EdgeTreatment::Extend, EdgeTreatment::Extend, EdgeTreatment::Extend};
  return s;
}

ProblemSetup mbb_problem(int nelx, int nely, double force) {
  ProblemSetup s;
  s.grid = Grid(nelx, nely);
  for (int r = 0; r <= nely; ++r) s.load.fixed_dofs.push_back(2 * s.grid.node(0, r));
  s.load.fixed_dofs.push_back(2 * s.grid.node(nelx, nely) + 1);
  s.load.forces.emplace_back(2 * s.grid.node(0, 0) + 1, -force);
  s.filter_edges = {EdgeTreatment::Mirror, EdgeTreatment::Extend, EdgeTreatment::Extend, EdgeTreatment::Extend};
  s.ghosts = {GhostTreatment::Mirror, GhostTreatment::Solid, GhostTreatment::Solid, GhostTreatment::Solid};
  s.symmetry = SymmetryAxis::Vertical;
  s.symmetry_edge = Edge::Left;
  return s;
}

ProblemSetup inverter_problem(int nelx, int nely, double force, double spring_in, double spring_out) {
  ProblemSetup s;
  s.grid = Grid(nelx, nely);
  s.kind = ObjectiveKind::Mechanism;
  s.material.Emin = 1e-4;
  for (int ix = 0; ix <= nelx; ++ix) s.load.fixed_dofs.push_back(2 * s.grid.node(ix, 0) + 1);
  for (int r : {nely - 1, nely}) {
    if (r < 0) continue;
    s.load.fixed_dofs.push_back(2 * s.grid.node(0, r));
    s.load.fixed_dofs.push_back(2 * s.grid.node(0, r) + 1);
  }
  std::sort(s.load.fixed_dofs.begin(), s.load.fixed_dofs.end());
  s.load.fixed_dofs.erase(std::unique(s.load.fixed_dofs.begin(), s.load.fixed_dofs.end()), s.load.fixed_dofs.end());
  const int din = 2 * s.grid.node(0, 0);
  const int dout = 2 * s.grid.node(nelx, 0);
  s.load.forces.emplace_back(din, force);
  if (spring_in > 0.0) s.load.springs.emplace_back(din, spring_in);
  if (spring_out > 0.0) s.load.springs.emplace_back(dout, spring_out);
  s.load.output.emplace_back(dout, 1.0);
  s.filter_edges = {EdgeTreatment::Fix, EdgeTreatment::Extend, EdgeTreatment::Extend, EdgeTreatment::Mirror};
  s.ghosts = {GhostTreatment::Solid, GhostTreatment::Solid, GhostTreatment::Solid, GhostTreatment::Mirror};
  s.symmetry = SymmetryAxis::Horizontal;
  s.symmetry_edge = Edge::Top;
  return s;
}

ProblemSetup make_problem(const RunConfig& cfg) {
  cfg.validate();
  ProblemSetup s;
  switch (cfg.problem) {
    case ProblemKind::Cantilever: s = cantilever_problem(cfg.nelx, cfg.nely, cfg.force); break;
    case ProblemKind::Mbb: s = mbb_problem(cfg.nelx, cfg.nely, cfg.force); break;
    case ProblemKind::Inverter:
      s = inverter_problem(cfg.nelx, cfg.nely, cfg.force, cfg.spring_in, cfg.spring_out);
      break;
  }
  s.material.E0 = cfg.E0;
  s.material.Emin = cfg.emin();
  s.material.nu = cfg.nu;
  s.material.eta = cfg.eta_start;
  if (!cfg.solid_ghosts)
    for (auto& g : s.ghosts)
      if (g == GhostTreatment::Solid) g = GhostTreatment::Replicate;

  std::vector<int> anchors;
  for (const auto& [dof, v] : s.load.forces) anchors.push_back(dof / 2);
  for (const auto& [dof, v] : s.load.output) anchors.push_back(dof / 2);
  std::vector<int> passive;
  for (int node : anchors) {
    const auto near = elements_near_node(s.grid, node, cfg.passive_radius);
    passive.insert(passive.end(), near.begin(), near.end());
  }
  std::sort(passive.begin(), passive.end());
  passive.erase(std::unique(passive.begin(), passive.end()), passive.end());
  s.load.passive_solid = std::move(passive);
  return s;
}

std::pair<Vector, Grid> mirror_to_full(const ProblemSetup& setup, const Vector& field) {
  const Grid& g = setup.grid;
  if (field.size() != g.elements()) throw InputError("field length does not match grid");
  if (!setup.symmetry_edge) return {field, g};
  switch (*setup.symmetry_edge) {
    case Edge::Left: {
      Grid full(2 * g.nelx, g.nely);
      Vector out(full.elements());
      for (int c = 0; c < full.nelx; ++c)
        for (int r = 0; r < g.nely; ++r) {
          const int src = c < g.nelx ? g.nelx - 1 - c : c - g.nelx;
          out[full.element(c, r)] = field[g.element(src, r)];
        }
      return {out, full};
    }
    case Edge::Top: {
      Grid full(g.nelx, 2 * g.nely);
      Vector out(full.elements());
      for (int c = 0; c < g.nelx; ++c)
        for (int r = 0; r < full.nely; ++r) {
          const int src = r < g.nely ? g.nely - 1 - r : r - g.nely;
          out[full.element(c, r)] = field[g.element(c, src)];
        }
      return {out, full};
    }
    case Edge::Right: {
      Grid full(2 * g.nelx, g.nely);
      Vector out(full.elements());
      for (int c = 0; c < full.nelx; ++c)
        for (int r = 0; r < g.nely; ++r) {
          const int src = c < g.nelx ? c : 2 * g.nelx - 1 - c;
          out[full.element(c, r)] = field[g.element(src, r)];
        }
      return {out, full};
    }
    case Edge::Bottom: {
      Grid full(g.nelx, 2 * g.nely);
      Vector out(full.elements());
      for (int c = 0; c < g.nelx; ++c)
        for (int r = 0; r < full.nely; ++r) {
          const int src = r < g.nely ? r : 2 * g.nely - 1 - r;
          out[full.element(c, r)] = field[g.element(c, src)];
        }
      return {out, full};
    }
  }
  return {field, g};
}

}  // namespace topam
