#pragma once

#include <optional>
#include <vector>

#include "topam/config.hpp"
#include "topam/filter.hpp"
#include "topam/grid_fem.hpp"
#include "topam/overhang.hpp"

namespace topam {

/// Everything the optimizer needs to know about one benchmark.
struct ProblemSetup {
  Grid grid;
  MaterialModel material;
  LoadCase load;
  ObjectiveKind kind = ObjectiveKind::Compliance;
  EdgeTreatments filter_edges = kExtendAll;
  GhostTreatments ghosts = kSolidGhosts;
  SymmetryAxis symmetry = SymmetryAxis::None;
  std::optional<Edge> symmetry_edge;  // edge the model is mirrored across
};

/// Cantilever: left edge clamped, unit downward load at mid-height of the
/// right edge.
ProblemSetup cantilever_problem(int nelx, int nely, double force = 1.0);

/// Half MBB beam: symmetry on the left edge, load on top at the symmetry
/// line, roller at the bottom-right corner.
ProblemSetup mbb_problem(int nelx, int nely, double force = 1.0);

/// Half force inverter: symmetry on the top edge, input force and spring at
/// the top-left node, output spring at the top-right node, bottom-left
/// corner clamped.
ProblemSetup inverter_problem(int nelx, int nely, double force = 1.0, double spring_in = 1.0,
                              double spring_out = 1.0);

/// Elements whose centroid lies within `radius` of a node.
std::vector<int> elements_near_node(const Grid& grid, int node, double radius);

/// Builds the setup described by a run configuration, including passive
/// solid discs around the load and output points.
ProblemSetup make_problem(const RunConfig& cfg);

/// Expands a half-domain field to the full structure by mirroring across
/// the symmetry edge. Returns the field and its grid.
std::pair<Vector, Grid> mirror_to_full(const ProblemSetup& setup, const Vector& field);

}  // namespace topam
