#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "topam/config.hpp"
#include "topam/problems.hpp"
#include "topam/projection.hpp"

namespace topam {

/// Continuation state for one iteration (1-based).
struct ScheduleState {
  double eta = 1.0;         // SIMP exponent
  double beta = 1.0;        // projection sharpness
  double move_limit = 0.7;
  double eps_n = 0.3;
  bool free_window = false;  // inside an unconstrained window before an increase
};

/// Move limit interpolated linearly in the SIMP exponent between
/// (1, at_eta1) and (2, at_eta2), clamped to the range of the two.
double move_limit_for(double eta, double at_eta1 = 0.7, double at_eta2 = 0.1);

ScheduleState schedule_at(const RunConfig& cfg, int iteration);

/// V*_dil = (sum rho_dil / sum rho_int) V*_int; returns `previous` when the
/// intermediate volume is zero.
double scale_volume_target(const Vector& rho_dil, const Vector& rho_int, double v_int, double previous);

struct IterationRecord {
  int iteration = 0;
  std::array<std::optional<double>, 3> objective;  // by Field; unset when that field was not solved
  std::vector<double> constraints;
  double vdil_target = 0.0;
  ScheduleState schedule;
  std::optional<double> theta_star;  // degrees
};

struct PpEvent {
  int iteration = 0;
  int removed = 0;
  double theta_star = 0.0;  // degrees
};

struct RunResult {
  RunConfig config;
  ProblemSetup setup;
  Vector x;
  RobustFields fields;                  // final projected fields (half domain)
  std::array<double, 3> objective{};    // final compliance or output displacement per field
  std::vector<std::string> constraint_names;
  std::vector<IterationRecord> history;
  std::vector<PpEvent> pp_events;
  std::vector<double> angles;           // degrees
  Vector final_G;                       // per orientation, intermediate field
  std::optional<double> theta_star;     // degrees
  int infeasible_steps = 0;
  double seconds = 0.0;
};

using ProgressCallback = std::function<void(const IterationRecord&)>;

/// Runs the full continuation loop. Throws NumericalError when a field,
/// objective or sensitivity turns non-finite.
RunResult run_optimization(const RunConfig& cfg, const ProgressCallback& progress = {});

/// Robust fields of a design, with passive elements held solid.
RobustFields robust_fields(const Vector& x, const FilterOperator& filter, const ProjectionSpec& spec,
                           const std::vector<int>& passive);

}  // namespace topam
