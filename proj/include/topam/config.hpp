#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "topam/errors.hpp"

namespace topam {

enum class ProblemKind { Cantilever, Mbb, Inverter };

const char* problem_name(ProblemKind kind);

/// Which robust fields carry the overhang constraint.
enum class FieldRule { Auto, All, Dilated, IntermediateDilated };

/// How `count` orientations are laid out when no explicit list is given.
///   Full:       360 (k-1) / m
///   HalfClosed: 180 (k-1) / (m-1), both ends included
///   HalfOpen:   -90 + 180 (k-1) / m
enum class OrientationLayout { Auto, Full, HalfClosed, HalfOpen };

struct RunConfig {
  std::string preset;

  // [problem]
  ProblemKind problem = ProblemKind::Cantilever;
  int nelx = 200;
  int nely = 100;
  double volfrac = 0.4;
  bool volume_equality = false;  // also bound the dilated volume from below
  double r_min = 3.0;
  double passive_radius = 3.0;
  double force = 1.0;       // load magnitude (input force for the inverter)
  double spring_in = 1.0;   // inverter input spring
  double spring_out = 1.0;  // inverter output spring

  // [material]
  double E0 = 1.0;
  std::optional<double> Emin;  // defaults per problem
  double nu = 0.3;

  // [projection]
  double mu_ero = 0.75;
  double mu_int = 0.50;
  double mu_dil = 0.25;

  // [schedule]
  int max_iters = 340;
  int continuation_every = 40;
  double eta_start = 1.0;
  double eta_step = 0.125;
  double beta_start = 1.0;
  double beta_factor = 1.5;
  int volume_update_every = 10;
  double move_at_eta1 = 0.7;
  double move_at_eta2 = 0.1;
  double objective_scale = 10.0;
  double constraint_scale = 1.0;

  // [overhang]
  bool overhang = false;
  double alpha_deg = 45.0;
  std::vector<double> angles_deg;  // explicit list, overrides count
  int count = 0;
  OrientationLayout layout = OrientationLayout::Auto;
  double p = 60.0;
  double r = 20.0;
  double active_fraction = 0.1;
  int active_threshold = 100;
  double eps_n_ini = 0.3;
  double eps_n_end = 0.9;
  FieldRule fields = FieldRule::Auto;
  bool solid_ghosts = true;  // out-of-domain Prewitt cells act as base plate
  bool lower_base_plate = true;  // only edges below the part support it; false: every edge
  bool fix_base_plate_filter = true;  // base-plate edges use the fixed-edge filter instead of the extended one

  // [free_evolution]
  bool free_evolution = true;
  int it_free = 10;
  double eps_m = 0.5;
  bool invert_surface_test = false;

  // [postprocess]
  bool postprocess = true;
  int pp_max_events = 1;
  double pp_eta = 1.5;
  double pp_beta = 5.0;
  double pp_mu = 0.75;
  double eps_c = 0.0;  // 0 selects the median-based default
  double eps_v = 0.0;  // 0 selects the default for alpha
  double region_radius = 0.0;
  bool printed_void_test = false;

  // [maxsize]
  bool maxsize = false;
  double r_max = 4.5;
  double eps_ms = 0.05;
  bool grow_dilated_maxsize = true;  // dilated disc radius r_max plus the intermediate-to-dilated edge offset
  double p_ms = 60.0;

  // [output]
  std::string out_dir = "run";
  bool log_all_fields = false;
  int seed = 0;

  double filter_radius() const { return 2.0 * r_min; }
  double emin() const;
  /// Orientation angles in degrees after layout expansion.
  std::vector<double> orientation_angles() const;
  void validate() const;
};

/// Names of the shipped presets, in a stable order.
std::vector<std::string> preset_names();

/// Applies a named preset on top of the defaults.
RunConfig preset_config(const std::string& name);

/// Parses the structured-text format. `base` supplies values for keys that
/// the text does not set; a `preset` key resets the base to that preset
/// before the remaining keys are applied.
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>",
                       std::optional<RunConfig> base = std::nullopt, bool honor_preset_key = true);

RunConfig load_config(const std::string& path, std::optional<std::string> preset = std::nullopt);

/// Writes the config back in the same format, every key explicit.
std::string format_config(const RunConfig& cfg);

/// Comma separated list of numbers.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace topam
