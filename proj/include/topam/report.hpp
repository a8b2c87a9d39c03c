#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "topam/optimizer.hpp"

namespace topam {

struct PrintabilityReport {
  std::vector<double> angles;        // degrees
  Vector G;                          // per orientation on the intermediate field
  std::optional<double> theta_star;  // degrees
  double check_angle = 0.0;          // build direction used for the surface check, degrees
  double eps_n = 0.0;
  double tolerance = 0.02;
  int surface_elements = 0;
  int violating = 0;
  double violation_fraction = 0.0;
  std::vector<PpEvent> pp_events;
  double min_member_size = 0.0;  // element units, estimate
};

/// Surface check of a final intermediate field. Symmetric models are
/// expanded to the full structure first; the build direction is theta* when
/// orientations are configured and 0 (+y) otherwise.
PrintabilityReport assess_printability(const RunConfig& cfg, const ProblemSetup& setup, const Vector& rho_int,
                                       std::vector<PpEvent> pp_events = {});

/// Twice the largest inscribed radius, minimized over the solid phase
/// (rho > 0.5). Zero when there is no solid; the domain size when there is
/// no void.
double min_member_size(const Grid& grid, const Vector& rho);

std::string format_report(const PrintabilityReport& report);

/// Comma separated convergence log, one row per iteration.
std::string format_log(const RunResult& run);

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first
};

/// floor(255 (1 - rho)) clamped to [0, 255]: solid is black.
std::uint8_t gray_level(double rho);

GrayImage to_image(const Grid& grid, const Vector& rho);
void write_pgm(const std::string& path, const GrayImage& image);
void write_pgm(const std::string& path, const Grid& grid, const Vector& rho);
GrayImage read_pgm(const std::string& path);

void write_field(const std::string& path, const Grid& grid, const Vector& field);
std::pair<Grid, Vector> read_field(const std::string& path);

/// Writes config, log, fields, images and the printability report into dir.
PrintabilityReport write_run(const RunResult& run, const std::string& dir);

/// Recomputes the printability report from the files written by write_run
/// and rewrites report.txt.
PrintabilityReport report_from_dir(const std::string& dir);

}  // namespace topam
