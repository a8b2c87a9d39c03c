#include "topam/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "topam/overhang.hpp"

namespace topam {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string format_pp_events(const std::vector<PpEvent>& events) {
  std::ostringstream os;
  os << "iteration,removed,theta_star\n";
  for (const auto& e : events) os << e.iteration << "," << e.removed << "," << exact(e.theta_star) << "\n";
  return os.str();
}

std::vector<PpEvent> parse_pp_events(const std::string& text) {
  std::vector<PpEvent> out;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    PpEvent e;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &e.iteration, &e.removed, &e.theta_star) != 3)
      throw InputError("malformed post-processing event line: " + line);
    out.push_back(e);
  }
  return out;
}

}  // namespace

double min_member_size(const Grid& grid, const Vector& rho) {
  const int nx = grid.nelx, ny = grid.nely;
  const double inf = std::numeric_limits<double>::infinity();
  auto solid = [&](int ix, int r) { return rho[grid.element(ix, r)] > 0.5; };

  // Squared distance from each solid centroid to the nearest void centroid,
  // one column pass then one row pass. Outside the domain counts as solid.
  std::vector<double> col(static_cast<std::size_t>(grid.elements()), inf);
  bool any_void = false, any_solid = false;
  for (int ix = 0; ix < nx; ++ix) {
    double d = inf;
    for (int r = 0; r < ny; ++r) {
      d = solid(ix, r) ? d + 1.0 : 0.0;
      col[grid.element(ix, r)] = d;
    }
    d = inf;
    for (int r = ny - 1; r >= 0; --r) {
      d = solid(ix, r) ? d + 1.0 : 0.0;
      col[grid.element(ix, r)] = std::min(col[grid.element(ix, r)], d);
    }
    for (int r = 0; r < ny; ++r) (solid(ix, r) ? any_solid : any_void) = true;
  }
  if (!any_solid) return 0.0;
  if (!any_void) return std::max(nx, ny);

  std::vector<double> radius(col.size(), 0.0);
  double rmax = 0.0;
  for (int ix = 0; ix < nx; ++ix)
    for (int r = 0; r < ny; ++r) {
      if (!solid(ix, r)) continue;
      double best = inf;
      for (int jx = 0; jx < nx; ++jx) {
        const double c = col[grid.element(jx, r)];
        if (c == inf) continue;
        best = std::min(best, double(ix - jx) * (ix - jx) + c * c);
      }
      const double R = std::sqrt(best) - 0.5;
      radius[grid.element(ix, r)] = R;
      rmax = std::max(rmax, R);
    }

  // Local thickness: largest inscribed disc covering each solid element.
  std::vector<double> thick(col.size(), 0.0);
  const int w = static_cast<int>(std::ceil(rmax));
  for (int jx = 0; jx < nx; ++jx)
    for (int jr = 0; jr < ny; ++jr) {
      const double R = radius[grid.element(jx, jr)];
      if (!solid(jx, jr) || R <= 0.0) continue;
      const int k = std::min(w, static_cast<int>(std::floor(R)));
      for (int ix = std::max(0, jx - k); ix <= std::min(nx - 1, jx + k); ++ix)
        for (int r = std::max(0, jr - k); r <= std::min(ny - 1, jr + k); ++r) {
          if ((ix - jx) * (ix - jx) + (r - jr) * (r - jr) > R * R) continue;
          double& t = thick[grid.element(ix, r)];
          t = std::max(t, 2.0 * R);
        }
    }
  double out = inf;
  for (int e = 0; e < grid.elements(); ++e)
    if (rho[e] > 0.5) out = std::min(out, thick[e]);
  return out;
}

PrintabilityReport assess_printability(const RunConfig& cfg, const ProblemSetup& setup, const Vector& rho_int,
                                       std::vector<PpEvent> pp_events) {
  PrintabilityReport rep;
  rep.pp_events = std::move(pp_events);
  rep.angles = cfg.orientation_angles();
  rep.eps_n = cfg.eps_n_end;
  const double alpha = cfg.alpha_deg * kDeg;
  const BasePlate plate = cfg.lower_base_plate ? BasePlate::Lower : BasePlate::All;

  if (!rep.angles.empty()) {
    OrientationSet set;
    for (double a : rep.angles) set.theta.push_back(a * kDeg);
    set.alpha = alpha;
    set.p = cfg.p;
    set.r = cfg.r;
    set.symmetry = setup.symmetry;
    const PrewittOperator half = build_prewitt(setup.grid, setup.ghosts);
    rep.G = orientation_values(SurfaceFields(half, rho_int, rep.eps_n, plate), set);
    int best = 0;
    for (int k = 1; k < rep.G.size(); ++k)
      if (rep.G[k] < rep.G[best]) best = k;
    rep.theta_star = rep.angles[best];
    rep.check_angle = *rep.theta_star;
  }

  const auto [full, grid] = mirror_to_full(setup, rho_int);
  const GhostTreatment edge = cfg.solid_ghosts ? GhostTreatment::Solid : GhostTreatment::Replicate;
  GhostTreatments ghosts = setup.ghosts;
  for (auto& g : ghosts)
    if (g == GhostTreatment::Mirror) g = edge;
  const PrewittOperator prewitt = build_prewitt(grid, ghosts);
  const BuildFrame frame = BuildFrame::at(rep.check_angle * kDeg, alpha);
  const SurfaceFields fields(prewitt, full, rep.eps_n, plate);
  const GradientField& gf = fields.at(frame);
  const LocalConstraints lc = local_constraints(gf, frame);
  const Vector len = gf.norm();
  for (int e = 0; e < gf.size(); ++e) {
    if (len[e] < rep.eps_n) continue;
    ++rep.surface_elements;
    if (lc.g[e] > rep.tolerance) ++rep.violating;
  }
  rep.violation_fraction =
      rep.surface_elements > 0 ? static_cast<double>(rep.violating) / rep.surface_elements : 0.0;
  rep.min_member_size = min_member_size(grid, full);
  return rep;
}

std::string format_report(const PrintabilityReport& r) {
  std::ostringstream os;
  os << "# build angle 0 means printing along +y; angles grow counter-clockwise\n";
  os << "orientations = " << r.angles.size() << "\n";
  for (std::size_t k = 0; k < r.angles.size(); ++k)
    os << "G[" << exact(r.angles[k]) << "] = " << exact(r.G[static_cast<int>(k)]) << "\n";
  if (r.theta_star) os << "theta_star = " << exact(*r.theta_star) << "\n";
  os << "check_angle = " << exact(r.check_angle) << "\n";
  os << "eps_n = " << exact(r.eps_n) << "\n";
  os << "tolerance = " << exact(r.tolerance) << "\n";
  os << "surface_elements = " << r.surface_elements << "\n";
  os << "violating_elements = " << r.violating << "\n";
  os << "violation_fraction = " << exact(r.violation_fraction) << "\n";
  os << "min_member_size = " << exact(r.min_member_size) << "\n";
  os << "pp_events = " << r.pp_events.size() << "\n";
  for (const auto& e : r.pp_events)
    os << "pp_event = iteration " << e.iteration << ", removed " << e.removed << ", theta_star "
       << exact(e.theta_star) << "\n";
  return os.str();
}

std::string format_log(const RunResult& run) {
  std::ostringstream os;
  const bool with_theta = !run.angles.empty();
  os << "iteration,obj_ero,obj_int,obj_dil";
  for (const auto& name : run.constraint_names) os << "," << name;
  os << ",vdil_target,eta,beta,move_limit,eps_n";
  if (with_theta) os << ",theta_star";
  os << "\n";
  for (const auto& r : run.history) {
    os << r.iteration;
    for (const auto& o : r.objective) os << "," << (o ? num(*o) : "");
    for (double c : r.constraints) os << "," << num(c);
    os << "," << num(r.vdil_target) << "," << num(r.schedule.eta) << "," << num(r.schedule.beta) << ","
       << num(r.schedule.move_limit) << "," << num(r.schedule.eps_n);
    if (with_theta) os << "," << (r.theta_star ? num(*r.theta_star) : "");
    os << "\n";
  }
  return os.str();
}

std::uint8_t gray_level(double rho) {
  const double v = std::floor(255.0 * (1.0 - rho));
  return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

GrayImage to_image(const Grid& grid, const Vector& rho) {
  if (rho.size() != grid.elements()) throw InputError("field length does not match grid");
  GrayImage img;
  img.width = grid.nelx;
  img.height = grid.nely;
  img.pixels.resize(static_cast<std::size_t>(grid.elements()));
  for (int r = 0; r < grid.nely; ++r)
    for (int ix = 0; ix < grid.nelx; ++ix)
      img.pixels[static_cast<std::size_t>(r) * grid.nelx + ix] = gray_level(rho[grid.element(ix, r)]);
  return img;
}

void write_pgm(const std::string& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image '" + path + "'");
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw std::runtime_error("write failed for image '" + path + "'");
}

void write_pgm(const std::string& path, const Grid& grid, const Vector& rho) {
  write_pgm(path, to_image(grid, rho));
}

GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open image '" + path + "'");
  std::string magic;
  GrayImage img;
  int maxval = 0;
  in >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || img.width <= 0 || img.height <= 0 || maxval != 255)
    throw InputError("'" + path + "' is not an 8-bit P5 graymap");
  in.get();
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (!in) throw InputError("truncated image '" + path + "'");
  return img;
}

void write_field(const std::string& path, const Grid& grid, const Vector& field) {
  std::ostringstream os;
  os << grid.nelx << " " << grid.nely << "\n";
  for (int e = 0; e < field.size(); ++e) os << exact(field[e]) << "\n";
  write_text(path, os.str());
}

std::pair<Grid, Vector> read_field(const std::string& path) {
  std::istringstream in(read_text(path));
  int nx = 0, ny = 0;
  if (!(in >> nx >> ny)) throw InputError("missing grid header in '" + path + "'");
  Grid g(nx, ny);
  Vector v(g.elements());
  for (int e = 0; e < g.elements(); ++e)
    if (!(in >> v[e])) throw InputError("field file '" + path + "' is truncated");
  return {g, v};
}

PrintabilityReport write_run(const RunResult& run, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_text(join(dir, "config.ini"), format_config(run.config));
  write_text(join(dir, "log.csv"), format_log(run));
  write_text(join(dir, "pp_events.csv"), format_pp_events(run.pp_events));
  write_field(join(dir, "x.txt"), run.setup.grid, run.x);
  for (Field f : kAllFields) {
    const std::string name = field_name(f);
    write_field(join(dir, name + ".txt"), run.setup.grid, run.fields[f]);
    const auto [full, grid] = mirror_to_full(run.setup, run.fields[f]);
    write_pgm(join(dir, name + ".pgm"), grid, full);
  }

  std::ostringstream sum;
  sum << "problem = " << problem_name(run.config.problem) << "\n";
  for (Field f : kAllFields)
    sum << "objective_" << field_name(f) << " = " << exact(run.objective[static_cast<int>(f)]) << "\n";
  if (run.theta_star) sum << "theta_star = " << exact(*run.theta_star) << "\n";
  sum << "iterations = " << run.history.size() << "\n";
  sum << "infeasible_steps = " << run.infeasible_steps << "\n";
  sum << "seconds = " << num(run.seconds) << "\n";
  write_text(join(dir, "summary.txt"), sum.str());

  const PrintabilityReport rep =
      assess_printability(run.config, run.setup, run.fields[Field::Intermediate], run.pp_events);
  write_text(join(dir, "report.txt"), format_report(rep));
  return rep;
}

PrintabilityReport report_from_dir(const std::string& dir) {
  const RunConfig cfg = parse_config(read_text(join(dir, "config.ini")), join(dir, "config.ini"));
  const ProblemSetup setup = make_problem(cfg);
  const auto [grid, rho] = read_field(join(dir, "int.txt"));
  if (grid.nelx != setup.grid.nelx || grid.nely != setup.grid.nely)
    throw InputError("intermediate field does not match the configured grid");
  std::vector<PpEvent> events;
  if (std::filesystem::exists(join(dir, "pp_events.csv"))) events = parse_pp_events(read_text(join(dir, "pp_events.csv")));
  const PrintabilityReport rep = assess_printability(cfg, setup, rho, std::move(events));
  write_text(join(dir, "report.txt"), format_report(rep));
  return rep;
}

}  // namespace topam
