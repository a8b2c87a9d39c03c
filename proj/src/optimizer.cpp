#include "topam/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "topam/maxsize.hpp"
#include "topam/mma.hpp"
#include "topam/selfsupport.hpp"

namespace topam {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<Field> overhang_fields(const RunConfig& cfg) {
  switch (cfg.fields) {
    case FieldRule::All: return {Field::Eroded, Field::Intermediate, Field::Dilated};
    case FieldRule::Dilated: return {Field::Dilated};
    case FieldRule::IntermediateDilated: return {Field::Intermediate, Field::Dilated};
    case FieldRule::Auto: break;
  }
  if (cfg.maxsize) return {Field::Intermediate, Field::Dilated};
  if (cfg.r_min <= 3.0 + 1e-12) return {Field::Eroded, Field::Intermediate, Field::Dilated};
  return {Field::Dilated};
}

void check_finite(const Vector& v, const std::string& what, int it) {
  if (!v.allFinite()) throw NumericalError(what + " became non-finite at iteration " + std::to_string(it));
}

void check_finite(double v, const std::string& what, int it) {
  if (!std::isfinite(v)) throw NumericalError(what + " became non-finite at iteration " + std::to_string(it));
}

int argmin_first(const Vector& v) {
  int best = 0;
  for (int k = 1; k < v.size(); ++k)
    if (v[k] < v[best]) best = k;
  return best;
}

}  // namespace

double move_limit_for(double eta, double at_eta1, double at_eta2) {
  const double m = (at_eta1 - at_eta2) / (1.0 - 2.0) * (eta - 2.0) + at_eta2;
  return std::clamp(m, std::min(at_eta1, at_eta2), std::max(at_eta1, at_eta2));
}

ScheduleState schedule_at(const RunConfig& cfg, int iteration) {
  ScheduleState s;
  const int stage = (iteration - 1) / cfg.continuation_every;
  s.eta = cfg.eta_start + cfg.eta_step * stage;
  s.beta = cfg.beta_start * std::pow(cfg.beta_factor, stage);
  s.move_limit = move_limit_for(s.eta, cfg.move_at_eta1, cfg.move_at_eta2);
  const double frac = cfg.max_iters > 1 ? double(iteration - 1) / double(cfg.max_iters - 1) : 1.0;
  s.eps_n = cfg.eps_n_ini + (cfg.eps_n_end - cfg.eps_n_ini) * std::clamp(frac, 0.0, 1.0);
  const int next_increase = (stage + 1) * cfg.continuation_every;
  s.free_window = cfg.free_evolution && cfg.it_free > 0 && next_increase < cfg.max_iters &&
                  iteration > next_increase - cfg.it_free;
  return s;
}

double scale_volume_target(const Vector& rho_dil, const Vector& rho_int, double v_int, double previous) {
  const double vi = rho_int.sum();
  if (!(vi > 0.0)) return previous;
  return rho_dil.sum() / vi * v_int;
}

RobustFields robust_fields(const Vector& x, const FilterOperator& filter, const ProjectionSpec& spec,
                           const std::vector<int>& passive) {
  RobustFields f = project_all(filter.apply(x), spec);
  for (int i = 0; i < 3; ++i)
    for (int e : passive) {
      f.rho[i][e] = 1.0;
      f.slope[i][e] = 0.0;
    }
  return f;
}

RunResult run_optimization(const RunConfig& cfg, const ProgressCallback& progress) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  res.config = cfg;
  res.setup = make_problem(cfg);
  const ProblemSetup& setup = res.setup;
  const Grid& grid = setup.grid;
  const int n = grid.elements();
  const std::vector<int>& passive = setup.load.passive_solid;
  const bool mechanism = setup.kind == ObjectiveKind::Mechanism;

  const PrewittOperator prewitt = build_prewitt(grid, setup.ghosts);
  FemAnalysis fem(grid, setup.material, setup.load);

  res.angles = cfg.orientation_angles();
  OrientationSet oset;
  if (!res.angles.empty()) {
    for (double a : res.angles) oset.theta.push_back(a * kDeg);
    oset.alpha = cfg.alpha_deg * kDeg;
    oset.p = cfg.p;
    oset.r = cfg.r;
    oset.active_fraction = cfg.active_fraction;
    oset.active_threshold = cfg.active_threshold;
    oset.symmetry = setup.symmetry;
    oset.validate();
  }
  const std::vector<Field> oh_fields = cfg.overhang ? overhang_fields(cfg) : std::vector<Field>{};
  const BasePlate plate = cfg.lower_base_plate ? BasePlate::Lower : BasePlate::All;

  // Extended filter edges leave a thin soft layer along the boundary, which
  // a member resting on the base plate would have to overhang.
  EdgeTreatments filter_edges = setup.filter_edges;
  if (cfg.overhang && cfg.fix_base_plate_filter && !res.angles.empty()) {
    const unsigned support = supporting_edges(oset, plate);
    for (unsigned e = 0; e < 4; ++e)
      if ((support >> e & 1u) && filter_edges[e] == EdgeTreatment::Extend) filter_edges[e] = EdgeTreatment::Fix;
  }
  const FilterOperator filter = build_filter(grid, cfg.filter_radius(), filter_edges);

  // r_max sizes members of the intermediate design; the dilated test disc
  // grows by the distance between the two contours of a filtered edge.
  std::vector<MaxSizeOperator> maxsize;
  const std::vector<Field> ms_fields = {Field::Intermediate, Field::Dilated};
  if (cfg.maxsize) {
    for (Field f : ms_fields) {
      double radius = cfg.r_max;
      if (f == Field::Dilated && cfg.grow_dilated_maxsize)
        radius += contour_offset(cfg.filter_radius(), cfg.mu_int, cfg.mu_dil);
      maxsize.emplace_back(grid, MaxSizeSpec{radius, cfg.eps_ms, cfg.p_ms});
    }
  }

  // Constraint roster.
  std::vector<Field> obj_fields = mechanism ? std::vector<Field>{Field::Eroded, Field::Dilated}
                                            : std::vector<Field>{Field::Eroded};
  if (mechanism)
    for (Field f : obj_fields) res.constraint_names.push_back(std::string("u_") + field_name(f));
  const int vol_row = static_cast<int>(res.constraint_names.size());
  res.constraint_names.push_back("volume");
  const int vol_min_row = cfg.volume_equality ? static_cast<int>(res.constraint_names.size()) : -1;
  if (cfg.volume_equality) res.constraint_names.push_back("volume_min");
  const int oh_row = static_cast<int>(res.constraint_names.size());
  for (Field f : oh_fields) res.constraint_names.push_back(std::string("overhang_") + field_name(f));
  const int ms_row = static_cast<int>(res.constraint_names.size());
  if (!maxsize.empty())
    for (Field f : ms_fields) res.constraint_names.push_back(std::string("maxsize_") + field_name(f));
  const int m = static_cast<int>(res.constraint_names.size());

  Mma mma(n, m);
  if (mechanism) {
    Vector a = Vector::Zero(m);
    a.head(static_cast<int>(obj_fields.size())).setOnes();
    mma.set_a(a);
  }

  Vector x = Vector::Constant(n, cfg.volfrac);
  Vector xmin = Vector::Zero(n), xmax = Vector::Ones(n);
  for (int e : passive) {
    x[e] = 1.0;
    xmin[e] = 1.0;
  }

  FreeEvolutionSpec fe_spec;
  fe_spec.it_free = cfg.it_free;
  fe_spec.eps_m = cfg.eps_m;
  fe_spec.invert_surface_test = cfg.invert_surface_test;

  double vdil = cfg.volfrac;
  double obj_norm = 0.0;
  ProjectionSpec pspec{1.0, cfg.mu_ero, cfg.mu_int, cfg.mu_dil};

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const ScheduleState sch = schedule_at(cfg, it);
    pspec.beta = sch.beta;
    MaterialModel mat = setup.material;
    mat.eta = sch.eta;
    fem.set_material(mat);

    // Scheduled removal of unsupported triangles, applied to the current design.
    if (cfg.overhang && cfg.postprocess && !oset.theta.empty() &&
        static_cast<int>(res.pp_events.size()) < cfg.pp_max_events && sch.eta >= cfg.pp_eta - 1e-12 &&
        sch.beta >= cfg.pp_beta) {
      const RobustFields pf = robust_fields(x, filter, pspec, passive);
      const Vector& ri = pf[Field::Intermediate];
      const SurfaceFields sf(prewitt, ri, sch.eps_n, plate);
      const int best = argmin_first(orientation_values(sf, oset));
      const BuildFrame fb = BuildFrame::at(oset.theta[best], oset.alpha);
      Vector s = local_constraints(sf.at(fb), fb).s;
      if (setup.symmetry != SymmetryAxis::None) {
        const BuildFrame fm = BuildFrame::at(mirror_angle(oset.theta[best], setup.symmetry), oset.alpha);
        s = s.cwiseMax(local_constraints(sf.at(fm), fm).s);
      }
      const FemSolution sol = fem.solve(ri, setup.kind);
      DetectionSpec ds;
      ds.eps_c = cfg.eps_c;
      ds.eps_v = cfg.eps_v;
      ds.region_radius = cfg.region_radius;
      ds.alpha = oset.alpha;
      ds.printed_void_test = cfg.printed_void_test;
      const TriangleDetection det =
          detect_triangles(grid, s, sol.element_energy, ri, cfg.filter_radius(), sch.beta, cfg.pp_mu, ds);
      Vector xr = remove_triangles(x, det.I_r);
      for (int e : passive) xr[e] = 1.0;
      int removed = 0;
      for (int e = 0; e < n; ++e)
        if (x[e] > 0.5 && xr[e] <= 0.5) ++removed;
      x = xr;
      res.pp_events.push_back({it, removed, res.angles[best]});
      mma.reset();
    }

    const RobustFields rf = robust_fields(x, filter, pspec, passive);
    for (Field f : kAllFields) check_finite(rf[f], std::string("field ") + field_name(f), it);
    if ((it - 1) % cfg.volume_update_every == 0)
      vdil = scale_volume_target(rf[Field::Dilated], rf[Field::Intermediate], cfg.volfrac, vdil);

    IterationRecord rec;
    rec.iteration = it;
    rec.schedule = sch;
    rec.vdil_target = vdil;

    Vector fval = Vector::Zero(m);
    Eigen::MatrixXd dfdx = Eigen::MatrixXd::Zero(m, n);
    double f0 = 0.0;
    Vector df0 = Vector::Zero(n);

    // Objective.
    std::vector<Field> solve_fields = obj_fields;
    if (cfg.log_all_fields) solve_fields = {Field::Eroded, Field::Intermediate, Field::Dilated};
    else if (!mechanism) solve_fields.push_back(Field::Intermediate);
    std::array<double, 2> mech_val{};
    std::array<Vector, 2> mech_grad;
    for (Field f : solve_fields) {
      const Vector& rho = rf[f];
      FemSolution sol = fem.solve(rho, setup.kind);
      check_finite(sol.objective, std::string("objective ") + field_name(f), it);
      rec.objective[static_cast<int>(f)] = sol.objective;
      const auto pos = std::find(obj_fields.begin(), obj_fields.end(), f);
      if (pos == obj_fields.end()) continue;
      const Vector& dc = fem.sensitivity(sol, rho, setup.kind);
      Vector g = filter.apply_transpose(dc.cwiseProduct(rf.derivative(f)));
      check_finite(g, std::string("sensitivity ") + field_name(f), it);
      if (obj_norm == 0.0) obj_norm = std::max(std::abs(sol.objective), 1e-300);
      if (mechanism) {
        const int k = static_cast<int>(pos - obj_fields.begin());
        mech_val[k] = cfg.objective_scale * sol.objective / obj_norm;
        mech_grad[k] = cfg.objective_scale / obj_norm * g;
      } else {
        f0 = cfg.objective_scale * sol.objective / obj_norm;
        df0 = cfg.objective_scale / obj_norm * g;
      }
    }
    if (mechanism) {
      // Bound formulation: min z with L.u_f - z <= 0. The common shift keeps
      // z positive without changing the subproblem minimizer.
      const double hi = std::max(std::abs(mech_val[0]), std::abs(mech_val[1]));
      const double shift = std::max(1.0, 2.0 * hi);
      for (int k = 0; k < 2; ++k) {
        fval[k] = mech_val[k] + shift;
        dfdx.row(k) = mech_grad[k].transpose();
      }
    }

    // Volume on the dilated field.
    {
      const Vector& rd = rf[Field::Dilated];
      fval[vol_row] = cfg.constraint_scale * (rd.mean() / vdil - 1.0);
      dfdx.row(vol_row) =
          (cfg.constraint_scale / (n * vdil) * filter.apply_transpose(rf.derivative(Field::Dilated))).transpose();
      if (vol_min_row >= 0) {
        fval[vol_min_row] = -fval[vol_row];
        dfdx.row(vol_min_row) = -dfdx.row(vol_row);
      }
    }

    // Overhang and orientation monitor.
    Vector move = Vector::Constant(n, sch.move_limit);
    if (!oset.theta.empty()) {
      const SurfaceFields si(prewitt, rf[Field::Intermediate], sch.eps_n, plate);
      const int best = argmin_first(orientation_values(si, oset));
      rec.theta_star = res.angles[best];
      if (cfg.overhang && sch.free_window)
        move = free_evolution_move_limits(si.at(BuildFrame::at(oset.theta[best], oset.alpha)), fe_spec);
      for (std::size_t k = 0; k < oh_fields.size(); ++k) {
        const int row = oh_row + static_cast<int>(k);
        if (sch.free_window) {
          fval[row] = -1.0;
          continue;
        }
        const Field f = oh_fields[k];
        const SurfaceFields sf(prewitt, rf[f], sch.eps_n, plate);
        const OverhangEval ev = multi_orientation(sf, oset, prewitt, filter, rf.derivative(f));
        check_finite(ev.aggregate, "overhang constraint", it);
        check_finite(ev.gradient, "overhang sensitivity", it);
        fval[row] = cfg.constraint_scale * ev.aggregate;
        dfdx.row(row) = cfg.constraint_scale * ev.gradient.transpose();
      }
    }
    for (int e : passive) move[e] = 0.0;

    // Maximum size on the intermediate and dilated fields.
    if (!maxsize.empty()) {
      for (std::size_t k = 0; k < ms_fields.size(); ++k) {
        const Field f = ms_fields[k];
        Vector d;
        const double v = maxsize[k].evaluate(rf[f], &d);
        check_finite(v, "maxsize constraint", it);
        fval[ms_row + static_cast<int>(k)] = cfg.constraint_scale * v;
        dfdx.row(ms_row + static_cast<int>(k)) =
            (cfg.constraint_scale * filter.apply_transpose(d.cwiseProduct(rf.derivative(f)))).transpose();
      }
    }

    for (int i = 0; i < m; ++i) rec.constraints.push_back(i < static_cast<int>(obj_fields.size()) && mechanism
                                                              ? *rec.objective[static_cast<int>(obj_fields[i])]
                                                              : fval[i] / cfg.constraint_scale);
    res.history.push_back(rec);
    if (progress) progress(rec);

    x = mma.update(x, f0, df0, fval, dfdx, xmin, xmax, move);
    check_finite(x, "design", it);
    if (mma.infeasible()) ++res.infeasible_steps;
  }

  // Final evaluation of all three fields at the last schedule state.
  const ScheduleState last = schedule_at(cfg, cfg.max_iters);
  pspec.beta = last.beta;
  MaterialModel mat = setup.material;
  mat.eta = last.eta;
  fem.set_material(mat);
  res.x = x;
  res.fields = robust_fields(x, filter, pspec, passive);
  for (Field f : kAllFields) {
    const FemSolution sol = fem.solve(res.fields[f], setup.kind);
    check_finite(sol.objective, "final objective", cfg.max_iters);
    res.objective[static_cast<int>(f)] = sol.objective;
  }
  if (!oset.theta.empty()) {
    res.final_G = orientation_values(SurfaceFields(prewitt, res.fields[Field::Intermediate], last.eps_n, plate), oset);
    res.theta_star = res.angles[argmin_first(res.final_G)];
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace topam
