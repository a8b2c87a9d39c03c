#include <doctest.h>

#include <cmath>

#include "topam/optimizer.hpp"
#include "topam/report.hpp"

using namespace topam;

namespace {

RunConfig small_cantilever(int iters) {
  RunConfig cfg;
  cfg.nelx = 20;
  cfg.nely = 10;
  cfg.r_min = 1.5;
  cfg.passive_radius = 1.0;
  cfg.max_iters = iters;
  return cfg;
}

}  // namespace

TEST_CASE("move limit follows the SIMP exponent") {
  CHECK(move_limit_for(1.0) == doctest::Approx(0.7));
  CHECK(move_limit_for(2.0) == doctest::Approx(0.1));
  CHECK(move_limit_for(1.5) == doctest::Approx(0.4));
  CHECK(move_limit_for(3.0) == doctest::Approx(0.1));
  CHECK(move_limit_for(0.0) == doctest::Approx(0.7));
}

TEST_CASE("continuation schedule") {
  RunConfig cfg;
  cfg.overhang = true;
  cfg.count = 4;
  const ScheduleState s1 = schedule_at(cfg, 1);
  CHECK(s1.eta == 1.0);
  CHECK(s1.beta == 1.0);
  CHECK(s1.eps_n == doctest::Approx(cfg.eps_n_ini));
  const ScheduleState s41 = schedule_at(cfg, 41);
  CHECK(s41.eta == doctest::Approx(1.125));
  CHECK(s41.beta == doctest::Approx(1.5));
  const ScheduleState last = schedule_at(cfg, 340);
  CHECK(last.eta == doctest::Approx(2.0));
  CHECK(last.beta == doctest::Approx(std::pow(1.5, 8)));
  CHECK(last.move_limit == doctest::Approx(0.1));
  CHECK(last.eps_n == doctest::Approx(cfg.eps_n_end));
  CHECK_FALSE(schedule_at(cfg, 30).free_window);
  CHECK(schedule_at(cfg, 31).free_window);
  CHECK(schedule_at(cfg, 40).free_window);
  CHECK_FALSE(schedule_at(cfg, 41).free_window);
  CHECK_FALSE(schedule_at(cfg, 335).free_window);  // no increase follows the last stage
  for (int it = 1; it < 340; ++it) {
    CHECK(schedule_at(cfg, it + 1).eta >= schedule_at(cfg, it).eta);
    CHECK(schedule_at(cfg, it + 1).beta >= schedule_at(cfg, it).beta);
  }
}

TEST_CASE("dilated volume target scaling") {
  const Vector ri = Vector::LinSpaced(10, 0.1, 0.9);
  CHECK(scale_volume_target(ri, ri, 0.4, 0.0) == doctest::Approx(0.4));
  CHECK(scale_volume_target(1.2 * ri, ri, 0.4, 0.0) == doctest::Approx(0.48));
  CHECK(scale_volume_target(ri, Vector::Zero(10), 0.4, 0.33) == 0.33);
  const RobustFields f = project_all(Vector::Constant(8, 0.4), ProjectionSpec{4.0});
  const double direct = f[Field::Dilated].sum() / f[Field::Intermediate].sum() * 0.4;
  CHECK(scale_volume_target(f[Field::Dilated], f[Field::Intermediate], 0.4, 0.0) == doctest::Approx(direct));
}

TEST_CASE("small cantilever smoke run") {
  const RunResult r = run_optimization(small_cantilever(40));
  REQUIRE(r.history.size() == 40u);
  const auto& last = r.history.back();
  CHECK(last.constraints[0] <= 1e-3);  // volume row
  for (const auto& rec : r.history) {
    REQUIRE(rec.objective[0]);
    CHECK(std::isfinite(*rec.objective[0]));
    CHECK_FALSE(rec.theta_star);
  }
  CHECK(*r.history.back().objective[0] < *r.history.front().objective[0]);
  CHECK(r.x.minCoeff() >= 0.0);
  CHECK(r.x.maxCoeff() <= 1.0);
  for (int e : r.setup.load.passive_solid) CHECK(r.x[e] == 1.0);
}

TEST_CASE("runs are deterministic") {
  const RunResult a = run_optimization(small_cantilever(12));
  const RunResult b = run_optimization(small_cantilever(12));
  CHECK(format_log(a) == format_log(b));
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("orientation monitoring does not change the reference trajectory") {
  RunConfig mon = small_cantilever(15);
  mon.count = 6;
  const RunResult a = run_optimization(small_cantilever(15));
  const RunResult b = run_optimization(mon);
  CHECK((a.x - b.x).cwiseAbs().maxCoeff() == 0.0);
  for (const auto& rec : b.history) CHECK(rec.theta_star);
}

TEST_CASE("constrained run reports the least restrictive orientation") {
  RunConfig cfg = small_cantilever(20);
  cfg.overhang = true;
  cfg.count = 8;
  cfg.continuation_every = 10;
  const RunResult r = run_optimization(cfg);
  REQUIRE(r.theta_star);
  int best = 0;
  for (int k = 1; k < r.final_G.size(); ++k)
    if (r.final_G[k] < r.final_G[best]) best = k;
  CHECK(*r.theta_star == r.angles[best]);
  CHECK(r.constraint_names.size() == 4u);  // volume + three fields
  for (const auto& rec : r.history) {
    REQUIRE(rec.theta_star);
    CHECK(std::find(r.angles.begin(), r.angles.end(), *rec.theta_star) != r.angles.end());
  }
}

TEST_CASE("small inverter produces an inward output displacement") {
  RunConfig cfg;
  cfg.problem = ProblemKind::Inverter;
  cfg.nelx = 40;
  cfg.nely = 20;
  cfg.volfrac = 0.3;
  cfg.r_min = 1.5;
  cfg.passive_radius = 1.0;
  cfg.max_iters = 60;
  cfg.continuation_every = 20;
  const RunResult r = run_optimization(cfg);
  CHECK(r.objective[1] < 0.0);
  CHECK(r.constraint_names[0] == "u_ero");
}

TEST_CASE("invalid configurations are rejected before running") {
  RunConfig cfg = small_cantilever(5);
  cfg.overhang = true;
  CHECK_THROWS_AS(run_optimization(cfg), InputError);
  cfg = small_cantilever(5);
  cfg.volfrac = 1.2;
  CHECK_THROWS_AS(run_optimization(cfg), InputError);
}
