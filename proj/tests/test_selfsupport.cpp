#include <doctest.h>

#include <limits>
#include <numbers>

#include "fixtures.hpp"
#include "support.hpp"
#include "topam/selfsupport.hpp"

using namespace topam;

TEST_CASE("free-evolution move limits") {
  FreeEvolutionSpec spec;
  Vector dx(3), dy(3);
  dx << 0.0, 3.0, 0.2;
  dy << 0.0, 0.0, 0.2;
  const GradientField f = normalize(dx, dy, 0.3);
  const Vector m = free_evolution_move_limits(f, spec);
  CHECK(m[0] == 1.0);
  CHECK(m[1] == doctest::Approx(0.001));
  CHECK(m[2] == 1.0);
  spec.invert_surface_test = true;
  const Vector inv = free_evolution_move_limits(f, spec);
  CHECK(inv[0] == doctest::Approx(0.001));
  CHECK(inv[1] == 1.0);
  spec.invert_surface_test = false;
  spec.eps_m = std::numeric_limits<double>::infinity();
  CHECK(free_evolution_move_limits(f, spec).minCoeff() == 1.0);
}

TEST_CASE("detection factors on hand-made inputs") {
  Grid g(6, 6);
  const int n = g.elements();
  const double eps_c = 2.0;
  Vector c = Vector::Zero(n);
  c[1] = 10.0 / eps_c;
  DetectionSpec spec;
  spec.eps_c = eps_c;
  const TriangleDetection d = detect_triangles(g, Vector::Constant(n, 0.5), c, Vector::Ones(n), 2.0, 8.0, 0.75, spec);
  CHECK(d.c_p[0] == doctest::Approx(1.0));
  CHECK(d.c_p[1] == doctest::Approx(std::exp(-10.0)).epsilon(1e-12));
  CHECK(default_void_threshold(std::numbers::pi / 4) == doctest::Approx(0.375));
}

TEST_CASE("removal identity and saturation") {
  const Vector rho = topam::testing::random_vector(10, 3, 0.0, 1.0);
  CHECK((remove_triangles(rho, Vector::Zero(10)) - rho).cwiseAbs().maxCoeff() == 0.0);
  CHECK(remove_triangles(rho, Vector::Ones(10)).maxCoeff() == 0.0);
  CHECK_THROWS_AS(remove_triangles(rho, Vector::Ones(3)), InputError);
}

TEST_CASE("hanging triangle is detected and removed, the bar is kept") {
  const topam::testing::HangingTriangle fx;
  const TriangleDetection d = fx.detect();
  const Vector out = remove_triangles(fx.rho, d.I_r);
  double tri_max = 0.0, bar_loss = 0.0;
  for (int e : fx.triangle) tri_max = std::max(tri_max, out[e]);
  for (int e : fx.bar) bar_loss = std::max(bar_loss, fx.rho[e] - out[e]);
  CHECK(tri_max < 0.05);
  CHECK(bar_loss < 1e-2);
  // the tip is where the indicator fires
  const int tip = fx.triangle.back();
  CHECK(d.I_t[tip] > fx.mu);
  CHECK(d.c_p[tip] > 0.9);
  for (int e : fx.bar) CHECK(d.I_t[e] < 0.5);
}

TEST_CASE("disc operator rows") {
  Grid g(7, 7);
  const SparseMatrix d = disc_operator(g, 2.0, true);
  const Vector rs = d * Vector::Ones(g.elements());
  for (int e = 0; e < g.elements(); ++e) CHECK(rs[e] == doctest::Approx(1.0));
  Vector v = Vector::Zero(g.elements());
  v[g.element(3, 3)] = 1.0;
  const Vector m = disc_max(disc_operator(g, 2.0, false), v);
  CHECK(m[g.element(3, 4)] == 1.0);
  CHECK(m[g.element(4, 4)] == 1.0);   // distance sqrt 2
  CHECK(m[g.element(3, 5)] == 0.0);   // distance 2 is outside the open disc
  CHECK_THROWS_AS(disc_operator(g, 0.0, true), InputError);
}
