#include <doctest.h>

#include "topam/mma.hpp"

using namespace topam;
using Eigen::MatrixXd;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

}  // namespace

TEST_CASE("unconstrained quadratic approaches its minimizer") {
  // The asymptotes cannot come closer than 0.01 of the box, so plain MMA
  // settles into a small cycle around the minimizer instead of landing on it.
  Mma mma(1, 0);
  Vector x = v1(0.9);
  for (int steps = 0; steps < 30; ++steps) {
    const double d = x[0] - 0.3;
    x = mma.update(x, d * d, v1(2 * d), Vector(0), MatrixXd(0, 1), v1(0), v1(1), v1(1));
  }
  CHECK(std::abs(x[0] - 0.3) < 1e-2);
}

TEST_CASE("move limit clamps the first step") {
  Mma mma(1, 0);
  const Vector x = v1(0.9);
  const double d = x[0] - 0.3;
  const Vector next = mma.update(x, d * d, v1(2 * d), Vector(0), MatrixXd(0, 1), v1(0), v1(1), v1(0.1));
  CHECK(next[0] == doctest::Approx(0.8).epsilon(1e-7));
  CHECK(next[0] >= 0.8 - 1e-12);
}

TEST_CASE("two variables with one linear constraint agree with a grid search") {
  // min (x1 - 0.9)^2 + 2 (x2 - 0.8)^2  s.t.  x1 + 2 x2 <= 1.2
  auto f0 = [](double a, double b) { return (a - 0.9) * (a - 0.9) + 2 * (b - 0.8) * (b - 0.8); };
  double best = 1e9;
  for (int i = 0; i <= 1000; ++i)
    for (int j = 0; j <= 1000; ++j) {
      const double a = i * 1e-3, b = j * 1e-3;
      if (a + 2 * b <= 1.2) best = std::min(best, f0(a, b));
    }
  Mma mma(2, 1);
  Vector x(2);
  x << 0.5, 0.5;
  for (int it = 0; it < 60; ++it) {
    Vector df0(2);
    df0 << 2 * (x[0] - 0.9), 4 * (x[1] - 0.8);
    MatrixXd dfdx(1, 2);
    dfdx << 1.0, 2.0;
    x = mma.update(x, f0(x[0], x[1]), df0, v1(x[0] + 2 * x[1] - 1.2), dfdx, Vector::Zero(2), Vector::Ones(2),
                   Vector::Ones(2));
  }
  CHECK(x[0] + 2 * x[1] <= 1.2 + 1e-6);
  CHECK(std::abs(f0(x[0], x[1]) - best) < 1e-3);
  CHECK_FALSE(mma.infeasible());
}

TEST_CASE("infeasible constraint is flagged and bounds still hold") {
  Mma mma(2, 1);
  Vector x(2);
  x << 0.5, 0.5;
  MatrixXd dfdx(1, 2);
  dfdx << -1.0, -1.0;
  const Vector next = mma.update(x, 0.0, Vector::Zero(2), v1(3.0 - x.sum()), dfdx, Vector::Zero(2),
                                 Vector::Ones(2), Vector::Ones(2));
  CHECK(mma.infeasible());
  CHECK(next.minCoeff() >= 0.0);
  CHECK(next.maxCoeff() <= 1.0);
}

TEST_CASE("collapsed intervals keep their value") {
  Mma mma(3, 0);
  Vector x(3);
  x << 1.0, 0.4, 0.2;
  Vector lo(3), hi(3), ml(3);
  lo << 1.0, 0.0, 0.0;
  hi << 1.0, 1.0, 1.0;
  ml << 0.2, 0.2, 0.0;
  const Vector next = mma.update(x, 0.0, Vector::Constant(3, 1.0), Vector(0), MatrixXd(0, 3), lo, hi, ml);
  CHECK(next[0] == 1.0);
  CHECK(next[2] == 0.2);
  CHECK(next[1] < 0.4);
  CHECK(next[1] >= 0.2 - 1e-12);
}

TEST_CASE("min-max bound formulation") {
  // min max(x, 1 - x) -> x = 0.5
  Mma mma(1, 2);
  mma.set_a(Vector::Ones(2));
  Vector x = v1(0.9);
  for (int it = 0; it < 40; ++it) {
    MatrixXd dfdx(2, 1);
    dfdx << 1.0, -1.0;
    Vector f(2);
    f << x[0] + 1.0, 2.0 - x[0];
    x = mma.update(x, 0.0, v1(0.0), f, dfdx, v1(0), v1(1), v1(1));
  }
  CHECK(x[0] == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("shape errors") {
  Mma mma(2, 1);
  CHECK_THROWS_AS(mma.update(Vector::Zero(3), 0, Vector::Zero(3), v1(0), MatrixXd(1, 3), Vector::Zero(3),
                             Vector::Ones(3), Vector::Ones(3)),
                  InputError);
  CHECK_THROWS_AS(Mma(0, 1), InputError);
  CHECK_THROWS_AS(mma.set_a(Vector::Ones(3)), InputError);
}
