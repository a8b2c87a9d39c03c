#include <doctest.h>

#include "support.hpp"
#include "topam/projection.hpp"

using namespace topam;

TEST_CASE("heaviside endpoints and symmetry") {
  for (double beta : {0.5, 1.0, 8.0, 38.0})
    for (double mu : {0.25, 0.5, 0.75}) {
      CHECK(std::abs(heaviside(0.0, beta, mu)) < 1e-12);
      CHECK(std::abs(heaviside(1.0, beta, mu) - 1.0) < 1e-12);
    }
  for (double beta : {0.5, 4.0, 38.0}) CHECK(std::abs(heaviside(0.5, beta, 0.5) - 0.5) < 1e-12);
  CHECK(heaviside(0.5, 38.0, 0.75) < 1e-6);
  CHECK(heaviside(0.5, 38.0, 0.25) > 1.0 - 1e-6);
}

TEST_CASE("projection derivative") {
  const double h = 1e-6;
  const double fd = (heaviside(0.3 + h, 8.0, 0.5) - heaviside(0.3 - h, 8.0, 0.5)) / (2 * h);
  CHECK(std::abs(heaviside_derivative(0.3, 8.0, 0.5) - fd) < 1e-8);
  double best = 0.0, arg = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = i / 1000.0, d = heaviside_derivative(x, 6.0, 0.75);
    if (d > best) best = d, arg = x;
  }
  CHECK(arg == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(heaviside_derivative(0.2, 1e-4, 0.5) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("robust fields are ordered") {
  const Vector rt = topam::testing::random_vector(50, 9, 0.0, 1.0);
  const RobustFields f = project_all(rt, ProjectionSpec{6.0});
  for (int i = 0; i < 50; ++i) {
    CHECK(f[Field::Eroded][i] <= f[Field::Intermediate][i] + 1e-15);
    CHECK(f[Field::Intermediate][i] <= f[Field::Dilated][i] + 1e-15);
    CHECK(f.derivative(Field::Dilated)[i] == doctest::Approx(heaviside_derivative(rt[i], 6.0, 0.25)));
  }
}

TEST_CASE("projection spec validation") {
  CHECK_THROWS_AS(ProjectionSpec{0.0}.validate(), InputError);
  CHECK_THROWS_AS((ProjectionSpec{1.0, 0.4, 0.5, 0.25}.validate()), InputError);
  CHECK(ProjectionSpec{}.symmetric());
  CHECK_FALSE((ProjectionSpec{1.0, 0.8, 0.5, 0.3}.symmetric()));
}
