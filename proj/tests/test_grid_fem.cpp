#include <doctest.h>

#include <Eigen/Dense>

#include "support.hpp"
#include "topam/grid_fem.hpp"
#include "topam/problems.hpp"

using namespace topam;
using topam::testing::central_difference;
using topam::testing::max_relative_error;
using topam::testing::random_vector;

namespace {

// Bilinear square element by 2x2 Gauss quadrature, nodes counter-clockwise
// from the bottom-left corner.
ElementMatrix gauss_element(double nu) {
  const double xi_n[4] = {-1, 1, 1, -1}, eta_n[4] = {-1, -1, 1, 1};
  Eigen::Matrix3d D;
  D << 1, nu, 0, nu, 1, 0, 0, 0, (1 - nu) / 2;
  D /= 1 - nu * nu;
  ElementMatrix K = ElementMatrix::Zero();
  const double g = 1.0 / std::sqrt(3.0);
  for (double xi : {-g, g})
    for (double eta : {-g, g}) {
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        // unit square: dx = dxi / 2
        const double dNdx = 0.25 * xi_n[a] * (1 + eta * eta_n[a]) * 2.0;
        const double dNdy = 0.25 * eta_n[a] * (1 + xi * xi_n[a]) * 2.0;
        B(0, 2 * a) = dNdx;
        B(1, 2 * a + 1) = dNdy;
        B(2, 2 * a) = dNdy;
        B(2, 2 * a + 1) = dNdx;
      }
      K += B.transpose() * D * B * 0.25;  // weight 1, det J = 1/4
    }
  return K;
}

Vector dense_solve(const Grid& grid, const MaterialModel& mat, const Vector& rho, const LoadCase& load) {
  const int n = grid.dofs();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  const ElementMatrix ke = gauss_element(mat.nu);
  for (int e = 0; e < grid.elements(); ++e) {
    const auto d = grid.element_dofs(e);
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) K(d[i], d[j]) += mat.modulus(rho[e]) * ke(i, j);
  }
  for (auto [dof, k] : load.springs) K(dof, dof) += k;
  std::vector<bool> fixed(n, false);
  for (int d : load.fixed_dofs) fixed[d] = true;
  std::vector<int> fr;
  for (int i = 0; i < n; ++i)
    if (!fixed[i]) fr.push_back(i);
  const int m = static_cast<int>(fr.size());
  Eigen::MatrixXd Kf(m, m);
  Vector ff(m);
  const Vector f = load.force_vector(grid);
  for (int i = 0; i < m; ++i) {
    ff[i] = f[fr[i]];
    for (int j = 0; j < m; ++j) Kf(i, j) = K(fr[i], fr[j]);
  }
  const Vector uf = Kf.fullPivLu().solve(ff);
  Vector u = Vector::Zero(n);
  for (int i = 0; i < m; ++i) u[fr[i]] = uf[i];
  return u;
}

}  // namespace

TEST_CASE("element stiffness matches Gauss quadrature") {
  for (double nu : {0.0, 0.3, 0.45}) {
    const ElementMatrix k = unit_element_stiffness(nu);
    CHECK((k - gauss_element(nu)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((k - k.transpose()).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("element stiffness has exactly three rigid body modes") {
  Eigen::SelfAdjointEigenSolver<ElementMatrix> es(unit_element_stiffness(0.3));
  int zero = 0;
  for (int i = 0; i < 8; ++i) {
    CHECK(es.eigenvalues()[i] > -1e-12);
    if (std::abs(es.eigenvalues()[i]) < 1e-10) ++zero;
  }
  CHECK(zero == 3);
}

TEST_CASE("sparse solve agrees with a dense assembly") {
  ProblemSetup cant = cantilever_problem(5, 3);
  ProblemSetup inv = inverter_problem(4, 4, 1.0, 0.5, 0.2);
  for (const ProblemSetup* s : {&cant, &inv}) {
    const Vector rho = random_vector(s->grid.elements(), 7);
    const FemSolution sol = assemble_and_solve(s->grid, s->material, rho, s->load, s->kind);
    const Vector u = dense_solve(s->grid, s->material, rho, s->load);
    CHECK((sol.u - u).cwiseAbs().maxCoeff() < 1e-10 * u.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("compliance equals the sum of element energies") {
  const ProblemSetup s = cantilever_problem(8, 5);
  const Vector rho = random_vector(s.grid.elements(), 3);
  const FemSolution sol = assemble_and_solve(s.grid, s.material, rho, s.load);
  CHECK(sol.objective == doctest::Approx(sol.element_energy.sum()).epsilon(1e-12));
  CHECK(sol.objective > 0.0);
}

TEST_CASE("compliance sensitivity matches central differences") {
  const ProblemSetup s = cantilever_problem(6, 6);
  const Vector rho = random_vector(s.grid.elements(), 11);
  FemSolution sol = assemble_and_solve(s.grid, s.material, rho, s.load);
  const Vector g = objective_sensitivity(sol, s.grid, s.material, rho, s.load, ObjectiveKind::Compliance);
  auto f = [&](const Vector& r) { return assemble_and_solve(s.grid, s.material, r, s.load).objective; };
  CHECK(max_relative_error(g, central_difference(f, rho)) < 1e-4);
  CHECK(g.maxCoeff() < 0.0);
}

TEST_CASE("mechanism output sensitivity matches central differences") {
  const ProblemSetup s = inverter_problem(6, 6, 1.0, 0.1, 0.1);
  const Vector rho = random_vector(s.grid.elements(), 5);
  FemSolution sol = assemble_and_solve(s.grid, s.material, rho, s.load, ObjectiveKind::Mechanism);
  const Vector g = objective_sensitivity(sol, s.grid, s.material, rho, s.load, ObjectiveKind::Mechanism);
  auto f = [&](const Vector& r) {
    return assemble_and_solve(s.grid, s.material, r, s.load, ObjectiveKind::Mechanism).objective;
  };
  CHECK(max_relative_error(g, central_difference(f, rho)) < 1e-4);
}

TEST_CASE("repeated solves reuse the analysis and stay consistent") {
  const ProblemSetup s = cantilever_problem(10, 5);
  FemAnalysis fem(s.grid, s.material, s.load);
  const Vector a = random_vector(s.grid.elements(), 1), b = random_vector(s.grid.elements(), 2);
  const double ca = fem.solve(a).objective;
  const double cb = fem.solve(b).objective;
  CHECK(fem.solve(a).objective == doctest::Approx(ca).epsilon(1e-13));
  CHECK(ca != doctest::Approx(cb));
}

TEST_CASE("unsupported structure is reported as singular") {
  Grid g(3, 2);
  LoadCase load;
  load.forces.emplace_back(1, -1.0);
  CHECK_THROWS_AS(FemAnalysis(g, MaterialModel{}, load), SingularSystemError);
}

TEST_CASE("bad density input is rejected") {
  const ProblemSetup s = cantilever_problem(4, 3);
  FemAnalysis fem(s.grid, s.material, s.load);
  CHECK_THROWS_AS(fem.solve(Vector::Constant(5, 0.5)), InputError);
  Vector r = Vector::Constant(s.grid.elements(), 0.5);
  r[2] = 1.5;
  CHECK_THROWS_AS(fem.solve(r), InputError);
  r[2] = std::nan("");
  CHECK_THROWS_AS(fem.solve(r), InputError);
}

TEST_CASE("material interpolation endpoints") {
  MaterialModel m;
  CHECK(m.modulus(0.0) == doctest::Approx(m.Emin));
  CHECK(m.modulus(1.0) == doctest::Approx(m.E0));
  m.Emin = 2.0;
  CHECK_THROWS_AS(m.validate(), InputError);
}

TEST_CASE("single solid element matches an 8x8 dense solve") {
  Grid g(1, 1);
  LoadCase load;
  // left nodes fixed, downward unit force at the bottom-right corner
  for (int r = 0; r <= 1; ++r) {
    load.fixed_dofs.push_back(2 * g.node(0, r));
    load.fixed_dofs.push_back(2 * g.node(0, r) + 1);
  }
  load.forces.emplace_back(2 * g.node(1, 1) + 1, -1.0);
  MaterialModel mat;
  const Vector rho = Vector::Ones(1);
  const FemSolution sol = assemble_and_solve(g, mat, rho, load);

  const ElementMatrix k = gauss_element(mat.nu);
  // element dofs 2,3 (bottom-right) and 4,5 (top-right) are free
  const Eigen::Matrix4d kf = k.block<4, 4>(2, 2);
  Eigen::Vector4d f(0, -1, 0, 0);
  const Eigen::Vector4d u = kf.ldlt().solve(f);
  CHECK(sol.objective == doctest::Approx(f.dot(u)).epsilon(1e-12));
}

TEST_CASE("zero load gives zero response") {
  ProblemSetup s = cantilever_problem(4, 3);
  s.load.forces[0].second = 0.0;
  const FemSolution sol = assemble_and_solve(s.grid, s.material, Vector::Ones(12), s.load);
  CHECK(sol.u.cwiseAbs().maxCoeff() == 0.0);
  CHECK(sol.objective == 0.0);
}

TEST_CASE("rigid translation lies in the element null space") {
  Eigen::Matrix<double, 8, 1> t;
  t << 1, 0, 1, 0, 1, 0, 1, 0;
  CHECK((unit_element_stiffness(0.3) * t).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("uniform density with linear stiffness gives negative sensitivities") {
  ProblemSetup s = cantilever_problem(6, 4);
  s.material.eta = 1.0;
  const Vector rho = Vector::Constant(s.grid.elements(), 0.5);
  FemSolution sol = assemble_and_solve(s.grid, s.material, rho, s.load);
  const Vector g = objective_sensitivity(sol, s.grid, s.material, rho, s.load, ObjectiveKind::Compliance);
  CHECK(g.maxCoeff() < 0.0);
}
