#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <memory>
#include <utility>
#include <vector>

#include "topam/grid.hpp"

namespace topam {

using ElementMatrix = Eigen::Matrix<double, 8, 8>;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Modified SIMP interpolation E(rho) = Emin + rho^eta (E0 - Emin).
struct MaterialModel {
  double E0 = 1.0;
  double Emin = 1e-9;
  double eta = 3.0;
  double nu = 0.3;

  void validate() const;
  double modulus(double rho) const;
  double modulus_derivative(double rho) const;
};

/// Boundary conditions, loads and output selector for one analysis.
struct LoadCase {
  std::vector<std::pair<int, double>> forces;   // (dof, value)
  std::vector<int> fixed_dofs;
  std::vector<std::pair<int, double>> springs;  // (dof, stiffness)
  std::vector<std::pair<int, double>> output;   // L, nonzero for mechanisms only
  std::vector<int> passive_solid;               // element indices held at rho = 1

  Vector force_vector(const Grid& grid) const;
  Vector output_vector(const Grid& grid) const;
  void validate(const Grid& grid) const;
};

enum class ObjectiveKind { Compliance, Mechanism };

struct FemSolution {
  Vector u;               // full displacement vector, zeros at fixed dofs
  double objective = 0.0; // f^T u or L^T u
  Vector element_energy;  // c_i = E_i u_e^T k0 u_e
  Vector unit_energy;     // u_e^T k0 u_e
  Vector sensitivity;     // d objective / d rho_bar, filled by objective_sensitivity
};

/// Bilinear plane-stress element stiffness at unit Young's modulus and unit
/// thickness for a square element.
ElementMatrix unit_element_stiffness(double nu);

/// Linear elastic analysis on a fixed grid and load case.
///
/// The sparsity pattern and the symbolic factorization are computed once at
/// construction; each solve only refills the numeric values. The last
/// numeric factorization is kept so an adjoint solve on the same design
/// needs no refactorization.
class FemAnalysis {
public:
  FemAnalysis(Grid grid, MaterialModel material, LoadCase load);
  ~FemAnalysis();
  FemAnalysis(FemAnalysis&&) noexcept;
  FemAnalysis& operator=(FemAnalysis&&) noexcept;

  const Grid& grid() const { return grid_; }
  const MaterialModel& material() const { return material_; }
  void set_material(const MaterialModel& material);
  const LoadCase& load() const { return load_; }

  FemSolution solve(const Vector& rho_bar, ObjectiveKind kind = ObjectiveKind::Compliance);

  /// Fills and returns solution.sensitivity. For mechanisms the adjoint
  /// system K lambda = -L is solved with the factorization of rho_bar.
  const Vector& sensitivity(FemSolution& solution, const Vector& rho_bar, ObjectiveKind kind);

  /// Reduced (free-dof) stiffness matrix including spring terms.
  SparseMatrix reduced_stiffness(const Vector& rho_bar) const;

  int free_dofs() const { return static_cast<int>(free_.size()); }

private:
  void check_density(const Vector& rho_bar) const;
  void factorize(const Vector& rho_bar);
  Vector solve_reduced(const Vector& rhs_full) const;
  Vector element_energies(const Vector& a, const Vector& b) const;

  Grid grid_;
  MaterialModel material_;
  LoadCase load_;
  ElementMatrix k0_;
  std::vector<int> free_;       // reduced index -> full dof
  std::vector<int> reduced_;    // full dof -> reduced index or -1
  std::vector<int> slots_;      // 64 value slots per element, -1 if constrained
  std::vector<std::pair<int, double>> spring_slots_;
  SparseMatrix pattern_;
  Vector factored_rho_;
  struct Factorization;
  std::unique_ptr<Factorization> factor_;
};

FemSolution assemble_and_solve(const Grid& grid, const MaterialModel& material, const Vector& rho_bar,
                               const LoadCase& load, ObjectiveKind kind = ObjectiveKind::Compliance);

Vector objective_sensitivity(FemSolution& solution, const Grid& grid, const MaterialModel& material,
                             const Vector& rho_bar, const LoadCase& load, ObjectiveKind kind);

}  // namespace topam
