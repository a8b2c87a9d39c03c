#include "topam/grid_fem.hpp"

#include <Eigen/SparseCholesky>
#ifdef TOPAM_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include <algorithm>
#include <cmath>
#include <sstream>

namespace topam {

void MaterialModel::validate() const {
  if (!(E0 > Emin) || !(Emin > 0.0)) throw InputError("material needs E0 > Emin > 0");
  if (!(eta >= 1.0)) throw InputError("SIMP exponent must be >= 1");
  if (!(nu > -1.0 && nu < 0.5)) throw InputError("Poisson ratio must lie in (-1, 0.5)");
}

double MaterialModel::modulus(double rho) const { return Emin + std::pow(rho, eta) * (E0 - Emin); }

double MaterialModel::modulus_derivative(double rho) const {
  return eta * std::pow(rho, eta - 1.0) * (E0 - Emin);
}

Vector LoadCase::force_vector(const Grid& grid) const {
  Vector f = Vector::Zero(grid.dofs());
  for (const auto& [dof, value] : forces) f[dof] += value;
  return f;
}

Vector LoadCase::output_vector(const Grid& grid) const {
  Vector l = Vector::Zero(grid.dofs());
  for (const auto& [dof, value] : output) l[dof] += value;
  return l;
}

void LoadCase::validate(const Grid& grid) const {
  const int ndof = grid.dofs();
  auto check_dof = [ndof](int dof) {
    if (dof < 0 || dof >= ndof) throw InputError("degree of freedom " + std::to_string(dof) + " out of range");
  };
  for (const auto& [dof, v] : forces) check_dof(dof);
  for (int dof : fixed_dofs) check_dof(dof);
  for (const auto& [dof, k] : springs) {
    check_dof(dof);
    if (!(k >= 0.0)) throw InputError("spring stiffness must be non-negative");
  }
  for (const auto& [dof, v] : output) check_dof(dof);
  for (int e : passive_solid)
    if (e < 0 || e >= grid.elements()) throw InputError("passive element index out of range");
}

ElementMatrix unit_element_stiffness(double nu) {
  Eigen::Matrix4d a11, a12, b11, b12;
  a11 << 12, 3, -6, -3, 3, 12, 3, 0, -6, 3, 12, -3, -3, 0, -3, 12;
  a12 << -6, -3, 0, 3, -3, -6, -3, -6, 0, -3, -6, 3, 3, -6, 3, -6;
  b11 << -4, 3, -2, 9, 3, -4, -9, 4, -2, -9, -4, -3, 9, 4, -3, -4;
  b12 << 2, -3, 4, -9, -3, 2, 9, -2, 4, 9, 2, 3, -9, -2, 3, 2;
  ElementMatrix a, b;
  a << a11, a12, a12.transpose(), a11;
  b << b11, b12, b12.transpose(), b11;
  return (a + nu * b) / (24.0 * (1.0 - nu * nu));
}

struct FemAnalysis::Factorization {
#ifdef TOPAM_HAVE_CHOLMOD
  Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> llt;
#else
  Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower> llt;
#endif
  SparseMatrix k;
  bool analyzed = false;
  bool valid = false;
};

FemAnalysis::FemAnalysis(Grid grid, MaterialModel material, LoadCase load)
    : grid_(grid), material_(material), load_(std::move(load)), factor_(std::make_unique<Factorization>()) {
  grid_.validate();
  material_.validate();
  load_.validate(grid_);
  k0_ = unit_element_stiffness(material_.nu);

  const int ndof = grid_.dofs();
  std::vector<char> fixed(ndof, 0);
  for (int dof : load_.fixed_dofs) fixed[dof] = 1;
  reduced_.assign(ndof, -1);
  for (int d = 0; d < ndof; ++d) {
    if (fixed[d]) continue;
    reduced_[d] = static_cast<int>(free_.size());
    free_.push_back(d);
  }
  if (load_.fixed_dofs.empty() && load_.springs.empty())
    throw SingularSystemError("no fixed degrees of freedom: all " + std::to_string(free_.size()) +
                                  " dofs are unconstrained",
                              static_cast<long>(free_.size()));

  const int nfree = static_cast<int>(free_.size());
  const int nel = grid_.elements();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(nel) * 64);
  for (int e = 0; e < nel; ++e) {
    const auto dofs = grid_.element_dofs(e);
    for (int a = 0; a < 8; ++a) {
      const int ra = reduced_[dofs[a]];
      if (ra < 0) continue;
      for (int b = 0; b < 8; ++b) {
        const int rb = reduced_[dofs[b]];
        if (rb >= 0) triplets.emplace_back(ra, rb, 1.0);
      }
    }
  }
  for (const auto& [dof, k] : load_.springs)
    if (reduced_[dof] >= 0) triplets.emplace_back(reduced_[dof], reduced_[dof], 1.0);
  pattern_.resize(nfree, nfree);
  pattern_.setFromTriplets(triplets.begin(), triplets.end());
  pattern_.makeCompressed();

  auto slot_of = [this](int row, int col) {
    const int* inner = pattern_.innerIndexPtr();
    const int begin = pattern_.outerIndexPtr()[col];
    const int end = pattern_.outerIndexPtr()[col + 1];
    const int* it = std::lower_bound(inner + begin, inner + end, row);
    return static_cast<int>(it - inner);
  };
  slots_.assign(static_cast<std::size_t>(nel) * 64, -1);
  for (int e = 0; e < nel; ++e) {
    const auto dofs = grid_.element_dofs(e);
    for (int a = 0; a < 8; ++a) {
      const int ra = reduced_[dofs[a]];
      if (ra < 0) continue;
      for (int b = 0; b < 8; ++b) {
        const int rb = reduced_[dofs[b]];
        if (rb >= 0) slots_[static_cast<std::size_t>(e) * 64 + a * 8 + b] = slot_of(ra, rb);
      }
    }
  }
  for (const auto& [dof, k] : load_.springs)
    if (reduced_[dof] >= 0) spring_slots_.emplace_back(slot_of(reduced_[dof], reduced_[dof]), k);
}

FemAnalysis::~FemAnalysis() = default;
FemAnalysis::FemAnalysis(FemAnalysis&&) noexcept = default;
FemAnalysis& FemAnalysis::operator=(FemAnalysis&&) noexcept = default;

void FemAnalysis::set_material(const MaterialModel& material) {
  material.validate();
  material_ = material;
  k0_ = unit_element_stiffness(material_.nu);
  factor_->valid = false;
}

void FemAnalysis::check_density(const Vector& rho_bar) const {
  if (rho_bar.size() != grid_.elements())
    throw InputError("density array has " + std::to_string(rho_bar.size()) + " entries, grid has " +
                     std::to_string(grid_.elements()) + " elements");
  for (Eigen::Index i = 0; i < rho_bar.size(); ++i) {
    if (!std::isfinite(rho_bar[i])) throw InputError("non-finite density at element " + std::to_string(i));
    if (rho_bar[i] < -1e-12 || rho_bar[i] > 1.0 + 1e-12)
      throw InputError("density outside [0,1] at element " + std::to_string(i));
  }
}

SparseMatrix FemAnalysis::reduced_stiffness(const Vector& rho_bar) const {
  check_density(rho_bar);
  SparseMatrix k = pattern_;
  double* values = k.valuePtr();
  std::fill(values, values + k.nonZeros(), 0.0);
  const int nel = grid_.elements();
  for (int e = 0; e < nel; ++e) {
    const double modulus = material_.modulus(std::clamp(rho_bar[e], 0.0, 1.0));
    const int* slot = slots_.data() + static_cast<std::size_t>(e) * 64;
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        if (slot[a * 8 + b] >= 0) values[slot[a * 8 + b]] += modulus * k0_(a, b);
  }
  for (const auto& [slot, stiffness] : spring_slots_) values[slot] += stiffness;
  return k;
}

void FemAnalysis::factorize(const Vector& rho_bar) {
  if (factor_->valid && factored_rho_.size() == rho_bar.size() && factored_rho_ == rho_bar) return;
  factor_->k = reduced_stiffness(rho_bar);
  if (!factor_->analyzed) {
    factor_->llt.analyzePattern(factor_->k);
    factor_->analyzed = true;
  }
  factor_->llt.factorize(factor_->k);
  if (factor_->llt.info() != Eigen::Success) {
    factor_->valid = false;
    std::ostringstream msg;
    msg << "reduced stiffness matrix is singular or indefinite (" << free_.size()
        << " unconstrained dofs); check the fixed-dof set";
    throw SingularSystemError(msg.str(), static_cast<long>(free_.size()));
  }
  factored_rho_ = rho_bar;
  factor_->valid = true;
}

Vector FemAnalysis::solve_reduced(const Vector& rhs_full) const {
  const int nfree = static_cast<int>(free_.size());
  Vector rhs(nfree);
  for (int r = 0; r < nfree; ++r) rhs[r] = rhs_full[free_[r]];
  Vector x = factor_->llt.solve(rhs);
  const double rhs_norm = rhs.norm();
  if (!x.allFinite() || (rhs_norm > 0.0 && (factor_->k.selfadjointView<Eigen::Lower>() * x - rhs).norm() >
                                              1e-6 * rhs_norm)) {
    std::ostringstream msg;
    msg << "linear solve failed to converge (" << free_.size()
        << " unconstrained dofs); the fixed-dof set does not remove all rigid-body modes";
    throw SingularSystemError(msg.str(), static_cast<long>(free_.size()));
  }
  Vector full = Vector::Zero(grid_.dofs());
  for (int r = 0; r < nfree; ++r) full[free_[r]] = x[r];
  return full;
}

Vector FemAnalysis::element_energies(const Vector& a, const Vector& b) const {
  const int nel = grid_.elements();
  Vector out(nel);
  Eigen::Matrix<double, 8, 1> ae, be;
  for (int e = 0; e < nel; ++e) {
    const auto dofs = grid_.element_dofs(e);
    for (int k = 0; k < 8; ++k) {
      ae[k] = a[dofs[k]];
      be[k] = b[dofs[k]];
    }
    out[e] = ae.dot(k0_ * be);
  }
  return out;
}

FemSolution FemAnalysis::solve(const Vector& rho_bar, ObjectiveKind kind) {
  factorize(rho_bar);
  FemSolution sol;
  const Vector f = load_.force_vector(grid_);
  sol.u = solve_reduced(f);
  sol.objective = kind == ObjectiveKind::Compliance ? f.dot(sol.u) : load_.output_vector(grid_).dot(sol.u);
  sol.unit_energy = element_energies(sol.u, sol.u);
  sol.element_energy.resize(sol.unit_energy.size());
  for (Eigen::Index e = 0; e < rho_bar.size(); ++e)
    sol.element_energy[e] = material_.modulus(std::clamp(rho_bar[e], 0.0, 1.0)) * sol.unit_energy[e];
  return sol;
}

const Vector& FemAnalysis::sensitivity(FemSolution& solution, const Vector& rho_bar, ObjectiveKind kind) {
  check_density(rho_bar);
  if (solution.u.size() != grid_.dofs()) throw InputError("solution does not belong to this grid");
  const int nel = grid_.elements();
  solution.sensitivity.resize(nel);
  if (kind == ObjectiveKind::Compliance) {
    for (int e = 0; e < nel; ++e)
      solution.sensitivity[e] =
          -material_.modulus_derivative(std::clamp(rho_bar[e], 0.0, 1.0)) * solution.unit_energy[e];
    return solution.sensitivity;
  }
  factorize(rho_bar);
  const Vector lambda = solve_reduced(-load_.output_vector(grid_));
  const Vector mixed = element_energies(lambda, solution.u);
  for (int e = 0; e < nel; ++e)
    solution.sensitivity[e] = material_.modulus_derivative(std::clamp(rho_bar[e], 0.0, 1.0)) * mixed[e];
  return solution.sensitivity;
}

FemSolution assemble_and_solve(const Grid& grid, const MaterialModel& material, const Vector& rho_bar,
                               const LoadCase& load, ObjectiveKind kind) {
  FemAnalysis analysis(grid, material, load);
  return analysis.solve(rho_bar, kind);
}

Vector objective_sensitivity(FemSolution& solution, const Grid& grid, const MaterialModel& material,
                             const Vector& rho_bar, const LoadCase& load, ObjectiveKind kind) {
  if (rho_bar.size() != grid.elements()) throw InputError("density array length does not match grid");
  FemAnalysis analysis(grid, material, load);
  return analysis.sensitivity(solution, rho_bar, kind);
}

}  // namespace topam
