#pragma once

#include <Eigen/Dense>

#include "topam/grid.hpp"

namespace topam {

struct MmaSettings {
  double asyinit = 0.5;
  double asyincr = 1.2;
  double asydecr = 0.7;
  double albefa = 0.1;
  double raa0 = 1e-5;
  double epsimin = 1e-7;
  double a0 = 1.0;
  double c = 1000.0;
  double d = 1.0;
};

/// Method of moving asymptotes for
///   min f0(x) + a0 z + sum (c_i y_i + 0.5 d_i y_i^2)
///   s.t. f_i(x) - a_i z - y_i <= 0,  xmin <= x <= xmax,  y, z >= 0.
/// Per-variable move limits clip the subproblem box to
/// [max(xmin, x - mL_i), min(xmax, x + mL_i)].
class Mma {
public:
  Mma(int n, int m, MmaSettings settings = {});

  int variables() const { return n_; }
  int constraints() const { return m_; }

  /// Per-constraint coefficients of the bound variable z (default 0).
  void set_a(const Vector& a);

  /// Forgets the iteration history; the next step restarts the asymptotes.
  void reset() { iter_ = 0; }

  Vector update(const Vector& x, double f0, const Vector& df0, const Vector& f, const Eigen::MatrixXd& dfdx,
                const Vector& xmin, const Vector& xmax, const Vector& move_limit);

  /// True when the last subproblem needed the elastic variables y > 0.
  bool infeasible() const { return infeasible_; }
  double last_z() const { return z_; }
  const Vector& lower_asymptote() const { return low_; }
  const Vector& upper_asymptote() const { return upp_; }
  const Vector& multipliers() const { return lam_; }

private:
  int n_, m_;
  MmaSettings settings_;
  Vector a_;
  int iter_ = 0;
  Vector xold1_, xold2_, low_, upp_, lam_;
  double z_ = 0.0;
  bool infeasible_ = false;
};

struct SubproblemResult {
  Vector x, y, lam;
  double z = 0.0;
};

/// Primal-dual interior point solve of the separable MMA subproblem.
SubproblemResult mma_subsolve(double epsimin, const Vector& low, const Vector& upp, const Vector& alfa,
                              const Vector& beta, const Vector& p0, const Vector& q0, const Eigen::MatrixXd& P,
                              const Eigen::MatrixXd& Q, double a0, const Vector& a, const Vector& b,
                              const Vector& c, const Vector& d);

}  // namespace topam
