#pragma once

#include <array>
#include <cmath>

#include "topam/grid.hpp"

namespace topam {

/// Robust design fields, in threshold order.
enum class Field { Eroded = 0, Intermediate = 1, Dilated = 2 };

inline constexpr std::array<Field, 3> kAllFields = {Field::Eroded, Field::Intermediate, Field::Dilated};

const char* field_name(Field f);

struct ProjectionSpec {
  double beta = 1.0;
  double mu_ero = 0.75;
  double mu_int = 0.50;
  double mu_dil = 0.25;

  void validate() const;
  double threshold(Field f) const;
  /// True when the eroded and dilated thresholds are symmetric about the
  /// intermediate one, i.e. solid and void minimum sizes agree.
  bool symmetric() const { return std::abs((mu_ero - mu_int) - (mu_int - mu_dil)) < 1e-12; }
};

/// Smoothed Heaviside step (tanh ratio), h(0) = 0 and h(1) = 1.
inline double heaviside(double x, double beta, double mu) {
  const double a = std::tanh(beta * mu);
  return (a + std::tanh(beta * (x - mu))) / (a + std::tanh(beta * (1.0 - mu)));
}

inline double heaviside_derivative(double x, double beta, double mu) {
  const double c = std::cosh(beta * (x - mu));
  return beta / (c * c) / (std::tanh(beta * mu) + std::tanh(beta * (1.0 - mu)));
}

Vector project(const Vector& rho_tilde, double beta, double mu);
Vector project_derivative(const Vector& rho_tilde, double beta, double mu);

struct RobustFields {
  std::array<Vector, 3> rho;    // indexed by Field
  std::array<Vector, 3> slope;  // d rho / d rho_tilde

  const Vector& operator[](Field f) const { return rho[static_cast<int>(f)]; }
  const Vector& derivative(Field f) const { return slope[static_cast<int>(f)]; }
};

RobustFields project_all(const Vector& rho_tilde, const ProjectionSpec& spec);

}  // namespace topam
