#include "topam/projection.hpp"

namespace topam {

const char* field_name(Field f) {
  switch (f) {
    case Field::Eroded: return "ero";
    case Field::Intermediate: return "int";
    case Field::Dilated: return "dil";
  }
  return "?";
}

void ProjectionSpec::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InputError("projection steepness beta must be positive");
  if (!(0.0 < mu_dil && mu_dil < mu_int && mu_int < mu_ero && mu_ero < 1.0))
    throw InputError("thresholds must satisfy 0 < mu_dil < mu_int < mu_ero < 1");
}

double ProjectionSpec::threshold(Field f) const {
  switch (f) {
    case Field::Eroded: return mu_ero;
    case Field::Intermediate: return mu_int;
    case Field::Dilated: return mu_dil;
  }
  return mu_int;
}

Vector project(const Vector& rho_tilde, double beta, double mu) {
  return rho_tilde.unaryExpr([=](double x) { return heaviside(x, beta, mu); });
}

Vector project_derivative(const Vector& rho_tilde, double beta, double mu) {
  return rho_tilde.unaryExpr([=](double x) { return heaviside_derivative(x, beta, mu); });
}

RobustFields project_all(const Vector& rho_tilde, const ProjectionSpec& spec) {
  spec.validate();
  RobustFields out;
  for (Field f : kAllFields) {
    const double mu = spec.threshold(f);
    out.rho[static_cast<int>(f)] = project(rho_tilde, spec.beta, mu);
    out.slope[static_cast<int>(f)] = project_derivative(rho_tilde, spec.beta, mu);
  }
  return out;
}

}  // namespace topam
