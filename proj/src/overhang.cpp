#include "topam/overhang.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace topam {

std::pair<Vector, Vector> PrewittOperator::gradient(const Vector& rho_bar) const {
  if (rho_bar.size() != dx.cols()) throw InputError("gradient input length does not match grid");
  return {dx * rho_bar + offset_x, dy * rho_bar + offset_y};
}

std::pair<Vector, Vector> PrewittOperator::gradient(const Vector& rho_bar, unsigned base_edges) const {
  if (rho_bar.size() != dx.cols()) throw InputError("gradient input length does not match grid");
  std::pair<Vector, Vector> out{dx * rho_bar, dy * rho_bar};
  for (const auto& [edges, off] : ghost_offsets) {
    if ((edges & base_edges) == 0) continue;
    out.first += off.first;
    out.second += off.second;
  }
  return out;
}

PrewittOperator build_prewitt(const Grid& grid, const GhostTreatments& ghosts) {
  grid.validate();
  const int nel = grid.elements();
  std::vector<Eigen::Triplet<double>> tx, ty;
  tx.reserve(static_cast<std::size_t>(nel) * 6);
  ty.reserve(static_cast<std::size_t>(nel) * 6);
  PrewittOperator op;
  op.offset_x = Vector::Zero(nel);
  op.offset_y = Vector::Zero(nel);

  auto map_axis = [](int& k, int n, GhostTreatment low, GhostTreatment high, Edge low_edge, Edge high_edge,
                     unsigned& solid) {
    if (k >= 0 && k < n) return;
    const GhostTreatment t = k < 0 ? low : high;
    if (t == GhostTreatment::Mirror) {
      k = reflect_index(k, n);
    } else if (t == GhostTreatment::Replicate) {
      k = std::clamp(k, 0, n - 1);
    } else if (t == GhostTreatment::Solid) {
      solid |= 1u << static_cast<unsigned>(k < 0 ? low_edge : high_edge);
    }
  };

  for (int ix = 0; ix < grid.nelx; ++ix) {
    for (int r = 0; r < grid.nely; ++r) {
      const int i = grid.element(ix, r);
      for (int dxo = -1; dxo <= 1; ++dxo) {
        for (int dyo = -1; dyo <= 1; ++dyo) {  // dyo is the geometric (upward) offset
          if (dxo == 0 && dyo == 0) continue;
          int jx = ix + dxo;
          int jr = r - dyo;
          unsigned solid = 0;
          map_axis(jx, grid.nelx, ghosts[0], ghosts[1], Edge::Left, Edge::Right, solid);
          map_axis(jr, grid.nely, ghosts[3], ghosts[2], Edge::Top, Edge::Bottom, solid);
          const bool outside = jx < 0 || jx >= grid.nelx || jr < 0 || jr >= grid.nely;
          if (outside) {
            if (solid != 0) {
              op.offset_x[i] += dxo;
              op.offset_y[i] += dyo;
              auto& off = op.ghost_offsets[solid];
              if (off.first.size() == 0) off = {Vector::Zero(nel), Vector::Zero(nel)};
              off.first[i] += dxo;
              off.second[i] += dyo;
            }
            continue;
          }
          const int j = grid.element(jx, jr);
          if (dxo != 0) tx.emplace_back(i, j, dxo);
          if (dyo != 0) ty.emplace_back(i, j, dyo);
        }
      }
    }
  }
  op.dx.resize(nel, nel);
  op.dy.resize(nel, nel);
  op.dx.setFromTriplets(tx.begin(), tx.end());
  op.dy.setFromTriplets(ty.begin(), ty.end());
  op.dx.makeCompressed();
  op.dy.makeCompressed();
  return op;
}

Vector GradientField::norm() const {
  return (dx.array().square() + dy.array().square()).sqrt().matrix();
}

GradientField normalize(const Vector& dx, const Vector& dy, double eps_n) {
  if (!(eps_n > 0.0)) throw InputError("normalization cutoff must be positive");
  if (dx.size() != dy.size()) throw InputError("gradient components differ in length");
  GradientField f;
  f.dx = dx;
  f.dy = dy;
  f.eps_n = eps_n;
  const Eigen::Index n = dx.size();
  f.scale.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double len = std::hypot(dx[i], dy[i]);
    f.scale[i] = len >= eps_n ? 1.0 / len : 0.0;
  }
  f.dir_x = dx.cwiseProduct(f.scale);
  f.dir_y = dy.cwiseProduct(f.scale);
  return f;
}

BuildFrame BuildFrame::at(double theta, double alpha) {
  constexpr double half_pi = 1.57079632679489661923;
  BuildFrame fr;
  fr.bx = std::cos(theta + half_pi);
  fr.by = std::sin(theta + half_pi);
  fr.rx = std::cos(theta + half_pi - alpha);
  fr.ry = std::sin(theta + half_pi - alpha);
  return fr;
}

unsigned base_plate_edges(const BuildFrame& frame, BasePlate mode) {
  if (mode == BasePlate::All) return kAllEdgeBits;
  // Outward normals of the left, right, bottom and top edges.
  constexpr double nx[4] = {-1.0, 1.0, 0.0, 0.0};
  constexpr double ny[4] = {0.0, 0.0, -1.0, 1.0};
  unsigned bits = 0;
  for (unsigned e = 0; e < 4; ++e)
    if (nx[e] * frame.bx + ny[e] * frame.by < -1e-9) bits |= 1u << e;
  return bits;
}

SurfaceFields::SurfaceFields(const PrewittOperator& prewitt, const Vector& rho_bar, double eps_n, BasePlate mode)
    : prewitt_(&prewitt), eps_n_(eps_n), mode_(mode), size_(static_cast<int>(rho_bar.size())) {
  if (rho_bar.size() != prewitt.dx.cols()) throw InputError("gradient input length does not match grid");
  ddx_ = prewitt.dx * rho_bar;
  ddy_ = prewitt.dy * rho_bar;
}

SurfaceFields::SurfaceFields(GradientField field) : size_(field.size()) { cache_.emplace(0u, std::move(field)); }

const GradientField& SurfaceFields::at(const BuildFrame& frame) const {
  if (!prewitt_) return cache_.begin()->second;
  const unsigned bits = base_plate_edges(frame, mode_);
  auto it = cache_.find(bits);
  if (it != cache_.end()) return it->second;
  Vector gx = ddx_, gy = ddy_;
  for (const auto& [edges, off] : prewitt_->ghost_offsets) {
    if ((edges & bits) == 0) continue;
    gx += off.first;
    gy += off.second;
  }
  return cache_.emplace(bits, normalize(gx, gy, eps_n_)).first->second;
}

LocalConstraints local_constraints(const GradientField& field, const BuildFrame& frame) {
  LocalConstraints lc;
  const double c = frame.b_dot_ref();
  lc.g = (frame.bx * field.dir_x + frame.by * field.dir_y).array() - c;
  lc.s = 0.5 * (lc.g.array() + c + 1.0);
  return lc;
}

namespace {

// mean((s/m)^p) with m = max s, so that the result is in [1/N, 1].
double scaled_mean(const Vector& s, double p, double m) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) acc += std::pow(s[i] / m, p);
  return acc / static_cast<double>(s.size());
}

}  // namespace

double power_mean(const Vector& s, double p) {
  if (s.size() == 0) throw InputError("power mean of an empty array");
  if (!(p >= 1.0)) throw InputError("aggregation exponent must be >= 1");
  const double m = s.maxCoeff();
  if (m <= 0.0) return 0.0;
  return m * std::pow(scaled_mean(s, p, m), 1.0 / p);
}

Vector power_mean_gradient(const Vector& s, double p) {
  const double n = static_cast<double>(s.size());
  const double m = s.size() ? s.maxCoeff() : 0.0;
  Vector out = Vector::Zero(s.size());
  if (m <= 0.0) return out;
  const double factor = std::pow(scaled_mean(s, p, m), 1.0 / p - 1.0) / n;
  for (Eigen::Index i = 0; i < s.size(); ++i) out[i] = std::pow(s[i] / m, p - 1.0) * factor;
  return out;
}

double aggregate_pmean(const Vector& s, double p, double b_dot_ref) {
  return 2.0 * power_mean(s, p) - b_dot_ref - 1.0;
}

Vector aggregate_pmean_gradient(const Vector& s, double p) { return power_mean_gradient(s, p); }

void director_adjoint(const GradientField& field, const BuildFrame& frame, const Vector& dg, Vector& wx,
                      Vector& wy) {
  const auto& px = field.dir_x.array();
  const auto& py = field.dir_y.array();
  const Eigen::ArrayXd along = frame.bx * px + frame.by * py;
  const Eigen::ArrayXd weight = field.scale.array() * dg.array();
  wx = ((frame.bx - px * along) * weight).matrix();
  wy = ((frame.by - py * along) * weight).matrix();
}

Vector pull_back(const PrewittOperator& prewitt, const FilterOperator& filter, const Vector& slope,
                 const Vector& wx, const Vector& wy) {
  const Vector d_rho_bar = prewitt.dx.transpose() * wx + prewitt.dy.transpose() * wy;
  return filter.apply_transpose(slope.cwiseProduct(d_rho_bar));
}

OverhangValue overhang_constraint(const GradientField& field, const BuildFrame& frame, double p,
                                  const PrewittOperator& prewitt, const FilterOperator& filter,
                                  const Vector& slope) {
  const LocalConstraints lc = local_constraints(field, frame);
  OverhangValue out;
  out.value = aggregate_pmean(lc.s, p, frame.b_dot_ref());
  Vector wx, wy;
  director_adjoint(field, frame, aggregate_pmean_gradient(lc.s, p), wx, wy);
  out.gradient = pull_back(prewitt, filter, slope, wx, wy);
  return out;
}

double mirror_angle(double theta, SymmetryAxis axis) {
  constexpr double pi = 3.14159265358979323846;
  switch (axis) {
    case SymmetryAxis::Vertical: return 2.0 * pi - theta;
    case SymmetryAxis::Horizontal: return pi - theta;
    case SymmetryAxis::None: break;
  }
  return theta;
}

void OrientationSet::validate() const {
  if (theta.empty()) throw InputError("orientation set is empty");
  if (!(alpha > 0.0 && alpha < 1.57079632679489661923)) throw InputError("critical angle must lie in (0, 90) degrees");
  if (!(p >= 1.0)) throw InputError("element aggregation exponent p must be >= 1");
  if (!(r >= 1.0)) throw InputError("orientation aggregation exponent r must be >= 1");
  if (!(active_fraction > 0.0 && active_fraction <= 1.0)) throw InputError("active-set fraction must lie in (0, 1]");
  for (double t : theta)
    if (!std::isfinite(t)) throw InputError("non-finite orientation angle");
}

OrientationSet OrientationSet::uniform(int m, double alpha, double p, double r) {
  if (m < 1) throw InputError("orientation count must be >= 1");
  OrientationSet set;
  set.alpha = alpha;
  set.p = p;
  set.r = r;
  for (int k = 0; k < m; ++k) set.theta.push_back(2.0 * 3.14159265358979323846 * k / m);
  return set;
}

namespace {

std::vector<double> frame_angles(double theta, SymmetryAxis axis) {
  if (axis == SymmetryAxis::None) return {theta};
  return {theta, mirror_angle(theta, axis)};
}

double orientation_value(const SurfaceFields& fields, const OrientationSet& set, double theta) {
  const auto angles = frame_angles(theta, set.symmetry);
  double g = 0.0;
  for (double a : angles) {
    const BuildFrame fr = BuildFrame::at(a, set.alpha);
    g += aggregate_pmean(local_constraints(fields.at(fr), fr).s, set.p, fr.b_dot_ref());
  }
  return g / static_cast<double>(angles.size());
}

}  // namespace

unsigned supporting_edges(const OrientationSet& set, BasePlate mode) {
  unsigned bits = 0;
  for (double theta : set.theta)
    for (double a : frame_angles(theta, set.symmetry)) bits |= base_plate_edges(BuildFrame::at(a, set.alpha), mode);
  return bits;
}

Vector orientation_values(const SurfaceFields& fields, const OrientationSet& set) {
  set.validate();
  Vector G(set.size());
  for (int k = 0; k < set.size(); ++k) G[k] = orientation_value(fields, set, set.theta[k]);
  return G;
}

Vector orientation_values(const GradientField& field, const OrientationSet& set) {
  return orientation_values(SurfaceFields(field), set);
}

OverhangEval multi_orientation(const GradientField& field, const OrientationSet& set,
                               const PrewittOperator& prewitt, const FilterOperator& filter,
                               const Vector& slope, bool with_gradient) {
  return multi_orientation(SurfaceFields(field), set, prewitt, filter, slope, with_gradient);
}

OverhangEval multi_orientation(const SurfaceFields& fields, const OrientationSet& set,
                               const PrewittOperator& prewitt, const FilterOperator& filter,
                               const Vector& slope, bool with_gradient) {
  set.validate();
  const int m = set.size();
  const double c = std::cos(set.alpha);
  OverhangEval ev;
  ev.G = orientation_values(fields, set);
  ev.t = (1.0 - 0.5 * (ev.G.array() + c + 1.0)).matrix();
  ev.best = 0;
  for (int k = 1; k < m; ++k)
    if (ev.G[k] < ev.G[ev.best]) ev.best = k;
  ev.theta_star = set.theta[ev.best];

  ev.active.resize(m);
  std::iota(ev.active.begin(), ev.active.end(), 0);
  if (m > set.active_threshold) {
    const int keep = std::max(1, static_cast<int>(std::ceil(set.active_fraction * m)));
    std::stable_sort(ev.active.begin(), ev.active.end(), [&](int a, int b) { return ev.G[a] < ev.G[b]; });
    ev.active.resize(keep);
    std::sort(ev.active.begin(), ev.active.end());
  }

  double tmax = 0.0;
  for (int k : ev.active) tmax = std::max(tmax, ev.t[k]);
  Vector weight = Vector::Zero(m);  // d B_G / d G_k
  if (tmax > 0.0) {
    double acc = 0.0;
    for (int k : ev.active) acc += std::pow(ev.t[k] / tmax, set.r);
    ev.aggregate = 1.0 - 2.0 * tmax * std::pow(acc, 1.0 / set.r) - c;
    const double factor = std::pow(acc, 1.0 / set.r - 1.0);
    for (int k : ev.active) weight[k] = std::pow(ev.t[k] / tmax, set.r - 1.0) * factor;
  } else {
    ev.aggregate = 1.0 - c;
    for (int k : ev.active) weight[k] = 1.0 / static_cast<double>(ev.active.size());
  }
  if (!with_gradient) return ev;

  const int n = fields.size();
  Vector wx = Vector::Zero(n), wy = Vector::Zero(n), kx, ky;
  for (int k : ev.active) {
    if (weight[k] == 0.0) continue;
    const auto angles = frame_angles(set.theta[k], set.symmetry);
    const double share = weight[k] / static_cast<double>(angles.size());
    for (double a : angles) {
      const BuildFrame fr = BuildFrame::at(a, set.alpha);
      const GradientField& field = fields.at(fr);
      director_adjoint(field, fr, aggregate_pmean_gradient(local_constraints(field, fr).s, set.p), kx, ky);
      wx += share * kx;
      wy += share * ky;
    }
  }
  ev.gradient = pull_back(prewitt, filter, slope, wx, wy);
  return ev;
}

}  // namespace topam
