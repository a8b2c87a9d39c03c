#include "topam/mma.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace topam {

using Eigen::ArrayXd;
using Eigen::MatrixXd;

namespace {

struct State {
  ArrayXd x, y, lam, xsi, eta, mu, s;
  double z, zet;
};

struct Problem {
  const ArrayXd &low, &upp, &alfa, &beta, &p0, &q0;
  const MatrixXd &P, &Q;
  double a0;
  const ArrayXd &a, &b, &c, &d;
};

ArrayXd residual(const Problem& pb, const State& st, double epsi) {
  const Eigen::Index n = st.x.size(), m = st.y.size();
  const ArrayXd ux1 = pb.upp - st.x, xl1 = st.x - pb.low;
  const ArrayXd plam = pb.p0 + (pb.P.transpose() * st.lam.matrix()).array();
  const ArrayXd qlam = pb.q0 + (pb.Q.transpose() * st.lam.matrix()).array();
  const ArrayXd gvec = (pb.P * ux1.inverse().matrix() + pb.Q * xl1.inverse().matrix()).array();
  ArrayXd r(3 * n + 4 * m + 2);
  Eigen::Index k = 0;
  r.segment(k, n) = plam / ux1.square() - qlam / xl1.square() - st.xsi + st.eta; k += n;
  r.segment(k, m) = pb.c + pb.d * st.y - st.mu - st.lam; k += m;
  r[k++] = pb.a0 - st.zet - (pb.a * st.lam).sum();
  r.segment(k, m) = gvec - pb.a * st.z - st.y + st.s - pb.b; k += m;
  r.segment(k, n) = st.xsi * (st.x - pb.alfa) - epsi; k += n;
  r.segment(k, n) = st.eta * (pb.beta - st.x) - epsi; k += n;
  r.segment(k, m) = st.mu * st.y - epsi; k += m;
  r[k++] = st.zet * st.z - epsi;
  r.segment(k, m) = st.lam * st.s - epsi;
  return r;
}

}  // namespace

SubproblemResult mma_subsolve(double epsimin, const Vector& low_v, const Vector& upp_v, const Vector& alfa_v,
                              const Vector& beta_v, const Vector& p0_v, const Vector& q0_v, const MatrixXd& P,
                              const MatrixXd& Q, double a0, const Vector& a_v, const Vector& b_v,
                              const Vector& c_v, const Vector& d_v) {
  const Eigen::Index n = low_v.size(), m = a_v.size();
  const ArrayXd low = low_v.array(), upp = upp_v.array(), alfa = alfa_v.array(), beta = beta_v.array();
  const ArrayXd p0 = p0_v.array(), q0 = q0_v.array(), a = a_v.array(), b = b_v.array(), c = c_v.array(),
                d = d_v.array();
  const Problem pb{low, upp, alfa, beta, p0, q0, P, Q, a0, a, b, c, d};

  State st;
  st.x = 0.5 * (alfa + beta);
  st.y = ArrayXd::Ones(m);
  st.z = 1.0;
  st.lam = ArrayXd::Ones(m);
  st.xsi = (st.x - alfa).inverse().max(1.0);
  st.eta = (beta - st.x).inverse().max(1.0);
  st.mu = (0.5 * c).max(1.0);
  st.zet = 1.0;
  st.s = ArrayXd::Ones(m);

  double epsi = 1.0;
  while (epsi > epsimin) {
    ArrayXd res = residual(pb, st, epsi);
    double residunorm = res.matrix().norm();
    double residumax = res.abs().maxCoeff();
    int ittt = 0;
    while (residumax > 0.9 * epsi && ittt < 200) {
      ++ittt;
      const ArrayXd ux1 = upp - st.x, xl1 = st.x - low;
      const ArrayXd ux2 = ux1.square(), xl2 = xl1.square();
      const ArrayXd ux3 = ux1 * ux2, xl3 = xl1 * xl2;
      const ArrayXd plam = p0 + (P.transpose() * st.lam.matrix()).array();
      const ArrayXd qlam = q0 + (Q.transpose() * st.lam.matrix()).array();
      const ArrayXd gvec = (P * ux1.inverse().matrix() + Q * xl1.inverse().matrix()).array();
      const MatrixXd GG = P * ux2.inverse().matrix().asDiagonal() - Q * xl2.inverse().matrix().asDiagonal();
      const ArrayXd dpsidx = plam / ux2 - qlam / xl2;
      const ArrayXd delx = dpsidx - epsi / (st.x - alfa) + epsi / (beta - st.x);
      const ArrayXd dely = c + d * st.y - st.lam - epsi / st.y;
      const double delz = a0 - (a * st.lam).sum() - epsi / st.z;
      const ArrayXd dellam = gvec - a * st.z - st.y - b + epsi / st.lam;
      const ArrayXd diagx = 2.0 * (plam / ux3 + qlam / xl3) + st.xsi / (st.x - alfa) + st.eta / (beta - st.x);
      const ArrayXd diagy = d + st.mu / st.y;
      const ArrayXd diaglamyi = st.s / st.lam + diagy.inverse();

      ArrayXd dx, dlam;
      double dz;
      if (m < n) {
        Eigen::VectorXd bb(m + 1);
        bb.head(m) = (dellam + dely / diagy).matrix() - GG * (delx / diagx).matrix();
        bb[m] = delz;
        MatrixXd AA(m + 1, m + 1);
        AA.topLeftCorner(m, m) = GG * diagx.inverse().matrix().asDiagonal() * GG.transpose();
        AA.topLeftCorner(m, m).diagonal() += diaglamyi.matrix();
        AA.topRightCorner(m, 1) = a.matrix();
        AA.bottomLeftCorner(1, m) = a.matrix().transpose();
        AA(m, m) = -st.zet / st.z;
        const Eigen::VectorXd sol = AA.partialPivLu().solve(bb);
        dlam = sol.head(m).array();
        dz = sol[m];
        dx = -delx / diagx - (GG.transpose() * dlam.matrix()).array() / diagx;
      } else {
        const ArrayXd dlyinv = diaglamyi.inverse();
        const ArrayXd dellamyi = dellam + dely / diagy;
        MatrixXd AA(n + 1, n + 1);
        AA.topLeftCorner(n, n) = GG.transpose() * dlyinv.matrix().asDiagonal() * GG;
        AA.topLeftCorner(n, n).diagonal() += diagx.matrix();
        const Eigen::VectorXd axz = -GG.transpose() * (a * dlyinv).matrix();
        AA.topRightCorner(n, 1) = axz;
        AA.bottomLeftCorner(1, n) = axz.transpose();
        AA(n, n) = st.zet / st.z + (a * a * dlyinv).sum();
        Eigen::VectorXd bb(n + 1);
        bb.head(n) = -(delx.matrix() + GG.transpose() * (dellamyi * dlyinv).matrix());
        bb[n] = -(delz - (a * dellamyi * dlyinv).sum());
        const Eigen::VectorXd sol = AA.partialPivLu().solve(bb);
        dx = sol.head(n).array();
        dz = sol[n];
        dlam = (GG * dx.matrix()).array() * dlyinv - dz * a * dlyinv + dellamyi * dlyinv;
      }
      const ArrayXd dy = -dely / diagy + dlam / diagy;
      const ArrayXd dxsi = -st.xsi + epsi / (st.x - alfa) - st.xsi * dx / (st.x - alfa);
      const ArrayXd deta = -st.eta + epsi / (beta - st.x) + st.eta * dx / (beta - st.x);
      const ArrayXd dmu = -st.mu + epsi / st.y - st.mu * dy / st.y;
      const double dzet = -st.zet + epsi / st.z - st.zet * dz / st.z;
      const ArrayXd ds = -st.s + epsi / st.lam - st.s * dlam / st.lam;

      double stmxx = std::max({(-1.01 * dy / st.y).maxCoeff(), -1.01 * dz / st.z,
                               (-1.01 * dlam / st.lam).maxCoeff(), (-1.01 * dxsi / st.xsi).maxCoeff(),
                               (-1.01 * deta / st.eta).maxCoeff(), (-1.01 * dmu / st.mu).maxCoeff(),
                               -1.01 * dzet / st.zet, (-1.01 * ds / st.s).maxCoeff()});
      const double stmalfa = (-1.01 * dx / (st.x - alfa)).maxCoeff();
      const double stmbeta = (1.01 * dx / (beta - st.x)).maxCoeff();
      double steg = 1.0 / std::max({stmalfa, stmbeta, stmxx, 1.0});

      const State old = st;
      int itto = 0;
      double resinew = 2.0 * residunorm;
      while (resinew > residunorm && itto < 50) {
        ++itto;
        st.x = old.x + steg * dx;
        st.y = old.y + steg * dy;
        st.z = old.z + steg * dz;
        st.lam = old.lam + steg * dlam;
        st.xsi = old.xsi + steg * dxsi;
        st.eta = old.eta + steg * deta;
        st.mu = old.mu + steg * dmu;
        st.zet = old.zet + steg * dzet;
        st.s = old.s + steg * ds;
        res = residual(pb, st, epsi);
        resinew = res.matrix().norm();
        steg /= 2.0;
      }
      residunorm = resinew;
      residumax = res.abs().maxCoeff();
    }
    epsi *= 0.1;
  }
  return {st.x.matrix(), st.y.matrix(), st.lam.matrix(), st.z};
}

Mma::Mma(int n, int m, MmaSettings settings) : n_(n), m_(m), settings_(settings) {
  if (n < 1) throw InputError("MMA needs at least one variable");
  if (m < 0) throw InputError("negative constraint count");
  a_ = Vector::Zero(m);
}

void Mma::set_a(const Vector& a) {
  if (a.size() != m_) throw InputError("MMA bound coefficients must have one entry per constraint");
  a_ = a;
}

Vector Mma::update(const Vector& x, double f0, const Vector& df0, const Vector& f, const MatrixXd& dfdx,
                   const Vector& xmin, const Vector& xmax, const Vector& move_limit) {
  (void)f0;
  if (x.size() != n_ || df0.size() != n_ || xmin.size() != n_ || xmax.size() != n_ || move_limit.size() != n_)
    throw InputError("MMA vectors must have one entry per variable");
  if (f.size() != m_ || dfdx.rows() != m_ || dfdx.cols() != n_)
    throw InputError("MMA constraint arrays have the wrong shape");
  if (!df0.allFinite() || !f.allFinite() || !dfdx.allFinite())
    throw NumericalError("non-finite objective or constraint gradient passed to MMA");

  const MmaSettings& st = settings_;
  ++iter_;
  if (iter_ <= 2 || xold1_.size() != n_) {
    low_ = x - st.asyinit * (xmax - xmin);
    upp_ = x + st.asyinit * (xmax - xmin);
    if (iter_ == 1 || xold1_.size() != n_) {
      iter_ = 1;
      xold1_ = x;
      xold2_ = x;
    }
  } else {
    for (int i = 0; i < n_; ++i) {
      const double zzz = (x[i] - xold1_[i]) * (xold1_[i] - xold2_[i]);
      const double factor = zzz > 0.0 ? st.asyincr : (zzz < 0.0 ? st.asydecr : 1.0);
      const double span = xmax[i] - xmin[i];
      low_[i] = std::clamp(x[i] - factor * (xold1_[i] - low_[i]), x[i] - 10.0 * span, x[i] - 0.01 * span);
      upp_[i] = std::clamp(x[i] + factor * (upp_[i] - xold1_[i]), x[i] + 0.01 * span, x[i] + 10.0 * span);
    }
  }

  // Variables whose admissible interval has collapsed are held in place.
  std::vector<int> active;
  Vector alfa_full(n_), beta_full(n_);
  for (int i = 0; i < n_; ++i) {
    const double lo = std::max({low_[i] + st.albefa * (x[i] - low_[i]), x[i] - move_limit[i], xmin[i]});
    const double hi = std::min({upp_[i] - st.albefa * (upp_[i] - x[i]), x[i] + move_limit[i], xmax[i]});
    alfa_full[i] = lo;
    beta_full[i] = std::max(hi, lo);
    if (hi - lo > 1e-12 && xmax[i] - xmin[i] > 1e-12) active.push_back(i);
  }

  // A problem without constraints gets one inactive dummy row.
  const int mm = std::max(m_, 1);
  Vector fval = m_ > 0 ? f : Vector::Constant(1, -1.0);
  const int na = static_cast<int>(active.size());
  Vector xnew = x.cwiseMax(alfa_full).cwiseMin(beta_full);
  infeasible_ = false;
  if (na > 0) {
    Vector low(na), upp(na), alfa(na), beta(na), p0(na), q0(na), xa(na);
    MatrixXd P(mm, na), Q(mm, na);
    Vector b = -fval;
    for (int k = 0; k < na; ++k) {
      const int i = active[k];
      const double span_inv = 1.0 / std::max(xmax[i] - xmin[i], 1e-5);
      const double ux1 = upp_[i] - x[i], xl1 = x[i] - low_[i];
      const double ux2 = ux1 * ux1, xl2 = xl1 * xl1;
      low[k] = low_[i];
      upp[k] = upp_[i];
      alfa[k] = alfa_full[i];
      beta[k] = beta_full[i];
      xa[k] = x[i];
      const double dp = std::max(df0[i], 0.0), dq = std::max(-df0[i], 0.0);
      const double pq = 0.001 * (dp + dq) + st.raa0 * span_inv;
      p0[k] = (dp + pq) * ux2;
      q0[k] = (dq + pq) * xl2;
      for (int j = 0; j < mm; ++j) {
        const double g = m_ > 0 ? dfdx(j, i) : 0.0;
        const double gp = std::max(g, 0.0), gq = std::max(-g, 0.0);
        const double pqj = 0.001 * (gp + gq) + st.raa0 * span_inv;
        P(j, k) = (gp + pqj) * ux2;
        Q(j, k) = (gq + pqj) * xl2;
        b[j] += P(j, k) / ux1 + Q(j, k) / xl1;
      }
    }
    const Vector a = m_ > 0 ? a_ : Vector::Zero(1);
    const SubproblemResult sub = mma_subsolve(st.epsimin, low, upp, alfa, beta, p0, q0, P, Q, st.a0, a, b,
                                              Vector::Constant(mm, st.c), Vector::Constant(mm, st.d));
    for (int k = 0; k < na; ++k) xnew[active[k]] = sub.x[k];
    lam_ = sub.lam.head(m_);
    z_ = sub.z;
    infeasible_ = m_ > 0 && sub.y.maxCoeff() > 1e-6;
  }
  xold2_ = xold1_;
  xold1_ = x;
  return xnew;
}

}  // namespace topam
