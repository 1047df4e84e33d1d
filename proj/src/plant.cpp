#include "safe_el/plant.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "safe_el/errors.hpp"

namespace safe_el {

void ManipulatorModel::validate() const {
  if (!(m1 > 0.0) || !(m2 > 0.0) || !(l > 0.0) || !std::isfinite(g)) {
    throw Error(ErrorKind::InvalidConfig,
                "plant: masses and link length must be positive, g finite");
  }
}

Mat mass_matrix(const ManipulatorModel& md, const Vec& q) {
  const double l2 = md.l * md.l;
  const double c2 = std::cos(q[1]);
  const double off = md.m2 * l2 / 3.0 + 0.5 * md.m2 * l2 * c2;
  Mat M(2, 2);
  M << md.m1 * l2 / 3.0 + 4.0 * md.m2 * l2 / 3.0 + md.m2 * l2 * c2, off,
      off, md.m2 * l2 / 3.0;
  return M;
}

Mat coriolis_matrix(const ManipulatorModel& md, const Vec& q, const Vec& w) {
  const double k = 0.5 * md.m2 * md.l * md.l * std::sin(q[1]);
  Mat C(2, 2);
  C << -k * w[1], -k * (w[0] + w[1]),
       k * w[0], 0.0;
  return C;
}

Vec gravity_vector(const ManipulatorModel& md, const Vec& q) {
  const double c1 = std::cos(q[0]);
  const double c12 = std::cos(q[0] + q[1]);
  const double gl = md.g * md.l;
  Vec G(2);
  G << 0.5 * md.m1 * gl * c1 + 0.5 * md.m2 * gl * c12 + md.m2 * gl * c1,
      0.5 * md.m2 * gl * c12;
  return G;
}

Vec accel(const ManipulatorModel& md, const Vec& q, const Vec& w, const Vec& tau,
          const Vec& tau_d) {
  const Vec rhs = tau - coriolis_matrix(md, q, w) * w - gravity_vector(md, q) + tau_d;
  return mass_matrix(md, q).ldlt().solve(rhs);
}

Vec forward_kinematics(const ManipulatorModel& md, const Vec& q) {
  Vec p(2);
  p << md.l * std::cos(q[0]) + md.l * std::cos(q[0] + q[1]),
      md.l * std::sin(q[0]) + md.l * std::sin(q[0] + q[1]);
  return p;
}

Mat jacobian(const ManipulatorModel& md, const Vec& q) {
  const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
  const double s12 = std::sin(q[0] + q[1]), c12 = std::cos(q[0] + q[1]);
  Mat J(2, 2);
  J << -md.l * s1 - md.l * s12, -md.l * s12,
       md.l * c1 + md.l * c12, md.l * c12;
  return J;
}

Mat jacobian_partial(const ManipulatorModel& md, const Vec& q, int j) {
  const double s1 = std::sin(q[0]), c1 = std::cos(q[0]);
  const double s12 = std::sin(q[0] + q[1]), c12 = std::cos(q[0] + q[1]);
  const double l = md.l;
  Mat D(2, 2);
  if (j == 0) {
    D << -l * c1 - l * c12, -l * c12,
         -l * s1 - l * s12, -l * s12;
  } else if (j == 1) {
    D << -l * c12, -l * c12,
         -l * s12, -l * s12;
  } else {
    throw Error(ErrorKind::InvalidConfig, "jacobian_partial: joint index out of range");
  }
  return D;
}

Vec inverse_kinematics(const ManipulatorModel& md, const Vec& p, bool elbow_up) {
  const double r2 = p.squaredNorm();
  const double l = md.l;
  const double c2 = (r2 - 2.0 * l * l) / (2.0 * l * l);
  if (c2 > 1.0 + 1e-12 || c2 < -1.0 - 1e-12) {
    std::ostringstream os;
    os << "inverse kinematics: target (" << p[0] << ", " << p[1] << ") is unreachable";
    throw Error(ErrorKind::InvalidConfig, os.str());
  }
  double q2 = std::acos(std::clamp(c2, -1.0, 1.0));
  if (elbow_up) q2 = -q2;
  const double q1 = std::atan2(p[1], p[0]) - std::atan2(l * std::sin(q2), l + l * std::cos(q2));
  Vec q(2);
  q << q1, q2;
  return q;
}

BoundsReport certify_bounds(const ManipulatorModel& md, int n_samples,
                            double declared_lambda2, std::uint64_t seed) {
  if (n_samples < 1) {
    throw Error(ErrorKind::InvalidConfig, "certify_bounds: need at least one sample");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> vel(-10.0, 10.0);

  BoundsReport rep;
  rep.n_samples = n_samples;
  rep.declared_lambda2 = declared_lambda2;
  rep.lambda1 = std::numeric_limits<double>::infinity();

  Vec q(2), w(2);
  for (int i = 0; i < n_samples; ++i) {
    q << ang(rng), ang(rng);
    w << vel(rng), vel(rng);
    const Mat M = mass_matrix(md, q);
    if (M(0, 1) != M(1, 0)) {
      std::ostringstream os;
      os << "M(q) not symmetric at q = (" << q[0] << ", " << q[1] << ")";
      throw Error(ErrorKind::BoundViolated, os.str());
    }
    const Eigen::SelfAdjointEigenSolver<Mat> eig(M);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi > declared_lambda2) {
      std::ostringstream os;
      os << "P1 bound violated at q = (" << q[0] << ", " << q[1] << "): eig(M) in ["
         << lo << ", " << hi << "], declared lambda2 = " << declared_lambda2;
      throw Error(ErrorKind::BoundViolated, os.str());
    }
    rep.lambda1 = std::min(rep.lambda1, lo);
    rep.lambda2 = std::max(rep.lambda2, hi);
    const double wn = w.norm();
    if (wn > 0.0) {
      rep.zeta_c = std::max(rep.zeta_c, spectral_norm(coriolis_matrix(md, q, w)) / wn);
    }
    rep.zeta_g = std::max(rep.zeta_g, gravity_vector(md, q).norm());
  }
  return rep;
}

TrueAdaptiveTargets true_adaptive_targets(const BoundsReport& b, double d0, double d2) {
  return {b.zeta_c / b.lambda1, (b.zeta_g + d0) / b.lambda1 + d2};
}

}  // namespace safe_el
