#include "safe_el/numerics.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "safe_el/errors.hpp"

namespace safe_el {

bool all_finite(const Eigen::Ref<const Mat>& m) { return m.allFinite(); }

OdeStepper::OdeStepper(double step, Derivative f)
    : step_size(step), derivative(std::move(f)) {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw Error(ErrorKind::InvalidConfig, "OdeStepper: step size must be positive");
  }
  if (!derivative) {
    throw Error(ErrorKind::InvalidConfig, "OdeStepper: missing derivative evaluator");
  }
}

namespace {

Vec checked_stage(const OdeStepper& s, double t, const Vec& x, int stage) {
  Vec k = s.derivative(t, x);
  if (k.size() != x.size() || !k.allFinite()) {
    std::ostringstream os;
    os << "non-finite derivative at RK4 stage " << stage << ", t = " << t;
    throw Error(ErrorKind::NonFiniteDerivative, os.str());
  }
  return k;
}

}  // namespace

Vec rk4_step(const OdeStepper& s, double t, const Vec& x) {
  const double h = s.step_size;
  const Vec k1 = checked_stage(s, t, x, 1);
  const Vec k2 = checked_stage(s, t + 0.5 * h, x + 0.5 * h * k1, 2);
  const Vec k3 = checked_stage(s, t + 0.5 * h, x + 0.5 * h * k2, 3);
  const Vec k4 = checked_stage(s, t + h, x + h * k3, 4);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Mat finite_diff_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                         double step) {
  const Vec f0 = f(x);
  Mat jac(f0.size(), x.size());
  Vec xp = x;
  Vec xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    jac.col(j) = (f(xp) - f(xm)) / (2.0 * step);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return jac;
}

RowVec finite_diff_gradient(const std::function<double(const Vec&)>& f,
                            const Vec& x, double step) {
  RowVec g(x.size());
  Vec xp = x;
  Vec xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp[j] = x[j] + step;
    xm[j] = x[j] - step;
    g[j] = (f(xp) - f(xm)) / (2.0 * step);
    xp[j] = x[j];
    xm[j] = x[j];
  }
  return g;
}

Mat pinv_or_inv(const Mat& jac, double singularity_tol) {
  if (jac.rows() > jac.cols()) {
    throw Error(ErrorKind::SingularJacobian,
                "pinv_or_inv: more task rows than joints, no right inverse");
  }
  const Eigen::JacobiSVD<Mat> svd(jac);
  const double smin = svd.singularValues().minCoeff();
  if (!(smin >= singularity_tol)) {
    std::ostringstream os;
    os << "Jacobian is singular: smallest singular value " << smin
       << " < tolerance " << singularity_tol;
    throw Error(ErrorKind::SingularJacobian, os.str());
  }
  if (jac.rows() == jac.cols()) {
    return jac.partialPivLu().inverse();
  }
  const Mat jjt = jac * jac.transpose();
  return jac.transpose() * jjt.ldlt().solve(Mat::Identity(jac.rows(), jac.rows()));
}

double spectral_norm(const Mat& m) {
  if (m.rows() == 2 && m.cols() == 2) {
    // Singular values of a 2x2 from the invariants of M^T M.
    const double fro2 = m.squaredNorm();
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
    return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
  }
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  return Eigen::JacobiSVD<Mat>(m).singularValues()(0);
}

}  // namespace safe_el

namespace safe_el {
namespace {

constexpr double kSdirkGamma = 1.0 - 0.70710678118654752440;
constexpr int kNewtonIters = 40;
constexpr double kNewtonTol = 1e-10;

struct StageFailure {};

// Last rejection reported by the derivative during the current step.
thread_local std::optional<Error> last_rejection;

// Evaluates f(t, y); false when the derivative rejects y or returns junk.
bool try_eval(const OdeStepper& s, double t, const Vec& y, Vec& out) {
  try {
    out = s.derivative(t, y);
  } catch (const Error& e) {
    last_rejection = e;
    return false;
  }
  if (out.size() == y.size() && out.allFinite()) return true;
  last_rejection = Error(ErrorKind::NonFiniteDerivative,
                         "non-finite derivative at t = " + std::to_string(t));
  return false;
}

// Forward-difference Jacobian of f(tc, .) along the probe basis T, i.e. of
// u -> f(tc, y + T u) at u = 0. Flips to the backward side where the forward
// point is rejected.
Mat stage_jacobian(const OdeStepper& s, double tc, const Vec& y, const Vec& fy, const Mat& T) {
  const Eigen::Index n = y.size();
  const double d = 1e-10 * std::max(1.0, y.cwiseAbs().maxCoeff());
  Mat jac(n, n);
  Vec yp, fp;
  for (Eigen::Index j = 0; j < n; ++j) {
    yp = y + d * T.col(j);
    if (try_eval(s, tc, yp, fp)) {
      jac.col(j) = (fp - fy) / d;
      continue;
    }
    yp = y - d * T.col(j);
    if (!try_eval(s, tc, yp, fp)) throw StageFailure{};
    jac.col(j) = (fy - fp) / d;
  }
  return jac;
}

// Newton state shared by both stages of one step; the Jacobian is reused until
// convergence stalls.
struct NewtonCache {
  Mat basis;
  Mat jac;
  bool fresh = false;
  double c = 0.0;
  Eigen::PartialPivLU<Mat> lu;
};

// Solves Y = base + c f(tc, Y) starting from y. Returns f(tc, Y).
Vec solve_stage(const OdeStepper& s, double tc, const Vec& base, double c, Vec& y,
                NewtonCache& nc) {
  const Eigen::Index n = y.size();
  Vec fy;
  if (!try_eval(s, tc, y, fy)) throw StageFailure{};
  Vec r = y - base - c * fy;
  Vec yp, fp;
  auto refresh = [&] {
    nc.jac = stage_jacobian(s, tc, y, fy, nc.basis);
    nc.fresh = true;
    nc.c = -1.0;
  };
  if (nc.jac.size() == 0) refresh();
  double prev_dy = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kNewtonIters; ++it) {
    if (nc.c != c) {
      nc.lu.compute(nc.basis - c * nc.jac);
      nc.c = c;
    }
    const Vec dy = -nc.basis * nc.lu.solve(r);
    if (!dy.allFinite()) throw StageFailure{};
    const double size =
        dy.cwiseAbs().cwiseQuotient((y.cwiseAbs().array() + 1.0).matrix()).maxCoeff();
    if (size < kNewtonTol) return fy;

    // Backtrack until the trial point is admissible and the residual drops.
    double alpha = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      yp = y + alpha * dy;
      if (!try_eval(s, tc, yp, fp)) continue;
      const Vec rp = yp - base - c * fp;
      if (rp.norm() < (1.0 - 1e-4 * alpha) * r.norm() || ls >= 10) {
        y = yp;
        fy = fp;
        r = rp;
        moved = true;
        nc.fresh = false;
        break;
      }
    }
    if (!moved) throw StageFailure{};
    // Slow contraction or a damped step: the stale Jacobian is the usual cause.
    if (!nc.fresh && (alpha < 1.0 || size > 0.25 * prev_dy)) {
      refresh();
      prev_dy = std::numeric_limits<double>::infinity();
      continue;
    }
    prev_dy = size;
  }
  throw StageFailure{};
}

Vec sdirk2_once(const OdeStepper& s, double t, const Vec& x, double h) {
  const double g = kSdirkGamma;
  NewtonCache nc;
  nc.basis = s.probe_basis.size() ? s.probe_basis : Mat::Identity(x.size(), x.size());
  Vec y1 = x;
  const Vec k1 = solve_stage(s, t + g * h, x, g * h, y1, nc);
  const Vec base = x + (1.0 - g) * h * k1;
  Vec y2 = base;
  nc.fresh = false;
  solve_stage(s, t + h, base, g * h, y2, nc);
  return y2;
}

Vec sdirk2_recursive(const OdeStepper& s, double t, const Vec& x, double h, int depth) {
  try {
    return sdirk2_once(s, t, x, h);
  } catch (const StageFailure&) {
    if (depth <= 0) throw;
  }
  const Vec mid = sdirk2_recursive(s, t, x, 0.5 * h, depth - 1);
  return sdirk2_recursive(s, t + 0.5 * h, mid, 0.5 * h, depth - 1);
}

}  // namespace

Vec sdirk2_step(const OdeStepper& s, double t, const Vec& x, int max_halvings) {
  last_rejection.reset();
  try {
    return sdirk2_recursive(s, t, x, s.step_size, max_halvings);
  } catch (const StageFailure&) {
    if (last_rejection) throw *last_rejection;
    throw Error(ErrorKind::NonFiniteDerivative,
                "implicit step did not converge at t = " + std::to_string(t));
  }
}

std::string to_string(Integrator i) { return i == Integrator::Rk4 ? "rk4" : "sdirk2"; }

Integrator integrator_from_string(const std::string& s) {
  if (s == "rk4") return Integrator::Rk4;
  if (s == "sdirk2") return Integrator::Sdirk2;
  throw Error(ErrorKind::InvalidConfig, "unknown integrator '" + s + "' (rk4 | sdirk2)");
}

Vec integrate_step(Integrator kind, const OdeStepper& s, double t, const Vec& x) {
  return kind == Integrator::Rk4 ? rk4_step(s, t, x) : sdirk2_step(s, t, x);
}

}  // namespace safe_el
