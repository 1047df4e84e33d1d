#include "safe_el/cbf_joint.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "safe_el/errors.hpp"

namespace safe_el {
namespace {

JointBarrier affine_box(std::string name, int joint, double sign, double offset,
                        const BarrierGains& gains, double rho) {
  JointBarrier b;
  b.name = std::move(name);
  b.h = [=](const Vec& q) { return offset + sign * q[joint]; };
  b.grad = [=](const Vec& q) {
    RowVec g = RowVec::Zero(q.size());
    g[joint] = sign;
    return g;
  };
  b.hess = [](const Vec& q) { return Mat::Zero(q.size(), q.size()).eval(); };
  b.affine = true;
  b.gains = gains;
  b.rho = rho;
  return b;
}

bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(1.0, std::abs(a));
}

}  // namespace

JointBarrier joint_barrier_preset(const std::string& name, const BarrierGains& gains,
                                  double rho) {
  if (name == "box_q1_upper") return affine_box(name, 0, -1.0, 2.5, gains, rho);
  if (name == "box_q1_lower") return affine_box(name, 0, 1.0, 2.5, gains, rho);
  if (name == "box_q2_upper") return affine_box(name, 1, -1.0, 2.0, gains, rho);
  if (name == "box_q2_lower") return affine_box(name, 1, 1.0, 1.0, gains, rho);
  throw Error(ErrorKind::UnknownPreset, "unknown joint barrier preset '" + name + "'");
}

JointBarrier joint_ball_barrier(const Vec& center, double radius, const BarrierGains& gains,
                                double rho) {
  JointBarrier b;
  b.name = "ball";
  b.h = [=](const Vec& q) { return radius * radius - (q - center).squaredNorm(); };
  b.grad = [=](const Vec& q) { return RowVec(-2.0 * (q - center).transpose()); };
  b.hess = [](const Vec& q) { return Mat(-2.0 * Mat::Identity(q.size(), q.size())); };
  b.gains = gains;
  b.rho = rho;
  return b;
}

void validate_joint_barrier(const JointBarrier& b, int dim, int n_points, std::uint64_t seed) {
  const auto& g = b.gains;
  if (!(g.gamma > 0.0) || !(g.beta > 0.0) || !(g.lambda > 0.0) || !(b.rho > 0.0)) {
    throw Error(ErrorKind::InvalidConfig,
                "barrier '" + b.name + "': gamma, beta, lambda and rho must be positive");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-std::numbers::pi, std::numbers::pi);
  for (int k = 0; k < n_points; ++k) {
    Vec q(dim);
    for (int i = 0; i < dim; ++i) q[i] = U(rng);
    const RowVec grad = b.grad(q);
    const RowVec grad_fd = finite_diff_gradient(b.h, q);
    const Mat hess = b.hess(q);
    const Mat hess_fd = finite_diff_jacobian(
        [&](const Vec& x) { return Vec(b.grad(x).transpose()); }, q);
    for (int i = 0; i < dim; ++i) {
      bool ok = close_rel(grad[i], grad_fd[i], 1e-5);
      for (int j = 0; j < dim && ok; ++j) ok = close_rel(hess(i, j), hess_fd(i, j), 1e-5);
      if (!ok) {
        throw Error(ErrorKind::InvalidConfig,
                    "barrier '" + b.name + "': analytic derivatives disagree with finite differences");
      }
    }
  }
}

double hbar(const JointBarrier& b, const Vec& q, const Vec& mu) {
  const RowVec dh = b.grad(q);
  const auto& g = b.gains;
  return dh.dot(mu) - dh.squaredNorm() / (2.0 * g.beta) - 0.5 * g.beta * b.rho * b.rho +
         g.lambda * b.h(q);
}

PsiTerms psi_terms(const JointBarrier& b, const Vec& q, const Vec& mu) {
  const RowVec dh = b.grad(q);
  const auto& g = b.gains;
  RowVec m = g.lambda * dh;
  if (!b.affine) {
    const Mat H = b.hess(q);
    m += mu.transpose() * H - (1.0 / g.beta) * dh * H;
  }
  return {m.dot(mu) - m.norm() * b.rho + g.gamma * hbar(b, q, mu), dh};
}

void check_initial_condition(const JointBarrier& b, const Vec& q0, const Vec& mu0) {
  const double h0 = b.h(q0);
  const double hb0 = hbar(b, q0, mu0);
  if (!(h0 > 0.0) || !(hb0 >= 0.0)) {
    std::ostringstream os;
    os << "barrier '" << b.name << "': initial condition fails (h = " << h0
       << " must be > 0, hbar = " << hb0 << " must be >= 0)";
    throw Error(ErrorKind::InitialConditionFailed, os.str());
  }
}

double nominal_decay_rate(double alpha1, double alpha2) {
  // Eigenvalues are the roots of s^2 + alpha2 s + alpha1, repeated per joint.
  const double disc = alpha2 * alpha2 - 4.0 * alpha1;
  const double max_re = disc >= 0.0 ? 0.5 * (-alpha2 + std::sqrt(disc)) : -0.5 * alpha2;
  return -max_re;
}

NominalJointLaw::NominalJointLaw(double alpha1, double alpha2, Reference reference)
    : alpha1_(alpha1), alpha2_(alpha2), reference_(std::move(reference)) {
  const double rate = nominal_decay_rate(alpha1, alpha2);
  if (!(rate > 0.5)) {
    std::ostringstream os;
    os << "nominal law gains alpha1 = " << alpha1 << ", alpha2 = " << alpha2
       << " give decay rate " << rate << " <= 1/2";
    throw Error(ErrorKind::InvalidConfig, os.str());
  }
}

Vec NominalJointLaw::nu(const Vec& q, const Vec& mu, double t) const {
  const RefSample r = reference_.at(t);
  return -alpha1_ * (q - r.pos) - alpha2_ * (mu - r.vel) + r.acc;
}

QpProblem build_joint_qp(const std::vector<JointBarrier>& barriers, const Vec& q,
                         const Vec& mu, const Vec& nu_d) {
  QpProblem p{nu_d, Mat(barriers.size(), nu_d.size()), Vec(barriers.size())};
  for (std::size_t i = 0; i < barriers.size(); ++i) {
    const PsiTerms t = psi_terms(barriers[i], q, mu);
    p.A.row(i) = t.psi1;
    p.b[i] = -t.psi0;
  }
  return p;
}

Vec safe_nu(const std::vector<JointBarrier>& barriers, const Vec& q, const Vec& mu,
            const Vec& nu_d) {
  const QpProblem p = build_joint_qp(barriers, q, mu, nu_d);
  try {
    return solve_min_norm(p).u_star;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Infeasible && e.kind() != ErrorKind::DegenerateConstraint) throw;
    std::ostringstream os;
    os << "joint-space CBF-QP infeasible at q = (" << q.transpose() << "), mu = ("
       << mu.transpose() << "): " << e.what();
    throw Error(ErrorKind::SafetyFilterInfeasible, os.str());
  }
}

}  // namespace safe_el
