#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "safe_el/numerics.hpp"
#include "safe_el/qp.hpp"
#include "safe_el/signals.hpp"

namespace safe_el {

struct BarrierGains {
  double gamma = 10.0;
  double beta = 2.0;
  double lambda = 16.0;

  bool operator==(const BarrierGains&) const = default;
};

// Twice-differentiable h(q) with analytic gradient (row) and Hessian.
// rho = D1 + L bounds the mismatched disturbance e + xi.
struct JointBarrier {
  std::string name;
  std::function<double(const Vec&)> h;
  std::function<RowVec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
  bool affine = false;
  BarrierGains gains;
  double rho = 0.5;
};

// "box_q1_upper" (2.5 - q1), "box_q1_lower" (q1 + 2.5),
// "box_q2_upper" (2 - q2),   "box_q2_lower" (q2 + 1).
JointBarrier joint_barrier_preset(const std::string& name, const BarrierGains& gains,
                                  double rho);

// h = radius^2 - ||q - center||^2, Hessian -2 I.
JointBarrier joint_ball_barrier(const Vec& center, double radius, const BarrierGains& gains,
                                double rho);

// Gains positive, rho positive, and grad/hess agreeing with central
// differences to 1e-5 relative on random points in [-pi, pi]^n.
// Throws InvalidConfig.
void validate_joint_barrier(const JointBarrier& b, int dim = 2, int n_points = 100,
                            std::uint64_t seed = 7);

// hbar = dh/dq mu - |dh/dq|^2 / (2 beta) - beta rho^2 / 2 + lambda h
double hbar(const JointBarrier& b, const Vec& q, const Vec& mu);

struct PsiTerms {
  double psi0 = 0.0;
  RowVec psi1;
};

// M = mu^T H - (1/beta) dh/dq H + lambda dh/dq
// psi0 = M mu - |M| rho + gamma hbar,  psi1 = dh/dq
PsiTerms psi_terms(const JointBarrier& b, const Vec& q, const Vec& mu);

// Requires h(q0) > 0 and hbar(q0, mu0) >= 0; throws InitialConditionFailed.
void check_initial_condition(const JointBarrier& b, const Vec& q0, const Vec& mu0);

// Companion-matrix decay rate -max Re eig([[0, I], [-a1 I, -a2 I]]).
double nominal_decay_rate(double alpha1, double alpha2);

// nu_d = -alpha1 (q - q_d) - alpha2 (mu - qd_dot) + qd_ddot
class NominalJointLaw {
 public:
  // Throws InvalidConfig unless the decay rate exceeds 1/2.
  NominalJointLaw(double alpha1, double alpha2, Reference reference);

  Vec nu(const Vec& q, const Vec& mu, double t) const;

  double alpha1() const { return alpha1_; }
  double alpha2() const { return alpha2_; }
  const Reference& reference() const { return reference_; }

 private:
  double alpha1_;
  double alpha2_;
  Reference reference_;
};

// One row (psi1_i, -psi0_i) per barrier.
QpProblem build_joint_qp(const std::vector<JointBarrier>& barriers, const Vec& q,
                         const Vec& mu, const Vec& nu_d);

// Minimal-norm correction of nu_d satisfying every barrier constraint.
// Throws SafetyFilterInfeasible when the stacked polyhedron is empty.
Vec safe_nu(const std::vector<JointBarrier>& barriers, const Vec& q, const Vec& mu,
            const Vec& nu_d);

}  // namespace safe_el
