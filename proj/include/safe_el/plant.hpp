#pragma once

#include <cstdint>

#include "safe_el/numerics.hpp"

namespace safe_el {

// Planar two-link arm with uniform rods of equal length l.
struct ManipulatorModel {
  double m1 = 1.0;
  double m2 = 1.0;
  double l = 1.0;
  double g = 9.81;

  void validate() const;
  bool operator==(const ManipulatorModel&) const = default;
};

Mat mass_matrix(const ManipulatorModel& model, const Vec& q);
Mat coriolis_matrix(const ManipulatorModel& model, const Vec& q, const Vec& w);
Vec gravity_vector(const ManipulatorModel& model, const Vec& q);

// w_dot = M^{-1} (tau - C w - G + tau_d)
Vec accel(const ManipulatorModel& model, const Vec& q, const Vec& w, const Vec& tau,
          const Vec& tau_d);

// End-effector position p = (x, y).
Vec forward_kinematics(const ManipulatorModel& model, const Vec& q);
Mat jacobian(const ManipulatorModel& model, const Vec& q);
// dJ/dq_j, needed by the chain rule through J(q) in task-space barriers.
Mat jacobian_partial(const ManipulatorModel& model, const Vec& q, int j);

// Closed-form inverse kinematics. elbow_up selects q2 < 0; the default
// elbow-down branch has q2 >= 0. Throws InvalidConfig if p is unreachable.
Vec inverse_kinematics(const ManipulatorModel& model, const Vec& p, bool elbow_up = false);

// Empirical Property P1/P2 constants over q ~ U[-pi, pi]^2, w ~ U[-10, 10]^2.
struct BoundsReport {
  int n_samples = 0;
  double lambda1 = 0.0;   // min eigenvalue of M seen
  double lambda2 = 0.0;   // max eigenvalue of M seen
  double zeta_c = 0.0;    // max ||C(q,w)|| / ||w||
  double zeta_g = 0.0;    // max ||G(q)||
  double declared_lambda2 = 0.0;
};

/// Samples the model and throws BoundViolated (message carries the witness)
/// if M is not symmetric positive definite or sigma_max(M) exceeds
/// declared_lambda2 at any sample.
BoundsReport certify_bounds(const ManipulatorModel& model, int n_samples,
                            double declared_lambda2 = 5.0, std::uint64_t seed = 1);

// Adaptive targets theta1 = zeta_c / lambda1, theta2 = (zeta_g + D0) / lambda1 + D2.
struct TrueAdaptiveTargets {
  double theta1 = 0.0;
  double theta2 = 0.0;
};
TrueAdaptiveTargets true_adaptive_targets(const BoundsReport& bounds, double d0, double d2);

}  // namespace safe_el
