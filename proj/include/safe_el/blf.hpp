#pragma once

#include <string>

#include "safe_el/numerics.hpp"

namespace safe_el {

// Gains of the adaptive barrier-Lyapunov velocity tracker. lambda2 is the
// only model constant the controller may read (upper inertia bound).
struct BlfParams {
  double lambda2 = 5.0;
  double d1 = 0.2;
  double L = 0.3;
  double k1 = 0.5;
  double eps = 0.01;
  double eps1 = 0.01;
  double eps2 = 0.01;
  double gamma_theta = 1.0;
  // Accept gain sets that violate k1 > Lambda / L^2 (logged as a warning).
  bool replicate_paper = false;

  double big_lambda() const { return eps + eps1 + eps2; }
  bool operator==(const BlfParams&) const = default;
};

struct BlfState {
  double theta1_hat = 0.1;
  double theta2_hat = 0.1;
};

struct AdaptiveRates {
  double theta1_dot = 0.0;
  double theta2_dot = 0.0;
};

// phi = (||w_hat|| + D1)^2
double regressor_phi(const Vec& w_hat, double d1);

// Scalar gain N multiplying -lambda2 * e in the torque law.
double blf_gain(const BlfParams& p, const BlfState& s, const Vec& e, const Vec& w_hat,
                const Vec& nu);

/// tau = -lambda2 * e * N with
///   N = k1 + (th1 phi)^2 / (th1 phi |e| + eps1) + th2^2 / (th2 |e| + eps2)
///          + |nu|^2 / (|e| |nu| + eps).
/// Throws TrackingErrorEscaped if ||e|| >= L.
Vec blf_torque(const BlfParams& p, const BlfState& s, const Vec& e, const Vec& w_hat,
               const Vec& nu);

/// Leaky adaptation laws; the drive terms are nonnegative on ||e|| < L.
AdaptiveRates adaptive_rates(const BlfParams& p, const BlfState& s, const Vec& e,
                             const Vec& w_hat);

// V = 0.5 log(L^2 / (L^2 - |e|^2)) + 0.5 (th1 - th1_hat)^2 + 0.5 (th2 - th2_hat)^2.
// Diagnostic only: needs the true theta values.
double blf_value(const BlfParams& p, const BlfState& s, const Vec& e, double theta1_true,
                 double theta2_true);

struct BlfValidation {
  bool gain_condition_met = true;
  std::string warning;  // non-empty when the condition is waived
};

// Positivity of all constants and k1 > Lambda / L^2. The latter is downgraded
// to a warning when replicate_paper is set. Throws GainConditionViolated.
BlfValidation validate_params(const BlfParams& p);

}  // namespace safe_el
