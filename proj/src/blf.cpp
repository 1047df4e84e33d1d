#include "safe_el/blf.hpp"

#include <cmath>
#include <sstream>

#include "safe_el/errors.hpp"

namespace safe_el {
namespace {

void require_inside(const BlfParams& p, double en) {
  if (!(en < p.L)) {
    std::ostringstream os;
    os << "tracking error norm " << en << " left the open ball of radius L = " << p.L;
    throw Error(ErrorKind::TrackingErrorEscaped, os.str());
  }
}

}  // namespace

double regressor_phi(const Vec& w_hat, double d1) {
  const double a = w_hat.norm() + d1;
  return a * a;
}

double blf_gain(const BlfParams& p, const BlfState& s, const Vec& e, const Vec& w_hat,
                const Vec& nu) {
  const double en = e.norm();
  const double a1 = s.theta1_hat * regressor_phi(w_hat, p.d1);
  const double a2 = s.theta2_hat;
  const double nn = nu.norm();
  return p.k1 + a1 * a1 / (a1 * en + p.eps1) + a2 * a2 / (a2 * en + p.eps2) +
         nn * nn / (en * nn + p.eps);
}

Vec blf_torque(const BlfParams& p, const BlfState& s, const Vec& e, const Vec& w_hat,
               const Vec& nu) {
  require_inside(p, e.norm());
  return -p.lambda2 * blf_gain(p, s, e, w_hat, nu) * e;
}

AdaptiveRates adaptive_rates(const BlfParams& p, const BlfState& s, const Vec& e,
                             const Vec& w_hat) {
  const double en = e.norm();
  require_inside(p, en);
  const double denom = p.L * p.L - en * en;
  return {-p.gamma_theta * s.theta1_hat + en * regressor_phi(w_hat, p.d1) / denom,
          -p.gamma_theta * s.theta2_hat + en / denom};
}

double blf_value(const BlfParams& p, const BlfState& s, const Vec& e, double theta1_true,
                 double theta2_true) {
  const double en2 = e.squaredNorm();
  require_inside(p, std::sqrt(en2));
  const double d1 = theta1_true - s.theta1_hat;
  const double d2 = theta2_true - s.theta2_hat;
  return 0.5 * std::log(p.L * p.L / (p.L * p.L - en2)) + 0.5 * d1 * d1 + 0.5 * d2 * d2;
}

BlfValidation validate_params(const BlfParams& p) {
  const double vals[] = {p.lambda2, p.L, p.k1, p.eps, p.eps1, p.eps2, p.gamma_theta};
  for (double v : vals) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::GainConditionViolated,
                  "BLF constants lambda2, L, k1, eps, eps1, eps2, gamma_theta must be positive");
    }
  }
  if (!(p.d1 >= 0.0)) {
    throw Error(ErrorKind::GainConditionViolated, "BLF noise bound D1 must be nonnegative");
  }
  const double threshold = p.big_lambda() / (p.L * p.L);
  if (p.k1 > threshold) return {};

  std::ostringstream os;
  os << "k1 = " << p.k1 << " does not exceed Lambda/L^2 = " << threshold;
  if (!p.replicate_paper) throw Error(ErrorKind::GainConditionViolated, os.str());
  return {false, os.str() + " (accepted: replicate_paper)"};
}

}  // namespace safe_el
