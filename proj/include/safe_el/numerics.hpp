#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace safe_el {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// Gradients are row vectors throughout (1 x n).
using RowVec = Eigen::RowVectorXd;

bool all_finite(const Eigen::Ref<const Mat>& m);

// Fixed-step integrator state: a step size and a time-varying vector field.
struct OdeStepper {
  using Derivative = std::function<Vec(double t, const Vec& x)>;

  OdeStepper(double step_size, Derivative derivative);

  double step_size;
  Derivative derivative;
  // Directions along which implicit steppers difference the vector field
  // (columns, x = probe_basis * u). Empty means the identity. Stiff systems whose
  // fast mode is a difference of state components should probe that difference
  // and its complement separately, or the slow part cancels in floating point.
  Mat probe_basis;
};

// Classical RK4 update. Throws NonFiniteDerivative if any stage is non-finite.
Vec rk4_step(const OdeStepper& stepper, double t, const Vec& x);

// Two-stage, stiffly accurate, L-stable SDIRK of order 2. Each stage is solved by
// damped Newton with a forward-difference Jacobian. A trial point where the
// derivative throws is treated as outside the domain and the Newton step is
// shortened; a step whose stages do not converge is retried as two half steps
// (up to max_halvings levels) before the last error is rethrown.
Vec sdirk2_step(const OdeStepper& stepper, double t, const Vec& x, int max_halvings = 8);

enum class Integrator { Sdirk2, Rk4 };
std::string to_string(Integrator i);
Integrator integrator_from_string(const std::string& s);
Vec integrate_step(Integrator kind, const OdeStepper& stepper, double t, const Vec& x);

// Central differences: column j is (f(x + h e_j) - f(x - h e_j)) / 2h.
Mat finite_diff_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                         double step = 1e-5);

// Scalar version for gradients of h: returns a 1 x n row.
RowVec finite_diff_gradient(const std::function<double(const Vec&)>& f,
                            const Vec& x, double step = 1e-5);

// Right inverse J^T (J J^T)^{-1}; plain inverse when J is square. Throws
// SingularJacobian when the smallest singular value is below singularity_tol.
Mat pinv_or_inv(const Mat& jac, double singularity_tol);

// Induced 2-norm. Closed form for 2 x 2, SVD otherwise.
double spectral_norm(const Mat& m);

}  // namespace safe_el
