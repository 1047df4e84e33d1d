#pragma once

#include <functional>
#include <string>
#include <vector>

#include "safe_el/cbf_joint.hpp"
#include "safe_el/plant.hpp"

namespace safe_el {

// h(p) on task coordinates, with analytic gradient (row) and Hessian in p.
struct TaskBarrier {
  std::string name;
  std::function<double(const Vec&)> h;
  std::function<RowVec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
  BarrierGains gains{1000.0, 2.0, 100.0};
  double d1 = 0.2;    // velocity measurement bound
  double rho = 0.25;  // D1 + L
};

// "disk_exclusion" (x^2 + y^2 - 0.25), "parabola" (1 + x - y^2),
// "halfplane" (1 + x + y).
TaskBarrier task_barrier_preset(const std::string& name, const BarrierGains& gains, double d1,
                                double rho);

// hbar = dh/dp J eta - |dh/dp J|^2 / (2 beta) - beta rho^2 / 2 + lambda h
double hbar_task(const TaskBarrier& b, const ManipulatorModel& model, const Vec& p,
                 const Vec& q, const Vec& eta);

// Derivatives of hbar(p, q, eta) treating p, q and eta as separate arguments,
// plus the total q-derivative of q -> hbar(f(q), q, eta).
struct HbarGradients {
  RowVec d_p;        // holding q, eta fixed
  RowVec d_q;        // holding p, eta fixed (through J(q) only)
  RowVec d_q_total;  // d_p J + d_q
  RowVec d_eta;      // dh/dp J
};
HbarGradients hbar_task_gradients(const TaskBarrier& b, const ManipulatorModel& model,
                                  const Vec& p, const Vec& q, const Vec& eta);

struct PhiTerms {
  double phi0 = 0.0;
  RowVec phi1;
};

/// Filter terms for the task-space proxy p_dot = J (eta + e + xi), eta_dot = u.
///
/// Along the closed loop, d/dt hbar = d_p J w + d_q w + phi1 u with w the true
/// joint velocity. The p-channel sees w = eta + (e + xi), bounded by rho; the
/// q-channel sees w = w_hat + xi, bounded by D1:
///   phi0 = d_p J eta - |d_p J| rho + d_q w_hat - |d_q| D1 + gamma hbar
///   phi1 = dh/dp J
PhiTerms phi_terms(const TaskBarrier& b, const ManipulatorModel& model, const Vec& p,
                   const Vec& q, const Vec& eta, const Vec& w_hat);

// Requires h(p0) >= 0 and hbar(p0, q0, eta0) >= 0; throws InitialConditionFailed.
void check_initial_condition_task(const TaskBarrier& b, const ManipulatorModel& model,
                                  const Vec& p0, const Vec& q0, const Vec& eta0);

struct BackstepParams {
  double l1 = 20.0;
  double l2 = 20.0;
  double singularity_tol = 1e-3;
};

// delta = J^+ (-l1 e_d + pd_dot - |J|^2 / 2 e_d)
Vec delta_from_jacobian(const Mat& J, const Mat& J_pinv, double l1, const Vec& e_d,
                        const Vec& pd_dot);

/// Backstepping tracking input for the task-space proxy:
///   u_d = -l2 e_eta + (d delta/dp) J eta + d delta/dt
///         - 0.5 |(d delta/dp) J|^2 e_eta - J^T e_d
/// with e_d = p - p_d, e_eta = eta - delta. The partials hold J fixed:
///   d delta/dp = -(l1 + |J|^2 / 2) J^+
///   d delta/dt = J^+ ((l1 + |J|^2 / 2) pd_dot + pd_ddot)
Vec upsilon_d_from_jacobian(const Mat& J, const Mat& J_pinv, const BackstepParams& bp,
                            const Vec& p, const Vec& eta, const RefSample& ref);

Vec delta(const BackstepParams& bp, const ManipulatorModel& model, const Reference& ref,
          const Vec& p, const Vec& q, double t);
Vec upsilon_d(const BackstepParams& bp, const ManipulatorModel& model, const Reference& ref,
              const Vec& p, const Vec& q, const Vec& eta, double t);

QpProblem build_task_qp(const std::vector<TaskBarrier>& barriers, const ManipulatorModel& model,
                        const Vec& p, const Vec& q, const Vec& eta, const Vec& w_hat,
                        const Vec& u_d);

// Throws SafetyFilterInfeasible when the stacked polyhedron is empty.
Vec safe_upsilon(const std::vector<TaskBarrier>& barriers, const ManipulatorModel& model,
                 const Vec& p, const Vec& q, const Vec& eta, const Vec& w_hat, const Vec& u_d);

}  // namespace safe_el
