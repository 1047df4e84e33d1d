#include "safe_el/sim.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "safe_el/errors.hpp"

namespace safe_el {
namespace {

Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string state_str(double t, const Vec& x) {
  std::ostringstream os;
  os.precision(10);
  os << "t = " << t << ", x = [" << x.transpose() << "]";
  return os.str();
}

}  // namespace

ClosedLoop::ClosedLoop(const ScenarioConfig& s)
    : scenario_(s), reference_(Reference::hold(Vec::Zero(2))) {
  scenario_.plant.validate();
  blf_ = s.blf;
  blf_.d1 = s.uncertainty.d1;
  const BlfValidation v = validate_params(blf_);
  if (!v.warning.empty()) warnings_.push_back(v.warning);

  signals_.tau_d = signal_preset(s.uncertainty.tau_d);
  signals_.xi = signal_preset(s.uncertainty.xi);
  signals_.d0 = s.uncertainty.d0;
  signals_.d1 = s.uncertainty.d1;
  signals_.d2 = s.uncertainty.d2;

  const double rho = blf_.d1 + blf_.L;
  Vec q0, w0 = to_vec(s.initial.w);

  if (s.mode == Mode::Joint) {
    q0 = to_vec(s.initial.q);
    reference_ = Reference::from_id(s.nominal.reference, q0);
    joint_law_.emplace(s.nominal.alpha1, s.nominal.alpha2, reference_);
    for (const auto& e : s.barriers) {
      joint_barriers_.push_back(joint_barrier_preset(e.preset, e.gains, rho));
      validate_joint_barrier(joint_barriers_.back());
      names_.push_back(e.preset);
    }
  } else {
    const Vec p0 = to_vec(s.initial.p);
    q0 = inverse_kinematics(scenario_.plant, p0, s.initial.elbow_up);
    reference_ = Reference::from_id(s.nominal.reference, p0);
    backstep_ = BackstepParams{s.nominal.l1, s.nominal.l2, s.nominal.singularity_tol};
    pinv_or_inv(jacobian(scenario_.plant, q0), backstep_.singularity_tol);
    for (const auto& e : s.barriers) {
      task_barriers_.push_back(task_barrier_preset(e.preset, e.gains, blf_.d1, rho));
      names_.push_back(e.preset);
    }
  }

  // mu(0) = eta(0) = w_hat(0)
  const Vec proxy0 = w0 - signals_.xi_at(0.0);
  x0_.resize(8);
  x0_ << q0, w0, proxy0, s.theta_init, s.theta_init;

  if (s.mode == Mode::Joint) {
    for (const auto& b : joint_barriers_) check_initial_condition(b, q0, proxy0);
  } else {
    const Vec p0 = forward_kinematics(scenario_.plant, q0);
    for (const auto& b : task_barriers_)
      check_initial_condition_task(b, scenario_.plant, p0, q0, proxy0);
  }
}

LoopEval ClosedLoop::evaluate(double t, const Vec& x) const {
  const Vec q = x.segment(0, 2);
  const Vec w = x.segment(2, 2);
  const Vec z = x.segment(4, 2);
  const BlfState th{x[6], x[7]};
  const ManipulatorModel& md = scenario_.plant;
  const bool bypass = scenario_.sim.unfiltered_baseline;

  LoopEval ev;
  ev.w_hat = w - signals_.xi_at(t);
  ev.e = ev.w_hat - z;
  const double en = ev.e.norm();
  if (!(en <= kTrackingGuard * blf_.L)) {
    std::ostringstream os;
    os << "||e|| = " << en << " crossed the guard band " << kTrackingGuard << " * L at "
       << state_str(t, x);
    throw Error(ErrorKind::TrackingErrorEscaped, os.str());
  }

  if (scenario_.mode == Mode::Joint) {
    ev.u_nominal = joint_law_->nu(q, z, t);
    ev.u = bypass ? ev.u_nominal : safe_nu(joint_barriers_, q, z, ev.u_nominal);
    for (const auto& b : joint_barriers_) {
      ev.h.push_back(b.h(q));
      ev.hbar.push_back(hbar(b, q, z));
    }
    ev.tracking_error = (q - reference_.at(t).pos).norm();
  } else {
    ev.p = forward_kinematics(md, q);
    const Mat J = jacobian(md, q);
    const Mat J_pinv = pinv_or_inv(J, backstep_.singularity_tol);
    ev.u_nominal = upsilon_d_from_jacobian(J, J_pinv, backstep_, ev.p, z, reference_.at(t));
    ev.u = bypass ? ev.u_nominal
                  : safe_upsilon(task_barriers_, md, ev.p, q, z, ev.w_hat, ev.u_nominal);
    for (const auto& b : task_barriers_) {
      ev.h.push_back(b.h(ev.p));
      ev.hbar.push_back(hbar_task(b, md, ev.p, q, z));
    }
    ev.tracking_error = (ev.p - reference_.at(t).pos).norm();
  }
  ev.correction_norm = (ev.u - ev.u_nominal).norm();

  ev.tau = blf_torque(blf_, th, ev.e, ev.w_hat, ev.u);
  const AdaptiveRates rates = adaptive_rates(blf_, th, ev.e, ev.w_hat);

  ev.x_dot.resize(8);
  ev.x_dot << w, accel(md, q, w, ev.tau, signals_.tau_d_at(t)), ev.u, rates.theta1_dot,
      rates.theta2_dot;
  return ev;
}

OdeStepper ClosedLoop::stepper() const {
  OdeStepper s(scenario_.sim.step,
               [this](double t, const Vec& x) { return evaluate(t, x).x_dot; });
  // The BLF loop is stiff only in e = w - xi - mu. Probe w alone (moves e) and
  // w + mu together (holds e) so the slow dynamics survive differencing.
  s.probe_basis = Mat::Identity(8, 8);
  s.probe_basis(2, 4) = 1.0;
  s.probe_basis(3, 5) = 1.0;
  return s;
}

ClosedLoop assemble_joint(const ScenarioConfig& scenario) {
  if (scenario.mode != Mode::Joint) {
    throw Error(ErrorKind::InvalidConfig, "assemble_joint: scenario is not in joint mode");
  }
  return ClosedLoop(scenario);
}

ClosedLoop assemble_task(const ScenarioConfig& scenario) {
  if (scenario.mode != Mode::Task) {
    throw Error(ErrorKind::InvalidConfig, "assemble_task: scenario is not in task mode");
  }
  return ClosedLoop(scenario);
}

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::SafetyViolated: return "safety_violated";
    case RunStatus::TrackingErrorEscaped: return "tracking_error_escaped";
    case RunStatus::SafetyFilterInfeasible: return "safety_filter_infeasible";
    case RunStatus::SingularJacobian: return "singular_jacobian";
    case RunStatus::NonFiniteDerivative: return "non_finite_derivative";
  }
  return "unknown";
}

std::size_t log_length(double T, double step) {
  return static_cast<std::size_t>(std::floor(T / step + 1e-9)) + 1;
}

RunSummary summarize(const TrajectoryLog& log, double horizon, RunStatus status,
                     std::string diagnostic) {
  RunSummary s;
  s.barrier_names = log.barrier_names;
  const std::size_t nb = log.barrier_names.size();
  s.min_h.assign(nb, std::numeric_limits<double>::infinity());
  s.min_hbar.assign(nb, std::numeric_limits<double>::infinity());
  double sq = 0.0;
  int n_tail = 0;
  for (const auto& r : log.rows) {
    for (std::size_t i = 0; i < nb; ++i) {
      s.min_h[i] = std::min(s.min_h[i], r.h[i]);
      s.min_hbar[i] = std::min(s.min_hbar[i], r.hbar[i]);
    }
    s.max_e_norm = std::max(s.max_e_norm, r.e_norm);
    if (r.qp_correction_norm > 0.0) ++s.qp_activations;
    if (r.t >= 0.5 * horizon) {
      sq += r.tracking_error * r.tracking_error;
      ++n_tail;
    }
  }
  s.rms_tracking_error = n_tail > 0 ? std::sqrt(sq / n_tail) : 0.0;
  s.status = status;
  s.diagnostic = std::move(diagnostic);
  s.t_end = log.rows.empty() ? 0.0 : log.rows.back().t;
  if (!log.rows.empty()) s.q0 = {log.rows.front().q[0], log.rows.front().q[1]};
  return s;
}

RunResult run(const ScenarioConfig& scenario) {
  const ClosedLoop loop(scenario);
  const OdeStepper stepper = loop.stepper();
  const double step = scenario.sim.step;
  const std::size_t n_rows = log_length(scenario.sim.T, step);
  const bool baseline = scenario.sim.unfiltered_baseline;

  RunResult res;
  res.log.mode = scenario.mode;
  res.log.step = step;
  res.log.barrier_names = loop.barrier_names();
  res.log.rows.reserve(n_rows);

  RunStatus status = RunStatus::Completed;
  std::string diag;
  bool violated = false;
  Vec x = loop.initial_state();

  try {
    for (std::size_t k = 0; k < n_rows; ++k) {
      const double t = static_cast<double>(k) * step;
      const LoopEval ev = loop.evaluate(t, x);

      LogRow row;
      row.t = t;
      row.q = x.segment(0, 2);
      row.w = x.segment(2, 2);
      row.w_hat = ev.w_hat;
      row.proxy = x.segment(4, 2);
      row.e_norm = ev.e.norm();
      row.theta1_hat = x[6];
      row.theta2_hat = x[7];
      row.tau = ev.tau;
      row.u = ev.u;
      row.h = ev.h;
      row.hbar = ev.hbar;
      row.p = ev.p;
      row.qp_correction_norm = ev.correction_norm;
      row.tracking_error = ev.tracking_error;
      res.log.rows.push_back(std::move(row));

      for (std::size_t i = 0; i < ev.h.size(); ++i) {
        if (ev.h[i] < -kSafetyTol && !violated) {
          violated = true;
          std::ostringstream os;
          os << "barrier '" << loop.barrier_names()[i] << "' (index " << i << ") h = " << ev.h[i]
             << " at " << state_str(t, x);
          diag = os.str();
        }
      }
      if (violated && !baseline) break;
      if (k + 1 < n_rows) x = integrate_step(scenario.sim.integrator, stepper, t, x);
    }
    if (violated) status = RunStatus::SafetyViolated;
  } catch (const Error& e) {
    switch (e.kind()) {
      case ErrorKind::TrackingErrorEscaped: status = RunStatus::TrackingErrorEscaped; break;
      case ErrorKind::SafetyFilterInfeasible: status = RunStatus::SafetyFilterInfeasible; break;
      case ErrorKind::SingularJacobian: status = RunStatus::SingularJacobian; break;
      case ErrorKind::NonFiniteDerivative: status = RunStatus::NonFiniteDerivative; break;
      default: throw;
    }
    diag = e.what();
    if (violated) diag = "after earlier safety violation; " + diag;
  }

  res.summary = summarize(res.log, scenario.sim.T, status, diag);
  res.summary.warnings = loop.warnings();
  const Vec& x0 = loop.initial_state();
  res.summary.q0 = {x0[0], x0[1]};
  return res;
}

}  // namespace safe_el
