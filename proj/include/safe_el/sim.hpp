#pragma once

#include <optional>
#include <string>
#include <vector>

#include "safe_el/blf.hpp"
#include "safe_el/cbf_joint.hpp"
#include "safe_el/cbf_task.hpp"
#include "safe_el/numerics.hpp"
#include "safe_el/plant.hpp"
#include "safe_el/scenario.hpp"
#include "safe_el/signals.hpp"

namespace safe_el {

// Fraction of L at which the simulator declares the tracking error escaped.
inline constexpr double kTrackingGuard = 0.999;
// RK4 slack on h >= 0.
inline constexpr double kSafetyTol = 1e-6;

// Everything the closed loop computes at one (t, x). The flat state is
// [q (2), w (2), mu or eta (2), theta1_hat, theta2_hat].
struct LoopEval {
  Vec x_dot;
  Vec w_hat;
  Vec e;
  Vec tau;
  Vec u_nominal;  // nu_d or upsilon_d
  Vec u;          // filtered nu or upsilon
  double correction_norm = 0.0;
  std::vector<double> h;
  std::vector<double> hbar;
  Vec p;  // end-effector position (task mode only)
  double tracking_error = 0.0;
};

class ClosedLoop {
 public:
  // Validates gains, barrier derivatives and initial conditions.
  // Throws GainConditionViolated, InitialConditionFailed, InvalidConfig,
  // UnknownPreset or SingularJacobian.
  explicit ClosedLoop(const ScenarioConfig& scenario);

  Mode mode() const { return scenario_.mode; }
  const ScenarioConfig& scenario() const { return scenario_; }
  const Vec& initial_state() const { return x0_; }
  const std::vector<std::string>& barrier_names() const { return names_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  const ManipulatorModel& model() const { return scenario_.plant; }
  const UncertaintySignals& signals() const { return signals_; }
  const Reference& reference() const { return reference_; }
  const std::vector<JointBarrier>& joint_barriers() const { return joint_barriers_; }
  const std::vector<TaskBarrier>& task_barriers() const { return task_barriers_; }

  // Throws TrackingErrorEscaped past kTrackingGuard * L, plus any filter error.
  LoopEval evaluate(double t, const Vec& x) const;
  OdeStepper stepper() const;

 private:
  ScenarioConfig scenario_;
  BlfParams blf_;
  UncertaintySignals signals_;
  Reference reference_;
  std::optional<NominalJointLaw> joint_law_;
  BackstepParams backstep_;
  std::vector<JointBarrier> joint_barriers_;
  std::vector<TaskBarrier> task_barriers_;
  std::vector<std::string> names_;
  std::vector<std::string> warnings_;
  Vec x0_;
};

ClosedLoop assemble_joint(const ScenarioConfig& scenario);
ClosedLoop assemble_task(const ScenarioConfig& scenario);

enum class RunStatus {
  Completed,
  SafetyViolated,
  TrackingErrorEscaped,
  SafetyFilterInfeasible,
  SingularJacobian,
  NonFiniteDerivative,
};
std::string to_string(RunStatus s);

struct LogRow {
  double t = 0.0;
  Vec q, w, w_hat, proxy;
  double e_norm = 0.0;
  double theta1_hat = 0.0, theta2_hat = 0.0;
  Vec tau, u;
  std::vector<double> h, hbar;
  Vec p;
  double qp_correction_norm = 0.0;
  double tracking_error = 0.0;
};

struct TrajectoryLog {
  Mode mode = Mode::Joint;
  double step = 0.0;
  std::vector<std::string> barrier_names;
  std::vector<LogRow> rows;
};

struct RunSummary {
  std::vector<std::string> barrier_names;
  std::vector<double> min_h;
  std::vector<double> min_hbar;
  double max_e_norm = 0.0;
  double rms_tracking_error = 0.0;  // over t in [T/2, T]
  int qp_activations = 0;           // logged steps with a nonzero correction
  RunStatus status = RunStatus::Completed;
  std::string diagnostic;
  double t_end = 0.0;
  std::vector<std::string> warnings;
  std::vector<double> q0;
};

struct RunResult {
  TrajectoryLog log;
  RunSummary summary;
};

// Log rows for a horizon T with step h: floor(T/h) + 1.
std::size_t log_length(double T, double step);

/// Integrates the closed loop on a uniform grid. Runtime failures
/// (escaped tracking error, infeasible filter, singular Jacobian, h below
/// -kSafetyTol) stop the run and are reported through summary.status with a
/// partial log. With sim.unfiltered_baseline the filter is bypassed and a
/// negative h is recorded without stopping. Configuration errors throw.
RunResult run(const ScenarioConfig& scenario);

// Derives the summary from a log; run() uses this so the two never diverge.
RunSummary summarize(const TrajectoryLog& log, double horizon, RunStatus status,
                     std::string diagnostic);

}  // namespace safe_el
