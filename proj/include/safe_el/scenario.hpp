#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "safe_el/blf.hpp"
#include "safe_el/cbf_joint.hpp"
#include "safe_el/plant.hpp"

namespace safe_el {

enum class Mode { Joint, Task };

struct UncertaintyConfig {
  double d0 = 14.142135623730951;  // 10 sqrt(2)
  double d1 = 0.2;
  double d2 = 0.565685424949238;   // 0.4 sqrt(2)
  std::string tau_d = "10*sin(t)";
  std::string xi = "0.2*sin(2t)";

  bool operator==(const UncertaintyConfig&) const = default;
};

struct BarrierEntry {
  std::string preset;
  BarrierGains gains;

  bool operator==(const BarrierEntry&) const = default;
};

// Joint mode reads reference/alpha1/alpha2; task mode reads
// reference/l1/l2/singularity_tol.
struct NominalConfig {
  std::string reference = "sine3";
  double alpha1 = 25.0;
  double alpha2 = 10.0;
  double l1 = 20.0;
  double l2 = 20.0;
  double singularity_tol = 1e-3;

  bool operator==(const NominalConfig&) const = default;
};

// Joint mode starts from q; task mode from the end-effector position p,
// resolved to joint angles by inverse kinematics.
struct InitialConfig {
  std::vector<double> q{1.0, 1.0};
  std::vector<double> p;
  std::vector<double> w{0.0, 0.0};
  bool elbow_up = false;

  bool operator==(const InitialConfig&) const = default;
};

struct SimConfig {
  double T = 20.0;
  double step = 1e-3;
  Integrator integrator = Integrator::Sdirk2;
  bool unfiltered_baseline = false;
  std::uint64_t seed = 0;  // reserved; all built-in signals are deterministic

  bool operator==(const SimConfig&) const = default;
};

struct ScenarioConfig {
  std::string name = "custom";
  Mode mode = Mode::Joint;
  ManipulatorModel plant;
  UncertaintyConfig uncertainty;
  BlfParams blf;  // blf.d1 mirrors uncertainty.d1
  double theta_init = 0.1;
  std::vector<BarrierEntry> barriers;
  NominalConfig nominal;
  InitialConfig initial;
  SimConfig sim;

  bool operator==(const ScenarioConfig&) const = default;
};

// joint_sva, task_case1, task_case2, task_case3. Throws UnknownPreset.
ScenarioConfig preset(const std::string& name);
std::vector<std::string> preset_names();

std::string to_json_string(const ScenarioConfig& s, int indent = 2);
// Strict parse: unknown keys, wrong types and inconsistent values raise
// InvalidConfig.
ScenarioConfig scenario_from_json_string(const std::string& text);

// A preset id or a path to a JSON file.
ScenarioConfig load_scenario(const std::string& preset_or_path);

// Applies "dotted.path=value" overrides (numbers, booleans, strings) on the
// JSON form, then re-validates.
ScenarioConfig apply_overrides(const ScenarioConfig& s, const std::vector<std::string>& sets);

}  // namespace safe_el
