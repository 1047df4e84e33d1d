#include "safe_el/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "safe_el/errors.hpp"

namespace safe_el {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& msg) {
  throw Error(ErrorKind::InvalidConfig, "scenario: " + msg);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) bad("'" + where + "' must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) bad("unknown key '" + key + "' in '" + where + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad("bad type for '" + where + "." + key + "'");
  }
}

json gains_json(const BarrierGains& g) {
  return {{"gamma", g.gamma}, {"beta", g.beta}, {"lambda", g.lambda}};
}

json to_json(const ScenarioConfig& s) {
  json j;
  j["name"] = s.name;
  j["mode"] = s.mode == Mode::Joint ? "joint" : "task";
  j["plant"] = {{"m1", s.plant.m1}, {"m2", s.plant.m2}, {"l", s.plant.l}, {"g", s.plant.g}};
  const auto& u = s.uncertainty;
  j["uncertainty"] = {{"d0", u.d0}, {"d1", u.d1}, {"d2", u.d2}, {"tau_d", u.tau_d}, {"xi", u.xi}};
  const auto& b = s.blf;
  j["blf"] = {{"lambda2", b.lambda2}, {"k1", b.k1}, {"eps", b.eps}, {"eps1", b.eps1},
              {"eps2", b.eps2}, {"gamma_theta", b.gamma_theta}, {"L", b.L},
              {"theta_init", s.theta_init}, {"replicate_paper", b.replicate_paper}};
  j["barriers"] = json::array();
  for (const auto& e : s.barriers) {
    j["barriers"].push_back({{"preset", e.preset}, {"gains", gains_json(e.gains)}});
  }
  const auto& n = s.nominal;
  if (s.mode == Mode::Joint) {
    j["nominal"] = {{"reference", n.reference}, {"alpha1", n.alpha1}, {"alpha2", n.alpha2}};
    j["initial"] = {{"q", s.initial.q}, {"w", s.initial.w}};
  } else {
    j["nominal"] = {{"reference", n.reference}, {"l1", n.l1}, {"l2", n.l2},
                    {"singularity_tol", n.singularity_tol}};
    j["initial"] = {{"p", s.initial.p}, {"w", s.initial.w}, {"elbow_up", s.initial.elbow_up}};
  }
  j["sim"] = {{"T", s.sim.T}, {"step", s.sim.step},
              {"integrator", to_string(s.sim.integrator)},
              {"unfiltered_baseline", s.sim.unfiltered_baseline}, {"seed", s.sim.seed}};
  return j;
}

void check_vec(const std::vector<double>& v, const std::string& what) {
  if (v.size() != 2) bad("'" + what + "' must have 2 entries");
}

void validate(const ScenarioConfig& s) {
  s.plant.validate();
  if (!(s.sim.T > 0.0) || !(s.sim.step > 0.0)) bad("sim.T and sim.step must be positive");
  if (s.barriers.empty()) bad("at least one barrier is required");
  if (!(s.theta_init > 0.0)) bad("blf.theta_init must be positive");
  check_vec(s.initial.w, "initial.w");
  if (s.mode == Mode::Joint) {
    check_vec(s.initial.q, "initial.q");
  } else {
    check_vec(s.initial.p, "initial.p");
    if (!(s.nominal.l1 > 0.0) || !(s.nominal.l2 > 0.0)) bad("nominal.l1, l2 must be positive");
    if (!(s.nominal.singularity_tol > 0.0)) bad("nominal.singularity_tol must be positive");
  }
  if (s.blf.d1 != s.uncertainty.d1) bad("internal: blf.d1 out of sync");
}

ScenarioConfig from_json(const json& j) {
  reject_unknown(j, {"name", "mode", "plant", "uncertainty", "blf", "barriers", "nominal",
                     "initial", "sim"},
                 "scenario");
  ScenarioConfig s;
  read(j, "name", s.name, "scenario");
  std::string mode = "joint";
  read(j, "mode", mode, "scenario");
  if (mode == "joint") {
    s.mode = Mode::Joint;
  } else if (mode == "task") {
    s.mode = Mode::Task;
    s.initial.q.clear();
  } else {
    bad("mode must be 'joint' or 'task'");
  }

  if (j.contains("plant")) {
    const json& o = j["plant"];
    reject_unknown(o, {"m1", "m2", "l", "g"}, "plant");
    read(o, "m1", s.plant.m1, "plant");
    read(o, "m2", s.plant.m2, "plant");
    read(o, "l", s.plant.l, "plant");
    read(o, "g", s.plant.g, "plant");
  }
  if (j.contains("uncertainty")) {
    const json& o = j["uncertainty"];
    reject_unknown(o, {"d0", "d1", "d2", "tau_d", "xi"}, "uncertainty");
    auto& u = s.uncertainty;
    read(o, "d0", u.d0, "uncertainty");
    read(o, "d1", u.d1, "uncertainty");
    read(o, "d2", u.d2, "uncertainty");
    read(o, "tau_d", u.tau_d, "uncertainty");
    read(o, "xi", u.xi, "uncertainty");
  }
  if (j.contains("blf")) {
    const json& o = j["blf"];
    reject_unknown(o, {"lambda2", "k1", "eps", "eps1", "eps2", "gamma_theta", "L",
                       "theta_init", "replicate_paper"},
                   "blf");
    auto& b = s.blf;
    read(o, "lambda2", b.lambda2, "blf");
    read(o, "k1", b.k1, "blf");
    read(o, "eps", b.eps, "blf");
    read(o, "eps1", b.eps1, "blf");
    read(o, "eps2", b.eps2, "blf");
    read(o, "gamma_theta", b.gamma_theta, "blf");
    read(o, "L", b.L, "blf");
    read(o, "theta_init", s.theta_init, "blf");
    read(o, "replicate_paper", b.replicate_paper, "blf");
  }
  s.blf.d1 = s.uncertainty.d1;

  if (j.contains("barriers")) {
    if (!j["barriers"].is_array()) bad("'barriers' must be an array");
    for (const json& e : j["barriers"]) {
      reject_unknown(e, {"preset", "gains"}, "barriers[]");
      BarrierEntry be;
      read(e, "preset", be.preset, "barriers[]");
      if (e.contains("gains")) {
        reject_unknown(e["gains"], {"gamma", "beta", "lambda"}, "barriers[].gains");
        read(e["gains"], "gamma", be.gains.gamma, "barriers[].gains");
        read(e["gains"], "beta", be.gains.beta, "barriers[].gains");
        read(e["gains"], "lambda", be.gains.lambda, "barriers[].gains");
      }
      s.barriers.push_back(be);
    }
  }
  if (j.contains("nominal")) {
    const json& o = j["nominal"];
    reject_unknown(o, {"reference", "alpha1", "alpha2", "l1", "l2", "singularity_tol"},
                   "nominal");
    auto& n = s.nominal;
    read(o, "reference", n.reference, "nominal");
    read(o, "alpha1", n.alpha1, "nominal");
    read(o, "alpha2", n.alpha2, "nominal");
    read(o, "l1", n.l1, "nominal");
    read(o, "l2", n.l2, "nominal");
    read(o, "singularity_tol", n.singularity_tol, "nominal");
  }
  if (j.contains("initial")) {
    const json& o = j["initial"];
    reject_unknown(o, {"q", "p", "w", "elbow_up"}, "initial");
    read(o, "q", s.initial.q, "initial");
    read(o, "p", s.initial.p, "initial");
    read(o, "w", s.initial.w, "initial");
    read(o, "elbow_up", s.initial.elbow_up, "initial");
  }
  if (j.contains("sim")) {
    const json& o = j["sim"];
    reject_unknown(o, {"T", "step", "integrator", "unfiltered_baseline", "seed"}, "sim");
    read(o, "T", s.sim.T, "sim");
    read(o, "step", s.sim.step, "sim");
    if (o.contains("integrator")) {
      std::string name;
      read(o, "integrator", name, "sim");
      s.sim.integrator = integrator_from_string(name);
    }
    read(o, "unfiltered_baseline", s.sim.unfiltered_baseline, "sim");
    read(o, "seed", s.sim.seed, "sim");
  }
  validate(s);
  return s;
}

ScenarioConfig joint_sva() {
  ScenarioConfig s;
  s.name = "joint_sva";
  s.mode = Mode::Joint;
  s.blf = BlfParams{5.0, 0.2, 0.3, 0.1, 0.01, 0.01, 0.01, 1.0, true};
  s.theta_init = 0.1;
  const BarrierGains g{10.0, 2.0, 16.0};
  for (const char* name : {"box_q1_upper", "box_q1_lower", "box_q2_upper", "box_q2_lower"}) {
    s.barriers.push_back({name, g});
  }
  s.nominal.reference = "sine3";
  s.initial = InitialConfig{{1.0, 1.0}, {}, {0.0, 0.0}, false};
  s.sim.T = 20.0;
  return s;
}

ScenarioConfig task_case(int which) {
  ScenarioConfig s;
  s.name = "task_case" + std::to_string(which);
  s.mode = Mode::Task;
  s.blf = BlfParams{5.0, 0.2, 0.05, 3.0, 0.01, 0.01, 0.01, 1.0, true};
  s.theta_init = 0.1;
  s.nominal.l1 = 20.0;
  s.nominal.l2 = 20.0;
  s.initial = InitialConfig{{}, {1.8, 0.0}, {0.0, 0.0}, false};
  s.sim.T = 10.0;
  switch (which) {
    case 1:
      s.barriers.push_back({"disk_exclusion", {1000.0, 2.0, 100.0}});
      s.initial.p = {1.59, 0.11};
      s.nominal.reference = "line_x";
      break;
    case 2:
      s.barriers.push_back({"parabola", {300.0, 2.0, 100.0}});
      s.nominal.reference = "circle";
      break;
    default:
      s.barriers.push_back({"halfplane", {500.0, 2.0, 100.0}});
      s.nominal.reference = "circle";
      s.nominal.l1 = 40.0;
      s.nominal.l2 = 40.0;
      break;
  }
  return s;
}

}  // namespace

ScenarioConfig preset(const std::string& name) {
  if (name == "joint_sva") return joint_sva();
  if (name == "task_case1") return task_case(1);
  if (name == "task_case2") return task_case(2);
  if (name == "task_case3") return task_case(3);
  throw Error(ErrorKind::UnknownPreset, "unknown scenario preset '" + name + "'");
}

std::vector<std::string> preset_names() {
  return {"joint_sva", "task_case1", "task_case2", "task_case3"};
}

std::string to_json_string(const ScenarioConfig& s, int indent) {
  return to_json(s).dump(indent);
}

ScenarioConfig scenario_from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
  return from_json(j);
}

ScenarioConfig load_scenario(const std::string& preset_or_path) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), preset_or_path) != names.end()) {
    return preset(preset_or_path);
  }
  std::ifstream in(preset_or_path);
  if (!in) {
    throw Error(ErrorKind::UnknownPreset,
                "'" + preset_or_path + "' is neither a preset nor a readable file");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json_string(buf.str());
}

ScenarioConfig apply_overrides(const ScenarioConfig& s, const std::vector<std::string>& sets) {
  json j = to_json(s);
  for (const auto& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) bad("override '" + kv + "' must be key.path=value");
    std::string path = "/" + kv.substr(0, eq);
    std::replace(path.begin(), path.end(), '.', '/');
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;  // bare string
    }
    const json::json_pointer ptr(path);
    if (!j.contains(ptr)) bad("override target '" + kv.substr(0, eq) + "' does not exist");
    j[ptr] = value;
  }
  return from_json(j);
}

}  // namespace safe_el
