#include "safe_el/report.hpp"

#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "safe_el/errors.hpp"

namespace safe_el {

std::vector<std::string> csv_header(const TrajectoryLog& log) {
  const bool task = log.mode == Mode::Task;
  std::vector<std::string> h = {"t", "q1", "q2", "w1", "w2", "w1_hat", "w2_hat"};
  h.push_back(task ? "eta1" : "mu1");
  h.push_back(task ? "eta2" : "mu2");
  for (const char* c : {"eq_norm", "theta1_hat", "theta2_hat", "tau1", "tau2", "nu1", "nu2"})
    h.push_back(c);
  for (const auto& name : log.barrier_names) {
    h.push_back("h_" + name);
    h.push_back("hbar_" + name);
  }
  if (task) {
    h.push_back("x");
    h.push_back("y");
  }
  h.push_back("qp_correction_norm");
  return h;
}

void write_csv(const TrajectoryLog& log, std::ostream& out) {
  const auto header = csv_header(log);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  out << std::setprecision(17);
  for (const auto& r : log.rows) {
    out << r.t;
    auto put = [&](double v) { out << ',' << v; };
    put(r.q[0]), put(r.q[1]), put(r.w[0]), put(r.w[1]);
    put(r.w_hat[0]), put(r.w_hat[1]), put(r.proxy[0]), put(r.proxy[1]);
    put(r.e_norm), put(r.theta1_hat), put(r.theta2_hat);
    put(r.tau[0]), put(r.tau[1]), put(r.u[0]), put(r.u[1]);
    for (std::size_t i = 0; i < r.h.size(); ++i) put(r.h[i]), put(r.hbar[i]);
    if (log.mode == Mode::Task) put(r.p[0]), put(r.p[1]);
    put(r.qp_correction_norm);
    out << '\n';
  }
}

void write_csv(const TrajectoryLog& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidConfig, "cannot write '" + path + "'");
  write_csv(log, out);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw Error(ErrorKind::InvalidConfig, "CSV has no column '" + name + "'");
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidConfig, "cannot read '" + path + "'");
  CsvTable tab;
  std::string line;
  if (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) tab.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

std::string summary_to_json(const RunSummary& s, const ScenarioConfig& scenario, int indent) {
  nlohmann::json j;
  j["scenario"] = scenario.name;
  j["mode"] = scenario.mode == Mode::Joint ? "joint" : "task";
  j["status"] = to_string(s.status);
  j["diagnostic"] = s.diagnostic;
  j["unfiltered_baseline"] = scenario.sim.unfiltered_baseline;
  nlohmann::json min_h = nlohmann::json::object();
  nlohmann::json min_hbar = nlohmann::json::object();
  double overall = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.barrier_names.size(); ++i) {
    min_h[s.barrier_names[i]] = s.min_h[i];
    min_hbar[s.barrier_names[i]] = s.min_hbar[i];
    overall = std::min(overall, s.min_h[i]);
  }
  j["min_h"] = min_h;
  j["min_hbar"] = min_hbar;
  j["min_h_overall"] = overall;
  j["max_e_norm"] = s.max_e_norm;
  j["L"] = scenario.blf.L;
  j["rms_tracking_error"] = s.rms_tracking_error;
  j["qp_activations"] = s.qp_activations;
  j["t_end"] = s.t_end;
  j["q0"] = s.q0;
  j["warnings"] = s.warnings;
  return j.dump(indent);
}

void write_summary(const RunSummary& s, const ScenarioConfig& scenario,
                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidConfig, "cannot write '" + path + "'");
  out << summary_to_json(s, scenario) << '\n';
}

}  // namespace safe_el
