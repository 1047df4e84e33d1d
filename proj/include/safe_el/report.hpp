#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "safe_el/sim.hpp"

namespace safe_el {

std::vector<std::string> csv_header(const TrajectoryLog& log);

// One header row, then one row per log entry; 17 significant digits.
void write_csv(const TrajectoryLog& log, std::ostream& out);
void write_csv(const TrajectoryLog& log, const std::string& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Throws InvalidConfig if the column is missing.
  std::size_t column(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

std::string summary_to_json(const RunSummary& summary, const ScenarioConfig& scenario,
                            int indent = 2);
void write_summary(const RunSummary& summary, const ScenarioConfig& scenario,
                   const std::string& path);

}  // namespace safe_el
