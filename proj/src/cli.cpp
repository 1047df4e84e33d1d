#include "safe_el/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "safe_el/errors.hpp"
#include "safe_el/plant.hpp"
#include "safe_el/qp.hpp"
#include "safe_el/report.hpp"
#include "safe_el/scenario.hpp"
#include "safe_el/sim.hpp"

namespace safe_el {
namespace {

namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Infeasible:
    case ErrorKind::SafetyFilterInfeasible:
      return kExitInfeasible;
    case ErrorKind::SafetyViolated:
    case ErrorKind::TrackingErrorEscaped:
    case ErrorKind::SingularJacobian:
    case ErrorKind::NonFiniteDerivative:
    case ErrorKind::BoundViolated:
      return kExitSafetyViolation;
    default:
      return kExitConfigError;
  }
}

int exit_code_for(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return kExitOk;
    case RunStatus::SafetyFilterInfeasible: return kExitInfeasible;
    default: return kExitSafetyViolation;
  }
}

struct RunOutcome {
  int code = kExitOk;
  std::string message;
};

RunOutcome run_one(const ScenarioConfig& sc, const fs::path& dir) {
  fs::create_directories(dir);
  const RunResult res = run(sc);
  write_csv(res.log, (dir / "trajectory.csv").string());
  write_summary(res.summary, sc, (dir / "summary.json").string());

  std::ostringstream os;
  os << sc.name << ": " << to_string(res.summary.status) << ", " << res.log.rows.size()
     << " rows, min h = ";
  double min_h = std::numeric_limits<double>::infinity();
  for (double v : res.summary.min_h) min_h = std::min(min_h, v);
  os << min_h << ", max |e| = " << res.summary.max_e_norm << " (L = " << sc.blf.L << ")";
  for (const auto& w : res.summary.warnings) os << "\n  warning: " << w;
  if (!res.summary.diagnostic.empty()) os << "\n  " << res.summary.diagnostic;
  os << "\n  -> " << dir.string();
  return {exit_code_for(res.summary.status), os.str()};
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Safe control of Euler-Lagrange systems: CBF-QP proxy + adaptive BLF tracking"};
  app.require_subcommand(1);

  std::vector<std::string> scenarios;
  std::vector<std::string> overrides;
  std::string out_dir;
  bool baseline = false;
  int jobs = 0;
  auto* run_cmd = app.add_subcommand("run", "Simulate scenarios and write trajectory.csv + summary.json");
  run_cmd->add_option("--scenario", scenarios, "Preset id or JSON file (repeatable)")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (default $SAFE_EL_OUT or ./out)");
  run_cmd->add_flag("--unfiltered-baseline", baseline, "Bypass the CBF-QP safety filter");
  run_cmd->add_option("--set", overrides, "Override a scenario field, e.g. blf.k1=0.5");
  run_cmd->add_option("--jobs", jobs, "Worker threads for multiple scenarios");

  std::string validate_scenario;
  std::vector<std::string> validate_overrides;
  auto* validate_cmd = app.add_subcommand("validate", "Check gains and initial conditions only");
  validate_cmd->add_option("--scenario", validate_scenario, "Preset id or JSON file")->required();
  validate_cmd->add_option("--set", validate_overrides, "Override a scenario field");

  int samples = 10000;
  std::uint64_t certify_seed = 1;
  double declared_lambda2 = 5.0;
  auto* certify_cmd = app.add_subcommand("certify-plant", "Sample the arm model bounds");
  certify_cmd->add_option("--samples", samples, "Number of samples (>= 10000)");
  certify_cmd->add_option("--seed", certify_seed, "RNG seed");
  certify_cmd->add_option("--lambda2", declared_lambda2, "Declared inertia upper bound");

  int fuzz_count = 1000;
  std::uint64_t fuzz_seed = 2024;
  auto* fuzz_cmd = app.add_subcommand("qp-fuzz", "Compare the QP solver against the KKT oracle");
  fuzz_cmd->add_option("--count", fuzz_count, "Random instances");
  fuzz_cmd->add_option("--seed", fuzz_seed, "RNG seed");

  std::string dump;
  auto* presets_cmd = app.add_subcommand("presets", "List presets or print one as JSON");
  presets_cmd->add_option("--dump", dump, "Preset id to print");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n' << app.help();
    return kExitConfigError;
  }

  try {
    if (*run_cmd) {
      if (out_dir.empty()) {
        const char* env = std::getenv("SAFE_EL_OUT");
        out_dir = env ? env : "out";
      }
      std::vector<ScenarioConfig> configs;
      for (const auto& s : scenarios) {
        ScenarioConfig sc = apply_overrides(load_scenario(s), overrides);
        if (baseline) sc.sim.unfiltered_baseline = true;
        configs.push_back(std::move(sc));
      }
      const bool multi = configs.size() > 1;
      auto dir_for = [&](const ScenarioConfig& sc) {
        return multi ? fs::path(out_dir) / sc.name : fs::path(out_dir);
      };

      std::vector<RunOutcome> outcomes;
      const std::size_t workers = std::max<std::size_t>(1, jobs > 0 ? jobs : configs.size());
      for (std::size_t start = 0; start < configs.size(); start += workers) {
        std::vector<std::future<RunOutcome>> batch;
        for (std::size_t i = start; i < std::min(configs.size(), start + workers); ++i) {
          batch.push_back(std::async(std::launch::async, [&, i] {
            try {
              return run_one(configs[i], dir_for(configs[i]));
            } catch (const Error& e) {
              return RunOutcome{exit_code_for(e.kind()), configs[i].name + ": " +
                                                            std::string(to_string(e.kind())) +
                                                            ": " + e.what()};
            }
          }));
        }
        for (auto& f : batch) outcomes.push_back(f.get());
      }
      int code = kExitOk;
      for (const auto& o : outcomes) {
        (o.code == kExitOk ? out : err) << o.message << '\n';
        code = std::max(code, o.code);
      }
      return code;
    }

    if (*validate_cmd) {
      const ScenarioConfig sc = apply_overrides(load_scenario(validate_scenario), validate_overrides);
      const ClosedLoop loop(sc);
      for (const auto& w : loop.warnings()) out << "warning: " << w << '\n';
      out << sc.name << ": gains and initial conditions OK ("
          << loop.barrier_names().size() << " barriers)\n";
      return kExitOk;
    }

    if (*certify_cmd) {
      if (samples < 10000) {
        err << "certify-plant: --samples must be at least 10000\n";
        return kExitConfigError;
      }
      const ManipulatorModel model;
      const BoundsReport rep = certify_bounds(model, samples, declared_lambda2, certify_seed);
      const double d1 = 0.2;
      nlohmann::json j = {{"samples", rep.n_samples},
                          {"lambda1", rep.lambda1},
                          {"lambda2", rep.lambda2},
                          {"declared_lambda2", rep.declared_lambda2},
                          {"zeta_c", rep.zeta_c},
                          {"zeta_g", rep.zeta_g},
                          {"xi_componentwise_bound", 0.2},
                          {"xi_norm_bound", 0.2 * std::sqrt(2.0)},
                          {"declared_d1", d1}};
      out << j.dump(2) << '\n';
      if (0.2 * std::sqrt(2.0) > d1) {
        out << "note: ||xi|| reaches " << 0.2 * std::sqrt(2.0)
            << " > declared D1 = " << d1 << "; componentwise |xi_i| <= 0.2 holds\n";
      }
      return kExitOk;
    }

    if (*fuzz_cmd) {
      const QpFuzzReport rep = qp_fuzz(fuzz_count, fuzz_seed);
      out << "instances " << rep.instances << ", feasible " << rep.feasible << ", infeasible "
          << rep.infeasible << ", mismatches " << rep.mismatches << ", passthrough "
          << rep.active_passthrough << " (failures " << rep.passthrough_failures
          << "), max |du| " << rep.max_deviation << '\n';
      return rep.mismatches == 0 && rep.passthrough_failures == 0 ? kExitOk : kExitSafetyViolation;
    }

    if (*presets_cmd) {
      if (dump.empty()) {
        for (const auto& n : preset_names()) out << n << '\n';
      } else {
        out << to_json_string(preset(dump)) << '\n';
      }
      return kExitOk;
    }
  } catch (const Error& e) {
    err << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitOk;
}

}  // namespace safe_el
