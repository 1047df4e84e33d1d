#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "json.hpp"
#include "safe_el/cli.hpp"
#include "safe_el/errors.hpp"
#include "safe_el/report.hpp"
#include "safe_el/scenario.hpp"
#include "safe_el/sim.hpp"

using namespace safe_el;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path tmp_dir(const std::string& name) {
  const char* dir = std::getenv("SAFE_EL_TEST_TMP");
  fs::path p = fs::path(dir ? dir : "/tmp") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::NonFiniteDerivative;
}

}  // namespace

TEST(Preset, PublishedValues) {
  ScenarioConfig j = preset("joint_sva");
  EXPECT_EQ(j.blf.L, 0.3);
  EXPECT_EQ(j.blf.k1, 0.1);
  EXPECT_TRUE(j.blf.replicate_paper);
  EXPECT_EQ(j.blf.eps, 0.01);
  EXPECT_EQ(j.blf.gamma_theta, 1.0);
  ASSERT_EQ(j.barriers.size(), 4u);
  EXPECT_EQ(j.barriers[0].gains, (BarrierGains{10.0, 2.0, 16.0}));
  EXPECT_EQ(j.initial.q, (std::vector<double>{1.0, 1.0}));

  ScenarioConfig c1 = preset("task_case1");
  ASSERT_EQ(c1.barriers.size(), 1u);
  EXPECT_EQ(c1.barriers[0].preset, "disk_exclusion");
  EXPECT_EQ(c1.barriers[0].gains.gamma, 1000.0);
  EXPECT_EQ(c1.blf.L, 0.05);
  EXPECT_EQ(c1.blf.k1, 3.0);
  EXPECT_EQ(c1.initial.p, (std::vector<double>{1.59, 0.11}));
  EXPECT_EQ(c1.nominal.reference, "line_x");

  ScenarioConfig c2 = preset("task_case2");
  EXPECT_EQ(c2.barriers[0].preset, "parabola");
  EXPECT_EQ(c2.barriers[0].gains.gamma, 300.0);
  EXPECT_EQ(c2.initial.p, (std::vector<double>{1.8, 0.0}));
  EXPECT_EQ(c2.nominal.reference, "circle");

  ScenarioConfig c3 = preset("task_case3");
  EXPECT_EQ(c3.nominal.l1, 40.0);
  EXPECT_EQ(c3.nominal.l2, 40.0);
  EXPECT_EQ(c3.barriers[0].gains.gamma, 500.0);
  EXPECT_EQ(c3.barriers[0].gains.lambda, 100.0);

  EXPECT_EQ(kind_of([] { preset("joint_svb"); }), ErrorKind::UnknownPreset);
}

TEST(Scenario, RoundTripEveryPreset) {
  for (const auto& name : preset_names()) {
    ScenarioConfig s = preset(name);
    EXPECT_TRUE(scenario_from_json_string(to_json_string(s)) == s) << name;
  }
}

TEST(Scenario, UnknownKeysRejected) {
  auto j = nlohmann::json::parse(to_json_string(preset("joint_sva")));
  j["blf"]["k2"] = 1.0;
  EXPECT_EQ(kind_of([&] { scenario_from_json_string(j.dump()); }), ErrorKind::InvalidConfig);
  auto top = nlohmann::json::parse(to_json_string(preset("joint_sva")));
  top["extra"] = true;
  EXPECT_EQ(kind_of([&] { scenario_from_json_string(top.dump()); }), ErrorKind::InvalidConfig);
}

TEST(Scenario, BadValuesRejected) {
  auto j = nlohmann::json::parse(to_json_string(preset("joint_sva")));
  j["sim"]["T"] = -1.0;
  EXPECT_EQ(kind_of([&] { scenario_from_json_string(j.dump()); }), ErrorKind::InvalidConfig);
  auto k = nlohmann::json::parse(to_json_string(preset("joint_sva")));
  k["blf"]["L"] = "wide";
  EXPECT_EQ(kind_of([&] { scenario_from_json_string(k.dump()); }), ErrorKind::InvalidConfig);
  auto m = nlohmann::json::parse(to_json_string(preset("task_case1")));
  m["barriers"][0]["preset"] = "box_q1_upper";
  EXPECT_NE(kind_of([&] { ClosedLoop{scenario_from_json_string(m.dump())}; }),
            ErrorKind::NonFiniteDerivative);
  EXPECT_EQ(kind_of([] { scenario_from_json_string("{not json"); }), ErrorKind::InvalidConfig);
}

TEST(Scenario, Overrides) {
  ScenarioConfig s = apply_overrides(preset("joint_sva"), {"blf.k1=0.5", "sim.integrator=rk4"});
  EXPECT_EQ(s.blf.k1, 0.5);
  EXPECT_EQ(s.sim.integrator, Integrator::Rk4);
  EXPECT_EQ(kind_of([] { apply_overrides(preset("joint_sva"), {"blf.nope=1"}); }),
            ErrorKind::InvalidConfig);
}

TEST(Cli, RunWritesOutputsAndSummaryMatchesCsv) {
  fs::path out = tmp_dir("cli_run");
  CliResult r = cli({"run", "--scenario", "joint_sva", "--set", "blf.k1=0.5", "--out", out.string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  ASSERT_TRUE(fs::exists(out / "trajectory.csv"));
  ASSERT_TRUE(fs::exists(out / "summary.json"));
  std::ifstream in(out / "summary.json");
  auto sum = nlohmann::json::parse(in);
  EXPECT_EQ(sum["status"], "completed");
  EXPECT_GE(sum["min_h_overall"].get<double>(), 0.0);
  CsvTable t = read_csv((out / "trajectory.csv").string());
  EXPECT_EQ(t.rows.size(), 20001u);
  double max_e = 0, min_h = INFINITY;
  for (const auto& row : t.rows) {
    max_e = std::max(max_e, row[t.column("eq_norm")]);
    min_h = std::min(min_h, row[t.column("h_box_q1_upper")]);
  }
  EXPECT_NEAR(max_e, sum["max_e_norm"].get<double>(), 1e-12);
  EXPECT_NEAR(min_h, sum["min_h"]["box_q1_upper"].get<double>(), 1e-12);
}

TEST(Cli, BaselineExitsWithViolation) {
  fs::path out = tmp_dir("cli_baseline");
  CliResult r = cli({"run", "--scenario", "joint_sva", "--unfiltered-baseline", "--set",
                     "blf.k1=0.5", "--out", out.string()});
  EXPECT_EQ(r.code, kExitSafetyViolation);
  EXPECT_NE(r.err.find("safety_violated"), std::string::npos);
}

TEST(Cli, ValidateReportsWaivedGainCondition) {
  CliResult r = cli({"validate", "--scenario", "task_case1"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("warning"), std::string::npos);
  EXPECT_NE(r.out.find("12"), std::string::npos);
}

TEST(Cli, ValidateRejectsPublishedGainsWithoutOverride) {
  CliResult r = cli({"validate", "--scenario", "joint_sva", "--set", "blf.replicate_paper=false"});
  EXPECT_EQ(r.code, kExitConfigError);
  EXPECT_NE(r.err.find("GainConditionViolated"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwo) {
  EXPECT_EQ(cli({"run", "--scenario", "no_such_preset", "--out", tmp_dir("cli_bad").string()}).code,
            kExitConfigError);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitConfigError);
  EXPECT_EQ(cli({}).code, kExitConfigError);
  fs::path bad = tmp_dir("cli_json") / "bad.json";
  std::ofstream(bad) << R"({"mode": "joint", "bogus": 1})";
  EXPECT_EQ(cli({"validate", "--scenario", bad.string()}).code, kExitConfigError);
}

TEST(Cli, RunFromJsonFile) {
  fs::path dir = tmp_dir("cli_file");
  ScenarioConfig s = preset("task_case2");
  s.sim.T = 0.05;
  std::ofstream(dir / "s.json") << to_json_string(s);
  CliResult r = cli({"run", "--scenario", (dir / "s.json").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_csv((dir / "o" / "trajectory.csv").string()).rows.size(), 51u);
}

TEST(Cli, EscapedTrackingErrorExitsOne) {
  // Published joint gains: the error reaches the guard band before t = 1 s.
  CliResult r = cli({"run", "--scenario", "joint_sva", "--set", "sim.T=2", "--out",
                     tmp_dir("cli_escape").string()});
  EXPECT_EQ(r.code, kExitSafetyViolation);
  EXPECT_NE(r.err.find("tracking_error_escaped"), std::string::npos);
}

TEST(Cli, CertifyAndFuzz) {
  CliResult c = cli({"certify-plant", "--samples", "10000"});
  EXPECT_EQ(c.code, kExitOk);
  auto j = nlohmann::json::parse(c.out.substr(0, c.out.find("\nnote")));
  EXPECT_LE(j["lambda2"].get<double>(), 5.0);
  EXPECT_NE(c.out.find("note"), std::string::npos);
  EXPECT_EQ(cli({"certify-plant", "--samples", "10000", "--lambda2", "2"}).code,
            kExitSafetyViolation);
  EXPECT_EQ(cli({"certify-plant", "--samples", "10"}).code, kExitConfigError);

  CliResult f = cli({"qp-fuzz", "--count", "500"});
  EXPECT_EQ(f.code, kExitOk);
  EXPECT_NE(f.out.find("mismatches 0"), std::string::npos);
}

TEST(Cli, PresetsListing) {
  CliResult r = cli({"presets"});
  EXPECT_EQ(r.code, kExitOk);
  for (const auto& n : preset_names()) EXPECT_NE(r.out.find(n), std::string::npos);
  CliResult d = cli({"presets", "--dump", "task_case3"});
  EXPECT_TRUE(scenario_from_json_string(d.out) == preset("task_case3"));
}
