// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <random>
#include <string>
#include <vector>

#include "safe_el/blf.hpp"
#include "safe_el/cbf_joint.hpp"
#include "safe_el/errors.hpp"
#include "safe_el/plant.hpp"
#include "safe_el/qp.hpp"
#include "safe_el/scenario.hpp"
#include "safe_el/sim.hpp"

using namespace safe_el;

namespace {

struct TimedRun {
  std::string label;
  ScenarioConfig scenario;
  RunResult result;
  double seconds = 0.0;
  std::string error;  // configuration error, if run() threw
};

TimedRun timed(std::string label, ScenarioConfig s) {
  TimedRun r{std::move(label), std::move(s), {}, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.result = run(r.scenario);
  } catch (const Error& e) {
    r.error = std::string(to_string(e.kind())) + ": " + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

double min_h(const TimedRun& r) {
  double m = INFINITY;
  for (double v : r.result.summary.min_h) m = std::min(m, v);
  return m;
}

bool completed(const TimedRun& r) {
  return r.error.empty() && r.result.summary.status == RunStatus::Completed;
}

std::string status_of(const TimedRun& r) {
  if (!r.error.empty()) return r.error;
  std::string s = to_string(r.result.summary.status);
  if (!completed(r)) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " at t=%.4g", r.result.summary.t_end);
    s += buf;
  }
  return s;
}

int failures = 0;

void report(int id, const char* title, bool pass, const std::string& detail) {
  std::printf("criterion %d [%s]: %s - %s\n", id, title, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

}  // namespace

int main() {
  ScenarioConfig joint = preset("joint_sva");
  joint.blf.k1 = 0.5;
  ScenarioConfig joint_published = preset("joint_sva");  // k1 = 0.1, replicate_paper
  ScenarioConfig baseline = joint;
  baseline.sim.unfiltered_baseline = true;

  std::vector<std::future<TimedRun>> jobs;
  jobs.push_back(std::async(std::launch::async, timed, "joint_sva k1=0.5", joint));
  jobs.push_back(std::async(std::launch::async, timed, "joint_sva k1=0.1", joint_published));
  jobs.push_back(std::async(std::launch::async, timed, "joint_sva baseline", baseline));
  for (int c = 1; c <= 3; ++c) {
    const std::string name = "task_case" + std::to_string(c);
    jobs.push_back(std::async(std::launch::async, timed, name, preset(name)));
  }
  std::vector<TimedRun> runs;
  for (auto& j : jobs) runs.push_back(j.get());
  const TimedRun& j05 = runs[0];
  const TimedRun& j01 = runs[1];
  const TimedRun& base = runs[2];

  // 1. Joint-space safety, both gain variants, full horizon.
  {
    bool pass = true;
    std::string d;
    for (const TimedRun* r : {&j05, &j01}) {
      const bool ok = completed(*r) && min_h(*r) >= -kSafetyTol && r->seconds < 30.0;
      pass = pass && ok;
      d += r->label + ": " + status_of(*r) + fmt(", min h = %.6g, %.1f s; ", min_h(*r), r->seconds);
    }
    report(1, "joint-space safety", pass, d);
  }

  // 2. Tracking-error confinement with margin.
  {
    bool pass = true;
    std::string d;
    for (const TimedRun* r : {&j05, &j01}) {
      const double e = r->result.summary.max_e_norm;
      const double L = r->scenario.blf.L;
      const bool ok = completed(*r) && e < L && L - e >= 1e-3;
      pass = pass && ok;
      d += r->label + ": " + status_of(*r) + fmt(", max |e_q| = %.6g, margin %.3g; ", e, L - e);
    }
    report(2, "tracking-error confinement", pass, d);
  }

  // 3. Baseline contrast.
  {
    const bool pass = base.error.empty() && min_h(base) < -0.1 && base.seconds < 30.0;
    report(3, "baseline contrast", pass,
           base.label + ": " + status_of(base) + fmt(", min h = %.6g, %.1f s", min_h(base), base.seconds));
  }

  // 4. Task-space safety.
  {
    bool pass = true;
    std::string d;
    for (int c = 3; c < 6; ++c) {
      const TimedRun& r = runs[c];
      const bool ok = completed(r) && min_h(r) >= -kSafetyTol && r.seconds < 30.0;
      pass = pass && ok;
      d += r.label + ": " + status_of(r) + fmt(", min h = %.6g, %.1f s; ", min_h(r), r.seconds);
    }
    report(4, "task-space safety", pass, d);
  }

  // 5. QP solver against the KKT oracle.
  {
    const auto t0 = std::chrono::steady_clock::now();
    const QpFuzzReport q = qp_fuzz(1000, 2024);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = q.instances == 1000 && q.mismatches == 0 && q.passthrough_failures == 0 && s < 5.0;
    report(5, "QP solver correctness", pass,
           fmt("1000 instances, %g feasible, %g mismatches, %g passthrough failures", q.feasible,
               q.mismatches, q.passthrough_failures) +
               fmt(", max |du| %.2g, %.2f s", q.max_deviation, s));
  }

  // 6. Proof inequalities.
  {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-3, 3), ang(0, 2 * M_PI), unit(0, 1), lg(-8, 4);
    const BarrierGains g{10.0, 2.0, 16.0};
    const double rho = joint.uncertainty.d1 + joint.blf.L;
    std::vector<JointBarrier> bs;
    for (const char* n : {"box_q1_upper", "box_q1_lower", "box_q2_upper", "box_q2_lower"})
      bs.push_back(joint_barrier_preset(n, g, rho));
    bs.push_back(joint_ball_barrier(v2(0.2, -0.1), 2.0, g, rho));
    int young = 0;
    for (int k = 0; k < 1000; ++k) {
      Vec q = v2(u(rng), u(rng)), mu = v2(u(rng), u(rng));
      const double a = ang(rng), r = rho * std::sqrt(unit(rng));
      Vec v = r * v2(std::cos(a), std::sin(a));
      for (const auto& b : bs)
        if (b.grad(q).dot(mu + v) + b.gains.lambda * b.h(q) < hbar(b, q, mu) - 1e-12) ++young;
    }
    int smoothing = 0;
    for (int k = 0; k < 1000; ++k) {
      const double A = std::pow(10.0, lg(rng)), eps = std::pow(10.0, lg(rng));
      if (A - A * A / (A + eps) > eps * (1 + 1e-12) + 4e-16 * A) ++smoothing;  // ulps of A
    }
    int negative_theta = 0;
    long rows = 0;
    for (const auto& r : runs) {
      for (const auto& row : r.result.log.rows) {
        ++rows;
        if (row.theta1_hat < 0.0 || row.theta2_hat < 0.0) ++negative_theta;
      }
    }
    report(6, "proof inequalities", young == 0 && smoothing == 0 && negative_theta == 0,
           fmt("Young chain failures %g/5000, smoothing failures %g/1000, negative theta_hat %g/%g rows",
               young, smoothing, negative_theta, static_cast<double>(rows)));
  }

  // 7. Model consistency.
  {
    const ManipulatorModel m = joint.plant;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ang(-M_PI, M_PI);
    double worst_rel = 0.0;
    int asym = 0;
    for (int k = 0; k < 1000; ++k) {
      Vec q = v2(ang(rng), ang(rng));
      Mat J = jacobian(m, q);
      Mat Jfd = finite_diff_jacobian([&](const Vec& x) { return forward_kinematics(m, x); }, q, 1e-6);
      worst_rel = std::max(worst_rel, (J - Jfd).norm() / std::max(1.0, J.norm()));
      Mat M = mass_matrix(m, q);
      if (M(0, 1) != M(1, 0)) ++asym;
    }
    std::string cert;
    bool cert_ok = true;
    try {
      BoundsReport b = certify_bounds(m, 10000, 5.0);
      cert = fmt("sigma_max(M) <= %.4f over 10^4 samples", b.lambda2);
      cert_ok = b.lambda2 <= 5.0;
    } catch (const Error& e) {
      cert_ok = false;
      cert = e.what();
    }
    report(7, "model consistency", worst_rel <= 1e-6 && asym == 0 && cert_ok,
           fmt("Jacobian vs FD max rel err %.2g, asymmetric M %g/1000, ", worst_rel, asym) + cert);
  }

  // 8. Differenced hbar decay along every filtered run.
  {
    bool pass = true;
    std::string d;
    for (const TimedRun* r : {&runs[0], &runs[1], &runs[3], &runs[4], &runs[5]}) {
      const auto& rows = r->result.log.rows;
      const double h = r->scenario.sim.step;
      long ok = 0, total = 0;
      for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        for (std::size_t i = 0; i < rows[k].hbar.size(); ++i) {
          const double gamma = r->scenario.barriers[i].gains.gamma;
          const double rate = (rows[k + 1].hbar[i] - rows[k].hbar[i]) / h;
          ++total;
          if (rate >= -gamma * rows[k].hbar[i] - 1e-3) ++ok;
        }
      }
      const double frac = total ? static_cast<double>(ok) / total : 0.0;
      pass = pass && total > 0 && frac >= 0.999;
      d += r->label + fmt(": %.5f of %g steps; ", frac, static_cast<double>(total));
    }
    report(8, "hbar decay", pass, d);
  }

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
