#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "safe_el/cbf_joint.hpp"
#include "safe_el/errors.hpp"

using namespace safe_el;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

const BarrierGains kGains{10.0, 2.0, 16.0};
constexpr double kRho = 0.5;

std::vector<JointBarrier> box() {
  std::vector<JointBarrier> out;
  for (const char* n : {"box_q1_upper", "box_q1_lower", "box_q2_upper", "box_q2_lower"})
    out.push_back(joint_barrier_preset(n, kGains, kRho));
  return out;
}

JointBarrier affine(const std::string& name, const RowVec& a, double c, const BarrierGains& g,
                    double rho) {
  JointBarrier b;
  b.name = name;
  b.h = [=](const Vec& q) { return c + a.dot(q); };
  b.grad = [=](const Vec&) { return a; };
  b.hess = [](const Vec& q) { return Mat(Mat::Zero(q.size(), q.size())); };
  b.affine = true;
  b.gains = g;
  b.rho = rho;
  return b;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST(JointBarrierPreset, ValuesAndDerivatives) {
  auto b = box();
  Vec q = v2(1.0, 1.0);
  EXPECT_DOUBLE_EQ(b[0].h(q), 1.5);
  EXPECT_DOUBLE_EQ(b[1].h(q), 3.5);
  EXPECT_DOUBLE_EQ(b[2].h(q), 1.0);
  EXPECT_DOUBLE_EQ(b[3].h(q), 2.0);
  for (const auto& x : b) EXPECT_NO_THROW(validate_joint_barrier(x));
  EXPECT_NO_THROW(validate_joint_barrier(joint_ball_barrier(v2(0.5, -0.5), 2.0, kGains, kRho)));
  EXPECT_EQ(kind_of([] { joint_barrier_preset("nope", kGains, kRho); }), ErrorKind::UnknownPreset);
}

TEST(JointBarrierPreset, WrongGradientRejected) {
  JointBarrier b = joint_barrier_preset("box_q1_upper", kGains, kRho);
  b.grad = [](const Vec&) { return RowVec(RowVec::Ones(2)); };
  EXPECT_EQ(kind_of([&] { validate_joint_barrier(b); }), ErrorKind::InvalidConfig);
  JointBarrier c = joint_barrier_preset("box_q1_upper", BarrierGains{0.0, 2.0, 16.0}, kRho);
  EXPECT_EQ(kind_of([&] { validate_joint_barrier(c); }), ErrorKind::InvalidConfig);
}

TEST(Hbar, HandEvaluation) {
  JointBarrier b = joint_barrier_preset("box_q1_upper", kGains, kRho);
  EXPECT_DOUBLE_EQ(hbar(b, v2(1, 0), v2(0, 0)), 23.5);
}

TEST(Hbar, LinearAlongGradient) {
  JointBarrier b = joint_ball_barrier(v2(0, 0), 3.0, kGains, kRho);
  Vec q = v2(0.7, -1.2), mu = v2(0.3, 0.1);
  RowVec g = b.grad(q);
  for (double c : {-1.0, 0.5, 2.0})
    EXPECT_NEAR(hbar(b, q, mu + c * g.transpose()) - hbar(b, q, mu), c * g.squaredNorm(), 1e-12);
}

TEST(Hbar, IndependentOfHWhenLambdaZero) {
  BarrierGains g = kGains;
  g.lambda = 0.0;
  JointBarrier b = joint_barrier_preset("box_q1_upper", g, kRho);
  EXPECT_DOUBLE_EQ(hbar(b, v2(0.0, 0), v2(1, 0)), hbar(b, v2(2.0, 0), v2(1, 0)));
}

TEST(PsiTerms, AffineHandEvaluation) {
  JointBarrier b = joint_barrier_preset("box_q1_upper", kGains, kRho);
  PsiTerms t = psi_terms(b, v2(1, 0), v2(0, 0));
  EXPECT_DOUBLE_EQ(t.psi0, 227.0);
  EXPECT_EQ(t.psi1, (RowVec(2) << -1, 0).finished());
}

TEST(PsiTerms, QuadraticBarrierMatchesDifferencedHbar) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  JointBarrier b = joint_ball_barrier(v2(0.2, -0.3), 2.0, kGains, kRho);
  for (int k = 0; k < 100; ++k) {
    Vec q = v2(u(rng), u(rng)), mu = v2(u(rng), u(rng));
    // M is the q-gradient of hbar; mu is held fixed.
    RowVec M = finite_diff_gradient([&](const Vec& x) { return hbar(b, x, mu); }, q);
    const double expected = M.dot(mu) - M.norm() * b.rho + b.gains.gamma * hbar(b, q, mu);
    PsiTerms t = psi_terms(b, q, mu);
    EXPECT_NEAR(t.psi0, expected, 1e-7 * std::max(1.0, std::abs(expected)));
    EXPECT_LT((t.psi1 - b.grad(q)).norm(), 1e-15);
  }
}

TEST(PsiTerms, LinearInGamma) {
  JointBarrier a = joint_ball_barrier(v2(0, 0), 2.0, kGains, kRho);
  BarrierGains g2 = kGains;
  g2.gamma *= 2.0;
  JointBarrier b = joint_ball_barrier(v2(0, 0), 2.0, g2, kRho);
  Vec q = v2(0.5, 0.4), mu = v2(-0.3, 0.2);
  EXPECT_NEAR(psi_terms(b, q, mu).psi0 - psi_terms(a, q, mu).psi0, kGains.gamma * hbar(a, q, mu),
              1e-12);
}

TEST(InitialCondition, PresetStartPasses) {
  for (const auto& b : box()) EXPECT_NO_THROW(check_initial_condition(b, v2(1, 1), v2(0, 0)));
}

TEST(InitialCondition, BoundaryStartFails) {
  JointBarrier b = joint_barrier_preset("box_q1_upper", kGains, kRho);
  EXPECT_EQ(kind_of([&] { check_initial_condition(b, v2(2.5, 0), v2(0, 0)); }),
            ErrorKind::InitialConditionFailed);
}

TEST(InitialCondition, AntiAlignedVelocityFails) {
  JointBarrier b = joint_barrier_preset("box_q1_upper", kGains, kRho);
  // grad h = (-1, 0); mu0 = -30 grad h drives hbar to 24 - 30 - 0.5 < 0.
  EXPECT_EQ(kind_of([&] { check_initial_condition(b, v2(1, 1), v2(30, 0)); }),
            ErrorKind::InitialConditionFailed);
}

TEST(NominalLaw, DecayRate) {
  EXPECT_NEAR(nominal_decay_rate(25, 10), 5.0, 1e-6);
  EXPECT_NEAR(nominal_decay_rate(4, 5), 1.0, 1e-12);
  EXPECT_NEAR(nominal_decay_rate(0.1, 0.1), 0.05, 1e-12);
}

TEST(NominalLaw, Examples) {
  NominalJointLaw law(4, 4, Reference::hold(v2(0, 0)));
  Vec nu = law.nu(v2(1, 0), v2(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(nu(0), -8.0);
  EXPECT_DOUBLE_EQ(nu(1), 0.0);

  NominalJointLaw sine(25, 10, Reference::from_id("sine3", v2(0, 0)));
  const double t = 0.7;
  Vec zero_err = sine.nu(3 * std::sin(t) * Vec::Ones(2), 3 * std::cos(t) * Vec::Ones(2), t);
  EXPECT_NEAR((zero_err + 3 * std::sin(t) * Vec::Ones(2)).norm(), 0.0, 1e-12);

  EXPECT_EQ(kind_of([] { NominalJointLaw(0.1, 0.1, Reference::hold(v2(0, 0))); }),
            ErrorKind::InvalidConfig);
}

TEST(SafeNu, DeepInteriorPassthrough) {
  Vec nu_d = v2(0.3, -0.2);
  Vec nu = safe_nu(box(), v2(0, 0), v2(0, 0), nu_d);
  EXPECT_TRUE(nu == nu_d);
}

TEST(SafeNu, SingleActiveBarrierClosedForm) {
  std::vector<JointBarrier> b{joint_barrier_preset("box_q1_upper", kGains, kRho)};
  Vec q = v2(2.45, 0.0), mu = v2(1.0, 0.0), nu_d = v2(50.0, 3.0);
  PsiTerms t = psi_terms(b[0], q, mu);
  const double slack = t.psi0 + t.psi1.dot(nu_d);
  ASSERT_LT(slack, 0.0);
  Vec expected = nu_d - slack * t.psi1.transpose() / t.psi1.squaredNorm();
  Vec nu = safe_nu(b, q, mu, nu_d);
  EXPECT_LT((nu - expected).norm(), 1e-12);
  EXPECT_LT((kkt_oracle(build_joint_qp(b, q, mu, nu_d)).u_star - nu).norm(), 1e-10);
}

TEST(SafeNu, OpposingBarriersInfeasible) {
  const RowVec e1 = (RowVec(2) << 1, 0).finished();
  BarrierGains g{10.0, 2.0, 1.0};
  std::vector<JointBarrier> b{affine("lo", e1, 0.01, g, kRho), affine("hi", -e1, 0.01, g, kRho)};
  Vec q = v2(0, 0), mu = v2(0, 0);
  for (const auto& x : b) ASSERT_LT(psi_terms(x, q, mu).psi0, 0.0);
  EXPECT_EQ(kind_of([&] { kkt_oracle(build_joint_qp(b, q, mu, v2(0, 0))); }), ErrorKind::Infeasible);
  EXPECT_EQ(kind_of([&] { safe_nu(b, q, mu, v2(0, 0)); }), ErrorKind::SafetyFilterInfeasible);
}

TEST(SafeNu, ResultSatisfiesEveryConstraint) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> q1(-2.5, 2.5), q2(-1, 2), u(-20, 20);
  auto b = box();
  b.push_back(joint_ball_barrier(v2(0, 0.5), 3.0, kGains, kRho));
  int checked = 0;
  for (int k = 0; k < 1000; ++k) {
    Vec q = v2(q1(rng), q2(rng)), mu = v2(u(rng), u(rng)) / 4, nu_d = v2(u(rng), u(rng));
    Vec nu;
    try {
      nu = safe_nu(b, q, mu, nu_d);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::SafetyFilterInfeasible);
      continue;
    }
    ++checked;
    for (const auto& x : b) {
      PsiTerms t = psi_terms(x, q, mu);
      EXPECT_GE(t.psi0 + t.psi1.dot(nu), -1e-9);
    }
  }
  EXPECT_GT(checked, 900);
}

TEST(YoungChain, RobustMarginBoundsHbar) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3), ang(0, 2 * M_PI), r(0, 1);
  auto b = box();
  b.push_back(joint_ball_barrier(v2(0.1, 0.2), 2.0, kGains, kRho));
  int failures = 0;
  for (int k = 0; k < 1000; ++k) {
    Vec q = v2(u(rng), u(rng)), mu = v2(u(rng), u(rng));
    const double a = ang(rng);
    for (const auto& x : b) {
      Vec v = x.rho * std::sqrt(r(rng)) * v2(std::cos(a), std::sin(a));
      const double lhs = x.grad(q).dot(mu + v) + x.gains.lambda * x.h(q);
      if (lhs < hbar(x, q, mu) - 1e-12) ++failures;
    }
  }
  EXPECT_EQ(failures, 0);
}
