#pragma once

#include <cstdint>
#include <vector>

#include "safe_el/numerics.hpp"

namespace safe_el {

// min ||u - u_d||^2  s.t.  A u >= b  (one row per barrier constraint).
struct QpProblem {
  Vec u_d;
  Mat A;
  Vec b;
};

// Multipliers follow the ||u - u_d||^2 scaling, so at the optimum
// u_star = u_d + 0.5 * sum_i multipliers[i] * A.row(active_set[i]).
struct QpSolution {
  Vec u_star;
  std::vector<int> active_set;
  std::vector<double> multipliers;
};

inline constexpr double kDefaultQpTol = 1e-9;

/// Euclidean projection of u_d onto {u : A u >= b}.
///
/// Dual active-set iteration specialised to an identity Hessian: start at the
/// unconstrained minimiser u_d and repeatedly add the most violated
/// constraint, dropping active rows whose multipliers would go negative. If
/// u_d is already feasible it is returned unchanged with an empty active set.
///
/// Throws Infeasible when the polyhedron is empty and DegenerateConstraint
/// when a zero row carries b_i > tol.
QpSolution solve_min_norm(const QpProblem& problem, double tol = kDefaultQpTol);

/// Brute-force reference solver: enumerates every active set (2^m, m <= 12),
/// solves each equality-constrained projection in closed form and keeps the
/// feasible KKT point with the smallest objective, preferring fewer active
/// constraints on ties.
QpSolution kkt_oracle(const QpProblem& problem, double tol = kDefaultQpTol);

// Objective value ||u - u_d||^2.
double qp_objective(const QpProblem& problem, const Vec& u);

}  // namespace safe_el

namespace safe_el {

// Randomised agreement check between solve_min_norm and kkt_oracle:
// n = 2, m in {1..4}, all entries U[-5, 5].
struct QpFuzzReport {
  int instances = 0;
  int feasible = 0;
  int infeasible = 0;
  int mismatches = 0;             // u_star differs by more than agree_tol, or only one side infeasible
  int passthrough_failures = 0;   // feasible nominal not returned bit-exactly
  int active_passthrough = 0;     // instances where u_d was already feasible
  double max_deviation = 0.0;
};
QpFuzzReport qp_fuzz(int count, std::uint64_t seed, double agree_tol = 1e-8);

}  // namespace safe_el
