#include "safe_el/qp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "safe_el/errors.hpp"

namespace safe_el {
namespace {

void check_shapes(const QpProblem& p) {
  const auto m = p.A.rows();
  if (p.b.size() != m || (m > 0 && p.A.cols() != p.u_d.size())) {
    throw Error(ErrorKind::InvalidConfig, "QpProblem: inconsistent dimensions");
  }
  if (!p.u_d.allFinite() || !p.A.allFinite() || !p.b.allFinite()) {
    throw Error(ErrorKind::InvalidConfig, "QpProblem: non-finite entries");
  }
}

// Projection of u_d onto {u : As u = bs} through a QR factorisation of As^T,
// which keeps cond(As) rather than squaring it as the Gram matrix would.
// Returns false if the rows are numerically dependent.
bool project_onto_rows(const Mat& As, const Vec& bs, const Vec& u_d, Vec& u, Vec& w) {
  const auto k = As.rows();
  Eigen::HouseholderQR<Mat> qr(As.transpose());
  const Mat R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double scale = R.diagonal().cwiseAbs().maxCoeff();
  if (!(R.diagonal().cwiseAbs().minCoeff() > 1e-12 * scale)) return false;
  const Vec y = R.transpose().triangularView<Eigen::Lower>().solve(bs - As * u_d);
  const Mat Q = qr.householderQ() * Mat::Identity(As.cols(), k);
  u = u_d + Q * y;
  w = R.triangularView<Eigen::Upper>().solve(y);
  return true;
}

[[noreturn]] void throw_infeasible(int row) {
  std::ostringstream os;
  os << "constraint polyhedron is empty (conflict detected at row " << row << ")";
  throw Error(ErrorKind::Infeasible, os.str());
}

}  // namespace

double qp_objective(const QpProblem& problem, const Vec& u) {
  return (u - problem.u_d).squaredNorm();
}

QpSolution solve_min_norm(const QpProblem& problem, double tol) {
  check_shapes(problem);
  const Mat& A = problem.A;
  const Vec& b = problem.b;
  const auto m = static_cast<int>(A.rows());

  std::vector<char> usable(m, 1);
  for (int i = 0; i < m; ++i) {
    if (A.row(i).norm() <= tol) {
      if (b[i] > tol) {
        std::ostringstream os;
        os << "constraint row " << i << " is zero but requires b = " << b[i];
        throw Error(ErrorKind::DegenerateConstraint, os.str());
      }
      usable[i] = 0;
    }
  }

  QpSolution sol{problem.u_d, {}, {}};
  if (m == 0 || ((A * problem.u_d).array() >= b.array()).all()) return sol;

  Vec x = problem.u_d;
  std::vector<int> active;
  std::vector<double> lam;  // multipliers of 0.5 ||u - u_d||^2
  std::vector<char> is_active(m, 0);

  const int max_iter = 50 * (m + 1);
  for (int iter = 0;; ++iter) {
    if (iter > max_iter) throw_infeasible(-1);

    // Most violated constraint by normalised distance; lowest index on ties.
    int p = -1;
    double worst = -tol;
    for (int i = 0; i < m; ++i) {
      if (!usable[i] || is_active[i]) continue;
      const double s = (A.row(i).dot(x) - b[i]) / A.row(i).norm();
      if (s < worst) {
        worst = s;
        p = i;
      }
    }
    if (p < 0) break;

    const Vec ap = A.row(p).transpose();
    double lam_p = 0.0;
    for (int inner = 0;; ++inner) {
      if (inner > max_iter) throw_infeasible(p);
      const auto q = static_cast<Eigen::Index>(active.size());
      Vec r(q);
      Vec z = ap;
      if (q > 0) {
        Mat N(x.size(), q);
        for (Eigen::Index j = 0; j < q; ++j) N.col(j) = A.row(active[j]).transpose();
        r = N.colPivHouseholderQr().solve(ap);
        // A full active set spans the space; the residual is round-off only.
        z = q >= x.size() ? Vec::Zero(x.size()).eval() : (ap - N * r).eval();
      }

      double t1 = std::numeric_limits<double>::infinity();
      int drop = -1;
      for (Eigen::Index j = 0; j < q; ++j) {
        if (r[j] > 0.0) {
          const double ratio = lam[j] / r[j];
          if (ratio < t1) {
            t1 = ratio;
            drop = static_cast<int>(j);
          }
        }
      }

      const bool no_primal_step = z.norm() <= 1e-10 * ap.norm();
      if (no_primal_step && drop < 0) throw_infeasible(p);

      const double t2 = no_primal_step
                            ? std::numeric_limits<double>::infinity()
                            : (b[p] - ap.dot(x)) / z.dot(ap);
      const double t = std::min(t1, t2);

      if (!no_primal_step) x += t * z;
      for (Eigen::Index j = 0; j < q; ++j) lam[j] -= t * r[j];
      lam_p += t;

      if (t2 <= t1) {
        active.push_back(p);
        lam.push_back(lam_p);
        is_active[p] = 1;
        break;
      }
      is_active[active[drop]] = 0;
      active.erase(active.begin() + drop);
      lam.erase(lam.begin() + drop);
    }
  }

  // Re-project onto the final active set in one solve; the incremental updates
  // drift when active rows are nearly parallel.
  if (!active.empty()) {
    Mat As(active.size(), x.size());
    Vec bs(active.size());
    for (std::size_t k = 0; k < active.size(); ++k) {
      As.row(k) = A.row(active[k]);
      bs[k] = b[active[k]];
    }
    Vec polished, w;
    if (project_onto_rows(As, bs, problem.u_d, polished, w) && polished.allFinite() &&
        (A * polished - b).minCoeff() >= (A * x - b).minCoeff() - tol) {
      x = polished;
    }
  }

  sol.u_star = x;
  sol.active_set = active;
  sol.multipliers.reserve(lam.size());
  for (double l : lam) sol.multipliers.push_back(2.0 * std::max(0.0, l));
  return sol;
}

QpSolution kkt_oracle(const QpProblem& problem, double tol) {
  check_shapes(problem);
  const auto m = static_cast<int>(problem.A.rows());
  if (m > 12) {
    throw Error(ErrorKind::InvalidConfig, "kkt_oracle: at most 12 constraints");
  }
  const Mat& A = problem.A;
  const Vec& b = problem.b;
  const auto n = problem.u_d.size();

  bool found = false;
  QpSolution best;
  double best_obj = std::numeric_limits<double>::infinity();

  // Subsets in order of increasing size so the first minimiser found is the
  // one with the fewest active constraints.
  for (int size = 0; size <= std::min<int>(m, static_cast<int>(n)); ++size) {
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
      if (std::popcount(mask) != size) continue;
      std::vector<int> rows;
      for (int i = 0; i < m; ++i)
        if (mask & (1u << i)) rows.push_back(i);

      Vec u = problem.u_d;
      Vec w(size);
      if (size > 0) {
        Mat As(size, n);
        Vec bs(size);
        for (int k = 0; k < size; ++k) {
          As.row(k) = A.row(rows[k]);
          bs[k] = b[rows[k]];
        }
        if (!project_onto_rows(As, bs, problem.u_d, u, w)) continue;
      }

      if ((w.array() < -tol).any()) continue;
      bool feasible = true;
      for (int i = 0; i < m && feasible; ++i) {
        feasible = A.row(i).dot(u) - b[i] >= -tol * std::max(1.0, A.row(i).norm());
      }
      if (!feasible) continue;

      const double obj = qp_objective(problem, u);
      if (!found || obj < best_obj - tol) {
        found = true;
        best_obj = obj;
        best.u_star = u;
        best.active_set = rows;
        best.multipliers.assign(size, 0.0);
        for (int k = 0; k < size; ++k) best.multipliers[k] = 2.0 * std::max(0.0, w[k]);
      }
    }
  }
  if (!found) throw_infeasible(-1);
  return best;
}

}  // namespace safe_el

#include <random>

namespace safe_el {

QpFuzzReport qp_fuzz(int count, std::uint64_t seed, double agree_tol) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-5.0, 5.0);
  std::uniform_int_distribution<int> M(1, 4);

  QpFuzzReport rep;
  for (int k = 0; k < count; ++k) {
    const int m = M(rng);
    QpProblem p{Vec(2), Mat(m, 2), Vec(m)};
    for (int i = 0; i < 2; ++i) p.u_d[i] = U(rng);
    for (int i = 0; i < m; ++i) {
      p.A(i, 0) = U(rng);
      p.A(i, 1) = U(rng);
      p.b[i] = U(rng);
    }
    ++rep.instances;

    std::optional<QpSolution> fast, slow;
    try { fast = solve_min_norm(p); } catch (const Error& e) {
      if (e.kind() != ErrorKind::Infeasible) throw;
    }
    try { slow = kkt_oracle(p); } catch (const Error& e) {
      if (e.kind() != ErrorKind::Infeasible) throw;
    }
    if (fast.has_value() != slow.has_value()) {
      ++rep.mismatches;
      continue;
    }
    if (!fast) {
      ++rep.infeasible;
      continue;
    }
    ++rep.feasible;
    const double dev = (fast->u_star - slow->u_star).norm();
    rep.max_deviation = std::max(rep.max_deviation, dev);
    if (!(dev <= agree_tol)) ++rep.mismatches;
    if (((p.A * p.u_d).array() >= p.b.array()).all()) {
      ++rep.active_passthrough;
      if (!(fast->u_star.array() == p.u_d.array()).all() || !fast->active_set.empty())
        ++rep.passthrough_failures;
    }
  }
  return rep;
}

}  // namespace safe_el
