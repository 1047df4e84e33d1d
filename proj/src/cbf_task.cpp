#include "safe_el/cbf_task.hpp"

#include <sstream>

#include "safe_el/errors.hpp"

namespace safe_el {

TaskBarrier task_barrier_preset(const std::string& name, const BarrierGains& gains, double d1,
                                double rho) {
  TaskBarrier b;
  b.name = name;
  b.gains = gains;
  b.d1 = d1;
  b.rho = rho;
  if (name == "disk_exclusion") {
    b.h = [](const Vec& p) { return p.squaredNorm() - 0.25; };
    b.grad = [](const Vec& p) { return RowVec(2.0 * p.transpose()); };
    b.hess = [](const Vec& p) { return Mat(2.0 * Mat::Identity(p.size(), p.size())); };
  } else if (name == "parabola") {
    b.h = [](const Vec& p) { return 1.0 + p[0] - p[1] * p[1]; };
    b.grad = [](const Vec& p) {
      RowVec g(2);
      g << 1.0, -2.0 * p[1];
      return g;
    };
    b.hess = [](const Vec&) {
      Mat H = Mat::Zero(2, 2);
      H(1, 1) = -2.0;
      return H;
    };
  } else if (name == "halfplane") {
    b.h = [](const Vec& p) { return 1.0 + p[0] + p[1]; };
    b.grad = [](const Vec&) { return RowVec::Ones(2).eval(); };
    b.hess = [](const Vec&) { return Mat::Zero(2, 2).eval(); };
  } else {
    throw Error(ErrorKind::UnknownPreset, "unknown task barrier preset '" + name + "'");
  }
  return b;
}

double hbar_task(const TaskBarrier& b, const ManipulatorModel& model, const Vec& p,
                 const Vec& q, const Vec& eta) {
  const RowVec a = b.grad(p) * jacobian(model, q);
  const auto& g = b.gains;
  return a.dot(eta) - a.squaredNorm() / (2.0 * g.beta) - 0.5 * g.beta * b.rho * b.rho +
         g.lambda * b.h(p);
}

HbarGradients hbar_task_gradients(const TaskBarrier& b, const ManipulatorModel& model,
                                  const Vec& p, const Vec& q, const Vec& eta) {
  const Mat J = jacobian(model, q);
  const RowVec dh = b.grad(p);
  const Mat H = b.hess(p);
  const RowVec a = dh * J;
  const double inv_beta = 1.0 / b.gains.beta;

  HbarGradients out;
  out.d_eta = a;
  out.d_p = (J * eta).transpose() * H - inv_beta * (a * J.transpose()) * H + b.gains.lambda * dh;
  out.d_q = RowVec(q.size());
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    const Mat dJ = jacobian_partial(model, q, static_cast<int>(j));
    out.d_q[j] = dh.dot(dJ * eta) - inv_beta * a.dot(dh * dJ);
  }
  out.d_q_total = out.d_p * J + out.d_q;
  return out;
}

PhiTerms phi_terms(const TaskBarrier& b, const ManipulatorModel& model, const Vec& p,
                   const Vec& q, const Vec& eta, const Vec& w_hat) {
  const Mat J = jacobian(model, q);
  const HbarGradients gr = hbar_task_gradients(b, model, p, q, eta);
  const RowVec dpJ = gr.d_p * J;
  const double phi0 = dpJ.dot(eta) - dpJ.norm() * b.rho + gr.d_q.dot(w_hat) -
                      gr.d_q.norm() * b.d1 + b.gains.gamma * hbar_task(b, model, p, q, eta);
  return {phi0, gr.d_eta};
}

void check_initial_condition_task(const TaskBarrier& b, const ManipulatorModel& model,
                                  const Vec& p0, const Vec& q0, const Vec& eta0) {
  const double h0 = b.h(p0);
  const double hb0 = hbar_task(b, model, p0, q0, eta0);
  if (!(h0 >= 0.0) || !(hb0 >= 0.0)) {
    std::ostringstream os;
    os << "task barrier '" << b.name << "': initial condition fails (h = " << h0
       << ", hbar = " << hb0 << ", both must be >= 0)";
    throw Error(ErrorKind::InitialConditionFailed, os.str());
  }
}

Vec delta_from_jacobian(const Mat& J, const Mat& J_pinv, double l1, const Vec& e_d,
                        const Vec& pd_dot) {
  const double jn = spectral_norm(J);
  return J_pinv * (-l1 * e_d + pd_dot - 0.5 * jn * jn * e_d);
}

Vec upsilon_d_from_jacobian(const Mat& J, const Mat& J_pinv, const BackstepParams& bp,
                            const Vec& p, const Vec& eta, const RefSample& ref) {
  const double jn = spectral_norm(J);
  const double c = bp.l1 + 0.5 * jn * jn;
  const Vec e_d = p - ref.pos;
  const Vec e_eta = eta - delta_from_jacobian(J, J_pinv, bp.l1, e_d, ref.vel);
  const Mat ddelta_dp = -c * J_pinv;
  const Vec ddelta_dt = J_pinv * (c * ref.vel + ref.acc);
  const Mat dJ = ddelta_dp * J;
  const double dJn = spectral_norm(dJ);
  return -bp.l2 * e_eta + dJ * eta + ddelta_dt - 0.5 * dJn * dJn * e_eta -
         J.transpose() * e_d;
}

Vec delta(const BackstepParams& bp, const ManipulatorModel& model, const Reference& ref,
          const Vec& p, const Vec& q, double t) {
  const Mat J = jacobian(model, q);
  const RefSample r = ref.at(t);
  return delta_from_jacobian(J, pinv_or_inv(J, bp.singularity_tol), bp.l1, p - r.pos, r.vel);
}

Vec upsilon_d(const BackstepParams& bp, const ManipulatorModel& model, const Reference& ref,
              const Vec& p, const Vec& q, const Vec& eta, double t) {
  const Mat J = jacobian(model, q);
  return upsilon_d_from_jacobian(J, pinv_or_inv(J, bp.singularity_tol), bp, p, eta, ref.at(t));
}

QpProblem build_task_qp(const std::vector<TaskBarrier>& barriers, const ManipulatorModel& model,
                        const Vec& p, const Vec& q, const Vec& eta, const Vec& w_hat,
                        const Vec& u_d) {
  QpProblem prob{u_d, Mat(barriers.size(), u_d.size()), Vec(barriers.size())};
  for (std::size_t i = 0; i < barriers.size(); ++i) {
    const PhiTerms t = phi_terms(barriers[i], model, p, q, eta, w_hat);
    prob.A.row(i) = t.phi1;
    prob.b[i] = -t.phi0;
  }
  return prob;
}

Vec safe_upsilon(const std::vector<TaskBarrier>& barriers, const ManipulatorModel& model,
                 const Vec& p, const Vec& q, const Vec& eta, const Vec& w_hat, const Vec& u_d) {
  const QpProblem prob = build_task_qp(barriers, model, p, q, eta, w_hat, u_d);
  try {
    return solve_min_norm(prob).u_star;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Infeasible && e.kind() != ErrorKind::DegenerateConstraint) throw;
    std::ostringstream os;
    os << "task-space CBF-QP infeasible at q = (" << q.transpose() << "), eta = ("
       << eta.transpose() << "): " << e.what();
    throw Error(ErrorKind::SafetyFilterInfeasible, os.str());
  }
}

}  // namespace safe_el
