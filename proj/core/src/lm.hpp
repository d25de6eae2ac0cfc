#pragma once

#include <Eigen/Dense>
#include <functional>

namespace hoam::detail {

// Residual r = (y - m) / sigma and Jacobian J = (dm/dp) / sigma.
using LmEval = std::function<void(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac)>;

struct LmResult {
  Eigen::VectorXd p;
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Levenberg-Marquardt with Marquardt diagonal scaling.
inline LmResult levenberg_marquardt(const LmEval& eval, Eigen::VectorXd p, int max_iter = 500) {
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  eval(p, r, jac);
  LmResult out;
  double chi2 = r.squaredNorm();
  double lambda = 1e-3;
  Eigen::VectorXd r_new;
  Eigen::MatrixXd jac_new;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    if (!std::isfinite(chi2)) break;
    if (chi2 < 1e-28 * static_cast<double>(r.size())) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd a = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    const double dmax = a.diagonal().maxCoeff();
    bool accepted = false;
    while (lambda < 1e16) {
      Eigen::MatrixXd damped = a;
      for (Eigen::Index k = 0; k < a.rows(); ++k) damped(k, k) += lambda * std::max(a(k, k), 1e-12 * dmax + 1e-300);
      const Eigen::VectorXd step = damped.ldlt().solve(g);
      const Eigen::VectorXd trial = p + step;
      eval(trial, r_new, jac_new);
      const double chi2_new = r_new.squaredNorm();
      if (std::isfinite(chi2_new) && chi2_new < chi2) {
        const bool small = (chi2 - chi2_new) <= 1e-13 * chi2_new ||
                           step.norm() <= 1e-14 * (p.norm() + 1e-14);
        p = trial;
        r.swap(r_new);
        jac.swap(jac_new);
        chi2 = chi2_new;
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (small) out.converged = true;
        break;
      }
      lambda *= 8.0;
    }
    if (!accepted) {
      // No downhill step at any damping: stationary to working precision.
      out.converged = true;
      break;
    }
    if (out.converged) break;
  }
  out.p = p;
  out.chi2 = chi2;
  return out;
}

}  // namespace hoam::detail
