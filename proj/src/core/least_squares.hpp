#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

namespace sdt {

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // (J^T J)^-1 of the whitened residuals
  Eigen::VectorXd residuals;   // whitened
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Levenberg-Marquardt on whitened residuals r(p) (already divided by their
/// standard deviations). The Jacobian is supplied by the caller. `project`
/// maps a trial step back into the feasible parameter set.
inline LeastSquaresResult levenberg_marquardt(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
    const std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>& jacobian, Eigen::VectorXd p,
    const std::function<void(Eigen::VectorXd&)>& project = {}, int max_iter = 200) {
  LeastSquaresResult out;
  Eigen::VectorXd r = residual(p);
  double chi2 = r.squaredNorm();
  double lambda = 1e-3;

  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd jac = jacobian(p);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;

    bool improved = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-300);
      Eigen::VectorXd step = a.ldlt().solve(-g);
      Eigen::VectorXd trial = p + step;
      if (project) project(trial);
      const Eigen::VectorXd rt = residual(trial);
      const double c = rt.squaredNorm();
      if (std::isfinite(c) && c <= chi2) {
        const double rel = (chi2 - c) / std::max(chi2, std::numeric_limits<double>::min());
        const double step_rel = (trial - p).norm() / std::max(p.norm(), 1e-300);
        p = trial;
        r = rt;
        chi2 = c;
        lambda = std::max(lambda * 0.3, 1e-12);
        improved = true;
        if (rel < 1e-15 || step_rel < 1e-13) out.converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) {
      // No descent direction left: at a minimum to working precision.
      out.converged = g.norm() <= 1e-6 * std::max(1.0, std::sqrt(chi2)) || chi2 < 1e-24;
      break;
    }
    if (out.converged) break;
  }

  const Eigen::MatrixXd jac = jacobian(p);
  out.params = p;
  out.residuals = r;
  out.chi2 = chi2;
  out.covariance = (jac.transpose() * jac).ldlt().solve(
      Eigen::MatrixXd::Identity(p.size(), p.size()));
  return out;
}

}  // namespace sdt
