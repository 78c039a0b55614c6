#pragma once

// Output-magnitude bound at initialization and its Monte Carlo counterpart.

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

#include "ssmlab/autocorr.hpp"
#include "ssmlab/common.hpp"
#include "ssmlab/ssm.hpp"

namespace ssmlab {

/// Upper bound delta^2 m^2 L lambda_max on E_{c,x}[y_L^2] for Re(w) <= 0.
inline double theorem1_bound(double delta, Index m, Index length, double lambda_max) {
  require(delta > 0.0 && m >= 1 && length >= 1 && lambda_max >= 0.0,
          "theorem1_bound: arguments must be positive");
  return delta * delta * double(m) * double(m) * double(length) * lambda_max;
}

struct StabilityReport {
  double bound = 0.0;
  double empirical = 0.0;
  double stderr_ = 0.0;
  Index n_samples = 0;
  double delta = 0.0;
  Index length = 0;
  Index m = 0;
  double real_part = 0.0;
  bool pooling = false;
};

/// Monte Carlo E[y_L^2] over n_c complex-standard-normal read-outs crossed
/// with n_x GP draws, paired with the theorem bound. The standard error uses
/// the two-way (row/column mean) variance decomposition of the factorial
/// design, since every c draw is reused across every x draw.
inline StabilityReport empirical_magnitude(const StateVector& w, double delta,
                                           const Eigen::MatrixXd& k, Index n_c, Index n_x,
                                           std::uint64_t seed, bool pooling = false) {
  w.validate();
  require(delta > 0.0, "empirical_magnitude: delta must be > 0");
  require((w.real.array() <= 0.0).all(),
          "empirical_magnitude: requires Re(w_j) <= 0 (bound hypothesis)");
  require(n_c >= 2 && n_x >= 2, "empirical_magnitude: need n_c, n_x >= 2");
  const Index m = w.size();
  const Index length = k.rows();

  SsmModel model;
  model.w = w;
  model.c = Eigen::VectorXcd::Ones(m);
  model.delta = delta;
  // Coefficient basis u_{j,l} = (e^{dw_j}-1)/w_j e^{dw_j l} (unit read-out);
  // then y_L = sum_j Re(c_j) A_j - Im(c_j) B_j with A, B the projections of
  // the reversed input onto Re(u), Im(u).
  const RowMatrixXcd table = zoh_coefficient_table(model, length);
  const Eigen::MatrixXd re_u = table.real();
  const Eigen::MatrixXd im_u = table.imag();

  const Eigen::MatrixXd x = sample_gp(k, n_x, mix_seed(seed, 0x78ULL));  // n_x x L

  Eigen::MatrixXd proj_re(n_x, m), proj_im(n_x, m);
  Eigen::MatrixXd prefix_re, prefix_im;  // per-step state sums, pooling only
  for (Index i = 0; i < n_x; ++i) {
    const Eigen::VectorXd xrev = x.row(i).reverse();
    proj_re.row(i) = (re_u * xrev).transpose();
    proj_im.row(i) = (im_u * xrev).transpose();
  }

  auto rng = make_rng(mix_seed(seed, 0x63ULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd c_re(n_c, m), c_im(n_c, m);
  for (Index i = 0; i < n_c; ++i)
    for (Index j = 0; j < m; ++j) {
      c_re(i, j) = normal(rng);
      c_im(i, j) = normal(rng);
    }

  Eigen::MatrixXd sq(n_c, n_x);
  if (!pooling) {
    // y(c_i, x_j) = <c_re_i, proj_re_j> - <c_im_i, proj_im_j>
    const Eigen::MatrixXd y = c_re * proj_re.transpose() - c_im * proj_im.transpose();
    sq = y.array().square();
  } else {
    // Pooling mode: (1/L) sum_l y_l^2 per draw, via the per-step state sums
    // S_{j,l+1} = e^{dw_j} S_{j,l} + u_{j,0} x_l.
    sq.setZero();
    Eigen::VectorXcd lam(m);
    for (Index j = 0; j < m; ++j) lam[j] = std::exp(delta * w.node(j));
    for (Index ix = 0; ix < n_x; ++ix) {
      Eigen::MatrixXcd s(m, length);
      Eigen::VectorXcd cur = Eigen::VectorXcd::Zero(m);
      for (Index l = 0; l < length; ++l) {
        cur = lam.cwiseProduct(cur) + table.col(0) * x(ix, l);
        s.col(l) = cur;
      }
      const Eigen::MatrixXd s_re = s.real();
      const Eigen::MatrixXd s_im = s.imag();
      for (Index ic = 0; ic < n_c; ++ic) {
        const Eigen::VectorXd y =
            (c_re.row(ic) * s_re - c_im.row(ic) * s_im).transpose();
        sq(ic, ix) = y.squaredNorm() / double(length);
      }
    }
  }

  const double mean = sq.mean();
  const Eigen::VectorXd row_means = sq.rowwise().mean();  // per-c
  const Eigen::VectorXd col_means = sq.colwise().mean();  // per-x
  const double var_c = (row_means.array() - mean).square().sum() / double(n_c - 1);
  const double var_x = (col_means.array() - mean).square().sum() / double(n_x - 1);
  const double stderr_val = std::sqrt(var_c / double(n_c) + var_x / double(n_x));

  StabilityReport report;
  report.delta = delta;
  report.length = length;
  report.m = m;
  report.real_part = w.real.mean();
  report.n_samples = n_c * n_x;
  report.empirical = mean;
  report.stderr_ = stderr_val;
  report.bound = theorem1_bound(delta, m, length, lambda_max(k).lambda_max);
  report.pooling = pooling;
  return report;
}

} // namespace ssmlab
