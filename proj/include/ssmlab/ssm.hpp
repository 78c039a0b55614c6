#pragma once

// Diagonal state space model: continuous kernel, ZOH discretization, forward
// pass and the Vandermonde factorization of the discrete coefficient matrix.

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

#include <Eigen/Dense>

#include "ssmlab/common.hpp"

namespace ssmlab {

/// Diagonal entries of the state matrix, w_j = real[j] + i*imag[j].
struct StateVector {
  Eigen::VectorXd real;  // a_j, dimensionless
  Eigen::VectorXd imag;  // v_j, rad per unit time

  Index size() const { return real.size(); }
  Complex node(Index j) const { return Complex(real[j], imag[j]); }

  void validate() const {
    require(real.size() == imag.size(), "StateVector: real/imag length mismatch");
    require(real.size() >= 1, "StateVector: need m >= 1");
    require(real.allFinite() && imag.allFinite(), "StateVector: non-finite entry");
  }
};

/// SISO diagonal SSM. The read-in vector b is fixed to all ones and the skip
/// connection is omitted, so the model is fully described by (w, c, delta).
struct SsmModel {
  StateVector w;
  Eigen::VectorXcd c;  // read-out
  double delta = 1.0;  // timescale

  Index state_size() const { return w.size(); }

  void validate() const {
    w.validate();
    require(c.size() == w.size(), "SsmModel: c length != m");
    require(c.allFinite(), "SsmModel: non-finite read-out");
    require(std::isfinite(delta) && delta > 0.0, "SsmModel: delta must be > 0");
  }
};

/// Discrete memory vector rho~ induced by ZOH discretization:
///   rho~_l = Re( sum_j (e^{dw_j}-1)/w_j * c_j * e^{dw_j l} ),  l = 0..L-1,
/// so that y_L = sum_l rho~_l x_{L-1-l}.
struct DiscreteKernel {
  Eigen::VectorXd values;
  double delta = 1.0;

  Index length() const { return values.size(); }
};

/// (e^z - 1)/z with a Taylor branch near zero. For Re(z) <= 0 the modulus of
/// the result is at most 1.
inline Complex safe_ez_ratio(Complex z) {
  if (std::abs(z) < 1e-6) return 1.0 + z / 2.0 + z * z / 6.0;
  return (std::exp(z) - 1.0) / z;
}

/// d/dz[(e^z - 1)/z] = (e^z (z-1) + 1)/z^2. The formula cancels to O(z^2)
/// near zero, so the Taylor branch needs a wider window than safe_ez_ratio.
inline Complex ez_ratio_deriv(Complex z) {
  if (std::abs(z) < 1e-3) {
    return 0.5 + z / 3.0 + z * z / 8.0 + z * z * z / 30.0 + z * z * z * z / 144.0;
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

namespace detail {

// Per-node ZOH coefficient (e^{dw}-1)/w = delta * safe_ez_ratio(delta*w),
// which tends to delta as w -> 0.
inline Complex zoh_coefficient(Complex w, double delta) {
  return delta * safe_ez_ratio(delta * w);
}

// Fills row j of `powers` with e^{dw_j * l} for l = 0..L-1 by iterated
// multiplication, re-anchoring with a full exponential every 1024 steps to
// cap rounding drift.
inline void fill_node_powers(Complex dw, Index length, Complex* row) {
  const Complex step = std::exp(dw);
  Complex cur = 1.0;
  for (Index l = 0; l < length; ++l) {
    if (l > 0 && l % 1024 == 0) cur = std::exp(dw * static_cast<double>(l));
    row[l] = cur;
    cur *= step;
  }
}

} // namespace detail

/// Complex coefficient table u_{j,l} = (e^{dw_j}-1)/w_j * c_j * e^{dw_j l}
/// (m x L). rho~ is the column-wise real-part sum.
inline RowMatrixXcd zoh_coefficient_table(const SsmModel& model, Index length) {
  model.validate();
  require(length >= 1, "zoh_kernel: L must be >= 1");
  const Index m = model.state_size();
  // A positive Re(delta*w_j)*(L-1) beyond exp range overflows deterministically.
  for (Index j = 0; j < m; ++j) {
    const double growth = model.delta * model.w.real[j] * static_cast<double>(length - 1);
    if (growth > 700.0) {
      throw std::overflow_error("zoh_kernel: e^{delta*Re(w)*L} overflows (Re(w) > 0 with large L)");
    }
  }
  RowMatrixXcd table(m, length);
  for (Index j = 0; j < m; ++j) {
    const Complex w = model.w.node(j);
    detail::fill_node_powers(model.delta * w, length, table.row(j).data());
    table.row(j) *= detail::zoh_coefficient(w, model.delta) * model.c[j];
  }
  if (!table.allFinite()) throw std::overflow_error("zoh_kernel: non-finite coefficient");
  return table;
}

inline DiscreteKernel zoh_kernel(const SsmModel& model, Index length) {
  const RowMatrixXcd table = zoh_coefficient_table(model, length);
  DiscreteKernel kernel;
  kernel.delta = model.delta;
  kernel.values = table.real().colwise().sum().transpose();
  return kernel;
}

/// Final output y_L = sum_l rho~_l x_{L-1-l}.
inline double forward(const SsmModel& model, const Eigen::VectorXd& x) {
  const DiscreteKernel kernel = zoh_kernel(model, x.size());
  return kernel.values.dot(x.reverse());
}

/// All outputs (y_1, ..., y_L): y_{t+1} = sum_{k<=t} rho~_k x_{t-k}.
inline Eigen::VectorXd forward_sequence(const SsmModel& model, const Eigen::VectorXd& x) {
  const Index length = x.size();
  const DiscreteKernel kernel = zoh_kernel(model, length);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(length);
  for (Index k = 0; k < length; ++k) {
    y.tail(length - k) += kernel.values[k] * x.head(length - k);
  }
  return y;
}

/// Continuous memory function sum_j c_j e^{a_j s} cos(v_j s) on a grid of
/// nonnegative time points.
inline Eigen::VectorXd continuous_kernel(const StateVector& w, const Eigen::VectorXd& c,
                                         const Eigen::VectorXd& s_grid) {
  w.validate();
  require(c.size() == w.size(), "continuous_kernel: c length != m");
  require((s_grid.array() >= 0.0).all(), "continuous_kernel: s_grid entries must be >= 0");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(s_grid.size());
  for (Index j = 0; j < w.size(); ++j) {
    out += c[j] * (w.real[j] * s_grid.array()).exp().cwiseProduct(
                      (w.imag[j] * s_grid.array()).cos()).matrix();
  }
  return out;
}

/// Factorization of the 2m x L coefficient matrix: V = 1/2 Phi^H D V_nodes,
/// and y_L = delta * (Re c, Im c)^T V J x with J the row-reversed identity.
struct VandermondeFactor {
  Eigen::MatrixXd v;        // 2m x L real; rows j: Re(phi_j e^{dw_j l}), rows m+j: -Im(...)
  Eigen::MatrixXcd phi;     // 2m x 2m, Phi Phi^H = 2 I
  Eigen::VectorXcd d;       // diagonal of D: (e^{d conj(w_j)}-1)/(d conj(w_j)) then the w_j entries
  Eigen::MatrixXcd v_nodes; // complex Vandermonde V_L on nodes e^{d conj(w_j)}, e^{d w_j}
  Eigen::MatrixXd j;        // L x L exchange matrix

  /// Stacked read-out (Re c, Im c).
  static Eigen::VectorXd stack_readout(const Eigen::VectorXcd& c) {
    Eigen::VectorXd out(2 * c.size());
    out.head(c.size()) = c.real();
    out.tail(c.size()) = c.imag();
    return out;
  }
};

inline VandermondeFactor vandermonde_factor(const SsmModel& model, Index length) {
  model.validate();
  require(length >= 1, "vandermonde_factor: L must be >= 1");
  const Index m = model.state_size();
  VandermondeFactor out;

  out.v_nodes.resize(2 * m, length);
  out.d.resize(2 * m);
  Eigen::RowVectorXcd row(length);
  for (Index j = 0; j < m; ++j) {
    const Complex dw = model.delta * model.w.node(j);
    detail::fill_node_powers(std::conj(dw), length, row.data());
    out.v_nodes.row(j) = row;
    detail::fill_node_powers(dw, length, row.data());
    out.v_nodes.row(m + j) = row;
    out.d[j] = safe_ez_ratio(std::conj(dw));
    out.d[m + j] = safe_ez_ratio(dw);
  }

  out.phi = Eigen::MatrixXcd::Zero(2 * m, 2 * m);
  const Complex i_unit(0.0, 1.0);
  for (Index j = 0; j < m; ++j) {
    out.phi(j, j) = 1.0;
    out.phi(j, m + j) = i_unit;
    out.phi(m + j, j) = 1.0;
    out.phi(m + j, m + j) = -i_unit;
  }

  out.v.resize(2 * m, length);
  for (Index j = 0; j < m; ++j) {
    // Row j of D V_nodes for the w_j block is phi_j e^{dw_j l}; the real
    // rows below are its real part and negated imaginary part.
    Eigen::RowVectorXcd u = out.d[m + j] * out.v_nodes.row(m + j);
    out.v.row(j) = u.real();
    out.v.row(m + j) = -u.imag();
  }

  out.j = Eigen::MatrixXd::Zero(length, length);
  for (Index l = 0; l < length; ++l) out.j(l, length - 1 - l) = 1.0;
  return out;
}

/// y_L evaluated through the factorization, delta * c_stacked^T V J x.
inline double forward_via_factorization(const SsmModel& model, const Eigen::VectorXd& x) {
  const VandermondeFactor fac = vandermonde_factor(model, x.size());
  const Eigen::VectorXd c2 = VandermondeFactor::stack_readout(model.c);
  return model.delta * c2.dot(fac.v * (fac.j * x));
}

} // namespace ssmlab
