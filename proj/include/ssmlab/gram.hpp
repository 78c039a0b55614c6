#pragma once

// Closed-form Gram matrices of the SSM kernel basis in L2[0,inf), their
// spectra, the coth separation bounds, and the conditioning/approximation
// tradeoff matrix.

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "ssmlab/common.hpp"

namespace ssmlab {

/// coth(x) = (e^{2x}+1)/(e^{2x}-1), evaluated via expm1 so small and large
/// arguments stay accurate.
inline double coth(double x) {
  require(x != 0.0, "coth: x must be nonzero");
  if (x > 20.0) return 1.0;
  if (x < -20.0) return -1.0;
  const double em = std::expm1(2.0 * x);
  return (em + 2.0) / em;
}

/// int_0^inf e^{-s} cos(v_j s) cos(v_k s) ds
///   = 1/2 (1/(1+(v_j-v_k)^2) + 1/(1+(v_j+v_k)^2)).
inline double cosine_integral(double vj, double vk) {
  const double d = vj - vk;
  const double s = vj + vk;
  return 0.5 * (1.0 / (1.0 + d * d) + 1.0 / (1.0 + s * s));
}

/// sum_{n>=1} 1/(n^2+t^2) = -1/(2t^2) + (pi/2t) coth(pi t); pi^2/6 at t = 0.
/// The closed form cancels two O(1/t^2) terms, so small |t| switches to the
/// zeta series sum = zeta(2) - t^2 zeta(4) + t^4 zeta(6) - t^6 zeta(8) + ...
inline double basel_sum(double t) {
  const double pi = std::numbers::pi;
  const double at = std::abs(t);
  if (at <= 1e-2) {
    const double t2 = t * t;
    const double zeta2 = pi * pi / 6.0;
    const double zeta4 = std::pow(pi, 4) / 90.0;
    const double zeta6 = std::pow(pi, 6) / 945.0;
    const double zeta8 = std::pow(pi, 8) / 9450.0;
    return zeta2 - t2 * (zeta4 - t2 * (zeta6 - t2 * zeta8));
  }
  return -1.0 / (2.0 * t * t) + pi / (2.0 * at) * coth(pi * at);
}

struct GramMatrix {
  enum class Source { ComplexHalf, RealNodes };
  Eigen::MatrixXd entries;
  Source source = Source::ComplexHalf;
  Eigen::VectorXd nodes;  // v (ComplexHalf) or a (RealNodes)

  Index size() const { return entries.rows(); }
};

/// Gram matrix for w_j = -1/2 + i v_j: G_{jk} = cosine_integral(v_j, v_k).
inline GramMatrix gram_complex(const Eigen::VectorXd& v) {
  require(v.size() >= 1, "gram_complex: need m >= 1");
  require(v.allFinite(), "gram_complex: non-finite node");
  GramMatrix g;
  g.source = GramMatrix::Source::ComplexHalf;
  g.nodes = v;
  g.entries.resize(v.size(), v.size());
  for (Index j = 0; j < v.size(); ++j)
    for (Index k = 0; k <= j; ++k) {
      const double val = cosine_integral(v[j], v[k]);
      g.entries(j, k) = val;
      g.entries(k, j) = val;
    }
  return g;
}

/// Gram matrix for real nodes a_j < 0: G_{jk} = -1/(a_j + a_k). For the
/// S4D-Real nodes a_j = -j this is the Hilbert-type matrix 1/(j+k).
inline GramMatrix gram_real(const Eigen::VectorXd& a) {
  require(a.size() >= 1, "gram_real: need m >= 1");
  require(a.allFinite(), "gram_real: non-finite node");
  GramMatrix g;
  g.source = GramMatrix::Source::RealNodes;
  g.nodes = a;
  g.entries.resize(a.size(), a.size());
  for (Index j = 0; j < a.size(); ++j)
    for (Index k = 0; k <= j; ++k) {
      require(a[j] + a[k] < 0.0, "gram_real: a_j + a_k must be < 0");
      const double val = -1.0 / (a[j] + a[k]);
      g.entries(j, k) = val;
      g.entries(k, j) = val;
    }
  return g;
}

namespace detail {

// Composite Simpson on oscillation-resolving panels; enough for the smooth
// exponentially damped integrands below.
template <typename Fn>
double damped_quadrature(Fn&& f, double decay, double max_freq) {
  const double upper = std::min(1000.0, 33.0 / decay);  // e^{-33} < 1e-14
  const double width = std::min(0.25, 0.75 / std::max(max_freq, 1.0));
  const Index panels = static_cast<Index>(std::ceil(upper / width));
  const Index sub = 64;  // Simpson points per panel
  double acc = 0.0;
  for (Index p = 0; p < panels; ++p) {
    const double lo = upper * double(p) / double(panels);
    const double hi = upper * double(p + 1) / double(panels);
    const double h = (hi - lo) / double(sub);
    double sum = f(lo) + f(hi);
    for (Index i = 1; i < sub; ++i) sum += f(lo + h * double(i)) * (i % 2 ? 4.0 : 2.0);
    acc += sum * h / 3.0;
  }
  return acc;
}

} // namespace detail

/// Gram matrix for arbitrary nodes w_j = a_j + i v_j with a_j < 0, by direct
/// quadrature of int_0^inf Re(e^{w_j s}) Re(e^{w_k s}) ds. The closed forms
/// above cover only a = -1/2 (complex) and v = 0 (real); this is the general
/// fallback.
inline GramMatrix gram_numeric(const Eigen::VectorXd& a, const Eigen::VectorXd& v) {
  require(a.size() == v.size() && a.size() >= 1, "gram_numeric: node shape mismatch");
  require((a.array() < 0.0).all(), "gram_numeric: requires Re(w_j) < 0 for integrability");
  GramMatrix g;
  g.source = GramMatrix::Source::ComplexHalf;
  g.nodes = v;
  g.entries.resize(a.size(), a.size());
  for (Index j = 0; j < a.size(); ++j)
    for (Index k = 0; k <= j; ++k) {
      const double decay = -(a[j] + a[k]);
      const double max_freq = std::abs(v[j]) + std::abs(v[k]);
      const double val = detail::damped_quadrature(
          [&](double s) {
            return std::exp(a[j] * s) * std::cos(v[j] * s) * std::exp(a[k] * s) *
                   std::cos(v[k] * s);
          },
          decay, max_freq);
      g.entries(j, k) = val;
      g.entries(k, j) = val;
    }
  return g;
}

/// Eigenvalues, ascending.
inline Eigen::VectorXd spectrum(const GramMatrix& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g.entries, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

/// Minimum pairwise gap of the nodes.
inline double separation_distance(const Eigen::VectorXd& v) {
  require(v.size() >= 2, "separation_distance: need at least 2 nodes");
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end());
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) best = std::min(best, sorted[i] - sorted[i - 1]);
  return best;
}

/// lambda_max / lambda_min. Hilbert-type Gram matrices reach condition
/// numbers beyond double-precision eigensolver resolution around m = 12, so
/// the RealNodes path runs in extended precision.
inline double condition_number(const GramMatrix& g) {
  if (g.source == GramMatrix::Source::RealNodes) {
    using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    LongMatrix entries = g.entries.cast<long double>();
    // Rebuild entries from the nodes in long double; the formula is exact.
    for (Index j = 0; j < g.size(); ++j)
      for (Index k = 0; k < g.size(); ++k)
        entries(j, k) = -1.0L / (static_cast<long double>(g.nodes[j]) +
                                 static_cast<long double>(g.nodes[k]));
    Eigen::SelfAdjointEigenSolver<LongMatrix> solver(entries, Eigen::EigenvaluesOnly);
    const long double lo = solver.eigenvalues()(0);
    const long double hi = solver.eigenvalues()(g.size() - 1);
    require(lo > 0.0L, "condition_number: Gram matrix numerically singular");
    return static_cast<double>(hi / lo);
  }
  const Eigen::VectorXd eig = spectrum(g);
  require(eig[0] > 0.0, "condition_number: Gram matrix numerically singular");
  return eig[eig.size() - 1] / eig[0];
}

/// Spectrum bounds from the separation distance delta:
///   lower = 1.19 - (3 pi / 4 delta) coth(pi/delta),
///   upper = 5/12 + (3 pi / 4 delta) coth(pi/delta).
struct SpectrumBounds {
  double lower;
  double upper;
  double delta;
};

inline SpectrumBounds gershgorin_bounds(double delta) {
  require(delta > 0.0, "gershgorin_bounds: delta must be > 0");
  const double radius =
      3.0 * std::numbers::pi / (4.0 * delta) * coth(std::numbers::pi / delta);
  return {1.19 - radius, 5.0 / 12.0 + radius, delta};
}

struct PdCheck {
  bool positive_definite;
  double lambda_min;
  double lambda_max;
};

/// Positive definite iff lambda_min > 1e-12 * lambda_max.
inline PdCheck positive_definite_check(const GramMatrix& g) {
  const Eigen::VectorXd eig = spectrum(g);
  const double lo = eig[0];
  const double hi = eig[eig.size() - 1];
  return {lo > 1e-12 * hi, lo, hi};
}

inline PdCheck positive_definite_check_complex(const Eigen::VectorXd& v) {
  return positive_definite_check(gram_complex(v));
}

inline PdCheck positive_definite_check_real(const Eigen::VectorXd& a) {
  return positive_definite_check(gram_real(a));
}

/// Parametric target memory rho*(s) = e^{-s/2} c_hat^T cos(xi s).
struct TradeoffTarget {
  Eigen::VectorXd c_hat;
  Eigen::VectorXd xi;

  void validate() const {
    require(c_hat.size() == xi.size(), "TradeoffTarget: c_hat/xi length mismatch");
    require(xi.allFinite() && c_hat.allFinite(), "TradeoffTarget: non-finite entry");
  }
};

struct ApproximationResult {
  Eigen::MatrixXd m;      // Schur complement A_xx - A_xv G^{-1} A_vx
  double sigma_max;       // largest eigenvalue of the symmetrized M
  double approx_error;    // c_hat^T M c_hat
  double gram_condition;  // condition number of G, reported with every solve
};

/// Residual quadratic form of projecting the target onto the model span:
///   M = int e^{-s} cos(xi s)cos(xi s)^T ds
///     - (int e^{-s} cos(xi s)cos(v s)^T ds) G^{-1} (...)^T,
/// assembled entrywise from cosine_integral and solved by Cholesky.
inline ApproximationResult approximation_matrix(const Eigen::VectorXd& v,
                                                const TradeoffTarget& target) {
  target.validate();
  const GramMatrix gram = gram_complex(v);
  const Index m = v.size();
  const Index mt = target.xi.size();

  const Eigen::VectorXd eig = spectrum(gram);
  const double cond = eig[0] > 0.0 ? eig[m - 1] / eig[0]
                                   : std::numeric_limits<double>::infinity();
  if (!(eig[0] > 0.0) || cond > 1e12) {
    std::ostringstream msg;
    msg << "approximation_matrix: Gram matrix numerically singular (condition " << cond
        << ", separation distance "
        << (m >= 2 ? separation_distance(v) : std::numeric_limits<double>::infinity()) << ")";
    throw std::runtime_error(msg.str());
  }

  Eigen::MatrixXd target_block(mt, mt);  // int e^{-s} cos(xi_j s) cos(xi_k s) ds
  for (Index j = 0; j < mt; ++j)
    for (Index k = 0; k < mt; ++k) target_block(j, k) = cosine_integral(target.xi[j], target.xi[k]);

  Eigen::MatrixXd cross(mt, m);  // int e^{-s} cos(xi_j s) cos(v_k s) ds
  for (Index j = 0; j < mt; ++j)
    for (Index k = 0; k < m; ++k) cross(j, k) = cosine_integral(target.xi[j], v[k]);

  const Eigen::LLT<Eigen::MatrixXd> llt(gram.entries);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("approximation_matrix: Cholesky factorization of G failed");
  }

  ApproximationResult out;
  out.gram_condition = cond;
  out.m = target_block - cross * llt.solve(cross.transpose());
  out.m = (0.5 * (out.m + out.m.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> msolver(out.m, Eigen::EigenvaluesOnly);
  out.sigma_max = msolver.eigenvalues()(mt - 1);
  out.approx_error = target.c_hat.dot(out.m * target.c_hat);
  return out;
}

struct TradeoffRow {
  double ratio;
  double gram_condition;
  double sigma_max;
};

/// Sweep v = ratio * xi: conditioning of G against the approximation measure
/// sigma_max(M). c_hat defaults to the unit-norm all-ones vector.
inline std::vector<TradeoffRow> tradeoff_sweep(const Eigen::VectorXd& xi,
                                               const std::vector<double>& ratios) {
  require(xi.size() >= 1, "tradeoff_sweep: need m >= 1");
  TradeoffTarget target;
  target.xi = xi;
  target.c_hat = Eigen::VectorXd::Constant(xi.size(), 1.0 / std::sqrt(double(xi.size())));
  std::vector<TradeoffRow> rows;
  rows.reserve(ratios.size());
  for (double ratio : ratios) {
    require(ratio > 0.0, "tradeoff_sweep: ratios must be positive");
    const Eigen::VectorXd v = ratio * xi;
    const ApproximationResult res = approximation_matrix(v, target);
    rows.push_back({ratio, res.gram_condition, res.sigma_max});
  }
  return rows;
}

} // namespace ssmlab
