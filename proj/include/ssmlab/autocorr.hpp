#pragma once

// Synthetic Gaussian-process autocovariances, sampling, top-eigenvalue
// estimation and the whitening transform.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "ssmlab/common.hpp"

namespace ssmlab {

enum class AutocovKind { IID, OU, RBF, RandPSD, Empirical };

inline const char* to_string(AutocovKind kind) {
  switch (kind) {
    case AutocovKind::IID: return "iid";
    case AutocovKind::OU: return "ou";
    case AutocovKind::RBF: return "rbf";
    case AutocovKind::RandPSD: return "rand";
    case AutocovKind::Empirical: return "empirical";
  }
  return "?";
}

inline AutocovKind autocov_kind_from_string(const std::string& s) {
  if (s == "iid") return AutocovKind::IID;
  if (s == "ou") return AutocovKind::OU;
  if (s == "rbf") return AutocovKind::RBF;
  if (s == "rand") return AutocovKind::RandPSD;
  throw std::invalid_argument("unknown autocovariance kind: " + s);
}

struct AutocovSpec {
  AutocovKind kind = AutocovKind::IID;
  Index length = 1;
  double ou_length = 2.0;                 // K(i,j) = exp(-|i-j|/ou_length)
  double rbf_scale = std::numbers::pi;    // K(i,j) = exp(-rbf_scale*|i-j|^2)
  std::uint64_t seed = 0;                 // RandPSD
  Eigen::MatrixXd empirical;

  static AutocovSpec iid(Index length) { return {AutocovKind::IID, length}; }
  static AutocovSpec ou(Index length, double ell = 2.0) {
    AutocovSpec s{AutocovKind::OU, length};
    s.ou_length = ell;
    return s;
  }
  static AutocovSpec rbf(Index length, double scale = std::numbers::pi) {
    AutocovSpec s{AutocovKind::RBF, length};
    s.rbf_scale = scale;
    return s;
  }
  static AutocovSpec rand_psd(Index length, std::uint64_t seed) {
    AutocovSpec s{AutocovKind::RandPSD, length};
    s.seed = seed;
    return s;
  }
  static AutocovSpec from_matrix(const Eigen::MatrixXd& k) {
    AutocovSpec s{AutocovKind::Empirical, k.rows()};
    s.empirical = k;
    return s;
  }
};

/// L x L autocovariance matrix. The four synthetic kinds have unit diagonal
/// (for `rand` in expectation), so Tr(K) = L.
inline Eigen::MatrixXd build_autocov(const AutocovSpec& spec) {
  require(spec.length >= 1, "build_autocov: L must be >= 1");
  const Index n = spec.length;
  switch (spec.kind) {
    case AutocovKind::IID:
      return Eigen::MatrixXd::Identity(n, n);
    case AutocovKind::OU: {
      require(spec.ou_length > 0.0, "build_autocov: OU length scale must be > 0");
      Eigen::MatrixXd k(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          k(i, j) = std::exp(-std::abs(double(i - j)) / spec.ou_length);
      return k;
    }
    case AutocovKind::RBF: {
      require(spec.rbf_scale > 0.0, "build_autocov: RBF scale must be > 0");
      Eigen::MatrixXd k(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) {
          const double d = double(i - j);
          k(i, j) = std::exp(-spec.rbf_scale * d * d);
        }
      return k;
    }
    case AutocovKind::RandPSD: {
      // Sigma Sigma^T / L with Sigma entries iid U[0, sqrt(3)], so the
      // diagonal is 1 in expectation.
      auto rng = make_rng(spec.seed);
      std::uniform_real_distribution<double> uniform(0.0, std::sqrt(3.0));
      Eigen::MatrixXd sigma(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) sigma(i, j) = uniform(rng);
      return (sigma * sigma.transpose()) / static_cast<double>(n);
    }
    case AutocovKind::Empirical: {
      const Eigen::MatrixXd& k = spec.empirical;
      require(k.rows() == k.cols() && k.rows() == n, "build_autocov: empirical matrix shape");
      const double asym = (k - k.transpose()).cwiseAbs().maxCoeff();
      if (asym > 1e-8) throw std::invalid_argument("build_autocov: empirical matrix not symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, Eigen::EigenvaluesOnly);
      const double lo = solver.eigenvalues()(0);
      const double hi = solver.eigenvalues()(n - 1);
      if (lo < -1e-8 * std::max(1.0, hi)) {
        throw std::invalid_argument("build_autocov: empirical matrix not PSD");
      }
      return k;
    }
  }
  throw std::logic_error("build_autocov: unreachable");
}

/// n iid rows from N(0, K), via Cholesky with a 1e-10 jitter retry.
inline Eigen::MatrixXd sample_gp(const Eigen::MatrixXd& k, Index n, std::uint64_t seed) {
  require(k.rows() == k.cols(), "sample_gp: K must be square");
  require(n >= 1, "sample_gp: n must be >= 1");
  if (k.isIdentity(0.0)) {
    auto rng = make_rng(seed);
    Eigen::MatrixXd z(n, k.rows());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < k.rows(); ++j) z(i, j) = normal(rng);
    return z;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) {
    llt.compute(k + 1e-10 * Eigen::MatrixXd::Identity(k.rows(), k.rows()));
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("sample_gp: Cholesky failed even with jitter");
    }
  }
  auto rng = make_rng(seed);
  Eigen::MatrixXd z(n, k.rows());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < k.rows(); ++j) z(i, j) = normal(rng);
  return z * llt.matrixL().transpose();
}

struct SpectrumReport {
  enum class Method { Exact, PowerIteration };
  double lambda_max = 0.0;
  double trace = 0.0;
  Index length = 0;
  Method method = Method::Exact;
  Index iterations = 0;
  double tol = 0.0;
};

namespace detail {

// Power iteration for the top eigenvalue of a symmetric PSD operator given
// as a matvec. Deterministic start; converges when the Rayleigh quotient
// stabilizes to `tol` relative.
template <typename MatVec>
SpectrumReport power_iteration(MatVec&& apply, Index n, double trace, double tol = 1e-8,
                               Index max_iters = 20000) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(n);
  for (Index i = 0; i < n; ++i) v[i] += 1e-3 * std::cos(double(i + 1));  // break symmetry
  v.normalize();
  double lambda = 0.0;
  SpectrumReport report;
  report.length = n;
  report.trace = trace;
  report.method = SpectrumReport::Method::PowerIteration;
  report.tol = tol;
  for (Index it = 1; it <= max_iters; ++it) {
    Eigen::VectorXd av = apply(v);
    const double norm = av.norm();
    if (norm == 0.0) {
      report.lambda_max = 0.0;
      report.iterations = it;
      return report;
    }
    const double next = v.dot(av);
    av /= norm;
    v.swap(av);
    if (it > 1 && std::abs(next - lambda) <= tol * std::max(1.0, std::abs(next))) {
      report.lambda_max = next;
      report.iterations = it;
      return report;
    }
    lambda = next;
  }
  throw std::runtime_error("power_iteration: no convergence");
}

} // namespace detail

/// Largest eigenvalue of a symmetric matrix: dense solve up to L = 2048,
/// power iteration beyond (or when forced).
inline SpectrumReport lambda_max(const Eigen::MatrixXd& k, bool force_power_iteration = false) {
  require(k.rows() == k.cols(), "lambda_max: matrix must be square");
  const Index n = k.rows();
  if (n <= 2048 && !force_power_iteration) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(k, Eigen::EigenvaluesOnly);
    SpectrumReport report;
    report.lambda_max = solver.eigenvalues()(n - 1);
    report.trace = k.trace();
    report.length = n;
    report.method = SpectrumReport::Method::Exact;
    return report;
  }
  return detail::power_iteration([&](const Eigen::VectorXd& v) { return (k * v).eval(); }, n,
                                 k.trace());
}

/// Largest eigenvalue of the sample autocorrelation (1/n) X^T X without
/// forming it when power iteration is used.
inline SpectrumReport lambda_max_of_samples(const Eigen::MatrixXd& x) {
  const Index n = x.rows();
  const Index length = x.cols();
  require(n >= 1, "lambda_max_of_samples: need samples");
  const double scale = 1.0 / static_cast<double>(n);
  if (length <= 2048) {
    return lambda_max(scale * x.transpose() * x);
  }
  const double trace = scale * x.squaredNorm();
  auto report = detail::power_iteration(
      [&](const Eigen::VectorXd& v) { return (scale * (x.transpose() * (x * v))).eval(); }, length,
      trace);
  return report;
}

struct Whitening {
  Eigen::MatrixXd whitened;   // centered data mapped to unit sample autocorrelation
  Eigen::MatrixXd transform;  // L x L, apply to centered rows
  Eigen::RowVectorXd mean;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean) * transform;
  }
};

/// ZCA whitening from the SVD of the centered data; a 1e-8 ridge on the
/// squared singular values keeps degenerate directions finite.
inline Whitening whiten(const Eigen::MatrixXd& x, double ridge = 1e-8) {
  const Index n = x.rows();
  require(n >= 2, "whiten: need at least 2 rows");
  Whitening out;
  out.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - out.mean;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  // Sample covariance eigenvalues are sigma^2 / n.
  Eigen::VectorXd inv_scale = svd.singularValues();
  for (Index i = 0; i < inv_scale.size(); ++i) {
    inv_scale[i] = 1.0 / std::sqrt(inv_scale[i] * inv_scale[i] / double(n) + ridge);
  }
  const Index rank = svd.matrixV().cols();
  Eigen::MatrixXd v = svd.matrixV();
  out.transform = Eigen::MatrixXd::Identity(x.cols(), x.cols());
  if (rank < x.cols()) {
    // Thin SVD of a wide-or-rank-deficient matrix: directions outside the
    // span stay untouched; the ridge already guards the tiny ones inside.
    out.transform = v * (inv_scale.asDiagonal() * v.transpose()) +
                    (Eigen::MatrixXd::Identity(x.cols(), x.cols()) - v * v.transpose());
  } else {
    out.transform = v * inv_scale.asDiagonal() * v.transpose();
  }
  out.whitened = centered * out.transform;
  return out;
}

} // namespace ssmlab
