#pragma once

// Initialization schemes for the state vector, read-out and timescale.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "ssmlab/common.hpp"
#include "ssmlab/ssm.hpp"

namespace ssmlab {

enum class Scheme { S4DLin, S4DReal, Custom };

struct InitSpec {
  Scheme scheme = Scheme::S4DLin;
  Index m = 1;
  double real_part = -0.5;
  double zero_real_fraction = 0.0;  // p: fraction of nodes whose real part is reset to 0
  double imag_scale = 1.0;
  std::uint64_t seed = 0;
  Eigen::VectorXd custom_real, custom_imag;  // nodes for Scheme::Custom

  void validate() const {
    require(m >= 1, "InitSpec: m must be >= 1");
    require(zero_real_fraction >= 0.0 && zero_real_fraction <= 1.0, "InitSpec: p must be in [0,1]");
    require(imag_scale > 0.0, "InitSpec: imag_scale must be > 0");
    if (scheme == Scheme::Custom) {
      require(custom_real.size() == m && custom_imag.size() == m,
              "InitSpec: custom nodes must have length m");
    }
  }
};

/// S4D-Lin: w_j = real_part + i*imag_scale*pi*j; S4D-Real: w_j = -j. A seeded
/// uniform subset of ceil(p*m) indices then has its real part set to zero.
inline StateVector make_state_vector(const InitSpec& spec) {
  spec.validate();
  StateVector w;
  w.real.resize(spec.m);
  w.imag.resize(spec.m);
  switch (spec.scheme) {
    case Scheme::S4DLin:
      for (Index j = 0; j < spec.m; ++j) {
        w.real[j] = spec.real_part;
        w.imag[j] = spec.imag_scale * std::numbers::pi * static_cast<double>(j + 1);
      }
      break;
    case Scheme::S4DReal:
      for (Index j = 0; j < spec.m; ++j) {
        w.real[j] = -static_cast<double>(j + 1);
        w.imag[j] = 0.0;
      }
      break;
    case Scheme::Custom:
      w.real = spec.custom_real;
      w.imag = spec.custom_imag;
      break;
  }
  const Index n_zero = static_cast<Index>(
      std::ceil(spec.zero_real_fraction * static_cast<double>(spec.m)));
  if (n_zero > 0) {
    // Partial Fisher-Yates: the first n_zero entries of a shuffled index
    // vector form a uniform subset without replacement.
    std::vector<Index> idx(spec.m);
    for (Index j = 0; j < spec.m; ++j) idx[j] = j;
    auto rng = make_rng(spec.seed);
    for (Index j = 0; j < n_zero; ++j) {
      std::uniform_int_distribution<Index> pick(j, spec.m - 1);
      std::swap(idx[j], idx[pick(rng)]);
    }
    for (Index j = 0; j < n_zero; ++j) w.real[idx[j]] = 0.0;
  }
  return w;
}

/// Read-out with Re(c_j), Im(c_j) iid standard normal.
inline Eigen::VectorXcd make_readout(Index m, std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXcd c(m);
  for (Index j = 0; j < m; ++j) {
    const double re = normal(rng);
    const double im = normal(rng);
    c[j] = Complex(re, im);
  }
  return c;
}

inline SsmModel make_model(const InitSpec& spec, double delta) {
  SsmModel model;
  model.w = make_state_vector(spec);
  model.c = make_readout(spec.m, mix_seed(spec.seed, 0x7265616421ULL));
  model.delta = delta;
  model.validate();
  return model;
}

/// Data-dependent timescale c0 / sqrt(L * lambda_max).
inline double timescale_from_data(Index length, double lambda_max, double c0 = 1.0) {
  require(length >= 1, "timescale_from_data: L must be >= 1");
  require(lambda_max > 0.0, "timescale_from_data: lambda_max must be > 0");
  require(c0 > 0.0, "timescale_from_data: c0 must be > 0");
  return c0 / std::sqrt(static_cast<double>(length) * lambda_max);
}

/// Resolved sampling interval [delta_min, delta_max] for per-channel
/// timescales; draws are uniform over the interval.
struct TimescaleRule {
  enum class Mode { FixedConstant, PowerLaw, DataDependent };
  Mode mode = Mode::FixedConstant;
  double delta_min = 0.1;
  double delta_max = 0.1;

  void validate() const {
    require(delta_min > 0.0 && delta_min <= delta_max,
            "TimescaleRule: need 0 < delta_min <= delta_max");
  }

  static TimescaleRule fixed(double delta) { return {Mode::FixedConstant, delta, delta}; }

  /// delta_min = L^{-alpha} with a cap delta_max (the experiment convention).
  static TimescaleRule power_law(double alpha, Index length, double delta_max) {
    const double lo = std::pow(static_cast<double>(length), -alpha);
    return {Mode::PowerLaw, lo, std::max(lo, delta_max)};
  }

  static TimescaleRule data_dependent(Index length, double lambda_max, double c0 = 1.0) {
    const double d = timescale_from_data(length, lambda_max, c0);
    return {Mode::DataDependent, d, d};
  }

  static TimescaleRule uniform(double lo, double hi) {
    return {Mode::FixedConstant, lo, hi};
  }
};

inline Eigen::VectorXd sample_timescales(const TimescaleRule& rule, Index count,
                                         std::uint64_t seed) {
  rule.validate();
  require(count >= 1, "sample_timescales: count must be >= 1");
  Eigen::VectorXd out(count);
  if (rule.delta_min == rule.delta_max) {
    out.setConstant(rule.delta_min);
    return out;
  }
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> uniform(rule.delta_min, rule.delta_max);
  for (Index i = 0; i < count; ++i) out[i] = uniform(rng);
  return out;
}

} // namespace ssmlab
