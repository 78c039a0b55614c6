#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ssmlab/init.hpp"
#include "ssmlab/stability.hpp"

using namespace ssmlab;
using Catch::Approx;

TEST_CASE("theorem bound algebra", "[stability]") {
  for (Index length : {16, 64, 1024}) {
    REQUIRE(theorem1_bound(1.0 / std::sqrt(double(length)), 1, length, 1.0) == Approx(1.0));
    REQUIRE(theorem1_bound(1.0 / double(length), 1, length, double(length)) == Approx(1.0));
  }
  REQUIRE(theorem1_bound(0.1, 32, 128, 1.0) == Approx(1310.72));
  REQUIRE_THROWS_AS(theorem1_bound(0.0, 1, 1, 1.0), std::invalid_argument);
}

TEST_CASE("empirical magnitude closed form at w = 0", "[stability]") {
  const Index length = 64;
  StateVector w;
  w.real = Eigen::VectorXd::Zero(1);
  w.imag = Eigen::VectorXd::Zero(1);
  const double delta = 1.0 / std::sqrt(double(length));
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(length, length);
  const StabilityReport r = empirical_magnitude(w, delta, eye, 256, 256, 42);
  // All kernel coefficients equal delta * Re(c), so E[y_L^2] = delta^2 L.
  const double closed_form = delta * delta * double(length);
  REQUIRE(std::abs(r.empirical - closed_form) <= 3.0 * r.stderr_);
  REQUIRE(r.bound == Approx(closed_form));
  REQUIRE(r.empirical <= r.bound + 3.0 * r.stderr_);
  REQUIRE(r.n_samples == 256 * 256);
}

TEST_CASE("empirical magnitude of the zero process", "[stability]") {
  StateVector w;
  w.real = Eigen::VectorXd::Zero(2);
  w.imag = Eigen::Vector2d(1.0, 2.0);
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(16, 16);
  const StabilityReport r = empirical_magnitude(w, 0.1, zero, 32, 32, 1);
  // Sampling from K = 0 goes through the jitter path, so the draws are
  // O(1e-5) rather than exactly zero.
  REQUIRE(r.bound == 0.0);
  REQUIRE(r.empirical <= 1e-8);
}

TEST_CASE("bound hypothesis is enforced", "[stability]") {
  StateVector w;
  w.real = Eigen::VectorXd::Constant(1, 0.1);
  w.imag = Eigen::VectorXd::Zero(1);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(8, 8);
  REQUIRE_THROWS_AS(empirical_magnitude(w, 0.1, eye, 8, 8, 0), std::invalid_argument);
}

TEST_CASE("empirical magnitude scales exactly as delta^2 at w = 0", "[stability]") {
  StateVector w;
  w.real = Eigen::VectorXd::Zero(1);
  w.imag = Eigen::VectorXd::Zero(1);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(32, 32);
  const StabilityReport a = empirical_magnitude(w, 0.05, eye, 64, 64, 9);
  const StabilityReport b = empirical_magnitude(w, 0.10, eye, 64, 64, 9);
  REQUIRE(b.empirical / a.empirical == Approx(4.0).epsilon(1e-12));
}

TEST_CASE("bound dominance on a small grid", "[stability]") {
  InitSpec spec;
  spec.m = 4;
  for (double re : {0.0, -0.5}) {
    spec.real_part = re;
    const StateVector w = make_state_vector(spec);
    for (Index length : {64, 256}) {
      for (auto kind : {AutocovKind::IID, AutocovKind::OU}) {
        AutocovSpec aspec;
        aspec.kind = kind;
        aspec.length = length;
        const Eigen::MatrixXd k = build_autocov(aspec);
        for (double alpha : {0.5, 1.0}) {
          const double delta = std::pow(double(length), -alpha);
          const StabilityReport r =
              empirical_magnitude(w, delta, k, 128, 128, mix_seed(7, length));
          REQUIRE(r.empirical <= r.bound + 3.0 * r.stderr_);
        }
      }
    }
  }
}

TEST_CASE("zero real part growth depends on the delta power law", "[stability]") {
  // With exact K = I and Re(w) = 0, E[y_L^2] = L sum_j |(e^{i d v_j}-1)/v_j|^2:
  // delta = L^{-1/4} grows ~ sqrt(L), delta = L^{-3/4} shrinks ~ 1/sqrt(L).
  InitSpec spec;
  spec.m = 4;
  spec.real_part = 0.0;
  const StateVector w = make_state_vector(spec);
  auto magnitude_at = [&](double alpha, Index length) {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(length, length);
    const double delta = std::pow(double(length), -alpha);
    return empirical_magnitude(w, delta, eye, 64, 256, 1234).empirical;
  };
  const double grow = magnitude_at(0.25, 4096) / magnitude_at(0.25, 64);
  const double stay = magnitude_at(0.75, 4096) / magnitude_at(0.75, 64);
  REQUIRE(grow > 4.0);
  REQUIRE(stay < 2.0);
}

TEST_CASE("pooling mode", "[stability]") {
  InitSpec spec;
  spec.m = 3;
  const StateVector w = make_state_vector(spec);
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(48, 48);
  const StabilityReport pooled = empirical_magnitude(w, 0.1, eye, 48, 48, 3, true);
  REQUIRE(pooled.pooling);
  // The pooled magnitude obeys the same bound.
  REQUIRE(pooled.empirical <= pooled.bound + 3.0 * pooled.stderr_);
}
