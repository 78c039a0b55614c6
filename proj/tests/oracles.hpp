#pragma once

// Test-only oracles, kept independent of the library's computation paths:
// extended-precision term-wise kernel evaluation, the naive state recurrence,
// adaptive quadrature, partial sums and the closed-form Cauchy inverse.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "ssmlab/ssm.hpp"

namespace oracles {

using LComplex = std::complex<long double>;

// Eq-for-eq evaluation of the discrete kernel in long double, with a fresh
// exponential per (j, l) instead of iterated multiplication.
inline Eigen::VectorXd kernel_term_by_term(const ssmlab::SsmModel& model, Eigen::Index length) {
  const Eigen::Index m = model.state_size();
  Eigen::VectorXd out(length);
  for (Eigen::Index l = 0; l < length; ++l) {
    long double acc = 0.0L;
    for (Eigen::Index j = 0; j < m; ++j) {
      const LComplex w(model.w.real[j], model.w.imag[j]);
      const LComplex c(model.c[j].real(), model.c[j].imag());
      const long double d = model.delta;
      LComplex ratio;
      if (std::abs(w) < 1e-14L) {
        ratio = LComplex(d, 0.0L);
      } else {
        ratio = (std::exp(d * w) - LComplex(1.0L)) / w;
      }
      acc += (ratio * c * std::exp(d * w * static_cast<long double>(l))).real();
    }
    out[l] = static_cast<double>(acc);
  }
  return out;
}

inline Eigen::VectorXd continuous_kernel_term_by_term(const ssmlab::StateVector& w,
                                                      const Eigen::VectorXd& c,
                                                      const Eigen::VectorXd& s_grid) {
  Eigen::VectorXd out(s_grid.size());
  for (Eigen::Index i = 0; i < s_grid.size(); ++i) {
    long double acc = 0.0L;
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      const long double s = s_grid[i];
      acc += static_cast<long double>(c[j]) * std::exp(static_cast<long double>(w.real[j]) * s) *
             std::cos(static_cast<long double>(w.imag[j]) * s);
    }
    out[i] = static_cast<double>(acc);
  }
  return out;
}

// Naive O(Lm) recurrence h_{k+1} = e^{dw} h_k + ((e^{dw}-1)/w) x_k,
// y_k = Re(c^T h_k), as the independent forward-pass route.
inline Eigen::VectorXd recurrence_forward(const ssmlab::SsmModel& model,
                                          const Eigen::VectorXd& x) {
  const Eigen::Index m = model.state_size();
  const Eigen::Index length = x.size();
  std::vector<LComplex> lam(m), ratio(m), h(m, LComplex(0.0L));
  for (Eigen::Index j = 0; j < m; ++j) {
    const LComplex w(model.w.real[j], model.w.imag[j]);
    const long double d = model.delta;
    lam[j] = std::exp(d * w);
    ratio[j] = std::abs(w) < 1e-14L ? LComplex(d, 0.0L) : (std::exp(d * w) - LComplex(1.0L)) / w;
  }
  Eigen::VectorXd y(length);
  for (Eigen::Index k = 0; k < length; ++k) {
    long double acc = 0.0L;
    for (Eigen::Index j = 0; j < m; ++j) {
      h[j] = lam[j] * h[j] + ratio[j] * static_cast<long double>(x[k]);
      const LComplex c(model.c[j].real(), model.c[j].imag());
      acc += (c * h[j]).real();
    }
    y[k] = static_cast<double>(acc);
  }
  return y;
}

// Adaptive Simpson quadrature.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-11, int depth = 30) {
  const double c = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fc = f(c);
  std::function<double(double, double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fhi, double fmid, double whole, double eps,
          int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (d <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
      return left + right + (left + right - whole) / 15.0;
    }
    return rec(lo, mid, flo, fmid, flm, left, eps / 2.0, d - 1) +
           rec(mid, hi, fmid, fhi, frm, right, eps / 2.0, d - 1);
  };
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
  return rec(a, b, fa, fb, fc, whole, tol, depth);
}

// int_0^inf e^{-s} cos(vj s) cos(vk s) ds by quadrature on [0, 30]
// (e^{-30} < 1e-12). The integrand oscillates at |vj -+ vk|, and a single
// adaptive pass can terminate early when whole oscillations cancel, so the
// domain is pre-split into panels no wider than a quarter period.
inline double cosine_integral_quadrature(double vj, double vk) {
  const auto f = [=](double s) { return std::exp(-s) * std::cos(vj * s) * std::cos(vk * s); };
  const double max_freq = std::max(std::abs(vj - vk), std::abs(vj + vk));
  const double width = std::min(1.0, 1.5 / std::max(max_freq, 1.0));
  const int panels = static_cast<int>(std::ceil(30.0 / width));
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = 30.0 * double(p) / double(panels);
    const double hi = 30.0 * double(p + 1) / double(panels);
    acc += adaptive_simpson(f, lo, hi, 1e-12);
  }
  return acc;
}

// Partial sum of 1/(n^2+t^2) to n_terms plus a midpoint-rule tail integral.
inline double basel_partial_sum(double t, long n_terms = 1000000) {
  long double acc = 0.0L;
  const long double t2 = static_cast<long double>(t) * static_cast<long double>(t);
  for (long n = n_terms; n >= 1; --n) {
    const long double nn = static_cast<long double>(n);
    acc += 1.0L / (nn * nn + t2);
  }
  const long double edge = static_cast<long double>(n_terms) + 0.5L;
  const long double at = std::abs(static_cast<long double>(t));
  long double tail;
  if (at > 0.0L) {
    tail = (std::atan(edge / at) * (-1.0L) + 3.14159265358979323846264338327950288L / 2.0L) / at;
  } else {
    tail = 1.0L / edge;
  }
  return static_cast<double>(acc + tail);
}

// Closed-form inverse of the Cauchy matrix C_{ij} = 1/(x_i + x_j) (symmetric
// case). Used to cross-check condition numbers of Hilbert-type Gram matrices
// where double-precision eigensolves of C itself lose the smallest eigenvalue.
inline Eigen::MatrixXd cauchy_inverse(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd inv(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      // B_ij = prod_k (x_j + x_k)(x_k + x_i)
      //        / ((x_i + x_j) prod_{k!=j} (x_j - x_k) prod_{k!=i} (x_i - x_k))
      long double num = 1.0L;
      for (Eigen::Index k = 0; k < n; ++k) {
        num *= (static_cast<long double>(x[j]) + static_cast<long double>(x[k])) *
               (static_cast<long double>(x[k]) + static_cast<long double>(x[i]));
      }
      long double den = static_cast<long double>(x[i]) + static_cast<long double>(x[j]);
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k != j) den *= static_cast<long double>(x[j]) - static_cast<long double>(x[k]);
        if (k != i) den *= static_cast<long double>(x[i]) - static_cast<long double>(x[k]);
      }
      inv(i, j) = static_cast<double>(num / den);
    }
  }
  return inv;
}

// Exhaustive max-min-gap subset search for small candidate sets.
inline double best_min_gap_bruteforce(const std::vector<double>& sorted, Eigen::Index m) {
  const Eigen::Index n = static_cast<Eigen::Index>(sorted.size());
  std::vector<Eigen::Index> pick(m);
  double best = -1.0;
  std::function<void(Eigen::Index, Eigen::Index)> rec = [&](Eigen::Index start, Eigen::Index got) {
    if (got == m) {
      double gap = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 1; i < m; ++i) {
        gap = std::min(gap, sorted[pick[i]] - sorted[pick[i - 1]]);
      }
      best = std::max(best, gap);
      return;
    }
    for (Eigen::Index i = start; i + (m - got) <= n; ++i) {
      pick[got] = i;
      rec(i + 1, got + 1);
    }
  };
  rec(0, 0);
  return best;
}

} // namespace oracles
