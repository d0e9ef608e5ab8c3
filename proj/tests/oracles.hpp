#pragma once

// Reference implementations used only by the tests. They share no code with
// the library: Eigen for linear algebra, plain loops for everything else.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "infoloc/matcore.hpp"

namespace oracle {

using Mat = Eigen::MatrixXcd;

inline Mat to_eigen(const infoloc::ComplexMatrix& m) {
  Mat out(m.dim(), m.dim());
  for (int i = 0; i < m.dim(); ++i)
    for (int j = 0; j < m.dim(); ++j) out(i, j) = m(i, j);
  return out;
}

inline infoloc::ComplexMatrix from_eigen(const Mat& m) {
  infoloc::ComplexMatrix out(static_cast<int>(m.rows()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

// descending
inline std::vector<double> eigenvalues(const infoloc::ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(to_eigen(m), Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.rbegin(), v.rend());
  return v;
}

inline double entropy_of(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x > 1e-15) h -= x * std::log2(x);
  return h;
}

inline double vn_entropy(const infoloc::ComplexMatrix& m) {
  auto ev = eigenvalues(m);
  for (auto& x : ev) x = std::clamp(x, 0.0, 1.0);
  return entropy_of(ev);
}

inline double h2(double p) { return entropy_of({p, 1.0 - p}); }

// log2 via Eigen's eigendecomposition, for S(rho||sigma) with full-rank sigma.
inline double relative_entropy(const infoloc::ComplexMatrix& rho, const infoloc::ComplexMatrix& sigma) {
  auto log2m = [](const Mat& a) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    Eigen::VectorXcd l(es.eigenvalues().size());
    for (int i = 0; i < l.size(); ++i) {
      const double x = es.eigenvalues()(i);
      l(i) = x > 1e-300 ? std::log2(x) : 0.0;
    }
    return Mat(es.eigenvectors() * l.asDiagonal() * es.eigenvectors().adjoint());
  };
  const Mat r = to_eigen(rho);
  return (r * (log2m(r) - log2m(to_eigen(sigma)))).trace().real();
}

// Partial trace by explicit multi-index loops.
inline infoloc::ComplexMatrix partial_trace(const infoloc::ComplexMatrix& m, const std::vector<int>& dims,
                                            const std::vector<int>& keep) {
  const int n = static_cast<int>(dims.size());
  int dk = 1;
  for (int k : keep) dk *= dims[k];
  infoloc::ComplexMatrix out(dk);
  const int total = m.dim();
  auto digits = [&](int idx) {
    std::vector<int> d(n);
    for (int f = n - 1; f >= 0; --f) {
      d[f] = idx % dims[f];
      idx /= dims[f];
    }
    return d;
  };
  for (int r = 0; r < total; ++r) {
    const auto dr = digits(r);
    for (int c = 0; c < total; ++c) {
      const auto dc = digits(c);
      bool traced_equal = true;
      for (int f = 0; f < n && traced_equal; ++f)
        if (std::find(keep.begin(), keep.end(), f) == keep.end() && dr[f] != dc[f]) traced_equal = false;
      if (!traced_equal) continue;
      int rk = 0, ck = 0;
      for (int k : keep) {
        rk = rk * dims[k] + dr[k];
        ck = ck * dims[k] + dc[k];
      }
      out(rk, ck) += m(r, c);
    }
  }
  return out;
}

// Kronecker product via Eigen.
inline infoloc::ComplexMatrix kron(const infoloc::ComplexMatrix& a, const infoloc::ComplexMatrix& b) {
  const Mat ea = to_eigen(a), eb = to_eigen(b);
  Mat out(ea.rows() * eb.rows(), ea.cols() * eb.cols());
  for (int i = 0; i < ea.rows(); ++i)
    for (int j = 0; j < ea.cols(); ++j) out.block(i * eb.rows(), j * eb.cols(), eb.rows(), eb.cols()) = ea(i, j) * eb;
  return from_eigen(out);
}

// Sum of the floor(2^bits) largest probabilities among all d^n strings.
inline double brute_typical_fidelity(const std::vector<double>& p, int n, double bits) {
  std::vector<double> probs{1.0};
  for (int k = 0; k < n; ++k) {
    std::vector<double> next;
    next.reserve(probs.size() * p.size());
    for (double a : probs)
      for (double b : p) next.push_back(a * b);
    probs = std::move(next);
  }
  std::sort(probs.rbegin(), probs.rend());
  const double x = std::exp2(bits), nearest = std::round(x);
  const double keep = std::abs(x - nearest) <= 1e-9 * nearest ? nearest : std::floor(x);
  const auto count = static_cast<std::size_t>(std::min<double>(keep, static_cast<double>(probs.size())));
  long double total = 0.0L;
  for (std::size_t i = 0; i < count; ++i) total += probs[i];
  return static_cast<double>(total);
}

}  // namespace oracle
