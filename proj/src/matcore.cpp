#include "infoloc/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "infoloc/errors.hpp"
#include "infoloc/tolerances.hpp"

namespace infoloc {

ComplexMatrix::ComplexMatrix(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim) {
  if (dim <= 0) throw DimensionError("matrix dimension must be positive");
}

ComplexMatrix::ComplexMatrix(int dim, std::vector<Complex> entries) : dim_(dim), data_(std::move(entries)) {
  if (dim <= 0) throw DimensionError("matrix dimension must be positive");
  if (data_.size() != static_cast<std::size_t>(dim) * dim) {
    throw DimensionError("entry count " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(dim) + "x" + std::to_string(dim));
  }
}

ComplexMatrix ComplexMatrix::identity(int dim) {
  ComplexMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(static_cast<int>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = values[i];
  return m;
}

ComplexMatrix ComplexMatrix::outer(std::span<const Complex> ket) {
  const int d = static_cast<int>(ket.size());
  ComplexMatrix m(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = ket[i] * std::conj(ket[j]);
  return m;
}

ComplexVector ComplexMatrix::column(int col) const {
  ComplexVector v(dim_);
  for (int i = 0; i < dim_; ++i) v[i] = (*this)(i, col);
  return v;
}

void ComplexMatrix::set_column(int col, std::span<const Complex> values) {
  if (static_cast<int>(values.size()) != dim_) throw DimensionError("column length mismatch");
  for (int i = 0; i < dim_; ++i) (*this)(i, col) = values[i];
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

Complex ComplexMatrix::trace() const {
  Complex t = 0.0;
  for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& other) {
  if (other.dim_ != dim_) throw DimensionError("matrix sum: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& other) {
  if (other.dim_ != dim_) throw DimensionError("matrix difference: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex scale) {
  for (auto& x : data_) x *= scale;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim_ != b.dim_) throw DimensionError("matrix product: dimension mismatch");
  const int d = a.dim_;
  ComplexMatrix out(d);
  for (int i = 0; i < d; ++i) {
    for (int k = 0; k < d; ++k) {
      const Complex aik = a(i, k);
      if (aik == Complex{}) continue;
      for (int j = 0; j < d; ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

ComplexVector operator*(const ComplexMatrix& m, std::span<const Complex> v) {
  if (static_cast<int>(v.size()) != m.dim()) throw DimensionError("matrix-vector product: dimension mismatch");
  ComplexVector out(v.size());
  for (int i = 0; i < m.dim(); ++i) {
    Complex acc = 0.0;
    for (int j = 0; j < m.dim(); ++j) acc += m(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) throw DimensionError("inner product: length mismatch");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
  return acc;
}

double norm(std::span<const Complex> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return std::sqrt(acc);
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) throw DimensionError("max_abs_diff: dimension mismatch");
  double worst = 0.0;
  auto ea = a.entries();
  auto eb = b.entries();
  for (std::size_t k = 0; k < ea.size(); ++k) worst = std::max(worst, std::abs(ea[k] - eb[k]));
  return worst;
}

HermiticityDefect hermiticity_defect(const ComplexMatrix& m) {
  HermiticityDefect defect;
  for (int i = 0; i < m.dim(); ++i) {
    for (int j = i; j < m.dim(); ++j) {
      const double dev = std::abs(m(i, j) - std::conj(m(j, i)));
      if (dev > defect.deviation) defect = {dev, i, j};
    }
  }
  return defect;
}

double unitarity_defect(const ComplexMatrix& u) {
  return max_abs_diff(u.adjoint() * u, ComplexMatrix::identity(u.dim()));
}

void require_hermitian(const ComplexMatrix& m, double tol) {
  const auto defect = hermiticity_defect(m);
  if (defect.deviation > tol) {
    std::ostringstream msg;
    msg << "matrix is not Hermitian: |M[" << defect.row << "][" << defect.col << "] - conj(M[" << defect.col
        << "][" << defect.row << "])| = " << defect.deviation;
    throw ValidationError(msg.str(), {{"hermitian", defect.deviation,
                                       "entry (" + std::to_string(defect.row) + "," +
                                           std::to_string(defect.col) + ")"}});
  }
}

void require_unitary(const ComplexMatrix& u, double tol, const char* what) {
  const double dev = unitarity_defect(u);
  if (dev > tol) {
    std::ostringstream msg;
    msg << what << " is not unitary: max|U^dag U - I| = " << dev;
    throw ValidationError(msg.str(), {{"unitary", dev, what}});
  }
}

namespace {

double offdiag_mass(const ComplexMatrix& a) {
  double acc = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      if (i != j) acc += std::norm(a(i, j));
  return std::sqrt(acc);
}

double frobenius(const ComplexMatrix& a) {
  double acc = 0.0;
  for (const auto& x : a.entries()) acc += std::norm(x);
  return std::sqrt(acc);
}

// Annihilates a(p,q) with G = diag(1, e^{-i phi}) * real rotation, A <- G^dag A G, V <- V G.
void jacobi_rotate(ComplexMatrix& a, ComplexMatrix& v, int p, int q) {
  const Complex apq = a(p, q);
  const double mag = std::abs(apq);
  if (mag == 0.0) return;
  const Complex phase = apq / mag;  // e^{i phi}
  const double app = a(p, p).real();
  const double aqq = a(q, q).real();
  const double theta = (aqq - app) / (2.0 * mag);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  const Complex gpp = c;
  const Complex gpq = s;
  const Complex gqp = -s * std::conj(phase);
  const Complex gqq = c * std::conj(phase);
  const int d = a.dim();

  for (int k = 0; k < d; ++k) {
    const Complex akp = a(k, p);
    const Complex akq = a(k, q);
    a(k, p) = akp * gpp + akq * gqp;
    a(k, q) = akp * gpq + akq * gqq;
  }
  for (int k = 0; k < d; ++k) {
    const Complex apk = a(p, k);
    const Complex aqk = a(q, k);
    a(p, k) = std::conj(gpp) * apk + std::conj(gqp) * aqk;
    a(q, k) = std::conj(gpq) * apk + std::conj(gqq) * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  a(p, p) = a(p, p).real();
  a(q, q) = a(q, q).real();

  for (int k = 0; k < d; ++k) {
    const Complex vkp = v(k, p);
    const Complex vkq = v(k, q);
    v(k, p) = vkp * gpp + vkq * gqp;
    v(k, q) = vkp * gpq + vkq * gqq;
  }
}

}  // namespace

EigenDecomposition hermitian_eig(const ComplexMatrix& m) {
  require_hermitian(m, tol::hermitian);
  const int d = m.dim();
  // symmetrize so that rounding in the input cannot leak anti-Hermitian parts
  ComplexMatrix a(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = 0.5 * (m(i, j) + std::conj(m(j, i)));
  ComplexMatrix v = ComplexMatrix::identity(d);

  const double scale = std::max(1.0, frobenius(a));
  int sweeps = 0;
  while (sweeps < tol::jacobi_max_sweeps && offdiag_mass(a) >= tol::jacobi_offdiag * scale) {
    for (int p = 0; p < d - 1; ++p)
      for (int q = p + 1; q < d; ++q) jacobi_rotate(a, v, p, q);
    ++sweeps;
  }

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x).real() > a(y, y).real(); });

  EigenDecomposition out{std::vector<double>(d), ComplexMatrix(d), sweeps};
  for (int k = 0; k < d; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]).real();
    for (int i = 0; i < d; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m) { return hermitian_eig(m).eigenvalues; }

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int da = a.dim();
  const int db = b.dim();
  ComplexMatrix out(da * db);
  for (int ia = 0; ia < da; ++ia)
    for (int ja = 0; ja < da; ++ja) {
      const Complex x = a(ia, ja);
      if (x == Complex{}) continue;
      for (int ib = 0; ib < db; ++ib)
        for (int jb = 0; jb < db; ++jb) out(ia * db + ib, ja * db + jb) = x * b(ib, jb);
    }
  return out;
}

ComplexVector tensor(std::span<const Complex> a, std::span<const Complex> b) {
  ComplexVector out(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
  return out;
}

int product(std::span<const int> dims) {
  int p = 1;
  for (int d : dims) p *= d;
  return p;
}

namespace {

void check_factors(const ComplexMatrix& m, std::span<const int> factor_dims) {
  for (int d : factor_dims)
    if (d <= 0) throw DimensionError("factor dimensions must be positive");
  if (product(factor_dims) != m.dim()) {
    throw DimensionError("product of factor dimensions (" + std::to_string(product(factor_dims)) +
                         ") does not match matrix dimension (" + std::to_string(m.dim()) + ")");
  }
}

void check_subset(std::span<const int> subset, std::size_t nfactors, const char* what) {
  std::vector<bool> seen(nfactors, false);
  for (int f : subset) {
    if (f < 0 || static_cast<std::size_t>(f) >= nfactors)
      throw DimensionError(std::string(what) + ": factor index " + std::to_string(f) + " out of range");
    if (seen[f]) throw DimensionError(std::string(what) + ": factor index " + std::to_string(f) + " repeated");
    seen[f] = true;
  }
}

// Splits each full index into (index over `group` factors in listed order, index over the rest).
struct IndexSplit {
  std::vector<int> group;
  std::vector<int> rest;
  int group_dim = 1;
  int rest_dim = 1;
};

IndexSplit split_indices(std::span<const int> factor_dims, std::span<const int> group) {
  const std::size_t n = factor_dims.size();
  std::vector<bool> in_group(n, false);
  for (int f : group) in_group[f] = true;
  IndexSplit s;
  for (int f : group) s.group_dim *= factor_dims[f];
  for (std::size_t f = 0; f < n; ++f)
    if (!in_group[f]) s.rest_dim *= factor_dims[f];
  const int total = product(factor_dims);
  s.group.resize(total);
  s.rest.resize(total);
  std::vector<int> digits(n);
  for (int idx = 0; idx < total; ++idx) {
    int r = idx;
    for (std::size_t f = n; f-- > 0;) {
      digits[f] = r % factor_dims[f];
      r /= factor_dims[f];
    }
    int g = 0;
    for (int f : group) g = g * factor_dims[f] + digits[f];
    int o = 0;
    for (std::size_t f = 0; f < n; ++f)
      if (!in_group[f]) o = o * factor_dims[f] + digits[f];
    s.group[idx] = g;
    s.rest[idx] = o;
  }
  return s;
}

}  // namespace

ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const int> factor_dims, std::span<const int> keep) {
  check_factors(m, factor_dims);
  if (keep.empty()) throw DimensionError("partial_trace: keep set is empty");
  check_subset(keep, factor_dims.size(), "partial_trace");
  std::vector<int> sorted_keep(keep.begin(), keep.end());
  std::sort(sorted_keep.begin(), sorted_keep.end());
  const auto split = split_indices(factor_dims, sorted_keep);

  std::vector<std::vector<int>> by_rest(split.rest_dim);
  for (int idx = 0; idx < m.dim(); ++idx) by_rest[split.rest[idx]].push_back(idx);

  ComplexMatrix out(split.group_dim);
  for (const auto& members : by_rest)
    for (int a : members)
      for (int b : members) out(split.group[a], split.group[b]) += m(a, b);
  return out;
}

ComplexMatrix permute_factors(const ComplexMatrix& m, std::span<const int> factor_dims, std::span<const int> order) {
  check_factors(m, factor_dims);
  if (order.size() != factor_dims.size()) throw DimensionError("permute_factors: order must list every factor");
  check_subset(order, factor_dims.size(), "permute_factors");
  // the "group" index over `order` is exactly the output index
  const auto split = split_indices(factor_dims, order);
  ComplexMatrix out(m.dim());
  for (int a = 0; a < m.dim(); ++a)
    for (int b = 0; b < m.dim(); ++b) out(split.group[a], split.group[b]) = m(a, b);
  return out;
}

ComplexMatrix embed_operator(const ComplexMatrix& op, std::span<const int> factor_dims, std::span<const int> targets) {
  check_subset(targets, factor_dims.size(), "embed_operator");
  const auto split = split_indices(factor_dims, targets);
  if (split.group_dim != op.dim()) {
    throw DimensionError("embed_operator: operator dimension " + std::to_string(op.dim()) +
                         " does not match target dimension " + std::to_string(split.group_dim));
  }
  const int total = product(factor_dims);
  ComplexMatrix out(total);
  for (int a = 0; a < total; ++a)
    for (int b = 0; b < total; ++b)
      if (split.rest[a] == split.rest[b]) out(a, b) = op(split.group[a], split.group[b]);
  return out;
}

ComplexMatrix expi_hermitian(const ComplexMatrix& h) {
  const auto eig = hermitian_eig(h);
  const int d = h.dim();
  ComplexMatrix out(d);
  std::vector<Complex> phases(d);
  for (int k = 0; k < d; ++k) phases[k] = std::polar(1.0, eig.eigenvalues[k]);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Complex acc = 0.0;
      for (int k = 0; k < d; ++k) acc += eig.eigenvectors(i, k) * phases[k] * std::conj(eig.eigenvectors(j, k));
      out(i, j) = acc;
    }
  return out;
}

ComplexMatrix hermitian_from_params(int dim, std::span<const double> params) {
  if (params.size() != static_cast<std::size_t>(dim) * dim)
    throw DimensionError("hermitian_from_params: expected dim*dim parameters");
  ComplexMatrix h(dim);
  std::size_t k = 0;
  for (int i = 0; i < dim; ++i) h(i, i) = params[k++];
  for (int i = 0; i < dim; ++i)
    for (int j = i + 1; j < dim; ++j) {
      const Complex z{params[k], params[k + 1]};
      k += 2;
      h(i, j) = z;
      h(j, i) = std::conj(z);
    }
  return h;
}

ComplexMatrix random_unitary(int dim, std::uint64_t seed) {
  if (dim <= 0) throw DimensionError("random_unitary: dimension must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix g(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(i, j) = Complex{re, im};
    }
  std::vector<ComplexVector> cols;
  for (int j = 0; j < dim; ++j) {
    ComplexVector v = g.column(j);
    for (const auto& q : cols) {
      const Complex proj = inner(q, v);
      for (int i = 0; i < dim; ++i) v[i] -= proj * q[i];
    }
    const double n = norm(v);
    for (auto& x : v) x /= n;
    cols.push_back(std::move(v));
  }
  ComplexMatrix u(dim);
  for (int j = 0; j < dim; ++j) u.set_column(j, cols[j]);
  return u;
}

ComplexMatrix random_density(int dim, int rank, std::uint64_t seed) {
  if (rank <= 0) throw ValidationError("random_density: rank must be at least 1", {{"rank", double(rank), ""}});
  if (rank > dim) throw ValidationError("random_density: rank exceeds dimension", {{"rank", double(rank), ""}});
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> p(dim, 0.0);
  double total = 0.0;
  for (int k = 0; k < rank; ++k) {
    p[k] = expo(rng) + 1e-3;
    total += p[k];
  }
  for (auto& x : p) x /= total;
  const ComplexMatrix u = random_unitary(dim, seed);
  ComplexMatrix rho(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      Complex acc = 0.0;
      for (int k = 0; k < rank; ++k) acc += u(i, k) * p[k] * std::conj(u(j, k));
      rho(i, j) = acc;
    }
  // exact Hermitian symmetry and unit trace
  for (int i = 0; i < dim; ++i) {
    rho(i, i) = rho(i, i).real();
    for (int j = i + 1; j < dim; ++j) rho(j, i) = std::conj(rho(i, j));
  }
  return rho;
}

ComplexMatrix random_hermitian(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexMatrix h(dim);
  for (int i = 0; i < dim; ++i) {
    h(i, i) = gauss(rng);
    for (int j = i + 1; j < dim; ++j) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      h(i, j) = Complex{re, im};
      h(j, i) = std::conj(h(i, j));
    }
  }
  return h;
}

}  // namespace infoloc
