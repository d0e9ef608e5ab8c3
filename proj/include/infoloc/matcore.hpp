#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace infoloc {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Dense square complex matrix, row-major.
///
/// Tensor factors are ordered with the first factor as the slowest-varying
/// index: for A (dim a) and B (dim b), row (i_A, i_B) of A ⊗ B is i_A * b + i_B.
/// Every operation in the library that speaks about "factors" uses this order.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  explicit ComplexMatrix(int dim);
  ComplexMatrix(int dim, std::vector<Complex> entries);

  static ComplexMatrix identity(int dim);
  static ComplexMatrix diagonal(std::span<const double> values);
  static ComplexMatrix outer(std::span<const Complex> ket);  // |v><v|

  int dim() const noexcept { return dim_; }

  Complex& operator()(int row, int col) noexcept { return data_[static_cast<std::size_t>(row) * dim_ + col]; }
  const Complex& operator()(int row, int col) const noexcept {
    return data_[static_cast<std::size_t>(row) * dim_ + col];
  }

  std::span<const Complex> entries() const noexcept { return data_; }
  std::span<Complex> entries() noexcept { return data_; }

  ComplexVector column(int col) const;
  void set_column(int col, std::span<const Complex> values);

  ComplexMatrix adjoint() const;
  Complex trace() const;

  ComplexMatrix& operator+=(const ComplexMatrix& other);
  ComplexMatrix& operator-=(const ComplexMatrix& other);
  ComplexMatrix& operator*=(Complex scale);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  int dim_ = 0;
  std::vector<Complex> data_;
};

ComplexVector operator*(const ComplexMatrix& m, std::span<const Complex> v);
Complex inner(std::span<const Complex> a, std::span<const Complex> b);  // <a|b>
double norm(std::span<const Complex> v);

/// max_ij |a_ij - b_ij|
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

/// max_ij |m_ij - conj(m_ji)| together with the offending position.
struct HermiticityDefect {
  double deviation = 0.0;
  int row = 0;
  int col = 0;
};
HermiticityDefect hermiticity_defect(const ComplexMatrix& m);

/// max-entry distance of U†U from the identity.
double unitarity_defect(const ComplexMatrix& u);

/// Throws ValidationError naming the worst entry if |m - m†| exceeds tol.
void require_hermitian(const ComplexMatrix& m, double tol);
/// Throws ValidationError if U†U deviates from identity by more than tol.
void require_unitary(const ComplexMatrix& u, double tol, const char* what = "unitary");

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // descending
  ComplexMatrix eigenvectors;       // column i pairs with eigenvalues[i]
  int sweeps = 0;
};

/// Cyclic complex Jacobi. Deterministic: fixed (p, q) sweep order, no pivoting
/// randomness. Throws ValidationError for non-Hermitian input.
EigenDecomposition hermitian_eig(const ComplexMatrix& m);

/// Eigenvalues only (same algorithm, same order).
std::vector<double> hermitian_eigenvalues(const ComplexMatrix& m);

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector tensor(std::span<const Complex> a, std::span<const Complex> b);

/// Reduced operator on the factors listed in `keep` (kept in original order).
ComplexMatrix partial_trace(const ComplexMatrix& m, std::span<const int> factor_dims,
                            std::span<const int> keep);

/// Reorders tensor factors: factor order[k] of the input becomes factor k of the output.
ComplexMatrix permute_factors(const ComplexMatrix& m, std::span<const int> factor_dims,
                              std::span<const int> order);

/// Full-space operator that acts as `op` on `targets` (in the listed order) and
/// as identity elsewhere.
ComplexMatrix embed_operator(const ComplexMatrix& op, std::span<const int> factor_dims,
                             std::span<const int> targets);

/// exp(i H) for Hermitian H.
ComplexMatrix expi_hermitian(const ComplexMatrix& h);

/// Hermitian matrix from d*d real parameters: first d are the diagonal, then
/// (re, im) of each strictly upper entry in row-major order.
ComplexMatrix hermitian_from_params(int dim, std::span<const double> params);

/// Haar-style unitary: modified Gram-Schmidt on a seeded complex Gaussian matrix.
ComplexMatrix random_unitary(int dim, std::uint64_t seed);

/// U diag(p) U† with p a seeded probability vector with exactly `rank` nonzeros.
ComplexMatrix random_density(int dim, int rank, std::uint64_t seed);

/// Seeded random Hermitian matrix with entries of order one.
ComplexMatrix random_hermitian(int dim, std::uint64_t seed);

int product(std::span<const int> dims);

}  // namespace infoloc
