#include "infoloc/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "infoloc/errors.hpp"
#include "infoloc/tolerances.hpp"

namespace infoloc {

double shannon_entropy(std::span<const double> probabilities) {
  double h = 0.0;
  for (double p : probabilities) {
    if (p <= tol::log_clamp) continue;
    const double q = std::min(p, 1.0);
    h -= q * std::log2(q);
  }
  return h;
}

double binary_entropy(double p) {
  const double probs[2] = {p, 1.0 - p};
  return shannon_entropy(probs);
}

double von_neumann_entropy(const ComplexMatrix& rho) {
  const auto eigs = hermitian_eigenvalues(rho);
  return shannon_entropy(eigs);
}

double von_neumann_entropy(const DensityOperator& rho) { return von_neumann_entropy(rho.matrix()); }

double information(const DensityOperator& rho) { return rho.num_bits() - von_neumann_entropy(rho); }

double min_entropy(const ComplexMatrix& rho) {
  const double top = std::clamp(hermitian_eigenvalues(rho).front(), tol::log_clamp, 1.0);
  return -std::log2(top);
}

double min_entropy(const DensityOperator& rho) { return min_entropy(rho.matrix()); }

std::vector<double> basis_probabilities(const ComplexMatrix& rho, const ComplexMatrix& basis) {
  if (rho.dim() != basis.dim()) throw DimensionError("basis dimension does not match state");
  const int d = rho.dim();
  std::vector<double> probs(d);
  ComplexVector tmp(d);
  for (int k = 0; k < d; ++k) {
    for (int i = 0; i < d; ++i) {
      Complex acc = 0.0;
      for (int j = 0; j < d; ++j) acc += rho(i, j) * basis(j, k);
      tmp[i] = acc;
    }
    Complex p = 0.0;
    for (int i = 0; i < d; ++i) p += std::conj(basis(i, k)) * tmp[i];
    probs[k] = p.real();
  }
  return probs;
}

double shannon_entropy_in_basis(const ComplexMatrix& rho, const ComplexMatrix& basis) {
  require_unitary(basis, tol::unitary, "basis");
  return shannon_entropy(basis_probabilities(rho, basis));
}

double shannon_entropy_in_basis(const DensityOperator& rho, const ComplexMatrix& basis) {
  return shannon_entropy_in_basis(rho.matrix(), basis);
}

double relative_entropy(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw DimensionError("relative_entropy: dimension mismatch");
  const auto sig = hermitian_eig(sigma);
  const auto weights = basis_probabilities(rho, sig.eigenvectors);
  double cross = 0.0;  // -Tr rho log sigma
  for (int k = 0; k < rho.dim(); ++k) {
    if (sig.eigenvalues[k] < tol::support_sigma) {
      if (weights[k] > tol::support_rho) return std::numeric_limits<double>::infinity();
      continue;
    }
    if (weights[k] <= 0.0) continue;
    cross -= weights[k] * std::log2(std::min(sig.eigenvalues[k], 1.0));
  }
  return cross - von_neumann_entropy(rho);
}

double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma) {
  return relative_entropy(rho.matrix(), sigma.matrix());
}

ComplexVector dominant_vector(const ComplexMatrix& rho) {
  const auto eig = hermitian_eig(rho);
  ComplexVector v = eig.eigenvectors.column(0);
  std::size_t big = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[big]) + 1e-12) big = i;
  const Complex phase = std::conj(v[big]) / std::abs(v[big]);
  for (auto& x : v) x *= phase;
  return v;
}

std::vector<double> schmidt_coefficients(std::span<const Complex> vec, int dim_a, int dim_b) {
  if (static_cast<int>(vec.size()) != dim_a * dim_b) throw DimensionError("schmidt_coefficients: size mismatch");
  // reduced operator on the first factor: M M^dag with M[i][j] = vec[i*dim_b + j]
  ComplexMatrix red(dim_a);
  for (int i = 0; i < dim_a; ++i)
    for (int k = 0; k < dim_a; ++k) {
      Complex acc = 0.0;
      for (int j = 0; j < dim_b; ++j) acc += vec[i * dim_b + j] * std::conj(vec[k * dim_b + j]);
      red(i, k) = acc;
    }
  auto eigs = hermitian_eigenvalues(red);
  const int r = std::min(dim_a, dim_b);
  std::vector<double> coeffs(r);
  for (int k = 0; k < r; ++k) coeffs[k] = std::sqrt(std::max(eigs[k], 0.0));
  return coeffs;
}

namespace {

// Completes the first `count` orthonormal columns of `m` to a unitary by
// Gram-Schmidt over the standard basis.
void complete_basis(ComplexMatrix& m, int count) {
  const int d = m.dim();
  int filled = count;
  for (int e = 0; e < d && filled < d; ++e) {
    ComplexVector v(d);
    v[e] = 1.0;
    for (int c = 0; c < filled; ++c) {
      const ComplexVector q = m.column(c);
      const Complex proj = inner(q, v);
      for (int i = 0; i < d; ++i) v[i] -= proj * q[i];
    }
    const double n = norm(v);
    if (n < 1e-6) continue;
    for (auto& x : v) x /= n;
    m.set_column(filled++, v);
  }
}

}  // namespace

double SchmidtForm::entanglement_entropy() const {
  std::vector<double> sq;
  for (double c : coefficients) sq.push_back(c * c);
  return shannon_entropy(sq);
}

ComplexVector SchmidtForm::reconstruct() const {
  ComplexVector psi(static_cast<std::size_t>(alice_dim) * bob_dim);
  for (std::size_t k = 0; k < coefficients.size(); ++k) {
    const auto a = alice_basis.column(static_cast<int>(k));
    const auto b = bob_basis.column(static_cast<int>(k));
    const auto ab = tensor(a, b);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] += coefficients[k] * ab[i];
  }
  return psi;
}

SchmidtForm schmidt(const DensityOperator& psi) {
  const auto occupied = psi.split().occupied_parties();
  if (occupied.size() != 2) throw ValidationError("schmidt: state must have exactly two parties");
  const double purity = (psi.matrix() * psi.matrix()).trace().real();
  if (std::abs(purity - 1.0) > tol::pure)
    throw ValidationError("schmidt: state is not pure", {{"purity", purity, "expected 1"}});

  const auto grouped = group_by_party(psi);
  const int da = grouped.split().party_dim(occupied[0]);
  const int db = grouped.split().party_dim(occupied[1]);
  const ComplexVector vec = dominant_vector(grouped.matrix());

  ComplexMatrix red(da);
  for (int i = 0; i < da; ++i)
    for (int k = 0; k < da; ++k) {
      Complex acc = 0.0;
      for (int j = 0; j < db; ++j) acc += vec[i * db + j] * std::conj(vec[k * db + j]);
      red(i, k) = acc;
    }
  const auto eig = hermitian_eig(red);

  SchmidtForm out;
  out.alice_dim = da;
  out.bob_dim = db;
  out.alice_basis = eig.eigenvectors;
  out.bob_basis = ComplexMatrix(db);
  const int r = std::min(da, db);
  int nonzero = 0;
  for (int k = 0; k < r; ++k) {
    const double c = std::sqrt(std::max(eig.eigenvalues[k], 0.0));
    out.coefficients.push_back(c);
    if (c < 1e-7) continue;
    // b_k = (a_k^dag ⊗ I) psi / c_k
    ComplexVector b(db);
    for (int j = 0; j < db; ++j) {
      Complex acc = 0.0;
      for (int i = 0; i < da; ++i) acc += std::conj(eig.eigenvectors(i, k)) * vec[i * db + j];
      b[j] = acc / c;
    }
    const double n = norm(b);
    for (auto& x : b) x /= n;
    out.bob_basis.set_column(nonzero++, b);
  }
  complete_basis(out.bob_basis, nonzero);
  return out;
}

double overlap_fidelity(const DensityOperator& rho, const ComplexMatrix& projector) {
  if (projector.dim() != rho.dim()) throw DimensionError("overlap_fidelity: dimension mismatch");
  const double defect = std::max(max_abs_diff(projector * projector, projector), hermiticity_defect(projector).deviation);
  if (defect > tol::projector) throw ValidationError("overlap_fidelity: target is not a projector", {{"projector", defect, ""}});
  const double f = (projector * rho.matrix()).trace().real();
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace infoloc
