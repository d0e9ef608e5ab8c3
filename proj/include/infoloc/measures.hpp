#pragma once

#include <span>
#include <vector>

#include "infoloc/matcore.hpp"
#include "infoloc/states.hpp"

namespace infoloc {

// All quantities are in bits (base-2 logarithms).

/// -sum p log2 p over a probability vector; entries below the clamp count as 0.
double shannon_entropy(std::span<const double> probabilities);

/// Binary entropy H2(p).
double binary_entropy(double p);

double von_neumann_entropy(const DensityOperator& rho);
double von_neumann_entropy(const ComplexMatrix& rho);

/// I = N - S.
double information(const DensityOperator& rho);

/// -log2 of the largest eigenvalue.
double min_entropy(const DensityOperator& rho);
double min_entropy(const ComplexMatrix& rho);

/// Diagonal <b_i|rho|b_i> for the columns of `basis`.
std::vector<double> basis_probabilities(const ComplexMatrix& rho, const ComplexMatrix& basis);

/// Shannon entropy of rho's diagonal in the orthonormal basis given by the
/// columns of `basis`. Throws ValidationError if `basis` is not unitary.
double shannon_entropy_in_basis(const DensityOperator& rho, const ComplexMatrix& basis);
double shannon_entropy_in_basis(const ComplexMatrix& rho, const ComplexMatrix& basis);

/// S(rho || sigma); +infinity when rho has weight outside sigma's support.
double relative_entropy(const DensityOperator& rho, const DensityOperator& sigma);
double relative_entropy(const ComplexMatrix& rho, const ComplexMatrix& sigma);

struct SchmidtForm {
  std::vector<double> coefficients;  // descending, squares sum to 1
  ComplexMatrix alice_basis;         // column k pairs with coefficients[k]
  ComplexMatrix bob_basis;
  int alice_dim = 0;
  int bob_dim = 0;

  /// S_A = H(coefficients^2).
  double entanglement_entropy() const;
  /// sum_k c_k |a_k>|b_k>
  ComplexVector reconstruct() const;
};

/// Schmidt decomposition of a pure two-party state. Throws ValidationError
/// for mixed input or a party count other than two.
SchmidtForm schmidt(const DensityOperator& psi);

/// Schmidt coefficients of a vector across the cut (first dim_a | rest).
std::vector<double> schmidt_coefficients(std::span<const Complex> vec, int dim_a, int dim_b);

/// Tr[P rho] clamped to [0, 1]; throws if P is not a projector.
double overlap_fidelity(const DensityOperator& rho, const ComplexMatrix& projector);

/// Largest eigenvector of rho as a state vector (global phase fixed so the
/// largest-magnitude entry is real positive).
ComplexVector dominant_vector(const ComplexMatrix& rho);

}  // namespace infoloc
