#pragma once

#include <string>
#include <vector>

#include "infoloc/matcore.hpp"
#include "json.hpp"

namespace infoloc {

/// Which party owns each tensor factor.
struct PartySplit {
  std::vector<std::string> parties;            // ordered labels
  std::vector<std::string> factor_assignment;  // one label per factor
  std::vector<int> factor_dims;

  /// One party per factor, labelled A, B, C, ...
  static PartySplit one_per_factor(std::vector<int> factor_dims);
  /// Party order = order of first appearance in `assignment`.
  static PartySplit from_assignment(std::vector<std::string> assignment, std::vector<int> factor_dims);

  int total_dim() const { return product(factor_dims); }
  int num_factors() const { return static_cast<int>(factor_dims.size()); }
  bool has_party(const std::string& label) const;
  std::vector<int> factors_of(const std::string& party) const;
  int party_dim(const std::string& party) const;
  /// Parties that currently own at least one factor, in party order.
  std::vector<std::string> occupied_parties() const;

  friend bool operator==(const PartySplit&, const PartySplit&) = default;
};

/// Positive, unit-trace, Hermitian operator with a party structure. Only
/// obtainable through validate(), so holding one means the checks passed.
class DensityOperator {
 public:
  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const PartySplit& split() const noexcept { return split_; }
  int dim() const noexcept { return matrix_.dim(); }
  /// log2 of the total dimension, in bits.
  double num_bits() const noexcept { return bits_; }

  /// Reduced operator of one party (its factors in original order).
  ComplexMatrix reduced(const std::string& party) const;

 private:
  friend DensityOperator validate(ComplexMatrix matrix, PartySplit split);
  DensityOperator(ComplexMatrix m, PartySplit s, double bits)
      : matrix_(std::move(m)), split_(std::move(s)), bits_(bits) {}

  ComplexMatrix matrix_;
  PartySplit split_;
  double bits_ = 0.0;
};

/// Checks every invariant and reports all violations at once.
/// Throws DimensionError for structural mismatch, ValidationError otherwise.
DensityOperator validate(ComplexMatrix matrix, PartySplit split);

/// rho ⊗ sigma; factor lists and party labels are concatenated.
DensityOperator tensor(const DensityOperator& rho, const DensityOperator& sigma);

/// k-fold tensor power with factors regrouped so that each party's copies are
/// adjacent (party order preserved). Used for collective k-copy optimization.
DensityOperator tensor_power_grouped(const DensityOperator& rho, int copies);

/// Permutes factors so each party's factors are contiguous in party order.
DensityOperator group_by_party(const DensityOperator& rho);

/// Named states. Parameters are a JSON object; missing ones take defaults:
///   bell{d=2}, ghz{n=3}, werner{p}, isotropic{F, d=2}, classical_correlated{p=0.5},
///   pure_schmidt{theta}, domino{i}, max_mixed{dims}, product_pure{dims}
DensityOperator catalog(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

std::vector<std::string> catalog_names();

/// The nine 3x3 product vectors of the domino basis; throws unless they form
/// an orthonormal product basis.
std::vector<ComplexVector> domino_vectors();

/// Projector onto |psi_+^d> = d^{-1/2} sum_i |ii>, built entrywise.
ComplexMatrix maximally_entangled_projector(int d);

/// State files:
///   {"factor_dims":[..], "parties":[label per factor], "matrix":[[[re,im],..],..]}
///   {"catalog":"bell", "params":{"d":2}}
DensityOperator state_from_json(const nlohmann::json& doc);
nlohmann::json state_to_json(const DensityOperator& rho);

nlohmann::json matrix_to_json(const ComplexMatrix& m);
ComplexMatrix matrix_from_json(const nlohmann::json& doc);

}  // namespace infoloc
