#pragma once

#include <span>
#include <vector>

#include "infoloc/states.hpp"

namespace infoloc {

/// Eigenvalue distribution of a state: descending, sums to 1, at most 6 entries.
class Spectrum {
 public:
  /// Sorts descending and validates. Throws ValidationError on bad input.
  explicit Spectrum(std::vector<double> probabilities);
  static Spectrum of(const DensityOperator& rho);

  std::span<const double> probabilities() const noexcept { return probs_; }
  int dim() const noexcept { return static_cast<int>(probs_.size()); }
  /// Number of strictly positive entries.
  int support() const noexcept;
  double entropy_bits() const;

 private:
  std::vector<double> probs_;
};

/// Largest n the type-class enumeration accepts for a given support size.
long long max_copies(int support);

/// Sum of the floor(2^noise_bits) largest probabilities among the d^n strings
/// of spectrum^{⊗n}: the fidelity of projecting onto the typical subspace
/// that keeps noise_bits of noise. Exact up to floating-point accumulation;
/// a type class straddling the boundary contributes the exact string count.
/// Throws CapacityError when (support, n) is too large.
double typical_fidelity(const Spectrum& spectrum, long long n, double noise_bits);

struct RatePoint {
  long long n = 0;
  double noise_bits = 0.0;  // log2 of the smallest admissible subspace size
  double rate = 0.0;        // noise_bits / n
  double fidelity = 0.0;    // fidelity reached at that size
};

/// For each n, the smallest subspace reaching `target` fidelity.
std::vector<RatePoint> rate_curve(const Spectrum& spectrum, std::span<const long long> n_list, double target);

struct CreationCost {
  double pure_qubits = 0.0;   // n (N - S)
  double noise_qubits = 0.0;  // n S
};

CreationCost creation_cost(const DensityOperator& rho, long long n);
/// Spectrum form: N = log2 d.
CreationCost creation_cost(const Spectrum& spectrum, long long n);

}  // namespace infoloc
