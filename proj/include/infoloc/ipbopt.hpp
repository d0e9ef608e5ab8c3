#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "infoloc/matcore.hpp"
#include "infoloc/states.hpp"
#include "json.hpp"

namespace infoloc {

/// One-way adaptive product basis over a chain of parties.
///
/// Level 0 holds a single unitary for the first party. Level l holds one
/// unitary per index tuple (i_0, ..., i_{l-1}) of the earlier parties, stored
/// in row-major order of that tuple. The basis vector with index
/// (i_0, ..., i_{m-1}) is |e_{i_0}> ⊗ |f^{(i_0)}_{i_1}> ⊗ ...; its position in
/// the global basis is the row-major index of the tuple.
struct AdaptiveProductBasis {
  std::vector<std::string> parties;
  std::vector<int> party_dims;
  std::vector<std::vector<ComplexMatrix>> levels;

  /// Computational basis for the given chain.
  static AdaptiveProductBasis standard(std::vector<std::string> parties, std::vector<int> party_dims);

  int total_dim() const { return product(party_dims); }
  /// Throws ValidationError if any stored matrix is not unitary or counts are wrong.
  void validate(double tol = 1e-10) const;

  /// Image under party-local unitaries (one per party, in chain order):
  /// every basis vector |v> becomes (U_0 ⊗ ... ⊗ U_{m-1}) |v>.
  AdaptiveProductBasis conjugated(std::span<const ComplexMatrix> local_unitaries) const;
};

/// The basis B ⊗ B for two copies, in the copy-grouped layout used for
/// k = 2 (party p's composite index is a_p * d_p + b_p).
AdaptiveProductBasis tensor_square(const AdaptiveProductBasis& basis);

/// Global unitary whose column (i_0, ..., i_{m-1}) is the corresponding product vector.
ComplexMatrix basis_vectors(const AdaptiveProductBasis& basis);

/// H(rho, B): Shannon entropy of rho's diagonal in the basis. The state is
/// regrouped by party (in party order) before evaluation, matching the chain.
double h_over_ipb(const DensityOperator& rho, const AdaptiveProductBasis& basis);

struct OptimizerConfig {
  int copies = 1;
  int restarts = 32;
  double initial_temperature = 1.0;
  double cooling_factor = 0.97;
  int cooling_interval = 50;
  int anneal_steps = 5000;
  int polish_sweeps = 200;
  double step_size = 0.5;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

nlohmann::json config_to_json(const OptimizerConfig& config);
/// Overlays the keys present in `doc` onto `base`.
OptimizerConfig config_from_json(const nlohmann::json& doc, OptimizerConfig base = {});

struct RestartTrace {
  int index = 0;
  std::uint64_t seed = 0;
  bool warm_start = false;
  double h_after_anneal = 0.0;
  double h_final = 0.0;
  double best_so_far = 0.0;
  int polish_sweeps = 0;
  bool polish_converged = false;
};

struct MinimizeResult {
  AdaptiveProductBasis basis;  // for the grouped k-copy state
  double h = 0.0;              // total, not per copy
  int copies = 1;
  int best_restart = 0;
  std::vector<RestartTrace> trace;
};

/// Heuristic global minimization of H(rho^{⊗k}, B) over adaptive product
/// bases: simulated annealing on Hermitian generators followed by coordinate
/// descent, best of all restarts. Deterministic per seed regardless of thread
/// count. `warm_starts` are polished (not annealed) as extra restarts.
/// Throws CapacityError if rho^{⊗k} exceeds the dimension cap.
MinimizeResult minimize_h(const DensityOperator& rho, const OptimizerConfig& config,
                          std::span<const AdaptiveProductBasis> warm_starts = {});

struct DistanceResult {
  double distance = 0.0;  // per copy
  double h_per_copy = 0.0;
  double entropy = 0.0;
  MinimizeResult search;
};

/// inf over IPB states sigma of S(rho || sigma), via inf_B H - S; per copy for k = 2.
DistanceResult relative_entropy_distance(const DensityOperator& rho, const OptimizerConfig& config);

enum class IpbVerdict { yes, no, undecided };
std::string to_string(IpbVerdict v);

struct IpbStateResult {
  IpbVerdict verdict = IpbVerdict::undecided;
  std::string witness;     // human-readable reason
  double witness_value = 0.0;
  std::optional<AdaptiveProductBasis> basis;  // present for "yes"
};

/// Decides whether sigma's eigenbasis is an adaptive product basis.
/// A fully degenerate spectrum is "undecided". Otherwise "yes" is returned
/// whenever the computed eigenbasis is one (this is a certificate), a
/// nondegenerate entangled eigenvector gives a certain "no", and remaining
/// degenerate cases are "undecided" with the smallest gap as witness.
IpbStateResult is_ipb_state(const DensityOperator& sigma, double tol = 1e-8);

nlohmann::json basis_to_json(const AdaptiveProductBasis& basis);
AdaptiveProductBasis basis_from_json(const nlohmann::json& doc);

}  // namespace infoloc
