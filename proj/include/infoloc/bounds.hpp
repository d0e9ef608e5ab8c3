#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "infoloc/ipbopt.hpp"
#include "infoloc/states.hpp"
#include "json.hpp"

namespace infoloc {

// Bounds on the localizable information I_l (bits of pure local states
// distillable per copy under noisy LOCC) and on the deficit Delta = I - I_l.

struct UpperBound {
  double il_upper = 0.0;     // min over parties X of N - S_inf(rho_X)
  std::string party;         // the party attaining the minimum
  double lambda_max = 0.0;   // largest eigenvalue of that party's reduction
};

/// N - S_inf(rho_X) minimized over the occupied parties. Needs >= 2 parties.
UpperBound localizable_upper_bound(const DensityOperator& rho);

struct LowerBoundEntry {
  int copies = 1;
  double il_lower = 0.0;    // N - H*_k / k
  double h_total = 0.0;     // H*_k over the k-copy state
  double distance = 0.0;    // H*_k / k - S  (the k-copy proxy of D)
  bool best = false;
  MinimizeResult search;
};

/// N - min_B H(rho^{⊗k}, B) / k for k = 1 .. config.copies; the entry with the
/// largest bound is flagged best (lowest k on ties).
std::vector<LowerBoundEntry> localizable_lower_bounds(const DensityOperator& rho, const OptimizerConfig& config);

struct PureStateExact {
  double il = 0.0;     // N - S_A
  double delta = 0.0;  // S_A
};

/// Exact values for pure two-party states; throws ValidationError otherwise.
PureStateExact pure_state_exact(const DensityOperator& psi);

/// True when rho is pure (within tolerance) and shared by exactly two parties.
bool is_pure_bipartite(const DensityOperator& rho);

struct BoundsReport {
  double n_bits = 0.0;
  double entropy = 0.0;
  double information = 0.0;
  UpperBound upper;
  std::vector<LowerBoundEntry> lower;
  double il_lower = 0.0;  // best over k
  int best_copies = 1;
  std::optional<double> il_exact;
  double delta_lower = 0.0;
  double delta_upper = 0.0;
  double delta_conjectured = 0.0;
  double monotone_m = 0.0;
  // unmerged endpoints before clamping / intersecting with the pure-state law
  double delta_lower_min_entropy = 0.0;  // S_inf(rho_X) - S
  double delta_upper_ipb = 0.0;          // best-k distance proxy
};

/// Assembles every bound. The deficit interval is the intersection of the
/// min-entropy bound (clamped at 0), the IPB bound, and for pure two-party
/// states the exact value.
BoundsReport deficit_interval(const DensityOperator& rho, const OptimizerConfig& config);

/// Names of violated report invariants (empty when consistent).
std::vector<std::string> report_violations(const BoundsReport& report);

nlohmann::json report_to_json(const BoundsReport& report, const OptimizerConfig& config);

struct DistRateParams {
  long long n = 1;   // input copies
  double rate = 0.0; // bits per input copy
  double pairs() const { return static_cast<double>(n) * rate / 2.0; }
};

struct FidelityCeiling {
  double log2_ceiling = 0.0;
  double ceiling = 1.0;
  double lambda_max = 0.0;
};

/// min(1, 2^{n(N - r)} lambda_max^n), evaluated in log space, lambda_max from
/// the party reduction giving the smaller value. Rate must lie in [0, N].
FidelityCeiling rains_fidelity_ceiling(const DensityOperator& rho, const DistRateParams& params);

/// M = N - min_B H(rho, B) (single copy).
double monotone_m(const DensityOperator& rho, const OptimizerConfig& config,
                  std::span<const AdaptiveProductBasis> warm_starts = {});

struct ScanConfig {
  int trials = 1000;
  std::uint64_t seed = 1;
  double tolerance = 2e-4;
  OptimizerConfig optimizer = {1, 3, 1.0, 0.97, 25, 600, 60, 0.5, 0, 1e-7, 1};
  int threads = 0;
};

struct ScanTrial {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string kind;  // local_unitary, partial_trace, local_dephasing, noise
  double m_before = 0.0;
  double m_after = 0.0;
  double delta_m = 0.0;
};

struct ScanReport {
  int trials = 0;
  std::vector<std::pair<std::string, int>> trials_by_kind;
  std::vector<std::pair<std::string, double>> max_delta_by_kind;
  std::vector<ScanTrial> violations;   // unitary / partial trace beyond tolerance
  std::vector<ScanTrial> candidates;   // dephasing / noise increasing M beyond tolerance
};

/// Random states and random noisy-LOCC steps; checks dM for each. Unitary and
/// partial-trace steps are asserted (recorded as violations), dephasing and
/// noise steps only collected as candidate counterexamples.
ScanReport monotonicity_scan(const ScanConfig& config);

/// Re-runs one trial of a scan (same seed derivation).
ScanTrial replay_scan_trial(const ScanConfig& config, int trial);

nlohmann::json scan_report_to_json(const ScanReport& report, const ScanConfig& config);

}  // namespace infoloc
