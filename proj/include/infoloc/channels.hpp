#pragma once

#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "infoloc/matcore.hpp"
#include "infoloc/states.hpp"
#include "json.hpp"

namespace infoloc {

// Steps of a noisy-LOCC protocol. Each one preserves the maximally mixed
// state. Classical communication exists only as DephasedSend; measurement is
// scripted as ancilla + unitary + dephasing, never as a primitive.

struct ApplyLocalUnitary {
  std::string party;
  ComplexMatrix unitary;  // acts on the party's factors in their current order
};

struct AddMaxMixedAncilla {
  std::string party;
  int dim = 2;
};

struct TraceOut {
  std::string party;
  int factor = 0;  // global factor index, must belong to `party`
};

struct DephasedSend {
  int factor = 0;
  ComplexMatrix basis;  // columns = dephasing basis of that factor
  std::string from;
  std::string to;
};

struct DephaseLocal {
  std::string party;
  std::vector<int> factors;
  ComplexMatrix basis;  // basis of the product space of `factors`
};

using ProtocolStep = std::variant<ApplyLocalUnitary, AddMaxMixedAncilla, TraceOut, DephasedSend, DephaseLocal>;

std::string step_kind(const ProtocolStep& step);

struct Protocol {
  std::string name;
  std::string note;
  std::vector<ProtocolStep> steps;
};

/// sum_i |b_i><b_i| rho |b_i><b_i| over the whole space.
DensityOperator dephase(const DensityOperator& rho, const ComplexMatrix& basis);

/// Dephasing restricted to a subset of factors (identity on the rest).
ComplexMatrix dephase_factors(const ComplexMatrix& m, std::span<const int> factor_dims,
                              std::span<const int> factors, const ComplexMatrix& basis);

/// Exact channel action. Throws DimensionError / ValidationError on misuse.
DensityOperator apply_step(const DensityOperator& rho, const ProtocolStep& step);

struct PmmReport {
  bool pass = false;
  double max_deviation = 0.0;
};

/// Applies the step to I/d_in (with the given party structure) and compares to I/d_out.
PmmReport check_pmm(const ProtocolStep& step, const PartySplit& input, double tol = 1e-10);
PmmReport check_pmm(const Protocol& protocol, const PartySplit& input, double tol = 1e-10);
/// Same test for an arbitrary linear map given as a function on matrices.
PmmReport check_pmm(const std::function<ComplexMatrix(const ComplexMatrix&)>& channel, int d_in, int d_out,
                    double tol = 1e-10);

struct LedgerEntry {
  int step = 0;  // 0 = input
  std::string kind;
  double n_bits = 0.0;
  double entropy = 0.0;
  double information = 0.0;
  std::vector<std::pair<std::string, int>> party_dims;
};

struct ProtocolRun {
  DensityOperator final_state;
  std::vector<LedgerEntry> ledger;
};

/// Runs every step in order. A failing step is reported as DimensionError /
/// ValidationError whose message starts with "step k".
ProtocolRun run_protocol(const DensityOperator& rho, const Protocol& protocol);

// JSON forms -----------------------------------------------------------------

/// Unitary from a name: hadamard, x, y, z, s, t, identity:<d>, fourier:<d>.
ComplexMatrix named_unitary(const std::string& name);
/// Matrix, name string, or {"ry": theta} / {"rz": theta}.
ComplexMatrix unitary_from_json(const nlohmann::json& doc);

ProtocolStep step_from_json(const nlohmann::json& doc);
nlohmann::json step_to_json(const ProtocolStep& step);
Protocol protocol_from_json(const nlohmann::json& doc);
nlohmann::json protocol_to_json(const Protocol& protocol);
nlohmann::json ledger_to_json(const std::vector<LedgerEntry>& ledger);

/// Run file: {"name", "note", "state": <state document>, "steps": [...]}.
std::pair<DensityOperator, Protocol> run_file_from_json(const nlohmann::json& doc);

}  // namespace infoloc
