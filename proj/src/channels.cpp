#include "infoloc/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "infoloc/errors.hpp"
#include "infoloc/measures.hpp"
#include "infoloc/tolerances.hpp"

namespace infoloc {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_party(const PartySplit& split, const std::string& party) {
  if (!split.has_party(party)) throw DimensionError("unknown party '" + party + "'");
}

void require_factor_of(const PartySplit& split, int factor, const std::string& party) {
  if (factor < 0 || factor >= split.num_factors())
    throw DimensionError("factor " + std::to_string(factor) + " out of range");
  if (split.factor_assignment[factor] != party)
    throw DimensionError("factor " + std::to_string(factor) + " does not belong to party '" + party + "'");
}

ComplexMatrix conjugate(const ComplexMatrix& g, const ComplexMatrix& m) { return g * m * g.adjoint(); }

// Channel actions on raw matrices, shared by apply_step and the PMM check.
std::pair<ComplexMatrix, PartySplit> act(const ComplexMatrix& m, const PartySplit& split, const ProtocolStep& step) {
  return std::visit(
      Overloaded{
          [&](const ApplyLocalUnitary& s) -> std::pair<ComplexMatrix, PartySplit> {
            require_party(split, s.party);
            const auto factors = split.factors_of(s.party);
            if (factors.empty()) throw DimensionError("party '" + s.party + "' owns no factors");
            require_unitary(s.unitary, tol::unitary, "local unitary");
            const auto g = embed_operator(s.unitary, split.factor_dims, factors);
            return {conjugate(g, m), split};
          },
          [&](const AddMaxMixedAncilla& s) -> std::pair<ComplexMatrix, PartySplit> {
            require_party(split, s.party);
            if (s.dim < 1) throw DimensionError("ancilla dimension must be positive");
            PartySplit out = split;
            out.factor_dims.push_back(s.dim);
            out.factor_assignment.push_back(s.party);
            return {tensor(m, ComplexMatrix::identity(s.dim) * (1.0 / s.dim)), out};
          },
          [&](const TraceOut& s) -> std::pair<ComplexMatrix, PartySplit> {
            require_party(split, s.party);
            require_factor_of(split, s.factor, s.party);
            if (split.num_factors() < 2) throw DimensionError("cannot trace out the only remaining factor");
            std::vector<int> keep;
            PartySplit out;
            out.parties = split.parties;
            for (int f = 0; f < split.num_factors(); ++f) {
              if (f == s.factor) continue;
              keep.push_back(f);
              out.factor_dims.push_back(split.factor_dims[f]);
              out.factor_assignment.push_back(split.factor_assignment[f]);
            }
            return {partial_trace(m, split.factor_dims, keep), out};
          },
          [&](const DephasedSend& s) -> std::pair<ComplexMatrix, PartySplit> {
            require_party(split, s.from);
            require_party(split, s.to);
            require_factor_of(split, s.factor, s.from);
            const int f = s.factor;
            PartySplit out = split;
            out.factor_assignment[f] = s.to;
            return {dephase_factors(m, split.factor_dims, std::span<const int>(&f, 1), s.basis), out};
          },
          [&](const DephaseLocal& s) -> std::pair<ComplexMatrix, PartySplit> {
            require_party(split, s.party);
            if (s.factors.empty()) throw DimensionError("dephase_local needs at least one factor");
            for (int f : s.factors) require_factor_of(split, f, s.party);
            return {dephase_factors(m, split.factor_dims, s.factors, s.basis), split};
          },
      },
      step);
}

}  // namespace

std::string step_kind(const ProtocolStep& step) {
  return std::visit(Overloaded{
                        [](const ApplyLocalUnitary&) { return std::string("apply_local_unitary"); },
                        [](const AddMaxMixedAncilla&) { return std::string("add_max_mixed_ancilla"); },
                        [](const TraceOut&) { return std::string("trace_out"); },
                        [](const DephasedSend&) { return std::string("dephased_send"); },
                        [](const DephaseLocal&) { return std::string("dephase_local"); },
                    },
                    step);
}

ComplexMatrix dephase_factors(const ComplexMatrix& m, std::span<const int> factor_dims, std::span<const int> factors,
                              const ComplexMatrix& basis) {
  require_unitary(basis, tol::unitary, "dephasing basis");
  int target_dim = 1;
  for (int f : factors) {
    if (f < 0 || f >= static_cast<int>(factor_dims.size())) throw DimensionError("dephasing factor out of range");
    target_dim *= factor_dims[f];
  }
  if (target_dim != basis.dim()) {
    throw DimensionError("dephasing basis has dimension " + std::to_string(basis.dim()) + ", factors have " +
                         std::to_string(target_dim));
  }
  ComplexMatrix out(m.dim());
  for (int k = 0; k < basis.dim(); ++k) {
    const auto proj = embed_operator(ComplexMatrix::outer(basis.column(k)), factor_dims, factors);
    out += proj * m * proj;
  }
  return out;
}

DensityOperator dephase(const DensityOperator& rho, const ComplexMatrix& basis) {
  require_unitary(basis, tol::unitary, "dephasing basis");
  if (basis.dim() != rho.dim()) throw DimensionError("dephasing basis dimension does not match state");
  const auto probs = basis_probabilities(rho.matrix(), basis);
  ComplexMatrix out(rho.dim());
  for (int k = 0; k < basis.dim(); ++k) {
    for (int i = 0; i < rho.dim(); ++i)
      for (int j = 0; j < rho.dim(); ++j) out(i, j) += probs[k] * basis(i, k) * std::conj(basis(j, k));
  }
  return validate(std::move(out), rho.split());
}

DensityOperator apply_step(const DensityOperator& rho, const ProtocolStep& step) {
  auto [m, split] = act(rho.matrix(), rho.split(), step);
  return validate(std::move(m), std::move(split));
}

PmmReport check_pmm(const std::function<ComplexMatrix(const ComplexMatrix&)>& channel, int d_in, int d_out,
                    double tol) {
  const ComplexMatrix out = channel(ComplexMatrix::identity(d_in) * (1.0 / d_in));
  if (out.dim() != d_out) throw DimensionError("channel output dimension does not match d_out");
  const double dev = max_abs_diff(out, ComplexMatrix::identity(d_out) * (1.0 / d_out));
  return {dev <= tol, dev};
}

PmmReport check_pmm(const ProtocolStep& step, const PartySplit& input, double tol) {
  const int d_in = input.total_dim();
  auto [out, split] = act(ComplexMatrix::identity(d_in) * (1.0 / d_in), input, step);
  const double dev = max_abs_diff(out, ComplexMatrix::identity(out.dim()) * (1.0 / out.dim()));
  return {dev <= tol, dev};
}

PmmReport check_pmm(const Protocol& protocol, const PartySplit& input, double tol) {
  const int d_in = input.total_dim();
  ComplexMatrix m = ComplexMatrix::identity(d_in) * (1.0 / d_in);
  PartySplit split = input;
  for (const auto& step : protocol.steps) std::tie(m, split) = act(m, split, step);
  const double dev = max_abs_diff(m, ComplexMatrix::identity(m.dim()) * (1.0 / m.dim()));
  return {dev <= tol, dev};
}

namespace {

LedgerEntry ledger_entry(int index, std::string kind, const DensityOperator& rho) {
  LedgerEntry e;
  e.step = index;
  e.kind = std::move(kind);
  e.n_bits = rho.num_bits();
  e.entropy = von_neumann_entropy(rho);
  e.information = e.n_bits - e.entropy;
  for (const auto& p : rho.split().parties) e.party_dims.emplace_back(p, rho.split().party_dim(p));
  return e;
}

}  // namespace

ProtocolRun run_protocol(const DensityOperator& rho, const Protocol& protocol) {
  ProtocolRun run{rho, {ledger_entry(0, "input", rho)}};
  for (std::size_t k = 0; k < protocol.steps.size(); ++k) {
    const auto& step = protocol.steps[k];
    const std::string prefix = "step " + std::to_string(k + 1) + " (" + step_kind(step) + "): ";
    try {
      run.final_state = apply_step(run.final_state, step);
    } catch (const DimensionError& e) {
      throw DimensionError(prefix + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(prefix + e.what(), e.violations());
    }
    run.ledger.push_back(ledger_entry(static_cast<int>(k + 1), step_kind(step), run.final_state));
  }
  return run;
}

// JSON -----------------------------------------------------------------------

ComplexMatrix named_unitary(const std::string& name) {
  const double h = 1.0 / std::numbers::sqrt2;
  const Complex i{0.0, 1.0};
  if (name == "hadamard") return ComplexMatrix(2, {h, h, h, -h});
  if (name == "x") return ComplexMatrix(2, {0.0, 1.0, 1.0, 0.0});
  if (name == "y") return ComplexMatrix(2, {0.0, -i, i, 0.0});
  if (name == "z") return ComplexMatrix(2, {1.0, 0.0, 0.0, -1.0});
  if (name == "s") return ComplexMatrix(2, {1.0, 0.0, 0.0, i});
  if (name == "t") return ComplexMatrix(2, {1.0, 0.0, 0.0, std::polar(1.0, std::numbers::pi / 4)});
  const auto colon = name.find(':');
  if (colon != std::string::npos) {
    const std::string base = name.substr(0, colon);
    int d = 0;
    try {
      d = std::stoi(name.substr(colon + 1));
    } catch (const std::exception&) {
      throw ParseError("bad dimension in unitary name '" + name + "'");
    }
    if (d < 1 || d > 64) throw ParseError("unitary dimension out of range in '" + name + "'");
    if (base == "identity") return ComplexMatrix::identity(d);
    if (base == "fourier") {
      ComplexMatrix f(d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) f(r, c) = std::polar(1.0 / std::sqrt(double(d)), 2.0 * std::numbers::pi * r * c / d);
      return f;
    }
  }
  throw ParseError("unknown unitary name '" + name + "'");
}

ComplexMatrix unitary_from_json(const json& doc) {
  if (doc.is_string()) return named_unitary(doc.get<std::string>());
  if (doc.is_array()) return matrix_from_json(doc);
  if (doc.is_object()) {
    if (doc.contains("ry")) {
      const double t = doc["ry"].get<double>() / 2.0;
      return ComplexMatrix(2, {std::cos(t), -std::sin(t), std::sin(t), std::cos(t)});
    }
    if (doc.contains("rz")) {
      const double t = doc["rz"].get<double>() / 2.0;
      return ComplexMatrix(2, {std::polar(1.0, -t), 0.0, 0.0, std::polar(1.0, t)});
    }
  }
  throw ParseError("unitary must be a matrix, a name, or {\"ry\": theta} / {\"rz\": theta}");
}

namespace {

template <class T>
T field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw ParseError(std::string("step is missing '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("step field '") + key + "': " + e.what());
  }
}

}  // namespace

ProtocolStep step_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("protocol step must be an object");
  const auto kind = field<std::string>(doc, "kind");
  if (kind == "apply_local_unitary") {
    if (!doc.contains("unitary")) throw ParseError("step is missing 'unitary'");
    return ApplyLocalUnitary{field<std::string>(doc, "party"), unitary_from_json(doc["unitary"])};
  }
  if (kind == "add_max_mixed_ancilla") return AddMaxMixedAncilla{field<std::string>(doc, "party"), field<int>(doc, "dim")};
  if (kind == "trace_out") return TraceOut{field<std::string>(doc, "party"), field<int>(doc, "factor")};
  if (kind == "dephased_send") {
    if (!doc.contains("basis")) throw ParseError("step is missing 'basis'");
    return DephasedSend{field<int>(doc, "factor"), unitary_from_json(doc["basis"]), field<std::string>(doc, "from"),
                        field<std::string>(doc, "to")};
  }
  if (kind == "dephase_local") {
    if (!doc.contains("basis")) throw ParseError("step is missing 'basis'");
    return DephaseLocal{field<std::string>(doc, "party"), field<std::vector<int>>(doc, "factors"),
                        unitary_from_json(doc["basis"])};
  }
  throw ParseError("unknown step kind '" + kind + "'");
}

json step_to_json(const ProtocolStep& step) {
  json out = std::visit(
      Overloaded{
          [](const ApplyLocalUnitary& s) { return json{{"party", s.party}, {"unitary", matrix_to_json(s.unitary)}}; },
          [](const AddMaxMixedAncilla& s) { return json{{"party", s.party}, {"dim", s.dim}}; },
          [](const TraceOut& s) { return json{{"party", s.party}, {"factor", s.factor}}; },
          [](const DephasedSend& s) {
            return json{{"factor", s.factor}, {"basis", matrix_to_json(s.basis)}, {"from", s.from}, {"to", s.to}};
          },
          [](const DephaseLocal& s) {
            return json{{"party", s.party}, {"factors", s.factors}, {"basis", matrix_to_json(s.basis)}};
          },
      },
      step);
  out["kind"] = step_kind(step);
  return out;
}

Protocol protocol_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("protocol must be an object");
  Protocol p;
  p.name = doc.value("name", std::string{});
  p.note = doc.value("note", std::string{});
  if (!doc.contains("steps") || !doc["steps"].is_array()) throw ParseError("protocol needs a 'steps' array");
  for (std::size_t k = 0; k < doc["steps"].size(); ++k) {
    try {
      p.steps.push_back(step_from_json(doc["steps"][k]));
    } catch (const ParseError& e) {
      throw ParseError("step " + std::to_string(k + 1) + ": " + e.what());
    }
  }
  return p;
}

json protocol_to_json(const Protocol& protocol) {
  json steps = json::array();
  for (const auto& s : protocol.steps) steps.push_back(step_to_json(s));
  return json{{"name", protocol.name}, {"note", protocol.note}, {"steps", steps}};
}

json ledger_to_json(const std::vector<LedgerEntry>& ledger) {
  json out = json::array();
  for (const auto& e : ledger) {
    json dims = json::object();
    for (const auto& [party, d] : e.party_dims) dims[party] = d;
    out.push_back(json{{"step", e.step},
                       {"kind", e.kind},
                       {"N", e.n_bits},
                       {"S", e.entropy},
                       {"I", e.information},
                       {"party_dims", dims}});
  }
  return out;
}

std::pair<DensityOperator, Protocol> run_file_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("state")) throw ParseError("run file needs a 'state' entry");
  return {state_from_json(doc["state"]), protocol_from_json(doc)};
}

}  // namespace infoloc
