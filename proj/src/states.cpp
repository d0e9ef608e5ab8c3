#include "infoloc/states.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "infoloc/errors.hpp"
#include "infoloc/tolerances.hpp"

namespace infoloc {

using nlohmann::json;

PartySplit PartySplit::one_per_factor(std::vector<int> factor_dims) {
  PartySplit s;
  for (std::size_t f = 0; f < factor_dims.size(); ++f) {
    std::string label(1, static_cast<char>('A' + f));
    s.parties.push_back(label);
    s.factor_assignment.push_back(label);
  }
  s.factor_dims = std::move(factor_dims);
  return s;
}

PartySplit PartySplit::from_assignment(std::vector<std::string> assignment, std::vector<int> factor_dims) {
  PartySplit s;
  for (const auto& label : assignment)
    if (std::find(s.parties.begin(), s.parties.end(), label) == s.parties.end()) s.parties.push_back(label);
  s.factor_assignment = std::move(assignment);
  s.factor_dims = std::move(factor_dims);
  return s;
}

bool PartySplit::has_party(const std::string& label) const {
  return std::find(parties.begin(), parties.end(), label) != parties.end();
}

std::vector<int> PartySplit::factors_of(const std::string& party) const {
  std::vector<int> out;
  for (std::size_t f = 0; f < factor_assignment.size(); ++f)
    if (factor_assignment[f] == party) out.push_back(static_cast<int>(f));
  return out;
}

int PartySplit::party_dim(const std::string& party) const {
  int d = 1;
  for (int f : factors_of(party)) d *= factor_dims[f];
  return d;
}

std::vector<std::string> PartySplit::occupied_parties() const {
  std::vector<std::string> out;
  for (const auto& p : parties)
    if (!factors_of(p).empty()) out.push_back(p);
  return out;
}

ComplexMatrix DensityOperator::reduced(const std::string& party) const {
  const auto keep = split_.factors_of(party);
  if (keep.empty()) throw DimensionError("party '" + party + "' owns no factors");
  return partial_trace(matrix_, split_.factor_dims, keep);
}

DensityOperator validate(ComplexMatrix matrix, PartySplit split) {
  if (split.factor_dims.empty()) throw DimensionError("state needs at least one tensor factor");
  if (split.factor_assignment.size() != split.factor_dims.size())
    throw DimensionError("factor_assignment must label every factor");
  for (int d : split.factor_dims)
    if (d <= 0) throw DimensionError("factor dimensions must be positive");
  if (split.total_dim() != matrix.dim()) {
    throw DimensionError("product of factor dimensions (" + std::to_string(split.total_dim()) +
                         ") does not match matrix dimension (" + std::to_string(matrix.dim()) + ")");
  }
  for (const auto& label : split.factor_assignment)
    if (!split.has_party(label)) throw DimensionError("factor assigned to unknown party '" + label + "'");
  {
    auto sorted = split.parties;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw DimensionError("party labels must be distinct");
  }

  std::vector<Violation> violations;
  const Complex tr = matrix.trace();
  if (std::abs(tr - 1.0) > tol::unit_trace) violations.push_back({"trace", tr.real(), "expected 1"});

  const auto herm = hermiticity_defect(matrix);
  if (herm.deviation > tol::hermitian) {
    violations.push_back({"hermitian", herm.deviation,
                          "entry (" + std::to_string(herm.row) + "," + std::to_string(herm.col) + ")"});
  }
  // positivity of the Hermitian part, so a non-Hermitian input still gets checked
  ComplexMatrix sym = matrix + matrix.adjoint();
  sym *= 0.5;
  const auto eigs = hermitian_eigenvalues(sym);
  if (eigs.back() < tol::min_eigenvalue) violations.push_back({"positivity", eigs.back(), "smallest eigenvalue"});

  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid density operator:";
    for (const auto& v : violations) msg << ' ' << v.check << '=' << v.value;
    throw ValidationError(msg.str(), std::move(violations));
  }
  const double bits = std::log2(static_cast<double>(matrix.dim()));
  return DensityOperator(std::move(matrix), std::move(split), bits);
}

DensityOperator tensor(const DensityOperator& rho, const DensityOperator& sigma) {
  PartySplit s = rho.split();
  for (const auto& p : sigma.split().parties)
    if (!s.has_party(p)) s.parties.push_back(p);
  s.factor_assignment.insert(s.factor_assignment.end(), sigma.split().factor_assignment.begin(),
                             sigma.split().factor_assignment.end());
  s.factor_dims.insert(s.factor_dims.end(), sigma.split().factor_dims.begin(), sigma.split().factor_dims.end());
  return validate(tensor(rho.matrix(), sigma.matrix()), std::move(s));
}

DensityOperator group_by_party(const DensityOperator& rho) {
  const auto& split = rho.split();
  std::vector<int> order;
  for (const auto& p : split.parties)
    for (int f : split.factors_of(p)) order.push_back(f);
  PartySplit s;
  s.parties = split.parties;
  for (int f : order) {
    s.factor_assignment.push_back(split.factor_assignment[f]);
    s.factor_dims.push_back(split.factor_dims[f]);
  }
  return validate(permute_factors(rho.matrix(), split.factor_dims, order), std::move(s));
}

DensityOperator tensor_power_grouped(const DensityOperator& rho, int copies) {
  if (copies < 1) throw ValidationError("copies must be at least 1", {{"copies", double(copies), ""}});
  DensityOperator out = rho;
  for (int k = 1; k < copies; ++k) out = tensor(out, rho);
  return group_by_party(out);
}

ComplexMatrix maximally_entangled_projector(int d) {
  ComplexMatrix p(d * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) p(i * d + i, j * d + j) = 1.0 / d;
  return p;
}

std::vector<ComplexVector> domino_vectors() {
  const double h = 1.0 / std::numbers::sqrt2;
  auto ket = [](int i) {
    ComplexVector v(3);
    v[i] = 1.0;
    return v;
  };
  auto sum = [h](int i, int j, double sign) {
    ComplexVector v(3);
    v[i] = h;
    v[j] = sign * h;
    return v;
  };
  std::vector<ComplexVector> out;
  out.push_back(tensor(ket(1), ket(1)));
  for (double s : {1.0, -1.0}) out.push_back(tensor(ket(0), sum(0, 1, s)));
  for (double s : {1.0, -1.0}) out.push_back(tensor(ket(2), sum(1, 2, s)));
  for (double s : {1.0, -1.0}) out.push_back(tensor(sum(0, 1, s), ket(2)));
  for (double s : {1.0, -1.0}) out.push_back(tensor(sum(1, 2, s), ket(0)));

  double worst = 0.0;
  for (std::size_t a = 0; a < out.size(); ++a)
    for (std::size_t b = 0; b < out.size(); ++b) {
      const Complex g = inner(out[a], out[b]);
      worst = std::max(worst, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  if (worst > 1e-12) throw ValidationError("domino vectors are not orthonormal", {{"gram", worst, ""}});
  return out;
}

namespace {

double number_param(const json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  const auto& v = params.at(key);
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    try {
      std::size_t used = 0;
      const double x = std::stod(v.get<std::string>(), &used);
      if (used == v.get<std::string>().size()) return x;
    } catch (const std::exception&) {
    }
  }
  throw ValidationError(std::string("parameter '") + key + "' must be a number");
}

double required_param(const json& params, const char* key, const std::string& name) {
  if (!params.contains(key)) throw ValidationError(name + ": missing parameter '" + key + "'");
  return number_param(params, key, 0.0);
}

int int_param(const json& params, const char* key, int fallback) {
  const double x = number_param(params, key, fallback);
  if (x != std::floor(x)) throw ValidationError(std::string("parameter '") + key + "' must be an integer");
  return static_cast<int>(x);
}

std::vector<int> dims_param(const json& params, std::vector<int> fallback) {
  if (!params.contains("dims")) return fallback;
  const auto& v = params.at("dims");
  std::vector<int> dims;
  if (v.is_array()) {
    for (const auto& x : v) {
      if (!x.is_number_integer()) throw ValidationError("dims must be a list of integers");
      dims.push_back(x.get<int>());
    }
  } else if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        dims.push_back(std::stoi(tok));
      } catch (const std::exception&) {
        throw ValidationError("dims must be a comma-separated list of integers");
      }
    }
  } else {
    throw ValidationError("dims must be a list of integers");
  }
  if (dims.empty()) throw ValidationError("dims must not be empty");
  for (int d : dims)
    if (d < 1) throw ValidationError("dims entries must be positive", {{"dims", double(d), ""}});
  return dims;
}

void require_range(double x, double lo, double hi, const std::string& what) {
  if (!(x >= lo && x <= hi)) {
    std::ostringstream msg;
    msg << what << " = " << x << " outside [" << lo << ", " << hi << "]";
    throw ValidationError(msg.str(), {{what, x, "out of range"}});
  }
}

}  // namespace

std::vector<std::string> catalog_names() {
  return {"bell", "ghz", "werner", "isotropic", "classical_correlated", "pure_schmidt", "domino", "max_mixed",
          "product_pure"};
}

DensityOperator catalog(const std::string& name, const json& params_in) {
  const json params = params_in.is_null() ? json::object() : params_in;
  if (!params.is_object()) throw ValidationError("catalog parameters must be an object");

  if (name == "bell") {
    const int d = int_param(params, "d", 2);
    require_range(d, 2, 8, "d");
    return validate(maximally_entangled_projector(d), PartySplit::one_per_factor({d, d}));
  }
  if (name == "ghz") {
    const int n = int_param(params, "n", 3);
    require_range(n, 2, 6, "n");
    const int dim = 1 << n;
    ComplexMatrix m(dim);
    m(0, 0) = m(dim - 1, dim - 1) = m(0, dim - 1) = m(dim - 1, 0) = 0.5;
    return validate(std::move(m), PartySplit::one_per_factor(std::vector<int>(n, 2)));
  }
  if (name == "werner") {
    const double p = required_param(params, "p", name);
    require_range(p, 0.0, 1.0, "p");
    ComplexMatrix m = maximally_entangled_projector(2) * p + ComplexMatrix::identity(4) * ((1.0 - p) / 4.0);
    return validate(std::move(m), PartySplit::one_per_factor({2, 2}));
  }
  if (name == "isotropic") {
    const double f = required_param(params, "F", name);
    const int d = int_param(params, "d", 2);
    require_range(f, 0.0, 1.0, "F");
    require_range(d, 2, 8, "d");
    const ComplexMatrix psi = maximally_entangled_projector(d);
    const double rest = (1.0 - f) / (d * d - 1.0);
    ComplexMatrix m = psi * f + (ComplexMatrix::identity(d * d) - psi) * rest;
    return validate(std::move(m), PartySplit::one_per_factor({d, d}));
  }
  if (name == "classical_correlated") {
    const double p = number_param(params, "p", 0.5);
    require_range(p, 0.0, 1.0, "p");
    ComplexMatrix m(4);
    m(0, 0) = p;
    m(3, 3) = 1.0 - p;
    return validate(std::move(m), PartySplit::one_per_factor({2, 2}));
  }
  if (name == "pure_schmidt") {
    const double theta = required_param(params, "theta", name);
    if (!std::isfinite(theta)) throw ValidationError("theta must be finite");
    ComplexVector psi(4);
    psi[0] = std::cos(theta);
    psi[3] = std::sin(theta);
    return validate(ComplexMatrix::outer(psi), PartySplit::one_per_factor({2, 2}));
  }
  if (name == "domino") {
    const int i = int_param(params, "i", 0);
    require_range(i, 0, 8, "i");
    return validate(ComplexMatrix::outer(domino_vectors()[i]), PartySplit::one_per_factor({3, 3}));
  }
  if (name == "max_mixed") {
    const auto dims = dims_param(params, {2, 2});
    const int dim = product(dims);
    return validate(ComplexMatrix::identity(dim) * (1.0 / dim), PartySplit::one_per_factor(dims));
  }
  if (name == "product_pure") {
    const auto dims = dims_param(params, {2, 2});
    ComplexMatrix m(product(dims));
    m(0, 0) = 1.0;
    return validate(std::move(m), PartySplit::one_per_factor(dims));
  }
  throw ValidationError("unknown catalog state '" + name + "'");
}

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.dim(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ComplexMatrix matrix_from_json(const json& doc) {
  if (!doc.is_array() || doc.empty()) throw ParseError("matrix must be a non-empty array of rows");
  const int d = static_cast<int>(doc.size());
  ComplexMatrix m(d);
  for (int i = 0; i < d; ++i) {
    const auto& row = doc[i];
    if (!row.is_array() || static_cast<int>(row.size()) != d)
      throw ParseError("matrix row " + std::to_string(i) + " must have " + std::to_string(d) + " entries");
    for (int j = 0; j < d; ++j) {
      const auto& z = row[j];
      if (z.is_number()) {
        m(i, j) = z.get<double>();
      } else if (z.is_array() && z.size() == 2 && z[0].is_number() && z[1].is_number()) {
        m(i, j) = Complex{z[0].get<double>(), z[1].get<double>()};
      } else {
        throw ParseError("matrix entry (" + std::to_string(i) + "," + std::to_string(j) +
                         ") must be [re, im]");
      }
    }
  }
  return m;
}

DensityOperator state_from_json(const json& doc) {
  if (!doc.is_object()) throw ParseError("state document must be a JSON object");
  if (doc.contains("catalog")) {
    if (!doc["catalog"].is_string()) throw ParseError("'catalog' must be a string");
    return catalog(doc["catalog"].get<std::string>(), doc.value("params", json::object()));
  }
  if (!doc.contains("factor_dims") || !doc.contains("matrix"))
    throw ParseError("state document needs 'factor_dims' and 'matrix' (or 'catalog')");
  std::vector<int> dims;
  try {
    dims = doc.at("factor_dims").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("factor_dims: ") + e.what());
  }
  ComplexMatrix m = matrix_from_json(doc.at("matrix"));
  if (!doc.contains("parties")) return validate(std::move(m), PartySplit::one_per_factor(dims));
  std::vector<std::string> labels;
  try {
    labels = doc.at("parties").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("parties: ") + e.what());
  }
  return validate(std::move(m), PartySplit::from_assignment(std::move(labels), std::move(dims)));
}

json state_to_json(const DensityOperator& rho) {
  return json{{"factor_dims", rho.split().factor_dims},
              {"parties", rho.split().factor_assignment},
              {"matrix", matrix_to_json(rho.matrix())}};
}

}  // namespace infoloc
