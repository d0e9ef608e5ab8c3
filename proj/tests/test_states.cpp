#include "doctest.h"
#include "infoloc/errors.hpp"
#include "infoloc/states.hpp"
#include "oracles.hpp"

using namespace infoloc;
using nlohmann::json;

namespace {

std::vector<std::string> violated_checks(const ValidationError& e) {
  std::vector<std::string> out;
  for (const auto& v : e.violations()) out.push_back(v.check);
  return out;
}

bool has(const std::vector<std::string>& v, const std::string& s) { return std::find(v.begin(), v.end(), s) != v.end(); }

}  // namespace

TEST_CASE("validate accepts the maximally mixed two-qubit state") {
  const auto rho = validate(ComplexMatrix::identity(4) * 0.25, PartySplit::one_per_factor({2, 2}));
  CHECK(rho.num_bits() == 2.0);
  CHECK(rho.split().parties == std::vector<std::string>{"A", "B"});
}

TEST_CASE("validate reports every violation with its value") {
  SUBCASE("trace") {
    try {
      validate(ComplexMatrix::identity(2) * 0.25, PartySplit::one_per_factor({2}));
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      REQUIRE(e.violations().size() == 1);
      CHECK(e.violations()[0].check == "trace");
      CHECK(e.violations()[0].value == doctest::Approx(0.5));
    }
  }
  SUBCASE("several at once") {
    ComplexMatrix m(2);
    m(0, 0) = 1.5;
    m(1, 1) = -0.2;
    m(0, 1) = 0.1;
    try {
      validate(m, PartySplit::one_per_factor({2}));
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      const auto checks = violated_checks(e);
      CHECK(has(checks, "trace"));
      CHECK(has(checks, "hermitian"));
      CHECK(has(checks, "positivity"));
    }
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(validate(ComplexMatrix::identity(4) * 0.25, PartySplit::one_per_factor({2, 3})), DimensionError);
  }
}

TEST_CASE("bell projector is valid and positive") {
  const auto bell = catalog("bell");
  const auto ev = oracle::eigenvalues(bell.matrix());
  CHECK(ev.back() >= -1e-10);
  CHECK(ev.front() == doctest::Approx(1.0));
  const std::vector<int> dims{2, 2};
  const auto ra = oracle::partial_trace(bell.matrix(), dims, {0});
  const auto rb = oracle::partial_trace(bell.matrix(), dims, {1});
  CHECK(max_abs_diff(ra, ComplexMatrix::identity(2) * 0.5) <= 1e-15);
  CHECK(max_abs_diff(rb, ComplexMatrix::identity(2) * 0.5) <= 1e-15);
  CHECK(max_abs_diff(bell.reduced("A"), ra) <= 1e-15);
}

TEST_CASE("catalog states") {
  const auto b3 = catalog("bell", json{{"d", 3}});
  CHECK(b3.dim() == 9);
  CHECK(b3.matrix()(0, 4) == Complex(1.0 / 3.0));

  const auto ghz = catalog("ghz");
  CHECK(ghz.split().parties == std::vector<std::string>{"A", "B", "C"});
  CHECK(ghz.matrix()(0, 7) == Complex(0.5));

  const auto w = catalog("werner", json{{"p", 0.5}});
  const auto ev = oracle::eigenvalues(w.matrix());
  CHECK(ev[0] == doctest::Approx(5.0 / 8.0));
  for (int i = 1; i < 4; ++i) CHECK(ev[i] == doctest::Approx(1.0 / 8.0));

  const auto iso = catalog("isotropic", json{{"F", 0.7}});
  CHECK(oracle::eigenvalues(iso.matrix())[0] == doctest::Approx(0.7));
  CHECK(oracle::eigenvalues(iso.matrix())[1] == doctest::Approx(0.1));

  const auto ps0 = catalog("pure_schmidt", json{{"theta", 0.0}});
  CHECK(ps0.matrix()(0, 0) == Complex(1.0));
  const auto ra = ps0.reduced("A");
  CHECK(oracle::vn_entropy(ra) <= 1e-12);

  const auto mm = catalog("max_mixed", json{{"dims", "2,3"}});
  CHECK(mm.split().factor_dims == std::vector<int>{2, 3});
  CHECK(mm.num_bits() == doctest::Approx(std::log2(6.0)));
  const auto pp = catalog("product_pure", json{{"dims", json::array({3, 3})}});
  CHECK(pp.dim() == 9);

  CHECK_THROWS_AS(catalog("werner", json{{"p", 1.5}}), ValidationError);
  CHECK_THROWS_AS(catalog("werner"), ValidationError);
  CHECK_THROWS_AS(catalog("nonsense"), ValidationError);
  CHECK_THROWS_AS(catalog("domino", json{{"i", 9}}), ValidationError);
}

TEST_CASE("every catalog state validates and is deterministic") {
  const std::vector<std::pair<std::string, json>> entries{
      {"bell", json::object()},          {"ghz", json{{"n", 4}}},
      {"werner", json{{"p", 0.3}}},      {"isotropic", json{{"F", 0.4}, {"d", 3}}},
      {"classical_correlated", json{}},  {"pure_schmidt", json{{"theta", 0.7}}},
      {"domino", json{{"i", 5}}},        {"max_mixed", json{{"dims", "3,2"}}},
      {"product_pure", json::object()},
  };
  for (const auto& [name, params] : entries) {
    CAPTURE(name);
    const auto a = catalog(name, params);
    const auto b = catalog(name, params);
    CHECK(a.matrix() == b.matrix());
    CHECK(std::abs(a.matrix().trace() - 1.0) <= 1e-10);
    CHECK(oracle::eigenvalues(a.matrix()).back() >= -1e-10);
  }
  CHECK(catalog_names().size() == 9);
}

TEST_CASE("domino vectors form an orthonormal product basis") {
  const auto v = domino_vectors();
  REQUIRE(v.size() == 9);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      const Complex g = inner(v[i], v[j]);
      CHECK(std::abs(g - Complex(i == j ? 1.0 : 0.0)) <= 1e-12);
    }
  // product: the 3x3 coefficient matrix has rank one
  for (const auto& vec : v) {
    ComplexMatrix c(3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) c(a, b) = vec[a * 3 + b];
    const auto gram = c * c.adjoint();
    const auto ev = oracle::eigenvalues(gram);
    CHECK(ev[1] <= 1e-12);
  }
  // center tile |1>|1>
  CHECK(std::abs(v[0][4] - Complex(1.0)) <= 1e-15);
}

TEST_CASE("tensor and grouping") {
  const auto bell = catalog("bell");
  const auto two = tensor(bell, bell);
  CHECK(two.split().factor_assignment == std::vector<std::string>{"A", "B", "A", "B"});
  CHECK(two.num_bits() == 4.0);
  const auto grouped = group_by_party(two);
  CHECK(grouped.split().factor_assignment == std::vector<std::string>{"A", "A", "B", "B"});
  // grouped bell^2 is the d = 4 maximally entangled state across A|B
  CHECK(max_abs_diff(grouped.matrix(), maximally_entangled_projector(4)) <= 1e-15);
  const auto k2 = tensor_power_grouped(bell, 2);
  CHECK(k2.matrix() == grouped.matrix());
  const auto ra = k2.reduced("A");
  CHECK(max_abs_diff(ra, ComplexMatrix::identity(4) * 0.25) <= 1e-15);
}

TEST_CASE("state json round trip") {
  const auto w = catalog("werner", json{{"p", 0.25}});
  const json doc = state_to_json(w);
  const auto back = state_from_json(doc);
  CHECK(back.matrix() == w.matrix());
  CHECK(back.split() == w.split());

  const auto c = state_from_json(json{{"catalog", "bell"}, {"params", {{"d", 2}}}});
  CHECK(c.matrix() == catalog("bell").matrix());

  const json custom = {{"factor_dims", {2, 2, 2}},
                       {"parties", {"A", "B", "B"}},
                       {"matrix", matrix_to_json(ComplexMatrix::identity(8) * 0.125)}};
  const auto s = state_from_json(custom);
  CHECK(s.split().parties == std::vector<std::string>{"A", "B"});
  CHECK(s.split().party_dim("B") == 4);

  CHECK_THROWS_AS(state_from_json(json{{"matrix", 3}}), ParseError);
  CHECK_THROWS(state_from_json(json{{"factor_dims", {2}}, {"matrix", matrix_to_json(ComplexMatrix::identity(2))}}));
}
