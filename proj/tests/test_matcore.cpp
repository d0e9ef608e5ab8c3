#include "doctest.h"
#include "infoloc/errors.hpp"
#include "infoloc/matcore.hpp"
#include "oracles.hpp"

using namespace infoloc;

namespace {

ComplexMatrix bell_projector() {
  ComplexVector psi{1.0 / std::sqrt(2.0), 0.0, 0.0, 1.0 / std::sqrt(2.0)};
  return ComplexMatrix::outer(psi);
}

double reconstruction_error(const ComplexMatrix& m, const EigenDecomposition& e) {
  ComplexMatrix rebuilt = e.eigenvectors * ComplexMatrix::diagonal(e.eigenvalues) * e.eigenvectors.adjoint();
  return max_abs_diff(rebuilt, m);
}

}  // namespace

TEST_CASE("jacobi reconstructs random hermitian matrices") {
  for (int dim : {1, 2, 3, 4, 8, 9, 16, 27, 32, 64}) {
    for (std::uint64_t seed = 1; seed <= (dim <= 16 ? 5u : 2u); ++seed) {
      const ComplexMatrix h = random_hermitian(dim, seed * 97 + dim);
      const auto e = hermitian_eig(h);
      CAPTURE(dim);
      CHECK(reconstruction_error(h, e) <= 1e-10);
      CHECK(unitarity_defect(e.eigenvectors) <= 1e-10);
      CHECK(e.sweeps <= 100);
      CHECK(std::is_sorted(e.eigenvalues.rbegin(), e.eigenvalues.rend()));
      const auto ref = oracle::eigenvalues(h);
      for (int i = 0; i < dim; ++i) CHECK(e.eigenvalues[i] == doctest::Approx(ref[i]).epsilon(1e-10));
    }
  }
}

TEST_CASE("jacobi handles degenerate and diagonal input") {
  const auto e = hermitian_eig(ComplexMatrix::identity(5));
  CHECK(e.sweeps <= 1);
  for (double v : e.eigenvalues) CHECK(v == doctest::Approx(1.0));
  const std::vector<double> d{0.1, 0.7, 0.2};
  const auto f = hermitian_eig(ComplexMatrix::diagonal(d));
  CHECK(f.eigenvalues[0] == doctest::Approx(0.7));
  CHECK(f.eigenvalues[2] == doctest::Approx(0.1));
  const auto b = hermitian_eig(bell_projector());
  CHECK(b.eigenvalues[0] == doctest::Approx(1.0));
  CHECK(reconstruction_error(bell_projector(), b) <= 1e-12);
}

TEST_CASE("jacobi is deterministic") {
  const ComplexMatrix h = random_hermitian(12, 5);
  const auto a = hermitian_eig(h);
  const auto b = hermitian_eig(h);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.eigenvectors == b.eigenvectors);
}

TEST_CASE("non-hermitian input is rejected") {
  ComplexMatrix m(2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_eig(m), ValidationError);
}

TEST_CASE("partial trace examples") {
  ComplexMatrix p00(4);
  p00(0, 0) = 1.0;
  const std::vector<int> dims{2, 2};
  const std::vector<int> keep_a{0};
  const auto ra = partial_trace(p00, dims, keep_a);
  CHECK(ra(0, 0) == Complex(1.0));
  CHECK(std::abs(ra(1, 1)) == 0.0);

  const auto rb = partial_trace(bell_projector(), dims, keep_a);
  CHECK(max_abs_diff(rb, ComplexMatrix::identity(2) * Complex(0.5)) <= 1e-15);

  const std::vector<int> bad{3, 2};
  CHECK_THROWS_AS(partial_trace(p00, bad, keep_a), DimensionError);
  CHECK_THROWS_AS(partial_trace(p00, dims, std::vector<int>{}), DimensionError);
}

TEST_CASE("partial trace of a product scales by the traced trace") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ComplexMatrix a = random_hermitian(3, seed);
    const ComplexMatrix b = random_hermitian(2, seed + 100);
    const ComplexMatrix ab = tensor(a, b);
    const std::vector<int> dims{3, 2};
    const auto ra = partial_trace(ab, dims, std::vector<int>{0});
    CHECK(max_abs_diff(ra, a * b.trace()) <= 1e-12);
    const auto rb = partial_trace(ab, dims, std::vector<int>{1});
    CHECK(max_abs_diff(rb, b * a.trace()) <= 1e-12);
  }
}

TEST_CASE("partial trace agrees with the loop oracle and composes") {
  const std::vector<int> dims{2, 3, 2};
  const ComplexMatrix m = random_density(12, 5, 42);
  for (const std::vector<int>& keep : {std::vector<int>{0}, {1}, {2}, {0, 2}, {1, 2}, {0, 1, 2}}) {
    CHECK(max_abs_diff(partial_trace(m, dims, keep), oracle::partial_trace(m, dims, keep)) <= 1e-13);
  }
  // trace factor 2 then factor 1 == trace {1,2} jointly
  const auto step1 = partial_trace(m, dims, std::vector<int>{0, 1});
  const auto step2 = partial_trace(step1, std::vector<int>{2, 3}, std::vector<int>{0});
  const auto joint = partial_trace(m, dims, std::vector<int>{0});
  CHECK(max_abs_diff(step2, joint) <= 1e-12);
  CHECK(std::abs(joint.trace() - m.trace()) <= 1e-12);
}

TEST_CASE("tensor matches kron and is associative") {
  const ComplexMatrix a = random_hermitian(2, 1), b = random_hermitian(3, 2), c = random_hermitian(2, 3);
  CHECK(max_abs_diff(tensor(a, b), oracle::kron(a, b)) <= 1e-15);
  // integer entries so both association orders round identically
  auto ints = [](int dim, int offset) {
    ComplexMatrix m(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) m(i, j) = Complex((i * 3 + j + offset) % 5 - 2, (i + 2 * j) % 3 - 1);
    return m;
  };
  const ComplexMatrix p = ints(2, 0), q = ints(3, 1), r = ints(2, 2);
  CHECK(tensor(tensor(p, q), r) == tensor(p, tensor(q, r)));
  CHECK(max_abs_diff(tensor(tensor(a, b), c), tensor(a, tensor(b, c))) <= 1e-15);
  const ComplexVector x{1.0, 2.0}, y{Complex(0, 1), 3.0, -1.0};
  const auto xy = tensor(std::span<const Complex>(x), std::span<const Complex>(y));
  CHECK(xy.size() == 6);
  CHECK(xy[4] == Complex(6.0));
}

TEST_CASE("permute_factors and embed_operator") {
  const ComplexMatrix a = random_hermitian(2, 7), b = random_hermitian(3, 8);
  const std::vector<int> dims{2, 3};
  const std::vector<int> swap{1, 0};
  CHECK(max_abs_diff(permute_factors(tensor(a, b), dims, swap), tensor(b, a)) <= 1e-15);

  const ComplexMatrix u = random_unitary(2, 3);
  const std::vector<int> dims3{2, 2, 2};
  const auto e = embed_operator(u, dims3, std::vector<int>{1});
  const auto ref = tensor(tensor(ComplexMatrix::identity(2), u), ComplexMatrix::identity(2));
  CHECK(max_abs_diff(e, ref) <= 1e-15);
  const ComplexMatrix cnot = [] {
    ComplexMatrix m(4);
    m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
    return m;
  }();
  // CNOT with control on factor 2 and target on factor 0
  const auto e2 = embed_operator(cnot, dims3, std::vector<int>{2, 0});
  ComplexVector v(8, 0.0);
  v[1] = 1.0;  // |001>
  const auto w = e2 * v;
  CHECK(w[5] == Complex(1.0));  // |101>
}

TEST_CASE("random unitaries and densities") {
  for (int dim : {2, 3, 4, 8}) {
    const auto u = random_unitary(dim, 11);
    CHECK(unitarity_defect(u) <= 1e-10);
    CHECK(u == random_unitary(dim, 11));
    CHECK_FALSE(u == random_unitary(dim, 12));
  }
  const auto pure = random_density(4, 1, 9);
  CHECK(oracle::vn_entropy(pure) <= 1e-9);
  const auto mixed = random_density(6, 4, 9);
  const auto ev = oracle::eigenvalues(mixed);
  CHECK(ev[3] > 1e-6);
  CHECK(std::abs(ev[4]) <= 1e-12);
  CHECK(std::abs(mixed.trace() - 1.0) <= 1e-12);
  CHECK(random_density(6, 4, 9) == mixed);
  CHECK_THROWS(random_density(4, 0, 1));
  CHECK_THROWS(random_density(4, 5, 1));
}

TEST_CASE("exp of i times a hermitian generator is unitary") {
  std::vector<double> params(9);
  for (int i = 0; i < 9; ++i) params[i] = 0.3 * (i - 4);
  const auto h = hermitian_from_params(3, params);
  CHECK(hermiticity_defect(h).deviation == 0.0);
  CHECK(h(0, 1) == Complex(params[3], params[4]));
  const auto u = expi_hermitian(h);
  CHECK(unitarity_defect(u) <= 1e-12);
  // exp(i * diag(t)) = diag(exp(i t))
  const std::vector<double> t{0.5, -1.0};
  const auto d = expi_hermitian(ComplexMatrix::diagonal(t));
  CHECK(std::abs(d(0, 0) - std::polar(1.0, 0.5)) <= 1e-14);
  CHECK(std::abs(d(1, 1) - std::polar(1.0, -1.0)) <= 1e-14);
}
