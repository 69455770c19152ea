#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ncb/matlin.hpp"

using namespace ncb;

namespace {

CMatrix pauli_x() {
  CMatrix s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}

CMatrix pauli_z() {
  CMatrix s(2, 2);
  s << 1, 0, 0, -1;
  return s;
}

}  // namespace

TEST_SUITE_BEGIN("matlin");

TEST_CASE("operator_norm basics") {
  CHECK(operator_norm(CMatrix::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-12));

  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 1) = 2.0;
  CHECK(operator_norm(a) == doctest::Approx(2.0).epsilon(1e-12));

  CMatrix d = CMatrix::Zero(3, 3);
  d(1, 1) = 1;
  d(2, 2) = 2;
  CHECK(operator_norm(d) == doctest::Approx(2.0).epsilon(1e-12));

  CHECK(operator_norm(CMatrix::Zero(2, 2)) == doctest::Approx(0.0));

  CMatrix bad = CMatrix::Zero(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(operator_norm(bad), invalid_input);
}

TEST_CASE("orthonormalize_span dimensions") {
  const CMatrix i2 = CMatrix::Identity(2, 2);

  auto s1 = orthonormalize_span({i2, 2.0 * i2});
  CHECK(s1.dim() == 1);

  auto s2 = orthonormalize_span({i2, pauli_x()});
  CHECK(s2.dim() == 2);

  std::vector<CMatrix> units;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CMatrix e = CMatrix::Zero(2, 2);
      e(i, j) = 1;
      units.push_back(e);
    }
  auto s4 = orthonormalize_span(units);
  CHECK(s4.dim() == 4);
  // equals all of M2: any matrix projects onto itself
  std::mt19937_64 rng(7);
  CMatrix r = random_gaussian(2, 2, rng);
  CHECK(s4.residual(r) < 1e-10);

  CHECK(orthonormalize_span({}).dim() == 0);

  CMatrix i3 = CMatrix::Identity(3, 3);
  CHECK_THROWS_AS(orthonormalize_span({i2, i3}), invalid_input);
}

TEST_CASE("orthonormalize_span returns orthonormal basis") {
  std::mt19937_64 rng(21);
  std::vector<CMatrix> sp;
  for (int i = 0; i < 5; ++i) sp.push_back(random_gaussian(3, 3, rng));
  sp.push_back(sp[0] + sp[1]);  // deliberate redundancy
  auto s = orthonormalize_span(sp);
  CHECK(s.dim() == 5);
  for (Eigen::Index i = 0; i < s.dim(); ++i)
    for (Eigen::Index j = 0; j < s.dim(); ++j) {
      Complex g = trace_inner(s.basis[i], s.basis[j]);
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-10);
    }
}

TEST_CASE("orthonormalize_span idempotent") {
  std::mt19937_64 rng(3);
  std::vector<CMatrix> sp;
  for (int i = 0; i < 4; ++i) sp.push_back(random_gaussian(3, 3, rng));
  auto s = orthonormalize_span(sp);
  auto t = orthonormalize_span(s.basis);
  REQUIRE(t.dim() == s.dim());
  for (const auto& b : s.basis) CHECK(t.residual(b) < 1e-10);
  for (const auto& b : t.basis) CHECK(s.residual(b) < 1e-10);
}

TEST_CASE("assemble_block") {
  std::mt19937_64 rng(5);
  CMatrix a = random_gaussian(3, 3, rng);
  CHECK((assemble_block({{a}}) - a).norm() == doctest::Approx(0.0));

  CMatrix one = CMatrix::Identity(1, 1), zero = CMatrix::Zero(1, 1);
  CMatrix id2 = assemble_block({{one, zero}, {zero, one}});
  CHECK((id2 - CMatrix::Identity(2, 2)).norm() == doctest::Approx(0.0));

  // norm of ((I, sx), (sx, I)): oracle by direct 4x4 eigendecomposition of
  // the assembled hermitian matrix, computed here independently
  CMatrix i2 = CMatrix::Identity(2, 2), sx = pauli_x();
  CMatrix m(4, 4);
  m.setZero();
  m.topLeftCorner(2, 2) = i2;
  m.topRightCorner(2, 2) = sx;
  m.bottomLeftCorner(2, 2) = sx;
  m.bottomRightCorner(2, 2) = i2;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  const double oracle =
      std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(3)));
  CHECK(oracle == doctest::Approx(2.0).epsilon(1e-12));  // frozen value

  CMatrix built = assemble_block({{i2, sx}, {sx, i2}});
  CHECK(operator_norm(built) == doctest::Approx(oracle).epsilon(1e-12));

  CHECK_THROWS_AS(assemble_block({{i2, sx}, {sx}}), invalid_input);
  CHECK_THROWS_AS(assemble_block({{i2, sx}, {sx, CMatrix::Zero(3, 3)}}),
                  invalid_input);
}

TEST_CASE("compression inequality on random cells") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<CMatrix>> cells(2, std::vector<CMatrix>(2));
    double cellmax = 0;
    for (auto& row : cells)
      for (auto& c : row) {
        c = random_gaussian(3, 3, rng);
        cellmax = std::max(cellmax, operator_norm(c));
      }
    CHECK(operator_norm(assemble_block(cells)) >= cellmax - 1e-12);
  }
}

TEST_CASE("norm is multiplicative over kron") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    CMatrix a = random_gaussian(3, 2, rng), b = random_gaussian(2, 4, rng);
    CHECK(operator_norm(kron(a, b)) ==
          doctest::Approx(operator_norm(a) * operator_norm(b)).epsilon(1e-10));
  }
}

TEST_CASE("subspace projection and star closure") {
  auto s = orthonormalize_span({CMatrix::Identity(2, 2), pauli_x()});
  CHECK(s.is_star_closed());
  CHECK(s.contains(CMatrix::Identity(2, 2) + 3.0 * pauli_x()));
  CHECK(!s.contains(pauli_z()));

  CMatrix up = CMatrix::Zero(2, 2);
  up(0, 1) = 1;
  auto t = orthonormalize_span({CMatrix::Identity(2, 2), up});
  CHECK(!t.is_star_closed());
}

TEST_CASE("hermitian basis spans the hermitian part") {
  std::mt19937_64 rng(17);
  // *-closed span: identity, a hermitian, and a non-hermitian pair a, a*
  CMatrix h = random_hermitian(3, rng), a = random_gaussian(3, 3, rng);
  auto s = orthonormalize_span(
      {CMatrix::Identity(3, 3), h, a, a.adjoint().eval()});
  REQUIRE(s.dim() == 4);
  auto hb = hermitian_basis(s);
  REQUIRE(hb.size() == 4);
  for (const auto& b : hb) {
    CHECK(is_hermitian(b));
    CHECK(s.residual(b) < 1e-8);
  }
  for (std::size_t i = 0; i < hb.size(); ++i)
    for (std::size_t j = 0; j < hb.size(); ++j) {
      const double g = trace_inner(hb[i], hb[j]).real();
      CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-8);
    }

  CMatrix up = CMatrix::Zero(2, 2);
  up(0, 1) = 1;
  auto bad = orthonormalize_span({up});
  CHECK_THROWS_AS(hermitian_basis(bad), invalid_input);
}

TEST_CASE("frame operator spectrum is basis independent") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<CMatrix> sp;
    for (int i = 0; i < 3; ++i) sp.push_back(random_gaussian(3, 3, rng));
    auto s = orthonormalize_span(sp);
    auto spec1 = frame_operator_spectrum(s.basis);

    // re-mix the basis by a random recombination, re-orthonormalize
    std::vector<CMatrix> mixed;
    CMatrix u = random_unitary(static_cast<Eigen::Index>(s.basis.size()), rng);
    for (Eigen::Index i = 0; i < s.dim(); ++i) {
      CMatrix m = CMatrix::Zero(3, 3);
      for (Eigen::Index j = 0; j < s.dim(); ++j) m += u(i, j) * s.basis[j];
      mixed.push_back(m);
    }
    auto spec2 = frame_operator_spectrum(orthonormalize_span(mixed).basis);
    REQUIRE(spec1.size() == spec2.size());
    for (std::size_t i = 0; i < spec1.size(); ++i)
      CHECK(spec1[i] == doctest::Approx(spec2[i]).epsilon(1e-9));
  }
}

TEST_CASE("random unitary is unitary and deterministic per seed") {
  std::mt19937_64 rng(23);
  CMatrix u = random_unitary(4, rng);
  CHECK((u.adjoint() * u - CMatrix::Identity(4, 4)).norm() < 1e-12);

  std::mt19937_64 r1(mix_seed({1, 2, 3})), r2(mix_seed({1, 2, 3}));
  CHECK((random_unitary(3, r1) - random_unitary(3, r2)).norm() == 0.0);
  std::mt19937_64 r3(mix_seed({1, 2, 4}));
  CHECK((random_unitary(3, r1) - random_unitary(3, r3)).norm() != 0.0);
}

TEST_CASE("vec unvec roundtrip") {
  std::mt19937_64 rng(29);
  CMatrix a = random_gaussian(3, 2, rng);
  CHECK((unvec(vec(a), 3, 2) - a).norm() == doctest::Approx(0.0));
}

TEST_SUITE_END();
