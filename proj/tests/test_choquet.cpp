#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "ncb/choquet.hpp"
#include "support/commutative_oracle.hpp"

using namespace ncb;

namespace {

CMatrix diag3(double a, double b, double c) {
  CMatrix m = CMatrix::Zero(3, 3);
  m.diagonal() << a, b, c;
  return m;
}

OperatorSystem three_point_system() {
  return make_opsys({CMatrix::Identity(3, 3), diag3(0, 1, 2)});
}

OperatorSystem pauli_system() {
  CMatrix sx(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  return make_opsys({CMatrix::Identity(2, 2), sx, sz});
}

// coordinates of a diagonal matrix in the system's unit-summing basis
CVector coords_of(const OperatorSystem& s, const CMatrix& target) {
  auto basis = unit_summing_basis(s);
  CMatrix cols(static_cast<Eigen::Index>(target.size()), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j)
    cols.col(static_cast<Eigen::Index>(j)) = vec(basis[j]);
  return cols.colPivHouseholderQr().solve(vec(target));
}

}  // namespace

TEST_SUITE("choquet") {

TEST_CASE("ucp extension set of the middle point is a segment") {
  auto s = three_point_system();
  REQUIRE(s.num_blocks() == 3);
  auto set = ucp_extension_set(s, 1);
  REQUIRE(set.cone_dims == std::vector<Eigen::Index>{1, 1, 1});

  // hand result: the extensions are (t, 1-2t, t) for t in [0, 1/2].
  // drive the feasibility engine to both endpoints of the parameter
  BlockHerm dir = BlockHerm::zero(set.cone_dims);
  dir.blocks[0](0, 0) = 1.0;
  auto hi = maximize_linear(set.sp, dir);
  REQUIRE(hi.status == SolveStatus::Optimal);
  CHECK(hi.upper_bound == doctest::Approx(0.5).epsilon(1e-7));
  dir.blocks[0](0, 0) = -1.0;
  auto lo = maximize_linear(set.sp, dir);
  REQUIRE(lo.status == SolveStatus::Optimal);
  CHECK(lo.upper_bound == doctest::Approx(0.0).scale(1).epsilon(1e-7));

  // any feasible point the solver produces lies on the segment
  const auto& p = hi.point;
  const double t = p.blocks[0](0, 0).real();
  CHECK(p.blocks[2](0, 0).real() == doctest::Approx(t).epsilon(1e-6));
  CHECK(p.blocks[1](0, 0).real() == doctest::Approx(1 - 2 * t).epsilon(1e-6));
}

TEST_CASE("ucp extension sets at the endpoints are forced") {
  auto s = three_point_system();
  for (int k : {0, 2}) {
    auto set = ucp_extension_set(s, k);
    auto res = singleton_test(set.sp);
    CHECK(res.is_singleton);
  }
}

TEST_CASE("ucp extension set contains the irrep for a full block") {
  auto s = pauli_system();
  REQUIRE(s.num_blocks() == 1);
  auto set = ucp_extension_set(s, 0);  // validate() checked the known point
  CHECK(set.sp.known_point.has_value());
  CHECK(set.sp.known_point->blocks[0].rows() == 4);
}

TEST_CASE("is_boundary on the three point system") {
  auto s = three_point_system();
  auto b0 = is_boundary(s, 0);
  auto b1 = is_boundary(s, 1);
  auto b2 = is_boundary(s, 2);
  CHECK(b0.is_boundary);
  CHECK(b2.is_boundary);
  CHECK_FALSE(b1.is_boundary);
  REQUIRE(b1.certificate.has_witness);
  // the witness is a different extension, hence on the segment away from
  // the point mass at the middle
  const auto& w = b1.certificate.witness;
  const double t = w.blocks[0](0, 0).real();
  CHECK(t > 1e-7);
  CHECK(w.blocks[2](0, 0).real() == doctest::Approx(t).epsilon(1e-5));
  CHECK(w.blocks[1](0, 0).real() == doctest::Approx(1 - 2 * t).epsilon(1e-5));
}

TEST_CASE("identity representation of a full block is boundary") {
  auto s = pauli_system();
  auto dec = is_boundary(s, 0);
  CHECK(dec.is_boundary);

  // same statement for the full matrix algebra itself
  std::vector<CMatrix> m2;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CMatrix e = CMatrix::Zero(2, 2);
      e(i, j) = 1;
      m2.push_back(e);
    }
  auto full = make_opsys(m2);
  CHECK(is_boundary(full, 0).is_boundary);
}

TEST_CASE("full diagonal algebra: every point is boundary") {
  std::vector<CMatrix> gens;
  for (int i = 0; i < 3; ++i) {
    CMatrix e = CMatrix::Zero(3, 3);
    e(i, i) = 1;
    gens.push_back(e);
  }
  auto s = make_opsys(gens);
  for (int k = 0; k < 3; ++k) CHECK(is_boundary(s, k).is_boundary);
}

TEST_CASE("peaking gap matches scalar arithmetic") {
  auto s = three_point_system();
  auto seq = extract_params(s);
  // the diagonal element with values (1, 0.6, 0.2) peaks at the first point
  CVector z = coords_of(s, diag3(1.0, 0.6, 0.2));
  std::vector<std::vector<CVector>> cells{{z}};
  CHECK(peaking_gap(seq, 0, cells) == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(peaking_gap(seq, 1, cells) == doctest::Approx(0.6 - 1.0).epsilon(1e-9));
  CHECK(peaking_gap(seq, 2, cells) == doctest::Approx(0.2 - 1.0).epsilon(1e-9));
}

TEST_CASE("find_peaking certifies the endpoint blocks") {
  auto s = three_point_system();
  auto seq = extract_params(s);
  for (int k : {0, 2}) {
    auto cert = find_peaking(s, k, 1, 50, 3);
    REQUIRE(cert.has_value());
    CHECK(cert->gap > 1e-6);
    // the reported gap is the from-scratch evaluation of the cells
    CHECK(peaking_gap(seq, k, cert->cells) == doctest::Approx(cert->gap).epsilon(1e-12));
  }
}

TEST_CASE("find_peaking returns nothing for the middle point") {
  auto s = three_point_system();
  // the middle value is a convex combination, so no certificate can verify
  auto cert = find_peaking(s, 1, 2, 30, 0);
  CHECK_FALSE(cert.has_value());
}

TEST_CASE("find_peaking is vacuous for a single block") {
  auto s = pauli_system();
  auto cert = find_peaking(s, 0, 2, 10, 0);
  REQUIRE(cert.has_value());
  CHECK(cert->gap == doctest::Approx(1.0));
}

TEST_CASE("find_peaking is deterministic in the seed") {
  auto s = three_point_system();
  auto a = find_peaking(s, 0, 1, 40, 11);
  auto b = find_peaking(s, 0, 1, 40, 11);
  REQUIRE(a.has_value());
  REQUIRE(b.has_value());
  CHECK(a->gap == b->gap);
  REQUIRE(a->cells.size() == b->cells.size());
  CHECK((a->cells[0][0] - b->cells[0][0]).norm() == 0.0);
}

TEST_CASE("analyze_boundary on the three point system") {
  auto s = three_point_system();
  auto rep = analyze_boundary(s, 1, 40, 0);
  REQUIRE(rep.blocks.size() == 3);
  CHECK(rep.boundary_blocks() == std::vector<int>{0, 2});
  CHECK(rep.blocks[0].method == "singleton+peaking");
  CHECK(rep.blocks[1].method == "singleton");
  CHECK_FALSE(rep.blocks[1].peaking.has_value());
  CHECK(rep.blocks[2].peaking.has_value());
}

TEST_CASE("analyze_boundary: a C*-algebra is all boundary") {
  std::vector<CMatrix> gens;
  for (int i = 0; i < 3; ++i) {
    CMatrix e = CMatrix::Zero(3, 3);
    e(i, i) = 1;
    gens.push_back(e);
  }
  auto rep = analyze_boundary(make_opsys(gens), 1, 30, 0);
  CHECK(rep.boundary_blocks() == std::vector<int>{0, 1, 2});
}

TEST_CASE("analyze_boundary: irreducible system has its block boundary") {
  auto rep = analyze_boundary(pauli_system(), 1, 10, 0);
  REQUIRE(rep.blocks.size() == 1);
  CHECK(rep.blocks[0].is_boundary);
  CHECK(rep.blocks[0].peaking.has_value());
}

TEST_CASE("envelope of the three point system lives on the endpoints") {
  auto s = three_point_system();
  auto env = c_star_envelope(s, 3, 40, 0);
  CHECK(env.boundary_blocks == std::vector<int>{0, 2});
  CHECK(env.ideal_blocks == std::vector<int>{1});
  CHECK_FALSE(env.is_reduced);
  CHECK(env.envelope_system.ambient() == 2);
  CHECK(env.envelope_system.dim() == 2);
  CHECK(env.envelope_system.num_blocks() == 2);
  CHECK(env.max_isometry_deviation < 1e-6);

  // the ideal is the central summand of the middle point
  CMatrix expected = CMatrix::Zero(3, 3);
  expected(1, 1) = 1.0;
  CHECK((env.ideal_projection - expected).norm() < 1e-8);
}

TEST_CASE("middle value is a convex combination: norms by hand") {
  // || diag(a, a+b, a+2b) || = max(|a|, |a+2b|) because the middle entry
  // is the average of the outer two
  auto s = three_point_system();
  std::mt19937_64 rng(21);
  std::normal_distribution<double> dist(0.0, 1.0);
  for (int t = 0; t < 10; ++t) {
    const double a = dist(rng), b = dist(rng);
    CVector z = coords_of(s, diag3(a, a + b, a + 2 * b));
    std::vector<std::vector<CVector>> cells{{z}};
    const double expect = std::max(std::abs(a), std::abs(a + 2 * b));
    CHECK(level_norm(s, cells) == doctest::Approx(expect).epsilon(1e-9));
  }
}

TEST_CASE("irreducible and full diagonal systems are reduced") {
  auto env = c_star_envelope(pauli_system(), 2, 10, 0);
  CHECK(env.is_reduced);
  CHECK(env.ideal_blocks.empty());
  CHECK(env.envelope_system.ambient() == 2);
  CHECK(env.envelope_system.dim() == 3);

  auto two = make_opsys({CMatrix::Identity(2, 2),
                         (CMatrix(2, 2) << 0, 0, 0, 1).finished()});
  auto env2 = c_star_envelope(two, 2, 20, 0);
  CHECK(env2.is_reduced);
  CHECK(env2.envelope_system.ambient() == 2);
}

TEST_CASE("commutative oracle agrees with the convex test") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::uniform_int_distribution<int> npts(3, 5);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = npts(rng);
    // random diagonal system; in half the trials plant a convex combination
    CMatrix d1 = CMatrix::Zero(n, n), d2 = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      d1(i, i) = dist(rng);
      d2(i, i) = dist(rng);
    }
    if (trial % 2 == 1) {
      d1(0, 0) = 0.5 * (d1(1, 1) + d1(2, 2));
      d2(0, 0) = 0.5 * (d2(1, 1) + d2(2, 2));
    }
    auto s = make_opsys({CMatrix::Identity(n, n), d1, d2});
    auto seq = extract_params(s);
    const int nb = seq.num_maps();
    Eigen::MatrixXd g(seq.source_dim(), nb);
    for (int j = 0; j < nb; ++j)
      for (Eigen::Index i = 0; i < seq.source_dim(); ++i)
        g(i, j) = seq.maps[static_cast<std::size_t>(j)]
                      .generators[static_cast<std::size_t>(i)](0, 0)
                      .real();
    for (int k = 0; k < nb; ++k) {
      const bool convex = is_boundary(s, k).is_boundary;
      const bool oracle = ncb_testing::commutative_boundary_oracle(g, k);
      CHECK(convex == oracle);
    }
  }
}

}  // TEST_SUITE
