#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "ncb/opsys.hpp"

using namespace ncb;

namespace {

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CMatrix unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  CMatrix m = CMatrix::Zero(n, n);
  m(i, j) = 1.0;
  return m;
}

CVector zvec(std::initializer_list<Complex> vals) {
  CVector z(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (auto v : vals) z(i++) = v;
  return z;
}

ParamMap scalar_map(std::initializer_list<double> weights) {
  std::vector<CMatrix> g;
  for (double w : weights) {
    CMatrix m(1, 1);
    m(0, 0) = w;
    g.push_back(m);
  }
  return validate_param_map(g);
}

}  // namespace

TEST_SUITE("opsys") {

TEST_CASE("validate_param_map accepts resolutions of identity") {
  auto triv = validate_param_map({CMatrix::Identity(2, 2)});
  CHECK(triv.source_dim() == 1);
  CHECK(triv.target_dim() == 2);

  const CMatrix id = CMatrix::Identity(2, 2);
  auto pm = validate_param_map({(id + pauli_x()) / 2.0, (id - pauli_x()) / 2.0});
  CHECK(pm.source_dim() == 2);
  // evaluation is the linear combination of the generators
  CMatrix v = pm.eval(zvec({1.0, -1.0}));
  CHECK((v - pauli_x()).norm() < 1e-12);
}

TEST_CASE("validate_param_map rejects bad generators") {
  const CMatrix id = CMatrix::Identity(2, 2);
  CHECK_THROWS_AS(validate_param_map({unit(2, 0, 1), id - unit(2, 0, 1)}),
                  star_violation);
  CHECK_THROWS_AS(validate_param_map({id, id}), unit_violation);
  CHECK_THROWS_AS(validate_param_map({}), invalid_input);
  CHECK_THROWS_AS(validate_param_map({id, CMatrix::Identity(3, 3)}), invalid_input);
}

TEST_CASE("build_opsys: scalars inside M2") {
  ParamSequence seq;
  seq.maps.push_back(validate_param_map({CMatrix::Identity(2, 2)}));
  auto s = build_opsys(seq);
  CHECK(s.dim() == 1);
  CHECK(s.ambient() == 2);
  CHECK(s.num_blocks() == 1);
  CHECK(s.block_dims()[0] == 1);
  CHECK(s.decomposition.blocks[0].multiplicity == 2);
  CHECK_FALSE(s.dimension_dropped);
}

TEST_CASE("build_opsys: two scalar blocks give the diagonal of M2") {
  ParamSequence seq;
  seq.maps.push_back(scalar_map({1.0, 0.0}));
  seq.maps.push_back(scalar_map({0.0, 1.0}));
  auto s = build_opsys(seq);
  CHECK(s.dim() == 2);
  CHECK(s.ambient() == 2);
  CHECK(s.num_blocks() == 2);
  CHECK(s.algebra.dim() == 2);
  CHECK(s.space.contains(unit(2, 0, 0)));
  CHECK(s.space.contains(unit(2, 1, 1)));
  CHECK_FALSE(s.dimension_dropped);
}

TEST_CASE("build_opsys: midpoint block appended to two evaluations") {
  ParamSequence seq;
  seq.maps.push_back(scalar_map({1.0, 0.0}));
  seq.maps.push_back(scalar_map({0.0, 1.0}));
  seq.maps.push_back(scalar_map({0.5, 0.5}));
  auto s = build_opsys(seq);

  // oracle: span the two block-diagonal generators by hand
  CMatrix g1 = CMatrix::Zero(3, 3), g2 = CMatrix::Zero(3, 3);
  g1.diagonal() << 1, 0, 0.5;
  g2.diagonal() << 0, 1, 0.5;
  auto direct = orthonormalize_span({g1, g2});
  CHECK(direct.dim() == 2);

  CHECK(s.dim() == 2);
  CHECK(s.ambient() == 3);
  CHECK(s.space.contains(CMatrix::Identity(3, 3)));
  CMatrix d = CMatrix::Zero(3, 3);
  d.diagonal() << 0, 1, 0.5;
  CHECK(s.space.contains(d));
  CHECK(s.num_blocks() == 3);
  CHECK_FALSE(s.dimension_dropped);
}

TEST_CASE("build_opsys flags a dimension drop") {
  ParamSequence seq;
  seq.maps.push_back(scalar_map({0.5, 0.5}));
  auto s = build_opsys(seq);
  CHECK(s.dim() == 1);
  CHECK(s.dimension_dropped);
}

TEST_CASE("make_opsys validates the span") {
  CHECK_THROWS_AS(make_opsys({pauli_x()}), invalid_input);  // no unit
  CHECK_THROWS_AS(make_opsys({CMatrix::Identity(2, 2), unit(2, 0, 1)}),
                  invalid_input);  // not *-closed
  CHECK_THROWS_AS(make_opsys({}), invalid_input);
}

TEST_CASE("invariants: irreducible pauli system") {
  auto s = make_opsys({CMatrix::Identity(2, 2), pauli_x(), pauli_z()});
  auto rep = invariants(s);
  CHECK(rep.d == 3);
  CHECK(rep.num_blocks == 1);
  REQUIRE(rep.block_dims.size() == 1);
  CHECK(rep.block_dims[0] == 2);
  CHECK(rep.compression_dims[0] == 3);
  CHECK(rep.ok);

  // oracle for irreducibility: solve [m, sx] = [m, sz] = 0 directly.
  // stack both commutator maps on M2 coordinates and look at the kernel.
  Eigen::Matrix<Complex, 8, 4> comm;
  const CMatrix sx = pauli_x(), sz = pauli_z();
  const CMatrix i2 = CMatrix::Identity(2, 2);
  comm.topRows(4) = kron(i2, sx) - kron(sx.transpose(), i2);
  comm.bottomRows(4) = kron(i2, sz) - kron(sz.transpose(), i2);
  Eigen::JacobiSVD<CMatrix> svd(comm);
  int null_dim = 0;
  for (Eigen::Index i = 0; i < 4; ++i)
    if (svd.singularValues()(i) < 1e-10) ++null_dim;
  CHECK(null_dim == 1);  // scalars only, so one block of full size
}

TEST_CASE("invariants: diagonal M3 and full M2 hit the bound") {
  auto diag = make_opsys({unit(3, 0, 0), unit(3, 1, 1), unit(3, 2, 2)});
  auto rep = invariants(diag);
  CHECK(rep.d == 3);
  CHECK(rep.num_blocks == 3);
  for (auto n : rep.block_dims) CHECK(n == 1);

  auto full = make_opsys({unit(2, 0, 0), unit(2, 0, 1), unit(2, 1, 0), unit(2, 1, 1)});
  auto frep = invariants(full);
  CHECK(frep.d == 4);
  CHECK(frep.num_blocks == 1);
  CHECK(frep.block_dims[0] == 2);
}

TEST_CASE("extract_params: scalars in M2") {
  ParamSequence seq;
  seq.maps.push_back(validate_param_map({CMatrix::Identity(2, 2)}));
  auto s = build_opsys(seq);
  auto out = extract_params(s);
  CHECK(out.source_dim() == 1);
  CHECK(out.num_maps() == 1);
  CHECK(out.maps[0].target_dim() == 1);
  CHECK(std::abs(out.maps[0].generators[0](0, 0) - 1.0) < 1e-10);
  CHECK(out.irreducible == CheckStatus::Verified);
  CHECK(out.faithful == CheckStatus::Verified);
}

TEST_CASE("extract_params: pauli system splits off the traceless part") {
  auto s = make_opsys({CMatrix::Identity(2, 2), pauli_x(), pauli_z()});
  auto seq = extract_params(s);
  CHECK(seq.source_dim() == 3);
  CHECK(seq.num_maps() == 1);
  CHECK(seq.maps[0].target_dim() == 2);

  // the basis itself: first d-1 elements are the trace-orthogonal
  // complement of the identity, which here is exactly span{sx, sz}
  auto basis = unit_summing_basis(s);
  REQUIRE(basis.size() == 3);
  for (std::size_t j = 0; j + 1 < basis.size(); ++j)
    CHECK(std::abs(basis[j].trace()) < 1e-10);
  auto complement = orthonormalize_span({basis[0], basis[1]});
  CHECK(complement.dim() == 2);
  CHECK(complement.contains(pauli_x()));
  CHECK(complement.contains(pauli_z()));
  CMatrix bsum = basis[0] + basis[1] + basis[2];
  CHECK((bsum - CMatrix::Identity(2, 2)).norm() < 1e-10);

  // the map generators are that basis pushed through the irrep, i.e. a
  // unitary conjugate of it: traces, Gram matrix and spectra all carry over
  const auto& g = seq.maps[0].generators;
  REQUIRE(g.size() == 3);
  for (std::size_t j = 0; j + 1 < g.size(); ++j)
    CHECK(std::abs(g[j].trace()) < 1e-10);
  CMatrix total = g[0] + g[1] + g[2];
  CHECK((total - CMatrix::Identity(2, 2)).norm() < 1e-10);
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b)
      CHECK(std::abs(trace_inner(g[a], g[b]) - trace_inner(basis[a], basis[b])) < 1e-9);
    Eigen::SelfAdjointEigenSolver<CMatrix> eg(g[a]), eb(basis[a]);
    CHECK((eg.eigenvalues() - eb.eigenvalues()).norm() < 1e-9);
  }

  CHECK(seq.irreducible == CheckStatus::Verified);
  CHECK(seq.faithful == CheckStatus::Verified);
}

TEST_CASE("extract_params: diagonal two-dimensional system") {
  CMatrix d0 = CMatrix::Zero(3, 3);
  d0.diagonal() << 0, 1, 2;
  auto s = make_opsys({CMatrix::Identity(3, 3), d0});
  auto seq = extract_params(s);
  CHECK(seq.source_dim() == 2);
  CHECK(seq.num_maps() == 3);
  for (const auto& m : seq.maps) CHECK(m.target_dim() == 1);

  // oracle: evaluating the sequence at z must reproduce the diagonal entries
  // of z1*s1 + z2*s2 computed by explicit basis arithmetic
  auto basis = unit_summing_basis(s);
  REQUIRE(basis.size() == 2);
  CVector z = zvec({Complex(0.3, 0.1), Complex(-1.2, 0.4)});
  CMatrix lin = z(0) * basis[0] + z(1) * basis[1];
  for (int k = 0; k < 3; ++k) {
    Complex got = seq.maps[static_cast<std::size_t>(k)].eval(z)(0, 0);
    // block order matches the coordinate order for diagonal systems
    CHECK(std::abs(got - lin(k, k)) < 1e-9);
  }
}

TEST_CASE("verify_basic_flags detects failures") {
  // one scalar map with a kernel: z1 - z2 direction is invisible
  ParamSequence seq;
  seq.maps.push_back(scalar_map({0.5, 0.5}));
  verify_basic_flags(seq);
  CHECK(seq.irreducible == CheckStatus::Verified);
  CHECK(seq.faithful == CheckStatus::Failed);

  // diagonal generators in M2 commute, so the single map is reducible
  ParamSequence seq2;
  seq2.maps.push_back(validate_param_map({unit(2, 0, 0), unit(2, 1, 1)}));
  verify_basic_flags(seq2);
  CHECK(seq2.irreducible == CheckStatus::Failed);
  CHECK(seq2.faithful == CheckStatus::Verified);
  CHECK(seq2.strongly_separated == CheckStatus::Unverified);
}

TEST_CASE("level_norm: unit vector gives one in every block") {
  CMatrix d0 = CMatrix::Zero(3, 3);
  d0.diagonal() << 0, 1, 2;
  auto s = make_opsys({CMatrix::Identity(3, 3), d0});
  auto seq = extract_params(s);
  CVector ones = CVector::Ones(seq.source_dim());
  std::vector<std::vector<CVector>> cells{{ones}};
  for (int k = 0; k < seq.num_maps(); ++k)
    CHECK(level_norm(seq, cells, k) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(level_norm(s, cells) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("level_norm: three point masses give scalar absolute values") {
  // diagonal system containing diag(1, 0.6, 0.2); block norms are the entries
  CMatrix d0 = CMatrix::Zero(3, 3);
  d0.diagonal() << 1.0, 0.6, 0.2;
  auto s = make_opsys({unit(3, 0, 0), unit(3, 1, 1), unit(3, 2, 2)});
  auto seq = extract_params(s);
  auto basis = unit_summing_basis(s);

  // coordinates of d0 in the extracted basis (basis is orthogonal here)
  CVector z(3);
  CMatrix coords(9, 3);
  for (int j = 0; j < 3; ++j) coords.col(j) = vec(basis[static_cast<std::size_t>(j)]);
  z = coords.colPivHouseholderQr().solve(vec(d0));
  std::vector<std::vector<CVector>> cells{{z}};

  std::vector<double> norms;
  for (int k = 0; k < 3; ++k) norms.push_back(level_norm(seq, cells, k));
  std::sort(norms.begin(), norms.end());
  CHECK(norms[0] == doctest::Approx(0.2).epsilon(1e-8));
  CHECK(norms[1] == doctest::Approx(0.6).epsilon(1e-8));
  CHECK(norms[2] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(level_norm(s, cells) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("level_norm: ambient equals the max over blocks") {
  ParamSequence seq;
  std::vector<CMatrix> g;
  const CMatrix id = CMatrix::Identity(2, 2);
  g.push_back((id + pauli_x()) / 2.0);
  g.push_back((id - pauli_x()) / 2.0 + 0.3 * pauli_z());
  g.push_back(-0.3 * pauli_z());
  // make the third generator hermitian but nontrivial
  seq.maps.push_back(validate_param_map(g));
  seq.maps.push_back(scalar_map({0.2, 0.5, 0.3}));
  auto s = build_opsys(seq);
  auto ex = extract_params(s);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<std::vector<CVector>> cells(2, std::vector<CVector>(2));
  for (auto& row : cells)
    for (auto& zz : row) {
      zz = CVector(ex.source_dim());
      for (Eigen::Index i = 0; i < zz.size(); ++i)
        zz(i) = Complex(dist(rng), dist(rng));
    }
  double mx = 0;
  for (int k = 0; k < ex.num_maps(); ++k)
    mx = std::max(mx, level_norm(ex, cells, k));
  CHECK(level_norm(s, cells) == doctest::Approx(mx).epsilon(1e-8));
  CHECK(mx > 0.1);
}

TEST_CASE("level_norm validates input shapes") {
  auto s = make_opsys({CMatrix::Identity(2, 2), pauli_x(), pauli_z()});
  auto seq = extract_params(s);
  std::vector<std::vector<CVector>> empty;
  CHECK_THROWS_AS(level_norm(seq, empty, 0), invalid_input);
  std::vector<std::vector<CVector>> bad{{zvec({1.0})}};
  CHECK_THROWS_AS(level_norm(seq, bad, 0), invalid_input);
  std::vector<std::vector<CVector>> ok{{CVector::Ones(3)}};
  CHECK_THROWS_AS(level_norm(seq, ok, 5), invalid_input);
}

TEST_CASE("paulsen_device: corner dimension counts") {
  auto z = paulsen_device({CMatrix::Zero(2, 2)});
  CHECK(z.dim() == 2);
  CHECK(z.ambient() == 4);

  auto e = paulsen_device({unit(2, 0, 1)});
  CHECK(e.dim() == 4);
  CHECK(e.ambient() == 4);
  CHECK(e.space.contains(unit(4, 0, 3)));
  CHECK(e.space.contains(unit(4, 3, 0)));

  auto m2 = paulsen_device({unit(2, 0, 0), unit(2, 0, 1), unit(2, 1, 0), unit(2, 1, 1)});
  CHECK(m2.dim() == 10);
  CHECK(m2.ambient() == 4);
}

TEST_CASE("paulsen_device output is a genuine operator system") {
  auto s = paulsen_device({unit(2, 0, 1)});
  CHECK(s.space.is_star_closed());
  CHECK(s.space.contains(CMatrix::Identity(4, 4)));
  // corner projections are in the span
  CMatrix p1 = CMatrix::Zero(4, 4);
  p1(0, 0) = p1(1, 1) = 1.0;
  CHECK(s.space.contains(p1));
  invariants(s);
}

TEST_CASE("round trip: rebuild from extracted parameters") {
  auto s = make_opsys({CMatrix::Identity(2, 2), pauli_x(), pauli_z()});
  auto seq = extract_params(s);
  auto back = build_opsys(seq);
  CHECK(back.dim() == s.dim());
  CHECK(back.num_blocks() == s.num_blocks());
  CHECK(back.block_dims() == s.block_dims());
  // the rebuilt span is unitarily equivalent, so the frame data agrees
  auto f1 = frame_operator_spectrum(s.space.basis);
  auto f2 = frame_operator_spectrum(back.space.basis);
  REQUIRE(f1.size() == f2.size());
  for (std::size_t i = 0; i < f1.size(); ++i)
    CHECK(f1[i] == doctest::Approx(f2[i]).epsilon(1e-8));
}

TEST_CASE("construction is deterministic for a fixed seed") {
  auto a = make_opsys({CMatrix::Identity(3, 3), unit(3, 0, 1) + unit(3, 1, 0)}, 5);
  auto b = make_opsys({CMatrix::Identity(3, 3), unit(3, 0, 1) + unit(3, 1, 0)}, 5);
  REQUIRE(a.num_blocks() == b.num_blocks());
  for (std::size_t k = 0; k < a.decomposition.blocks.size(); ++k) {
    CHECK((a.decomposition.blocks[k].projection -
           b.decomposition.blocks[k].projection).norm() == 0.0);
    CHECK((a.decomposition.blocks[k].isometry -
           b.decomposition.blocks[k].isometry).norm() == 0.0);
  }
}

}  // TEST_SUITE
