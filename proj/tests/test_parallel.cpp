#include "doctest.h"

#include <atomic>
#include <cmath>
#include <random>
#include <vector>

#include "ncb/classify.hpp"
#include "ncb/instances.hpp"

using namespace ncb;

namespace {

ParamMap qubit_map() {
  CMatrix sx(2, 2), sz(2, 2), id = CMatrix::Identity(2, 2);
  sx << 0, 1, 1, 0;
  sz << 1, 0, 0, -1;
  return ParamMap{{0.25 * (id + sx), 0.25 * (id + sz), 0.25 * (2 * id - sx - sz)}};
}

bool bitwise(const CMatrix& a, const CMatrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a - b).norm() == 0.0;
}

}  // namespace

TEST_SUITE("parallel") {

TEST_CASE("the loop runner is slot-stable and propagates exceptions") {
  const std::size_t n = 64;
  std::vector<double> serial(n), parallel(n);
  parallel_for(ExecMode::Serial, n,
               [&](std::size_t i) { serial[i] = std::sin(0.1 * static_cast<double>(i)); });
  parallel_for(ExecMode::Parallel, n,
               [&](std::size_t i) { parallel[i] = std::sin(0.1 * static_cast<double>(i)); });
  CHECK(serial == parallel);

  for (const ExecMode mode : {ExecMode::Serial, ExecMode::Parallel}) {
    std::atomic<int> ran{0};
    CHECK_THROWS_AS(parallel_for(mode, 8,
                                 [&](std::size_t i) {
                                   ran.fetch_add(1);
                                   if (i == 3) throw invalid_input("boom");
                                 }),
                    invalid_input);
    CHECK(ran.load() >= 1);
  }
}

TEST_CASE("peaking searches are bitwise identical across modes") {
  ParamSequence seq;
  seq.maps = {qubit_map()};
  std::vector<CMatrix> og;
  for (const auto& g : seq.maps[0].generators) og.push_back(g.block(0, 0, 1, 1));
  seq.maps.push_back(ParamMap{og});

  for (int k = 0; k < 2; ++k) {
    const auto a = find_peaking(seq, k, 0, 100, 9, ExecMode::Serial);
    const auto b = find_peaking(seq, k, 0, 100, 9, ExecMode::Parallel);
    REQUIRE(a.has_value() == b.has_value());
    if (!a) continue;
    CHECK(a->level == b->level);
    CHECK(a->gap == b->gap);  // bitwise, not approximate
    REQUIRE(a->cells.size() == b->cells.size());
    for (std::size_t i = 0; i < a->cells.size(); ++i)
      for (std::size_t j = 0; j < a->cells[i].size(); ++j)
        CHECK((a->cells[i][j] - b->cells[i][j]).norm() == 0.0);
  }
}

TEST_CASE("boundary analysis agrees across modes") {
  const OperatorSystem s = build_opsys([] {
    ParamSequence seq;
    seq.maps = {qubit_map()};
    std::vector<CMatrix> og;
    for (const auto& g : seq.maps[0].generators) og.push_back(g.block(0, 0, 1, 1));
    seq.maps.push_back(ParamMap{og});
    return seq;
  }());

  const BoundaryReport a = analyze_boundary(s, 0, 100, 3, {}, ExecMode::Serial);
  const BoundaryReport b = analyze_boundary(s, 0, 100, 3, {}, ExecMode::Parallel);
  REQUIRE(a.blocks.size() == b.blocks.size());
  for (std::size_t k = 0; k < a.blocks.size(); ++k) {
    CHECK(a.blocks[k].is_boundary == b.blocks[k].is_boundary);
    CHECK(a.blocks[k].method == b.blocks[k].method);
    CHECK(a.blocks[k].singleton.kernel_dim == b.blocks[k].singleton.kernel_dim);
    CHECK(a.blocks[k].singleton.movement_bound ==
          b.blocks[k].singleton.movement_bound);
  }
}

TEST_CASE("equivalence search returns the same witness in both modes") {
  ParamSequence g;
  g.maps = {qubit_map()};
  std::mt19937_64 rng(77);
  const CMatrix u = random_unitary(2, rng);
  std::vector<CMatrix> hg;
  for (const auto& gen : g.maps[0].generators)
    hg.push_back((u * gen * u.adjoint()).eval());
  ParamSequence h;
  h.maps = {ParamMap{hg}};

  const IsoResult a = decide_equivalence(g, h, 64, 5, ExecMode::Serial);
  const IsoResult b = decide_equivalence(g, h, 64, 5, ExecMode::Parallel);
  REQUIRE(a.status == IsoStatus::Witness);
  REQUIRE(b.status == IsoStatus::Witness);
  CHECK(a.restarts == b.restarts);
  CHECK(a.residual == b.residual);
  CHECK(a.witness->sigma == b.witness->sigma);
  CHECK(bitwise(a.witness->unitaries[0], b.witness->unitaries[0]));
  CHECK((a.witness->theta - b.witness->theta).norm() == 0.0);
}

TEST_CASE("configuration checks agree across modes") {
  const NonreducedSpec base = random_nonreduced_spec(2, {1, 1}, {1}, 1);

  NonreducedSpec sa = base, sb = base;
  const auto ra =
      check_subordination(sa, kSdpEps, 0, 100, 2, ExecMode::Serial);
  const auto rb =
      check_subordination(sb, kSdpEps, 0, 100, 2, ExecMode::Parallel);
  CHECK(ra == rb);
  CHECK(bitwise(sa.checks.subordination[0].choi, sb.checks.subordination[0].choi));

  const StructureReport va = build_and_verify(base, 0, 100, 2, ExecMode::Serial);
  const StructureReport vb =
      build_and_verify(base, 0, 100, 2, ExecMode::Parallel);
  CHECK(va.ok == vb.ok);
  CHECK(va.levels_checked == vb.levels_checked);
  CHECK(va.violations == vb.violations);
  CHECK(va.summand_block == vb.summand_block);
  REQUIRE(va.system.space.basis.size() == vb.system.space.basis.size());
  for (std::size_t i = 0; i < va.system.space.basis.size(); ++i)
    CHECK(bitwise(va.system.space.basis[i], vb.system.space.basis[i]));
}

}  // TEST_SUITE
