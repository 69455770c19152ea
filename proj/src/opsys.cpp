#include "ncb/opsys.hpp"

#include <algorithm>
#include <cmath>

namespace ncb {

CMatrix ParamMap::eval(const CVector& z) const {
  if (z.size() != source_dim()) throw invalid_input("ParamMap::eval: bad source dim");
  CMatrix out = CMatrix::Zero(target_dim(), target_dim());
  for (Eigen::Index j = 0; j < z.size(); ++j)
    out += z(j) * generators[static_cast<std::size_t>(j)];
  return out;
}

ParamMap validate_param_map(const std::vector<CMatrix>& g) {
  if (g.empty()) throw invalid_input("validate_param_map: no generators");
  const Eigen::Index n = g[0].rows();
  if (n < 1 || g[0].cols() != n)
    throw invalid_input("validate_param_map: generators must be square");
  CMatrix sum = CMatrix::Zero(n, n);
  for (const auto& m : g) {
    if (m.rows() != n || m.cols() != n)
      throw invalid_input("validate_param_map: generator size mismatch");
    if ((m - m.adjoint()).norm() > 1e-10 * std::max(1.0, m.norm()))
      throw star_violation("validate_param_map: generator not hermitian");
    sum += m;
  }
  if ((sum - CMatrix::Identity(n, n)).norm() > 1e-10 * std::sqrt(static_cast<double>(n)))
    throw unit_violation("validate_param_map: generators do not sum to identity");
  ParamMap pm;
  pm.generators = g;
  return pm;
}

void ParamSequence::validate() const {
  if (maps.empty()) throw invalid_input("ParamSequence: no maps");
  const Eigen::Index d = maps[0].source_dim();
  for (const auto& m : maps)
    if (m.source_dim() != d)
      throw invalid_input("ParamSequence: mismatched source dimensions");
}

void verify_basic_flags(ParamSequence& seq, double tol_rank) {
  seq.validate();
  const Eigen::Index d = seq.source_dim();

  bool irr = true;
  for (const auto& m : seq.maps) {
    std::vector<CMatrix> span = m.generators;
    span.push_back(CMatrix::Identity(m.target_dim(), m.target_dim()));
    if (commutant(orthonormalize_span(span, tol_rank), tol_rank).dim() != 1) {
      irr = false;
      break;
    }
  }
  seq.irreducible = irr ? CheckStatus::Verified : CheckStatus::Failed;

  // stacked column rank: vec all generators per coordinate
  Eigen::Index rows = 0;
  for (const auto& m : seq.maps) rows += m.target_dim() * m.target_dim();
  CMatrix stack(rows, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::Index at = 0;
    for (const auto& m : seq.maps) {
      stack.col(j).segment(at, m.target_dim() * m.target_dim()) =
          vec(m.generators[static_cast<std::size_t>(j)]);
      at += m.target_dim() * m.target_dim();
    }
  }
  Eigen::JacobiSVD<CMatrix> svd(stack);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() &&
         sv(rank) > std::sqrt(tol_rank) * std::max(sv(0), 1.0))
    ++rank;
  seq.faithful = (rank == d) ? CheckStatus::Verified : CheckStatus::Failed;
}

std::vector<Eigen::Index> OperatorSystem::block_dims() const {
  std::vector<Eigen::Index> out;
  for (const auto& b : decomposition.blocks) out.push_back(b.dim);
  return out;
}

namespace {

// after the algebra-level sort, refine the block order using the compressed
// system itself so equal-sized blocks with different S-content are stable
void sort_blocks_by_system(BlockDecomposition& dec, const MatrixSubspace& space) {
  struct Key {
    Eigen::Index nk;
    std::vector<long long> fp;
    std::vector<long long> pdiag;
    std::size_t idx;
  };
  auto quantize = [](double v) { return static_cast<long long>(std::llround(v * 1e8)); };
  std::vector<Key> keys;
  for (std::size_t k = 0; k < dec.blocks.size(); ++k) {
    Key key;
    key.nk = dec.blocks[k].dim;
    key.idx = k;
    std::vector<CMatrix> comp;
    for (const auto& b : space.basis) comp.push_back(dec.irrep(k, b));
    auto sub = orthonormalize_span(comp);
    auto spec = frame_operator_spectrum(sub.basis);
    key.fp.push_back(static_cast<long long>(sub.dim()));
    for (double v : spec) key.fp.push_back(quantize(v));
    for (Eigen::Index i = 0; i < dec.ambient; ++i)
      key.pdiag.push_back(-quantize(dec.blocks[k].projection(i, i).real()));
    keys.push_back(std::move(key));
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.nk != b.nk) return a.nk < b.nk;
    if (a.fp != b.fp) return a.fp < b.fp;
    return a.pdiag < b.pdiag;
  });
  std::vector<std::size_t> perm;
  for (const auto& k : keys) perm.push_back(k.idx);
  dec.reorder(perm);
}

OperatorSystem finish_opsys(MatrixSubspace space, std::uint64_t seed,
                            double tol_rank, bool dropped) {
  OperatorSystem s;
  s.space = std::move(space);
  s.algebra = generate_algebra(s.space, tol_rank);
  s.decomposition = block_decompose(s.algebra, seed, tol_rank);
  sort_blocks_by_system(s.decomposition, s.space);
  s.dimension_dropped = dropped;
  invariants(s);  // throws on the impossible
  return s;
}

}  // namespace

OperatorSystem make_opsys(const std::vector<CMatrix>& spanning,
                          std::uint64_t seed, double tol_rank) {
  MatrixSubspace space = orthonormalize_span(spanning, tol_rank);
  if (space.ambient == 0) throw invalid_input("make_opsys: empty spanning set");
  if (!space.contains(CMatrix::Identity(space.ambient, space.ambient)))
    throw invalid_input("make_opsys: identity not in span");
  if (!space.is_star_closed())
    throw invalid_input("make_opsys: span not *-closed");
  return finish_opsys(std::move(space), seed, tol_rank, false);
}

OperatorSystem build_opsys(const ParamSequence& seq, std::uint64_t seed,
                           double tol_rank) {
  seq.validate();
  const Eigen::Index d = seq.source_dim();
  Eigen::Index total = 0;
  for (const auto& m : seq.maps) total += m.target_dim();

  std::vector<CMatrix> gens;
  for (Eigen::Index j = 0; j < d; ++j) {
    CMatrix g = CMatrix::Zero(total, total);
    Eigen::Index at = 0;
    for (const auto& m : seq.maps) {
      g.block(at, at, m.target_dim(), m.target_dim()) =
          m.generators[static_cast<std::size_t>(j)];
      at += m.target_dim();
    }
    gens.push_back(g);
  }
  MatrixSubspace space = orthonormalize_span(gens, tol_rank);
  const bool dropped = space.dim() < d;
  return finish_opsys(std::move(space), seed, tol_rank, dropped);
}

std::vector<CMatrix> unit_summing_basis(const OperatorSystem& s, double tol_rank) {
  const Eigen::Index n = s.ambient();
  const Eigen::Index d = s.dim();
  const CMatrix id = CMatrix::Identity(n, n);

  if (d == 1) return {id};

  // hermitian part, identity projected out (trace pairing keeps us inside S)
  auto hb = hermitian_basis(s.space);
  std::vector<CMatrix> cands;
  for (const auto& h : hb)
    cands.push_back(h - (h.trace().real() / static_cast<double>(n)) * id);

  // canonical order before the sweep so the basis is reproducible
  auto key_of = [](const CMatrix& m) {
    std::vector<long long> key;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) {
        key.push_back(static_cast<long long>(std::llround(m(i, j).real() * 1e8)));
        key.push_back(static_cast<long long>(std::llround(m(i, j).imag() * 1e8)));
      }
    return key;
  };
  std::sort(cands.begin(), cands.end(),
            [&](const CMatrix& a, const CMatrix& b) { return key_of(a) > key_of(b); });

  std::vector<CMatrix> s0;
  for (auto& c : cands) {
    for (const auto& e : s0) c -= trace_inner(e, c).real() * e;
    const double nrm = c.norm();
    if (nrm > 1e-7) s0.push_back(c / nrm);
    if (static_cast<Eigen::Index>(s0.size()) == d - 1) break;
  }
  if (static_cast<Eigen::Index>(s0.size()) != d - 1)
    throw internal_error("unit_summing_basis: complement dimension mismatch");

  CMatrix last = id;
  for (const auto& e : s0) last -= e;
  std::vector<CMatrix> out = s0;
  out.push_back(last);

  CMatrix total = CMatrix::Zero(n, n);
  for (const auto& b : out) total += b;
  if ((total - id).norm() > 1e-10 * std::sqrt(static_cast<double>(n)))
    throw internal_error("unit_summing_basis: sum check failed");
  return out;
}

ParamSequence extract_params(const OperatorSystem& s, double tol_rank) {
  auto basis = unit_summing_basis(s, tol_rank);
  ParamSequence seq;
  for (std::size_t k = 0; k < s.decomposition.blocks.size(); ++k) {
    std::vector<CMatrix> gens;
    for (const auto& b : basis) gens.push_back(s.decomposition.irrep(k, b));
    seq.maps.push_back(validate_param_map(gens));
  }
  verify_basic_flags(seq, tol_rank);
  return seq;
}

double level_norm(const ParamSequence& seq,
                  const std::vector<std::vector<CVector>>& cells, int block) {
  seq.validate();
  if (cells.empty() || cells[0].empty()) throw invalid_input("level_norm: empty cells");
  for (const auto& row : cells) {
    if (row.size() != cells[0].size()) throw invalid_input("level_norm: ragged cells");
    for (const auto& z : row)
      if (z.size() != seq.source_dim())
        throw invalid_input("level_norm: vector dimension mismatch");
  }
  auto block_norm = [&](const ParamMap& m) {
    std::vector<std::vector<CMatrix>> mats(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i)
      for (const auto& z : cells[i]) mats[i].push_back(m.eval(z));
    return operator_norm(assemble_block(mats));
  };
  if (block >= 0) {
    if (block >= seq.num_maps()) throw invalid_input("level_norm: block out of range");
    return block_norm(seq.maps[static_cast<std::size_t>(block)]);
  }
  double mx = 0;
  for (const auto& m : seq.maps) mx = std::max(mx, block_norm(m));
  return mx;
}

double level_norm(const OperatorSystem& s,
                  const std::vector<std::vector<CVector>>& cells, int block) {
  if (block >= 0) return level_norm(extract_params(s), cells, block);
  // ambient route: assemble the cells through the unit-summing basis directly
  auto basis = unit_summing_basis(s);
  if (cells.empty() || cells[0].empty()) throw invalid_input("level_norm: empty cells");
  std::vector<std::vector<CMatrix>> mats(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (cells[i].size() != cells[0].size())
      throw invalid_input("level_norm: ragged cells");
    for (const auto& z : cells[i]) {
      if (z.size() != static_cast<Eigen::Index>(basis.size()))
        throw invalid_input("level_norm: vector dimension mismatch");
      CMatrix m = CMatrix::Zero(s.ambient(), s.ambient());
      for (Eigen::Index l = 0; l < z.size(); ++l)
        m += z(l) * basis[static_cast<std::size_t>(l)];
      mats[i].push_back(m);
    }
  }
  return operator_norm(assemble_block(mats));
}

OperatorSystem paulsen_device(const std::vector<CMatrix>& space_basis,
                              std::uint64_t seed, double tol_rank) {
  Eigen::Index n = 0;
  for (const auto& m : space_basis) {
    if (m.rows() != m.cols()) throw invalid_input("paulsen_device: square input only");
    if (n == 0) n = m.rows();
    if (m.rows() != n) throw invalid_input("paulsen_device: size mismatch");
  }
  if (n == 0) throw invalid_input("paulsen_device: ambient size unknown for empty input");

  std::vector<CMatrix> gens;
  CMatrix p1 = CMatrix::Zero(2 * n, 2 * n), p2 = CMatrix::Zero(2 * n, 2 * n);
  p1.topLeftCorner(n, n) = CMatrix::Identity(n, n);
  p2.bottomRightCorner(n, n) = CMatrix::Identity(n, n);
  gens.push_back(p1);
  gens.push_back(p2);
  for (const auto& m : space_basis) {
    CMatrix ur = CMatrix::Zero(2 * n, 2 * n), ll = CMatrix::Zero(2 * n, 2 * n);
    ur.topRightCorner(n, n) = m;
    ll.bottomLeftCorner(n, n) = m.adjoint();
    gens.push_back(ur);
    gens.push_back(ll);
  }
  return make_opsys(gens, seed, tol_rank);
}

InvariantReport invariants(const OperatorSystem& s) {
  InvariantReport rep;
  rep.d = s.dim();
  rep.num_blocks = s.num_blocks();
  Eigen::Index sumsq = 0;
  for (std::size_t k = 0; k < s.decomposition.blocks.size(); ++k) {
    const auto& b = s.decomposition.blocks[k];
    rep.block_dims.push_back(b.dim);
    sumsq += b.dim * b.dim;
    std::vector<CMatrix> comp;
    for (const auto& e : s.space.basis) comp.push_back(s.decomposition.irrep(k, e));
    const Eigen::Index ck = orthonormalize_span(comp).dim();
    rep.compression_dims.push_back(ck);
    if (ck > b.dim * b.dim) rep.ok = false;
  }
  if (rep.d > sumsq) rep.ok = false;
  if (!rep.ok)
    throw internal_error("invariants: dimension constraint violated");
  return rep;
}

}  // namespace ncb
