#include "ncb/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ncb {

namespace {

// kernel of the stacked real-linear map behind a list of complex matrices
// acting on vec(x); returns an orthonormal set of matrix solutions
std::vector<CMatrix> matrix_map_kernel(
    const std::vector<CMatrix>& stack_of_columns, Eigen::Index n,
    double tol_rank) {
  // columns indexed by vec(x) in C^{n^2}; rows stacked per map
  const Eigen::Index cols = n * n;
  Eigen::Index rows = 0;
  for (const auto& m : stack_of_columns) rows += m.rows();
  CMatrix big(rows, cols);
  Eigen::Index at = 0;
  for (const auto& m : stack_of_columns) {
    big.middleRows(at, m.rows()) = m;
    at += m.rows();
  }
  Eigen::JacobiSVD<CMatrix> svd(big, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  // inputs are trace-normalized, so an all-noise spectrum must count as zero;
  // the floor keeps roundoff from masquerading as rank
  const double cutoff = std::sqrt(tol_rank) * std::max(smax, 1.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  std::vector<CMatrix> out;
  for (Eigen::Index j = rank; j < cols; ++j)
    out.push_back(unvec(svd.matrixV().col(j), n, n));
  return out;
}

}  // namespace

MatrixSubspace commutant(const MatrixSubspace& s, double tol_rank) {
  const Eigen::Index n = s.ambient;
  if (n <= 0) throw invalid_input("commutant: empty subspace");
  // x b - b x = 0 for all basis b; as matrix on vec(x): b^T (x) I - I (x) b
  std::vector<CMatrix> maps;
  const CMatrix id = CMatrix::Identity(n, n);
  for (const auto& b : s.basis)
    maps.push_back(kron(b.transpose(), id) - kron(id, b));
  if (maps.empty()) maps.push_back(CMatrix::Zero(1, n * n));
  auto kern = matrix_map_kernel(maps, n, tol_rank);
  return orthonormalize_span(kern, tol_rank);
}

StarAlgebra generate_algebra(const MatrixSubspace& s, double tol_rank) {
  const Eigen::Index n = s.ambient;
  if (n <= 0) throw invalid_input("generate_algebra: empty subspace");
  if (!s.contains(CMatrix::Identity(n, n)))
    throw invalid_input("generate_algebra: unit not in span");
  if (!s.is_star_closed())
    throw invalid_input("generate_algebra: span not *-closed");

  MatrixSubspace cur = s;
  for (int round = 0; round < 64; ++round) {
    std::vector<CMatrix> pool = cur.basis;
    for (const auto& a : cur.basis)
      for (const auto& b : cur.basis) pool.push_back(a * b);
    MatrixSubspace next = orthonormalize_span(pool, tol_rank);
    if (next.dim() == cur.dim()) {
      StarAlgebra alg{next};
      return alg;
    }
    cur = next;
  }
  throw internal_error("generate_algebra: closure did not stabilize");
}

namespace {

struct SpectralSplit {
  std::vector<CMatrix> projections;  // onto clustered eigenspaces
  std::vector<Eigen::Index> sizes;
};

// clusters the spectrum of a hermitian matrix by gaps; throws
// degenerate_spectrum when the split is ambiguous at the tolerance
SpectralSplit split_spectrum(const CMatrix& h, double gap_tol) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  if (es.info() != Eigen::Success)
    throw internal_error("split_spectrum: eigensolver failed");
  const RVector& ev = es.eigenvalues();
  const Eigen::Index n = ev.size();
  const double spread = std::max(1.0, ev(n - 1) - ev(0));
  const double tol = gap_tol * spread;

  SpectralSplit out;
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= n; ++i) {
    if (i == n || ev(i) - ev(i - 1) > tol) {
      CMatrix p = CMatrix::Zero(h.rows(), h.rows());
      for (Eigen::Index j = start; j < i; ++j)
        p += es.eigenvectors().col(j) * es.eigenvectors().col(j).adjoint();
      out.projections.push_back(p);
      out.sizes.push_back(i - start);
      start = i;
    } else if (ev(i) - ev(i - 1) > 0.01 * tol) {
      // gap in the ambiguous band: neither clearly joined nor split
      throw degenerate_spectrum("spectral gap inside tolerance band");
    }
  }
  return out;
}

// orthonormal basis of the range of a hermitian projection
CMatrix range_basis(const CMatrix& p, Eigen::Index rank) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(p);
  // eigenvalues ascending: range vectors are the trailing ones
  CMatrix q(p.rows(), rank);
  for (Eigen::Index j = 0; j < rank; ++j) {
    const double ev = es.eigenvalues()(p.rows() - 1 - j);
    if (std::abs(ev - 1.0) > 1e-7)
      throw internal_error("range_basis: projection eigenvalue far from 1");
    q.col(j) = es.eigenvectors().col(p.rows() - 1 - j);
  }
  return q;
}

struct BlockBuild {
  Block blk;
  std::vector<CMatrix> compressed_basis;  // pi_k images of the algebra basis
};

// builds matrix units and the change-of-basis isometry inside one central block
BlockBuild build_block(const StarAlgebra& a, const CMatrix& p,
                       std::uint64_t seed, double tol_rank) {
  const Eigen::Index r = static_cast<Eigen::Index>(std::llround(p.trace().real()));
  if (r < 1) throw internal_error("build_block: empty central block");
  const CMatrix q = range_basis(p, r);

  // compress the algebra to the block; its dimension determines n_k
  std::vector<CMatrix> comp;
  comp.reserve(a.space.basis.size());
  for (const auto& b : a.space.basis) comp.push_back(q.adjoint() * b * q);
  MatrixSubspace abar = orthonormalize_span(comp, tol_rank);
  const Eigen::Index nk =
      static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(abar.dim()))));
  if (nk * nk != abar.dim())
    throw internal_error("build_block: block algebra dimension is not a square");
  if (r % nk != 0)
    throw internal_error("build_block: rank not divisible by block dimension");
  const Eigen::Index mk = r / nk;

  auto hb = hermitian_basis(abar);

  CMatrix w;  // r x r unitary, columns v_{i,t}
  bool done = false;
  for (int attempt = 0; attempt < 5 && !done; ++attempt) {
    std::mt19937_64 rng(mix_seed({seed, 0xb10cull, static_cast<std::uint64_t>(attempt)}));
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix h = CMatrix::Zero(r, r);
    for (const auto& e : hb) h += g(rng) * e;
    SpectralSplit split;
    try {
      split = split_spectrum(h, 1e-6);
    } catch (const degenerate_spectrum&) {
      continue;
    }
    if (static_cast<Eigen::Index>(split.projections.size()) != nk) continue;
    bool equal_sizes = true;
    for (auto s : split.sizes) equal_sizes &= (s == mk);
    if (!equal_sizes) continue;

    // partial isometries e_1 -> e_i from a generic algebra element
    CMatrix arnd = CMatrix::Zero(r, r);
    for (const auto& e : abar.basis) {
      Complex z(g(rng), g(rng));
      arnd += z * e;
    }
    std::vector<CMatrix> u1i(static_cast<std::size_t>(nk));
    u1i[0] = split.projections[0];
    bool rank_ok = true;
    for (Eigen::Index i = 1; i < nk; ++i) {
      CMatrix bmat = split.projections[0] * arnd *
                     split.projections[static_cast<std::size_t>(i)];
      Eigen::JacobiSVD<CMatrix> svd(bmat, Eigen::ComputeThinU | Eigen::ComputeThinV);
      if (svd.singularValues()(mk - 1) < 1e-7 * std::max(1.0, svd.singularValues()(0))) {
        rank_ok = false;
        break;
      }
      u1i[static_cast<std::size_t>(i)] =
          svd.matrixU().leftCols(mk) * svd.matrixV().leftCols(mk).adjoint();
    }
    if (!rank_ok) continue;

    const CMatrix f = range_basis(split.projections[0], mk);
    w = CMatrix(r, nk * mk);
    for (Eigen::Index i = 0; i < nk; ++i)
      w.middleCols(i * mk, mk) = u1i[static_cast<std::size_t>(i)].adjoint() * f;
    if ((w.adjoint() * w - CMatrix::Identity(r, r)).norm() > 1e-8) continue;
    done = true;
  }
  if (!done)
    throw degenerate_spectrum("build_block: could not split a generic block element");

  BlockBuild out;
  out.blk.dim = nk;
  out.blk.multiplicity = mk;
  out.blk.projection = p;
  out.blk.isometry = q * w;
  return out;
}

CMatrix compress_to_irrep(const Block& b, const CMatrix& x) {
  const Eigen::Index nk = b.dim, mk = b.multiplicity;
  const CMatrix full = b.isometry.adjoint() * x * b.isometry;
  CMatrix out(nk, nk);
  for (Eigen::Index i = 0; i < nk; ++i)
    for (Eigen::Index j = 0; j < nk; ++j) {
      Complex acc = 0;
      for (Eigen::Index t = 0; t < mk; ++t) acc += full(i * mk + t, j * mk + t);
      out(i, j) = acc / static_cast<double>(mk);
    }
  return out;
}

}  // namespace

CMatrix BlockDecomposition::irrep(std::size_t k, const CMatrix& x, double tol) const {
  if (k >= blocks.size()) throw invalid_input("irrep: block index out of range");
  if (x.rows() != ambient || x.cols() != ambient)
    throw invalid_input("irrep: ambient size mismatch");
  if (algebra_space.residual(x) > tol * std::max(1.0, x.norm()))
    throw invalid_input("irrep: element outside the algebra");
  return compress_to_irrep(blocks[k], x);
}

CMatrix BlockDecomposition::embed(std::size_t k, const CMatrix& y) const {
  if (k >= blocks.size()) throw invalid_input("embed: block index out of range");
  const Block& b = blocks[k];
  if (y.rows() != b.dim || y.cols() != b.dim)
    throw invalid_input("embed: block size mismatch");
  return b.isometry *
         kron(y, CMatrix::Identity(b.multiplicity, b.multiplicity)) *
         b.isometry.adjoint();
}

void BlockDecomposition::reorder(const std::vector<std::size_t>& perm) {
  if (perm.size() != blocks.size())
    throw invalid_input("reorder: permutation size mismatch");
  std::vector<Block> nb;
  nb.reserve(blocks.size());
  std::vector<bool> seen(blocks.size(), false);
  for (auto i : perm) {
    if (i >= blocks.size() || seen[i]) throw invalid_input("reorder: not a permutation");
    seen[i] = true;
    nb.push_back(blocks[i]);
  }
  blocks = std::move(nb);
}

CMatrix apply_irrep(const BlockDecomposition& d, std::size_t k,
                    const std::vector<std::vector<CMatrix>>& cells, double tol) {
  std::vector<std::vector<CMatrix>> images(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (const auto& c : cells[i]) images[i].push_back(d.irrep(k, c, tol));
  return assemble_block(images);
}

BlockDecomposition block_decompose(const StarAlgebra& a, std::uint64_t seed,
                                   double tol_rank) {
  const Eigen::Index n = a.ambient();
  if (n <= 0) throw invalid_input("block_decompose: empty algebra");

  // center = algebra  ∩  commutant(algebra), via the commutation kernel
  // restricted to algebra coordinates
  const Eigen::Index dim = a.dim();
  std::vector<CMatrix> maps;
  {
    // unknown x = sum_j c_j B_j; rows: vec(B_j b_i - b_i B_j) per (i) as
    // columns over j
    for (const auto& b : a.space.basis) {
      CMatrix m(n * n, dim);
      for (Eigen::Index j = 0; j < dim; ++j)
        m.col(j) = vec(CMatrix(a.space.basis[static_cast<std::size_t>(j)] * b -
                               b * a.space.basis[static_cast<std::size_t>(j)]));
      maps.push_back(m);
    }
  }
  Eigen::Index rows = 0;
  for (const auto& m : maps) rows += m.rows();
  CMatrix big(rows, dim);
  Eigen::Index at = 0;
  for (const auto& m : maps) {
    big.middleRows(at, m.rows()) = m;
    at += m.rows();
  }
  Eigen::JacobiSVD<CMatrix> svd(big, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double cutoff = std::sqrt(tol_rank) * std::max(smax, 1.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  std::vector<CMatrix> center_raw;
  for (Eigen::Index j = rank; j < dim; ++j) {
    CMatrix z = CMatrix::Zero(n, n);
    for (Eigen::Index l = 0; l < dim; ++l)
      z += svd.matrixV()(l, j) * a.space.basis[static_cast<std::size_t>(l)];
    center_raw.push_back(z);
  }
  MatrixSubspace center = orthonormalize_span(center_raw, tol_rank);
  const Eigen::Index nblocks = center.dim();
  if (nblocks < 1) throw internal_error("block_decompose: empty center");

  auto center_herm = hermitian_basis(center);

  BlockDecomposition out;
  out.ambient = n;
  out.algebra_space = a.space;

  bool split_ok = false;
  for (int attempt = 0; attempt < 5 && !split_ok; ++attempt) {
    std::mt19937_64 rng(
        mix_seed({seed, 0xce17e5ull, static_cast<std::uint64_t>(attempt)}));
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix z = CMatrix::Zero(n, n);
    for (const auto& h : center_herm) z += g(rng) * h;
    SpectralSplit split;
    try {
      split = split_spectrum(z, 1e-6);
    } catch (const degenerate_spectrum&) {
      continue;
    }
    if (static_cast<Eigen::Index>(split.projections.size()) != nblocks) continue;

    // validate the candidate central projections
    bool valid = true;
    CMatrix sum = CMatrix::Zero(n, n);
    for (const auto& p : split.projections) {
      sum += p;
      if ((p * p - p).norm() > 1e-8 || !is_hermitian(p, 1e-8)) valid = false;
      for (const auto& b : a.space.basis)
        if ((p * b - b * p).norm() > 1e-7) valid = false;
      if (center.residual(p) > 1e-7 * std::max(1.0, p.norm())) valid = false;
      if (!valid) break;
    }
    if (!valid || (sum - CMatrix::Identity(n, n)).norm() > 1e-8) continue;

    out.blocks.clear();
    try {
      for (std::size_t k = 0; k < split.projections.size(); ++k) {
        auto bb = build_block(a, split.projections[k],
                              mix_seed({seed, static_cast<std::uint64_t>(k)}),
                              tol_rank);
        out.blocks.push_back(bb.blk);
      }
      split_ok = true;
    } catch (const degenerate_spectrum&) {
      continue;
    }
  }
  if (!split_ok)
    throw degenerate_spectrum(
        "block_decompose: central splitting failed after retries");

  // canonical order: block size, then frame fingerprint of the compressed
  // algebra, then the projection diagonal (descending) as the final tie-break
  struct Key {
    Eigen::Index nk;
    std::vector<long long> fp;
    std::vector<long long> pdiag;
    std::size_t idx;
  };
  auto quantize = [](double v) { return static_cast<long long>(std::llround(v * 1e8)); };
  std::vector<Key> keys;
  for (std::size_t k = 0; k < out.blocks.size(); ++k) {
    Key key;
    key.nk = out.blocks[k].dim;
    key.idx = k;
    std::vector<CMatrix> comp;
    for (const auto& b : a.space.basis)
      comp.push_back(compress_to_irrep(out.blocks[k], b));
    auto spec = frame_operator_spectrum(orthonormalize_span(comp).basis);
    for (double v : spec) key.fp.push_back(quantize(v));
    for (Eigen::Index i = 0; i < n; ++i)
      key.pdiag.push_back(-quantize(out.blocks[k].projection(i, i).real()));
    keys.push_back(std::move(key));
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.nk != b.nk) return a.nk < b.nk;
    if (a.fp != b.fp) return a.fp < b.fp;
    return a.pdiag < b.pdiag;
  });
  std::vector<std::size_t> perm;
  for (const auto& k : keys) perm.push_back(k.idx);
  out.reorder(perm);

  // global invariants: dimension count and reconstruction
  Eigen::Index dimsum = 0;
  for (const auto& b : out.blocks) dimsum += b.dim * b.dim;
  if (dimsum != a.dim())
    throw internal_error("block_decompose: dimension count mismatch");
  for (const auto& b : a.space.basis) {
    CMatrix rec = CMatrix::Zero(n, n);
    for (std::size_t k = 0; k < out.blocks.size(); ++k)
      rec += out.embed(k, compress_to_irrep(out.blocks[k], b));
    if ((rec - b).norm() > 1e-7)
      throw internal_error("block_decompose: reconstruction residual too large");
  }
  return out;
}

}  // namespace ncb
