#pragma once

#include <cstdint>
#include <vector>

#include "ncb/matlin.hpp"

namespace ncb {

// *-closed, product-closed, unital subspace of M_n
struct StarAlgebra {
  MatrixSubspace space;
  Eigen::Index ambient() const { return space.ambient; }
  Eigen::Index dim() const { return space.dim(); }
};

// {x : xb = bx for all b in s}
MatrixSubspace commutant(const MatrixSubspace& s, double tol_rank = kTolRank);

// smallest star algebra containing s; s must hold the unit and be *-closed
StarAlgebra generate_algebra(const MatrixSubspace& s, double tol_rank = kTolRank);

struct Block {
  Eigen::Index dim = 0;           // n_k: the full matrix algebra size
  Eigen::Index multiplicity = 0;  // m_k
  CMatrix projection;             // central projection p_k on the ambient space
  CMatrix isometry;               // ambient x (n_k*m_k); x acts as pi_k(x) (x) I_m
};

struct BlockDecomposition {
  Eigen::Index ambient = 0;
  MatrixSubspace algebra_space;  // the decomposed algebra, for membership checks
  std::vector<Block> blocks;

  Eigen::Index num_blocks() const { return static_cast<Eigen::Index>(blocks.size()); }

  // pi_k(x); x must lie in the algebra
  CMatrix irrep(std::size_t k, const CMatrix& x, double tol = 1e-7) const;

  // embeds y (n_k x n_k) back into the ambient block: V (y (x) I_m) V^*
  CMatrix embed(std::size_t k, const CMatrix& y) const;

  void reorder(const std::vector<std::size_t>& perm);
};

// central decomposition into full matrix blocks, deterministic given seed.
// Blocks come out sorted by (n_k, canonical fingerprint, projection diagonal).
BlockDecomposition block_decompose(const StarAlgebra& a, std::uint64_t seed = 0,
                                   double tol_rank = kTolRank);

// assemble_block of entrywise pi_k over a p x p cell grid from the algebra
CMatrix apply_irrep(const BlockDecomposition& d, std::size_t k,
                    const std::vector<std::vector<CMatrix>>& cells,
                    double tol = 1e-7);

}  // namespace ncb
