#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ncb/algebra.hpp"
#include "ncb/matlin.hpp"

namespace ncb {

struct star_violation : invalid_input {
  using invalid_input::invalid_input;
};
struct unit_violation : invalid_input {
  using invalid_input::invalid_input;
};

// linear map C^d -> M_n, z |-> sum z_j G_j, *-preserving and unit-preserving
struct ParamMap {
  std::vector<CMatrix> generators;  // d hermitian matrices summing to I

  Eigen::Index source_dim() const { return static_cast<Eigen::Index>(generators.size()); }
  Eigen::Index target_dim() const { return generators.empty() ? 0 : generators[0].rows(); }
  CMatrix eval(const CVector& z) const;
};

ParamMap validate_param_map(const std::vector<CMatrix>& g);

enum class CheckStatus { Unverified, Verified, Failed };

struct ParamSequence {
  std::vector<ParamMap> maps;  // over a common source C^d
  CheckStatus irreducible = CheckStatus::Unverified;
  CheckStatus faithful = CheckStatus::Unverified;
  CheckStatus strongly_separated = CheckStatus::Unverified;

  Eigen::Index source_dim() const {
    return maps.empty() ? 0 : maps[0].source_dim();
  }
  Eigen::Index num_maps() const { return static_cast<Eigen::Index>(maps.size()); }
  void validate() const;  // common source, nonempty
};

// checks (i) per-block irreducibility and (ii) joint faithfulness, setting
// the corresponding flags; (iii) is the business of the boundary machinery
void verify_basic_flags(ParamSequence& seq, double tol_rank = kTolRank);

struct OperatorSystem {
  MatrixSubspace space;          // contains I, *-closed
  StarAlgebra algebra;           // generated C*-algebra
  BlockDecomposition decomposition;
  bool dimension_dropped = false;  // span dimension fell below the source dim

  Eigen::Index ambient() const { return space.ambient; }
  Eigen::Index dim() const { return space.dim(); }
  Eigen::Index num_blocks() const { return decomposition.num_blocks(); }
  std::vector<Eigen::Index> block_dims() const;
};

// operator system from a spanning set (must contain I and be *-closed)
OperatorSystem make_opsys(const std::vector<CMatrix>& spanning,
                          std::uint64_t seed = 0, double tol_rank = kTolRank);

// S spanned by the block-diagonal images of the coordinate vectors
OperatorSystem build_opsys(const ParamSequence& seq, std::uint64_t seed = 0,
                           double tol_rank = kTolRank);

// canonical hermitian basis s_1..s_d with sum = identity, then the sequence
// of compressions pi_k(s_j) per block
ParamSequence extract_params(const OperatorSystem& s, double tol_rank = kTolRank);

// the hermitian basis underlying extract_params (s_1..s_d, summing to I)
std::vector<CMatrix> unit_summing_basis(const OperatorSystem& s,
                                        double tol_rank = kTolRank);

inline constexpr int kAmbientBlock = -1;

// norm of the p x p matrix with entries Gamma_k(z_ij); block < 0 means the
// full direct sum (which equals the max over blocks)
double level_norm(const ParamSequence& seq,
                  const std::vector<std::vector<CVector>>& cells,
                  int block = kAmbientBlock);
double level_norm(const OperatorSystem& s,
                  const std::vector<std::vector<CVector>>& cells,
                  int block = kAmbientBlock);

// 2x2-corner system of an operator space: [[a 1, s],[t*, b 1]]
OperatorSystem paulsen_device(const std::vector<CMatrix>& space_basis,
                              std::uint64_t seed = 0, double tol_rank = kTolRank);

struct InvariantReport {
  Eigen::Index d = 0;
  Eigen::Index num_blocks = 0;
  std::vector<Eigen::Index> block_dims;
  std::vector<Eigen::Index> compression_dims;  // dim pi_k(S)
  bool ok = true;
};

// reports (d, N, n_k) and validates dim pi_k(S) <= n_k^2 and d <= sum n_k^2;
// a violation is an internal-consistency failure and throws
InvariantReport invariants(const OperatorSystem& s);

}  // namespace ncb
