#pragma once

#include <optional>
#include <vector>

#include "ncb/matlin.hpp"
#include "ncb/parallel.hpp"

namespace ncb {

// the interior-point solver failed to reach the requested accuracy; callers
// surface this as an inconclusive outcome, never as a certified decision
struct solver_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// element of a product of hermitian matrix spaces (one slot per PSD cone)
struct BlockHerm {
  std::vector<CMatrix> blocks;

  static BlockHerm zero(const std::vector<Eigen::Index>& dims);
  static BlockHerm identity(const std::vector<Eigen::Index>& dims);

  BlockHerm& operator+=(const BlockHerm& o);
  BlockHerm& operator-=(const BlockHerm& o);
  BlockHerm& operator*=(double a);
  double inner(const BlockHerm& o) const;  // sum of Re tr(blk_i^* o_i)
  double norm() const;
  double min_eig() const;
  std::vector<Eigen::Index> dims() const;
};

BlockHerm operator+(BlockHerm a, const BlockHerm& b);
BlockHerm operator-(BlockHerm a, const BlockHerm& b);
BlockHerm operator*(double a, BlockHerm x);

// { x : x_i >= 0 (PSD), <rows_j, x> = rhs_j }
struct Spectrahedron {
  std::vector<Eigen::Index> cone_dims;
  std::vector<BlockHerm> rows;  // hermitian constraint functionals
  RVector rhs;
  std::optional<BlockHerm> known_point;

  void validate() const;  // shape checks + known_point feasibility
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, Stalled };

struct SolveOptions {
  double eps = kSdpEps;        // certified duality-gap target
  int max_iter = 200;
  double feas_tol = 1e-9;      // residual target for returned points
};

struct SolveResult {
  SolveStatus status = SolveStatus::Stalled;
  int iterations = 0;

  // status == Optimal
  double value = 0;           // <objective, point>
  double upper_bound = 0;     // certified: value of any feasible point <= this
  BlockHerm point;            // primal, projected back onto the affine space
  BlockHerm dual_slack;       // PSD witness that upper_bound is valid
  RVector dual_y;             // multipliers in reduced row coordinates
  double gap = 0;             // upper_bound - value
  double primal_residual = 0;
  double point_min_eig = 0;
  double slack_min_eig = 0;

  // status == Infeasible: y with <rhs,y> = 1 and -sum y_j rows_j PSD
  RVector farkas_y;
  BlockHerm farkas_slack;
  double farkas_min_eig = 0;

  // status == Unbounded: feasible direction with <objective, ray> = 1
  BlockHerm ray;
};

// max <objective, x> over sp.  All certificates are re-checked arithmetically
// before being returned; a certificate that fails its own check degrades the
// status to Stalled.
SolveResult maximize_linear(const Spectrahedron& sp, const BlockHerm& objective,
                            const SolveOptions& opts = {});

// same contract, but a stalled solve is retried under deterministic block
// rotations of the cones (salt picks the rotation stream); certificates are
// mapped back to the original coordinates and re-checked there
SolveResult maximize_linear_robust(const Spectrahedron& sp,
                                   const BlockHerm& objective,
                                   const SolveOptions& opts = {},
                                   std::uint64_t salt = 0);

struct SingletonResult {
  bool is_singleton = false;
  Eigen::Index kernel_dim = 0;
  std::vector<double> movement_bound;  // certified, per signed direction
  bool has_witness = false;
  BlockHerm witness;          // feasible point with distance > eps from x0
  double witness_distance = 0;
  int solves = 0;
};

// decides whether sp = {known_point}; requires sp.known_point
SingletonResult singleton_test(const Spectrahedron& sp,
                               const SolveOptions& opts = {},
                               ExecMode mode = default_exec_mode());

}  // namespace ncb
