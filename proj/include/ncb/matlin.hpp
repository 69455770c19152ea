#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace ncb {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kTolRank = 1e-9;   // relative rank cutoff for spans
inline constexpr double kTolGap = 1e-6;    // strictness margin for norm gaps
inline constexpr double kSdpEps = 1e-7;    // feasibility/duality accuracy

// invalid caller data (dimension mismatch, non-hermitian where required, ...)
struct invalid_input : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// an internal cross-check failed; indicates a bug or spurious certificate
struct internal_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// eigenvalue clustering was ambiguous for a randomized probe; caller may retry
struct degenerate_spectrum : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// trace pairing tr(a^* b)
Complex trace_inner(const CMatrix& a, const CMatrix& b);

double frobenius_norm(const CMatrix& a);

// largest singular value; throws invalid_input on empty or non-finite entries
double operator_norm(const CMatrix& a);

CMatrix kron(const CMatrix& a, const CMatrix& b);

bool is_hermitian(const CMatrix& a, double tol = 1e-10);

// stitches a p x q grid of equally sized cells into one matrix
CMatrix assemble_block(const std::vector<std::vector<CMatrix>>& cells);

CVector vec(const CMatrix& a);
CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols);

// a subspace of n x n matrices, kept as a trace-orthonormal basis
struct MatrixSubspace {
  Eigen::Index ambient = 0;     // matrices are ambient x ambient
  std::vector<CMatrix> basis;   // orthonormal under trace_inner

  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis.size()); }
  CMatrix project(const CMatrix& x) const;
  double residual(const CMatrix& x) const;  // ||x - project(x)||_F
  bool contains(const CMatrix& x, double tol = 1e-8) const;
  bool is_star_closed(double tol = 1e-8) const;
};

// orthonormalize a spanning set; singular directions below tol_rank (relative)
// are dropped.  Deterministic for a fixed input order.
MatrixSubspace orthonormalize_span(const std::vector<CMatrix>& spanning,
                                   double tol_rank = kTolRank);

// real-orthonormal hermitian basis of a *-closed subspace (size == dim)
std::vector<CMatrix> hermitian_basis(const MatrixSubspace& s, double tol = 1e-8);

// fixed orthonormal hermitian basis of all of M_n: diagonal units, then
// symmetric and antisymmetric off-diagonal pairs in column-major order
std::vector<CMatrix> hermitian_units(Eigen::Index n);

// spectrum (ascending) of F = sum_i B_i (x) conj(B_i) over an orthonormal
// basis B_i; depends only on the span, not on the basis chosen
std::vector<double> frame_operator_spectrum(const std::vector<CMatrix>& basis);

// deterministic stream derivation for nested seeded randomness
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts);

CMatrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng);
CMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng);
CMatrix random_unitary(Eigen::Index n, std::mt19937_64& rng);

}  // namespace ncb
