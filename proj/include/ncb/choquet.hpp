#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncb/feastool.hpp"
#include "ncb/opsys.hpp"
#include "ncb/parallel.hpp"

namespace ncb {

// the set of unital completely positive maps from the generated algebra into
// the k-th block that agree with the k-th irrep on the system itself, encoded
// as one Choi matrix per block of the algebra
struct UcpExtensionSet {
  int block = 0;
  std::vector<Eigen::Index> cone_dims;  // n_j * n_k per algebra block
  Spectrahedron sp;                     // known_point = Choi data of the irrep
};

UcpExtensionSet ucp_extension_set(const OperatorSystem& s, int k);

struct BoundaryDecision {
  bool is_boundary = false;
  SingletonResult certificate;
};

BoundaryDecision is_boundary(const OperatorSystem& s, int k,
                             const SolveOptions& opts = {},
                             ExecMode mode = default_exec_mode());

struct PeakingCertificate {
  int level = 1;
  std::vector<std::vector<CVector>> cells;
  double gap = 0.0;
};

// strict norm gap of the given cells at block k: the k-th block-matrix norm
// minus the best competitor (0 when there is no competitor)
double peaking_gap(const ParamSequence& seq, int k,
                   const std::vector<std::vector<CVector>>& cells);

// seeded multi-start subgradient ascent over coefficient cells at levels
// 1..level_cap; any returned certificate is re-verified from scratch.
// absence of a certificate is inconclusive, never a disproof.
std::optional<PeakingCertificate> find_peaking(
    const OperatorSystem& s, int k, int level_cap = 0, int budget = 200,
    std::uint64_t seed = 0, ExecMode mode = default_exec_mode());
std::optional<PeakingCertificate> find_peaking(
    const ParamSequence& seq, int k, int level_cap = 0, int budget = 200,
    std::uint64_t seed = 0, ExecMode mode = default_exec_mode());

struct BlockBoundary {
  bool is_boundary = false;
  std::string method;  // "singleton" or "singleton+peaking"
  SingletonResult singleton;
  std::optional<PeakingCertificate> peaking;
};

struct BoundaryReport {
  std::vector<BlockBoundary> blocks;
  std::vector<int> boundary_blocks() const;
};

// authoritative per-block decision via the convex singleton test, plus a
// peaking search on every block; a verified certificate on a block whose
// singleton test came back negative is an internal inconsistency
BoundaryReport analyze_boundary(const OperatorSystem& s, int level_cap = 0,
                                int budget = 200, std::uint64_t seed = 0,
                                const SolveOptions& opts = {},
                                ExecMode mode = default_exec_mode());

struct EnvelopeResult {
  BoundaryReport report;
  std::vector<int> boundary_blocks;
  std::vector<int> ideal_blocks;
  CMatrix ideal_projection;      // central projection onto the ideal summands
  OperatorSystem envelope_system;
  bool is_reduced = false;
  double max_isometry_deviation = 0.0;
  int levels_checked = 0;
};

EnvelopeResult c_star_envelope(const OperatorSystem& s, int level_cap = 0,
                               int budget = 200, std::uint64_t seed = 0,
                               const SolveOptions& opts = {},
                               ExecMode mode = default_exec_mode());

}  // namespace ncb
