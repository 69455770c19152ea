#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ncb/choquet.hpp"
#include "ncb/feastool.hpp"
#include "ncb/opsys.hpp"
#include "ncb/parallel.hpp"

namespace ncb {

// certificate that two component maps take different norms on some cell
// matrix; indices refer to the combined list (gamma first, then omega)
struct SeparationCell {
  int first = 0;
  int second = 0;
  std::vector<std::vector<CVector>> cells;
  double gap = 0;  // |norm difference|, strictly above the 1e-6 margin
};

// outcome of the subordination check for one omega component
struct SubordinationCheck {
  CheckStatus status = CheckStatus::Unverified;
  CMatrix choi;  // Choi matrix of a certifying completely positive extension
  std::vector<std::vector<CVector>> violating_cells;  // best effort when Failed
  double violation_gap = 0;
};

struct NonreducedChecks {
  std::vector<SubordinationCheck> subordination;  // (a), one per omega map
  CheckStatus strong_separation = CheckStatus::Unverified;  // (b)
  std::vector<std::optional<PeakingCertificate>> gamma_peaking;
  CheckStatus weak_separation = CheckStatus::Unverified;  // (c)
  std::vector<SeparationCell> separations;  // found pairwise certificates
};

// a direct-sum configuration: the separated part (gamma) plus subordinate
// extra components (omega), with the verification state of the three
// structural properties
struct NonreducedSpec {
  ParamSequence gamma;
  ParamSequence omega;  // may be empty
  NonreducedChecks checks;

  Eigen::Index num_gamma() const { return gamma.num_maps(); }
  Eigen::Index num_omega() const { return omega.num_maps(); }
  void validate() const;  // nonempty gamma, common source across both parts
};

// property (a): each omega component is dominated by the gamma part at every
// matrix level, decided exactly as feasibility of a completely positive
// extension (Choi-matrix spectrahedron); a negative answer is certified by
// the solver and accompanied, when the search succeeds, by violating cells
std::vector<bool> check_subordination(NonreducedSpec& spec, double eps = kSdpEps,
                                      int level_cap = 0, int budget = 200,
                                      std::uint64_t seed = 0,
                                      ExecMode mode = default_exec_mode());

// properties (b) and (c): strong separation inside the gamma part (each
// component peaks) and pairwise norm-distinguishability of every omega
// component against the others and against the gamma components; pairs the
// search cannot certify are settled exactly through the central decomposition
// of the assembled system (merged summands = equivalent components)
std::pair<CheckStatus, CheckStatus> check_separations(
    NonreducedSpec& spec, int level_cap = 0, int budget = 200,
    std::uint64_t seed = 0, ExecMode mode = default_exec_mode());

// assembled system plus the verdict on its expected structure
struct StructureReport {
  bool ok = false;
  bool reduced = false;  // no omega part
  OperatorSystem system;
  std::vector<int> summand_block;  // input summand -> decomposition block, -1 if unclear
  BoundaryReport boundary;
  int levels_checked = 0;  // compression-isometry levels confirmed
  std::vector<std::string> violations;  // empty exactly when ok
};

// builds the block-diagonal direct-sum system and verifies the expected
// structure: the generated algebra is the full direct sum with one block per
// component, gamma blocks form the boundary, omega blocks the ideal, and
// compressing to the gamma blocks is isometric at all checked levels; any
// failed assertion is reported as a structure violation rather than thrown
StructureReport build_and_verify(const NonreducedSpec& spec, int level_cap = 0,
                                 int budget = 200, std::uint64_t seed = 0,
                                 ExecMode mode = default_exec_mode());

}  // namespace ncb
