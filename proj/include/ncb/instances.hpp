#pragma once

#include <cstdint>
#include <vector>

#include "ncb/nonreduced.hpp"

namespace ncb {

// deterministic seeded generator for parameterizing sequences with all
// three structural properties verified: (i) per-block irreducibility,
// (ii) joint faithfulness, (iii) strong separation.  instances are found
// by rejection sampling over random positive partitions of the identity;
// every accepted instance carries Verified flags backed by certificates.
// throws invalid_input when no instance can exist for the dimensions
// (empty dims, d < 1, d above the direct sum's dimension count, or d = 1
// with anything beyond a single scalar block) and solver_failure when the
// attempt budget runs out
ParamSequence random_reduced_sequence(Eigen::Index d,
                                      const std::vector<Eigen::Index>& dims,
                                      std::uint64_t seed, int budget = 200,
                                      ExecMode mode = default_exec_mode());

// deterministic seeded generator for direct-sum configurations with extra
// subordinate components: the separated part comes from
// random_reduced_sequence, and each extra component compresses the direct
// sum by a random isometry, so domination holds by construction.  accepted
// instances pass the structural verifier.  omega sizes must satisfy
// 1 <= m_r < sum n_k (a full-size compression is unitary, hence equivalent
// to the separated part and never subordinate-with-separation)
NonreducedSpec random_nonreduced_spec(Eigen::Index d,
                                      const std::vector<Eigen::Index>& gamma_dims,
                                      const std::vector<Eigen::Index>& omega_dims,
                                      std::uint64_t seed, int budget = 200,
                                      ExecMode mode = default_exec_mode());

}  // namespace ncb
