#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncb/serialize.hpp"

namespace ncb {

// exit codes shared by every command
inline constexpr int kExitOk = 0;            // success / witness found
inline constexpr int kExitNegative = 1;      // certified negative answer
inline constexpr int kExitInvalid = 2;       // unusable input
inline constexpr int kExitInternal = 3;      // internal consistency failure
inline constexpr int kExitInconclusive = 4;  // budget ran out undecided

struct CommandFlags {
  double tol_rank = kTolRank;  // span rank cutoff
  double tol_gap = kTolGap;    // minimum decisive norm gap (>= built-in margin)
  double sdp_eps = kSdpEps;    // feasibility/duality accuracy
  int level_cap = 0;           // 0 = depth (max n_k)^2
  int budget = 200;            // search restarts
  std::uint64_t seed = 0;
};

struct CommandResult {
  int exit_code = kExitOk;
  Document output;
};

// full structural report of one system: decomposition, dimension invariants,
// per-block boundary status with certificates, ideal, envelope, reducedness.
// envelope_only trims the report to the envelope section
CommandResult cmd_analyze(const std::string& input_text,
                          const CommandFlags& flags, bool envelope_only = false);

// equivalence of two reduced systems: witness document (exit 0), certified
// negative (exit 1), or inconclusive (exit 4); non-reduced input exits 2
CommandResult cmd_equiv(const std::string& a_text, const std::string& b_text,
                        const CommandFlags& flags);

// component sequence document -> system document (block-diagonal images)
CommandResult cmd_build(const std::string& params_text,
                        const CommandFlags& flags);

// verify a direct-sum configuration: domination of the extra components,
// separation properties, and the assembled structure; exit 0 when everything
// is verified, 1 on a certified property failure, 4 when a search ran out
CommandResult cmd_nonreduced(const std::string& spec_text,
                             const CommandFlags& flags);

// corner-embedding system of an operator space given by a spanning set
CommandResult cmd_paulsen(const std::string& opsys_text,
                          const CommandFlags& flags);

// seeded instance generator; kind "reduced" emits a component sequence with
// verified structure, kind "nonreduced" a configuration whose extra
// components are subordinate by construction.  d = 0 means sum of n
CommandResult cmd_random(const std::string& kind, Eigen::Index d,
                         const std::vector<Eigen::Index>& n,
                         const std::vector<Eigen::Index>& m,
                         const CommandFlags& flags);

// "-" reads stdin / writes stdout; file output is atomic (temp + rename)
std::string read_input(const std::string& path);
void write_output(const std::string& path, const std::string& text);

}  // namespace ncb
