#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ncb/commands.hpp"

using namespace ncb;

int main(int argc, char** argv) {
  CLI::App app{"block decompositions, boundary certificates, envelopes, and "
               "equivalence of matrix operator systems"};
  app.require_subcommand(1);

  CommandFlags flags;
  std::string out = "-";
  std::string input = "-";
  std::string input_b = "-";
  std::string kind;
  Eigen::Index d = 0;
  std::vector<Eigen::Index> n_dims;
  std::vector<Eigen::Index> m_dims;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--tol-rank", flags.tol_rank, "rank cutoff for spans")
        ->capture_default_str();
    cmd->add_option("--tol-gap", flags.tol_gap,
                    "minimum decisive norm gap for certificates")
        ->capture_default_str();
    cmd->add_option("--sdp-eps", flags.sdp_eps,
                    "feasibility/duality accuracy of the convex solver")
        ->capture_default_str();
    cmd->add_option("--level-cap", flags.level_cap,
                    "matrix-level search depth, 0 means (max block dim)^2")
        ->capture_default_str();
    cmd->add_option("--budget", flags.budget, "search restart budget")
        ->capture_default_str();
    cmd->add_option("--seed", flags.seed, "seed for all randomized searches")
        ->capture_default_str();
    cmd->add_option("-o,--output", out, "output path, - for stdout")
        ->capture_default_str();
  };

  auto* analyze = app.add_subcommand(
      "analyze", "decomposition, boundary blocks, ideal, and envelope");
  analyze->add_option("input", input, "opsys or params document, - for stdin");
  add_common(analyze);

  auto* envelope =
      app.add_subcommand("envelope", "envelope-only view of analyze");
  envelope->add_option("input", input, "opsys or params document, - for stdin");
  add_common(envelope);

  auto* equiv = app.add_subcommand(
      "equiv", "decide unitary equivalence of two reduced systems");
  equiv->add_option("a", input, "first document")->required();
  equiv->add_option("b", input_b, "second document")->required();
  add_common(equiv);

  auto* build = app.add_subcommand(
      "build", "assemble the block-diagonal system of a component sequence");
  build->add_option("input", input, "params document, - for stdin");
  add_common(build);

  auto* nonreduced = app.add_subcommand(
      "nonreduced", "verify a direct-sum configuration with extra components");
  nonreduced->add_option("input", input, "nonreduced-spec document");
  add_common(nonreduced);

  auto* paulsen = app.add_subcommand(
      "paulsen", "corner-embedding system of an operator space");
  paulsen->add_option("input", input, "opsys document with the spanning set");
  add_common(paulsen);

  auto* random =
      app.add_subcommand("random", "seeded generator for verified instances");
  random->add_option("kind", kind, "'reduced' or 'nonreduced'")->required();
  random->add_option("--d", d, "source dimension, 0 means sum of block dims")
      ->capture_default_str();
  random->add_option("--n", n_dims, "block dimensions of the separated part")
      ->required()
      ->delimiter(',');
  random->add_option("--m", m_dims, "sizes of the extra components")
      ->delimiter(',');
  add_common(random);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    CommandResult result;
    if (analyze->parsed()) {
      result = cmd_analyze(read_input(input), flags);
    } else if (envelope->parsed()) {
      result = cmd_analyze(read_input(input), flags, /*envelope_only=*/true);
    } else if (equiv->parsed()) {
      result = cmd_equiv(read_input(input), read_input(input_b), flags);
    } else if (build->parsed()) {
      result = cmd_build(read_input(input), flags);
    } else if (nonreduced->parsed()) {
      result = cmd_nonreduced(read_input(input), flags);
    } else if (paulsen->parsed()) {
      result = cmd_paulsen(read_input(input), flags);
    } else {
      result = cmd_random(kind, d, n_dims, m_dims, flags);
    }
    write_output(out, write_document(result.output));
    return result.exit_code;
  } catch (const invalid_input& e) {
    std::cerr << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kExitInternal;
  }
}
