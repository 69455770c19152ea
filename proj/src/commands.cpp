#include "ncb/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <utility>

#include "ncb/classify.hpp"
#include "ncb/instances.hpp"

namespace ncb {

namespace {

nlohmann::json tolerances_json(const CommandFlags& f) {
  return {{"tol_rank", f.tol_rank},   {"tol_gap", f.tol_gap},
          {"sdp_eps", f.sdp_eps},     {"level_cap", f.level_cap},
          {"budget", f.budget},       {"seed", f.seed}};
}

void check_flags(const CommandFlags& f) {
  if (f.tol_rank <= 0 || f.sdp_eps <= 0)
    throw invalid_input("tolerances must be positive");
  if (f.tol_gap < kTolGap)
    throw invalid_input(
        "--tol-gap below the built-in strictness margin 1e-6 cannot be "
        "honored");
  if (f.budget < 1 || f.level_cap < 0)
    throw invalid_input("budget must be >= 1 and level cap >= 0");
}

SolveOptions opts_of(const CommandFlags& f) {
  SolveOptions o;
  o.eps = f.sdp_eps;
  return o;
}

CommandResult error_result(int code, const std::string& message,
                           const CommandFlags& f) {
  nlohmann::json payload{{"errors", {message}},
                         {"tolerances", tolerances_json(f)}};
  return {code, Document{"report", std::move(payload)}};
}

template <typename Fn>
CommandResult guarded(const CommandFlags& flags, Fn&& fn) {
  try {
    check_flags(flags);
    return fn();
  } catch (const invalid_input& e) {
    return error_result(kExitInvalid, e.what(), flags);
  } catch (const solver_failure& e) {
    return error_result(kExitInconclusive, e.what(), flags);
  } catch (const std::exception& e) {
    return error_result(kExitInternal, e.what(), flags);
  }
}

OperatorSystem system_of(const Document& doc, const CommandFlags& f) {
  if (doc.kind == "opsys")
    return make_opsys(decode_spanning(doc.payload), f.seed, f.tol_rank);
  if (doc.kind == "params")
    return build_opsys(decode_params(doc.payload), f.seed, f.tol_rank);
  throw invalid_input("expected an opsys or params document, got '" +
                      doc.kind + "'");
}

nlohmann::json encode_cells(const std::vector<std::vector<CVector>>& cells) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : cells) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& z : row) {
      nlohmann::json v = nlohmann::json::array();
      for (Eigen::Index t = 0; t < z.size(); ++t)
        v.push_back({z(t).real(), z(t).imag()});
      r.push_back(std::move(v));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::json encode_peaking(const PeakingCertificate& c) {
  return {{"level", c.level}, {"gap", c.gap}, {"cells", encode_cells(c.cells)}};
}

std::string status_text(CheckStatus s) {
  switch (s) {
    case CheckStatus::Verified: return "verified";
    case CheckStatus::Failed: return "failed";
    default: return "unverified";
  }
}

nlohmann::json boundary_json(const OperatorSystem& s,
                             const BoundaryReport& report, double tol_gap) {
  nlohmann::json blocks = nlohmann::json::array();
  std::vector<int> bs, is;
  for (std::size_t b = 0; b < report.blocks.size(); ++b) {
    const auto& blk = report.blocks[b];
    nlohmann::json j{{"index", static_cast<int>(b)},
                     {"dim", s.decomposition.blocks[b].dim},
                     {"multiplicity", s.decomposition.blocks[b].multiplicity},
                     {"is_boundary", blk.is_boundary},
                     {"method", blk.method},
                     {"kernel_dim", blk.singleton.kernel_dim}};
    if (blk.peaking && blk.peaking->gap > tol_gap)
      j["peaking"] = encode_peaking(*blk.peaking);
    blocks.push_back(std::move(j));
    (blk.is_boundary ? bs : is).push_back(static_cast<int>(b));
  }
  return {{"blocks", std::move(blocks)},
          {"boundary_blocks", bs},
          {"ideal_blocks", is}};
}

}  // namespace

CommandResult cmd_analyze(const std::string& input_text,
                          const CommandFlags& flags, bool envelope_only) {
  return guarded(flags, [&]() -> CommandResult {
    const OperatorSystem s = system_of(read_document(input_text), flags);
    const InvariantReport inv = invariants(s);
    const EnvelopeResult env =
        c_star_envelope(s, flags.level_cap, flags.budget, flags.seed,
                        opts_of(flags));

    nlohmann::json payload;
    payload["envelope"] = {
        {"block_dims", env.envelope_system.block_dims()},
        {"levels_checked", env.levels_checked},
        {"max_isometry_deviation", env.max_isometry_deviation}};
    payload["reduced"] = env.is_reduced;
    if (!envelope_only) {
      nlohmann::json blocks = nlohmann::json::array();
      for (const auto& b : s.decomposition.blocks)
        blocks.push_back({{"dim", b.dim}, {"multiplicity", b.multiplicity}});
      payload["decomposition"] = {{"num_blocks", s.num_blocks()},
                                  {"blocks", std::move(blocks)}};
      payload["invariants"] = {
          {"d", inv.d},
          {"block_dims", inv.block_dims},
          {"compression_dims", inv.compression_dims},
          {"dimension_bound_ok", inv.ok}};
      payload["boundary"] = boundary_json(s, env.report, flags.tol_gap);
    }
    payload["tolerances"] = tolerances_json(flags);
    payload["errors"] = nlohmann::json::array();
    return {kExitOk, Document{"report", std::move(payload)}};
  });
}

CommandResult cmd_equiv(const std::string& a_text, const std::string& b_text,
                        const CommandFlags& flags) {
  return guarded(flags, [&]() -> CommandResult {
    const OperatorSystem sa = system_of(read_document(a_text), flags);
    const OperatorSystem sb = system_of(read_document(b_text), flags);
    IsoResult iso;
    try {
      iso = decide_isomorphism(sa, sb, flags.budget, flags.seed);
    } catch (const invalid_input& e) {
      throw invalid_input(std::string(e.what()) +
                          " (the analyze command reports the boundary ideal)");
    }

    if (iso.status == IsoStatus::Witness) {
      nlohmann::json payload = encode_witness(*iso.witness);
      payload["verdict"] = "equivalent";
      payload["residual"] = iso.residual;
      payload["restarts"] = iso.restarts;
      payload["tolerances"] = tolerances_json(flags);
      return {kExitOk, Document{"witness", std::move(payload)}};
    }
    nlohmann::json payload{
        {"verdict",
         iso.status == IsoStatus::Negative ? "negative" : "inconclusive"},
        {"reason", iso.negative_reason},
        {"restarts", iso.restarts},
        {"tolerances", tolerances_json(flags)},
        {"errors", nlohmann::json::array()}};
    return {iso.status == IsoStatus::Negative ? kExitNegative
                                              : kExitInconclusive,
            Document{"report", std::move(payload)}};
  });
}

CommandResult cmd_build(const std::string& params_text,
                        const CommandFlags& flags) {
  return guarded(flags, [&]() -> CommandResult {
    const Document doc = read_document(params_text);
    if (doc.kind != "params")
      throw invalid_input("expected a params document, got '" + doc.kind + "'");
    const ParamSequence seq = decode_params(doc.payload);
    Eigen::Index total = 0;
    for (const auto& m : seq.maps) total += m.target_dim();
    std::vector<CMatrix> spanning;
    for (Eigen::Index j = 0; j < seq.source_dim(); ++j) {
      CMatrix x = CMatrix::Zero(total, total);
      Eigen::Index at = 0;
      for (const auto& m : seq.maps) {
        x.block(at, at, m.target_dim(), m.target_dim()) =
            m.generators[static_cast<std::size_t>(j)];
        at += m.target_dim();
      }
      spanning.push_back(std::move(x));
    }
    // validates the span (unit, *-closure) before emitting
    make_opsys(spanning, flags.seed, flags.tol_rank);
    return {kExitOk, Document{"opsys", encode_spanning(spanning)}};
  });
}

CommandResult cmd_nonreduced(const std::string& spec_text,
                             const CommandFlags& flags) {
  return guarded(flags, [&]() -> CommandResult {
    const Document doc = read_document(spec_text);
    if (doc.kind != "nonreduced-spec")
      throw invalid_input("expected a nonreduced-spec document, got '" +
                          doc.kind + "'");
    NonreducedSpec spec = decode_nonreduced(doc.payload);

    const std::vector<bool> sub = check_subordination(
        spec, flags.sdp_eps, flags.level_cap, flags.budget, flags.seed);
    auto [strong, weak] =
        check_separations(spec, flags.level_cap, flags.budget, flags.seed);
    const StructureReport report = build_and_verify(spec, flags.level_cap,
                                                    flags.budget, flags.seed);

    // demand the caller's gap margin on every certificate in force
    if (strong == CheckStatus::Verified)
      for (const auto& cert : spec.checks.gamma_peaking)
        if (!cert || cert->gap <= flags.tol_gap) strong = CheckStatus::Unverified;
    if (weak == CheckStatus::Verified)
      for (const auto& cell : spec.checks.separations)
        if (cell.gap <= flags.tol_gap) weak = CheckStatus::Unverified;

    nlohmann::json subs = nlohmann::json::array();
    bool all_sub = true;
    for (std::size_t r = 0; r < sub.size(); ++r) {
      const auto& check = spec.checks.subordination[r];
      nlohmann::json j{{"index", static_cast<int>(r)},
                       {"subordinate", static_cast<bool>(sub[r])},
                       {"status", status_text(check.status)}};
      if (sub[r]) {
        j["extension_choi"] = encode_complex_matrix(check.choi);
      } else {
        all_sub = false;
        if (!check.violating_cells.empty() &&
            check.violation_gap > flags.tol_gap) {
          j["violation"] = {{"gap", check.violation_gap},
                            {"cells", encode_cells(check.violating_cells)}};
        }
      }
      subs.push_back(std::move(j));
    }

    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& cert : spec.checks.gamma_peaking)
      peaks.push_back(cert ? encode_peaking(*cert) : nlohmann::json(nullptr));
    nlohmann::json seps = nlohmann::json::array();
    for (const auto& cell : spec.checks.separations)
      seps.push_back({{"first", cell.first},
                      {"second", cell.second},
                      {"gap", cell.gap},
                      {"cells", encode_cells(cell.cells)}});

    nlohmann::json payload{
        {"subordination", std::move(subs)},
        {"strong_separation", status_text(strong)},
        {"weak_separation", status_text(weak)},
        {"gamma_peaking", std::move(peaks)},
        {"separations", std::move(seps)},
        {"structure",
         {{"ok", report.ok},
          {"reduced", report.reduced},
          {"levels_checked", report.levels_checked},
          {"block_dims", report.system.block_dims()},
          {"summand_block", report.summand_block},
          {"violations", report.violations}}},
        {"tolerances", tolerances_json(flags)},
        {"errors", nlohmann::json::array()}};

    int code = kExitOk;
    if (!all_sub || weak == CheckStatus::Failed || !report.ok)
      code = kExitNegative;
    else if (strong != CheckStatus::Verified || weak != CheckStatus::Verified)
      code = kExitInconclusive;
    return {code, Document{"report", std::move(payload)}};
  });
}

CommandResult cmd_paulsen(const std::string& opsys_text,
                          const CommandFlags& flags) {
  return guarded(flags, [&]() -> CommandResult {
    const Document doc = read_document(opsys_text);
    if (doc.kind != "opsys")
      throw invalid_input("expected an opsys document, got '" + doc.kind + "'");
    const OperatorSystem s = paulsen_device(decode_spanning(doc.payload),
                                            flags.seed, flags.tol_rank);
    return {kExitOk, Document{"opsys", encode_spanning(s.space.basis)}};
  });
}

CommandResult cmd_random(const std::string& kind, Eigen::Index d,
                         const std::vector<Eigen::Index>& n,
                         const std::vector<Eigen::Index>& m,
                         const CommandFlags& flags) {
  return guarded(flags, [&]() -> CommandResult {
    Eigen::Index dd = d;
    if (dd == 0) for (Eigen::Index nk : n) dd += nk;
    if (kind == "reduced") {
      if (!m.empty())
        throw invalid_input("extra component sizes only apply to kind "
                            "'nonreduced'");
      const ParamSequence seq =
          random_reduced_sequence(dd, n, flags.seed, flags.budget);
      return {kExitOk, Document{"params", encode_params(seq)}};
    }
    if (kind == "nonreduced") {
      const NonreducedSpec spec =
          random_nonreduced_spec(dd, n, m, flags.seed, flags.budget);
      return {kExitOk, Document{"nonreduced-spec", encode_nonreduced(spec)}};
    }
    throw invalid_input("unknown kind '" + kind +
                        "', expected 'reduced' or 'nonreduced'");
  });
}

std::string read_input(const std::string& path) {
  if (path == "-")
    return std::string(std::istreambuf_iterator<char>(std::cin),
                       std::istreambuf_iterator<char>());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw invalid_input("cannot open input file '" + path + "'");
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw invalid_input("cannot open output file '" + tmp + "'");
    out << text;
    if (!out.good()) throw internal_error("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw internal_error("cannot move output into place at '" + path + "'");
}

}  // namespace ncb
