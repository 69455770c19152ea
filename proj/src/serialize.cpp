#include "ncb/serialize.hpp"

#include <set>

namespace ncb {

namespace {

const std::set<std::string> kKinds = {"opsys", "params", "nonreduced-spec",
                                      "witness", "report"};

[[noreturn]] void bad(const std::string& what) {
  throw invalid_input("document: " + what);
}

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) bad(std::string("missing field '") + name + "'");
  return *it;
}

double number(const nlohmann::json& j) {
  if (!j.is_number()) bad("expected a number");
  return j.get<double>();
}

Complex complex_of(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) bad("complex entries are [re, im] pairs");
  return Complex(number(j[0]), number(j[1]));
}

std::string status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Verified: return "verified";
    case CheckStatus::Failed: return "failed";
    default: return "unverified";
  }
}

CheckStatus status_of(const nlohmann::json& j) {
  if (!j.is_string()) bad("verification flags are strings");
  const std::string s = j.get<std::string>();
  if (s == "verified") return CheckStatus::Verified;
  if (s == "failed") return CheckStatus::Failed;
  if (s == "unverified") return CheckStatus::Unverified;
  bad("unknown verification flag '" + s + "'");
}

nlohmann::json encode_map(const ParamMap& m) {
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& g : m.generators) gens.push_back(encode_complex_matrix(g));
  return nlohmann::json{{"generators", std::move(gens)}};
}

ParamMap decode_map(const nlohmann::json& j) {
  const auto& gens = field(j, "generators");
  if (!gens.is_array() || gens.empty()) bad("component without generators");
  std::vector<CMatrix> g;
  for (const auto& e : gens) g.push_back(decode_complex_matrix(e));
  return validate_param_map(g);
}

}  // namespace

std::string write_document(const Document& doc) {
  if (!kKinds.count(doc.kind))
    throw invalid_input("document: unknown kind '" + doc.kind + "'");
  nlohmann::json j{{"version", kDocVersion},
                   {"kind", doc.kind},
                   {"payload", doc.payload}};
  return j.dump(2) + "\n";
}

Document read_document(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    bad(std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("top level is not an object");
  const auto& version = field(j, "version");
  if (!version.is_string() || version.get<std::string>() != kDocVersion)
    bad(std::string("unsupported version, expected \"") + kDocVersion + "\"");
  const auto& kind = field(j, "kind");
  if (!kind.is_string() || !kKinds.count(kind.get<std::string>()))
    bad("unknown kind");
  Document doc;
  doc.kind = kind.get<std::string>();
  doc.payload = field(j, "payload");
  return doc;
}

nlohmann::json encode_complex_matrix(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMatrix decode_complex_matrix(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) bad("matrix must be a nonempty row array");
  const auto& first = j[0];
  if (!first.is_array() || first.empty()) bad("matrix rows must be nonempty");
  CMatrix m(static_cast<Eigen::Index>(j.size()),
            static_cast<Eigen::Index>(first.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols())
      bad("ragged matrix rows");
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(i, c) = complex_of(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

nlohmann::json encode_real_matrix(const RMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

RMatrix decode_real_matrix(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) bad("matrix must be a nonempty row array");
  const auto& first = j[0];
  if (!first.is_array() || first.empty()) bad("matrix rows must be nonempty");
  RMatrix m(static_cast<Eigen::Index>(j.size()),
            static_cast<Eigen::Index>(first.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != m.cols())
      bad("ragged matrix rows");
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      m(i, c) = number(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

nlohmann::json encode_spanning(const std::vector<CMatrix>& spanning) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& m : spanning) arr.push_back(encode_complex_matrix(m));
  return nlohmann::json{{"spanning", std::move(arr)}};
}

std::vector<CMatrix> decode_spanning(const nlohmann::json& payload) {
  const auto& arr = field(payload, "spanning");
  if (!arr.is_array() || arr.empty()) bad("empty spanning set");
  std::vector<CMatrix> out;
  for (const auto& e : arr) out.push_back(decode_complex_matrix(e));
  const Eigen::Index n = out[0].rows();
  for (const auto& m : out)
    if (m.rows() != n || m.cols() != n)
      bad("spanning matrices must be square of one size");
  return out;
}

nlohmann::json encode_params(const ParamSequence& seq) {
  nlohmann::json maps = nlohmann::json::array();
  for (const auto& m : seq.maps) maps.push_back(encode_map(m));
  return nlohmann::json{
      {"maps", std::move(maps)},
      {"flags",
       {{"irreducible", status_name(seq.irreducible)},
        {"faithful", status_name(seq.faithful)},
        {"strongly_separated", status_name(seq.strongly_separated)}}}};
}

ParamSequence decode_params(const nlohmann::json& payload) {
  const auto& maps = field(payload, "maps");
  if (!maps.is_array() || maps.empty()) bad("sequence without components");
  ParamSequence seq;
  for (const auto& e : maps) seq.maps.push_back(decode_map(e));
  if (payload.contains("flags")) {
    const auto& flags = payload["flags"];
    seq.irreducible = status_of(field(flags, "irreducible"));
    seq.faithful = status_of(field(flags, "faithful"));
    seq.strongly_separated = status_of(field(flags, "strongly_separated"));
  }
  seq.validate();
  return seq;
}

nlohmann::json encode_nonreduced(const NonreducedSpec& spec) {
  nlohmann::json omega = nlohmann::json::array();
  for (const auto& m : spec.omega.maps) omega.push_back(encode_map(m));
  return nlohmann::json{{"gamma", encode_params(spec.gamma)},
                        {"omega", std::move(omega)}};
}

NonreducedSpec decode_nonreduced(const nlohmann::json& payload) {
  NonreducedSpec spec;
  spec.gamma = decode_params(field(payload, "gamma"));
  const auto& omega = field(payload, "omega");
  if (!omega.is_array()) bad("omega must be an array of components");
  for (const auto& e : omega) spec.omega.maps.push_back(decode_map(e));
  spec.validate();
  return spec;
}

nlohmann::json encode_witness(const EquivalenceWitness& w) {
  nlohmann::json us = nlohmann::json::array();
  for (const auto& u : w.unitaries) us.push_back(encode_complex_matrix(u));
  return nlohmann::json{{"sigma", w.sigma},
                        {"unitaries", std::move(us)},
                        {"theta", encode_real_matrix(w.theta)}};
}

EquivalenceWitness decode_witness(const nlohmann::json& payload) {
  EquivalenceWitness w;
  const auto& sigma = field(payload, "sigma");
  if (!sigma.is_array()) bad("sigma must be an index array");
  for (const auto& e : sigma) {
    if (!e.is_number_integer()) bad("sigma entries are integers");
    w.sigma.push_back(e.get<int>());
  }
  const auto& us = field(payload, "unitaries");
  if (!us.is_array() || us.size() != w.sigma.size())
    bad("one unitary per matched block");
  for (const auto& e : us) w.unitaries.push_back(decode_complex_matrix(e));
  w.theta = decode_real_matrix(field(payload, "theta"));
  return w;
}

}  // namespace ncb
