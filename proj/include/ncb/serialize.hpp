#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ncb/classify.hpp"
#include "ncb/nonreduced.hpp"

namespace ncb {

// JSON interchange format.  Every document reads
//   {"version": "ncb-1", "kind": <kind>, "payload": {...}}
// with complex numbers as two-element arrays [re, im] and matrices as
// row-major nested arrays.  Serialized doubles reproduce their exact bit
// pattern when parsed back, so parse after serialize is the identity.

inline constexpr const char* kDocVersion = "ncb-1";

struct Document {
  std::string kind;  // opsys | params | nonreduced-spec | witness | report
  nlohmann::json payload;
};

std::string write_document(const Document& doc);
// throws invalid_input on malformed JSON, wrong version, or unknown kind
Document read_document(const std::string& text);

// element codecs (payload building blocks); decoders throw invalid_input
nlohmann::json encode_complex_matrix(const CMatrix& m);
CMatrix decode_complex_matrix(const nlohmann::json& j);
nlohmann::json encode_real_matrix(const RMatrix& m);
RMatrix decode_real_matrix(const nlohmann::json& j);

// kind "opsys": a spanning set of matrices defining the operator system
nlohmann::json encode_spanning(const std::vector<CMatrix>& spanning);
std::vector<CMatrix> decode_spanning(const nlohmann::json& payload);

// kind "params": component generators plus verification flags
nlohmann::json encode_params(const ParamSequence& seq);
ParamSequence decode_params(const nlohmann::json& payload);

// kind "nonreduced-spec": gamma and omega parts (verification state is
// recomputed, not shipped)
nlohmann::json encode_nonreduced(const NonreducedSpec& spec);
NonreducedSpec decode_nonreduced(const nlohmann::json& payload);

// kind "witness": block matching, conjugating unitaries, coefficient change
nlohmann::json encode_witness(const EquivalenceWitness& w);
EquivalenceWitness decode_witness(const nlohmann::json& payload);

}  // namespace ncb
