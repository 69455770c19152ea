#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ncb/opsys.hpp"
#include "ncb/parallel.hpp"

namespace ncb {

// block permutation, block unitaries, and the real unit-fixing change of
// parameters, together witnessing equivalence of two parameterizing sequences
struct EquivalenceWitness {
  std::vector<int> sigma;          // block k of g maps to block sigma[k] of h
  std::vector<CMatrix> unitaries;  // U_k conjugates block k onto its image
  RMatrix theta;                   // real d x d, theta * ones == ones
};

EquivalenceWitness identity_witness(const ParamSequence& g);

struct Fingerprint {
  Eigen::Index block_dim = 0;
  std::vector<double> spectrum;  // frame-operator eigenvalues, ascending
};

Fingerprint fingerprint(const ParamMap& m);
Fingerprint fingerprint(const OperatorSystem& s, int k);

// sup distance between spectra; infinity when the block dimensions or
// subspace dimensions disagree
double fingerprint_distance(const Fingerprint& a, const Fingerprint& b);

// largest display residual max_{k,j} |h_{sigma(k)}(theta e_j) - U_k g_k(e_j) U_k^*|
double equivalence_residual(const ParamSequence& g, const ParamSequence& h,
                            const EquivalenceWitness& w);

// exact check of the witness: unitarity, real invertible unit-fixing theta,
// and the display residual below tol
bool verify_equivalence(const ParamSequence& g, const ParamSequence& h,
                        const EquivalenceWitness& w, double tol = 1e-8);

// recover theta from the display given sigma and the unitaries; succeeds only
// if the residual is < 1e-8 and theta is real, invertible and unit-fixing
std::optional<RMatrix> solve_theta(const ParamSequence& g, const ParamSequence& h,
                                   const std::vector<int>& sigma,
                                   const std::vector<CMatrix>& us);

enum class IsoStatus { Witness, Negative, Inconclusive };

struct IsoResult {
  IsoStatus status = IsoStatus::Inconclusive;
  std::optional<EquivalenceWitness> witness;
  double residual = 0.0;        // display residual of the returned witness
  std::string negative_reason;  // which invariant separated the inputs
  int restarts = 0;             // search effort actually spent
};

// three-valued search: a returned witness always passes verify_equivalence;
// a negative is always backed by an invariant mismatch; otherwise the budget
// ran out and the answer is inconclusive
IsoResult decide_equivalence(const ParamSequence& g, const ParamSequence& h,
                             int budget = 200, std::uint64_t seed = 0,
                             ExecMode mode = default_exec_mode());

// systems must both be reduced (boundary ideal zero); checked up front
IsoResult decide_isomorphism(const OperatorSystem& s, const OperatorSystem& t,
                             int budget = 200, std::uint64_t seed = 0,
                             ExecMode mode = default_exec_mode());

}  // namespace ncb
