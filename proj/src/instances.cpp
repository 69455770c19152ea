#include "ncb/instances.hpp"

#include <numeric>
#include <random>
#include <string>

namespace ncb {

namespace {

// random positive partition of the identity: conjugate d random Gram
// matrices by the inverse square root of their sum
std::vector<CMatrix> random_partition(Eigen::Index n, Eigen::Index d,
                                      std::mt19937_64& rng) {
  std::vector<CMatrix> parts;
  CMatrix total = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < d; ++j) {
    const CMatrix b = random_gaussian(n, n, rng);
    parts.push_back((b.adjoint() * b).eval());
    total += parts.back();
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(total);
  const CMatrix half = es.operatorInverseSqrt();
  for (auto& p : parts) p = (half * p * half).eval();
  return parts;
}

}  // namespace

ParamSequence random_reduced_sequence(Eigen::Index d,
                                      const std::vector<Eigen::Index>& dims,
                                      std::uint64_t seed, int budget,
                                      ExecMode mode) {
  if (dims.empty()) throw invalid_input("random_reduced_sequence: no blocks");
  Eigen::Index cap = 0;
  for (Eigen::Index nk : dims) {
    if (nk < 1)
      throw invalid_input("random_reduced_sequence: block dimension below 1");
    cap += nk * nk;
  }
  if (d < 1 || d > cap)
    throw invalid_input(
        "random_reduced_sequence: source dimension must lie in [1, sum n_k^2]");
  // with one generator the only map is the identity partition {I}, which is
  // irreducible and separated only as a single scalar block
  if (d == 1 && !(dims.size() == 1 && dims[0] == 1))
    throw invalid_input(
        "random_reduced_sequence: one generator forces a single scalar block");

  for (std::uint64_t attempt = 0; attempt < 32; ++attempt) {
    std::mt19937_64 rng(mix_seed({seed, 0x7264756365ull, attempt}));
    ParamSequence seq;
    for (Eigen::Index nk : dims) seq.maps.push_back(ParamMap{random_partition(nk, d, rng)});

    verify_basic_flags(seq);
    if (seq.irreducible != CheckStatus::Verified ||
        seq.faithful != CheckStatus::Verified)
      continue;

    bool separated = true;
    for (std::size_t k = 0; k < dims.size() && separated; ++k) {
      if (!find_peaking(seq, static_cast<int>(k), 0, budget,
                        mix_seed({seed, 0x73657061ull, attempt,
                                  static_cast<std::uint64_t>(k)}),
                        mode))
        separated = false;
    }
    if (!separated) continue;
    seq.strongly_separated = CheckStatus::Verified;
    return seq;
  }
  throw solver_failure(
      "random_reduced_sequence: no verified instance within the attempt budget");
}

NonreducedSpec random_nonreduced_spec(Eigen::Index d,
                                      const std::vector<Eigen::Index>& gamma_dims,
                                      const std::vector<Eigen::Index>& omega_dims,
                                      std::uint64_t seed, int budget,
                                      ExecMode mode) {
  const Eigen::Index nsum =
      std::accumulate(gamma_dims.begin(), gamma_dims.end(), Eigen::Index{0});
  for (Eigen::Index mr : omega_dims)
    if (mr < 1 || mr >= nsum)
      throw invalid_input(
          "random_nonreduced_spec: extra component sizes must lie in "
          "[1, sum n_k)");

  for (std::uint64_t attempt = 0; attempt < 16; ++attempt) {
    NonreducedSpec spec;
    spec.gamma = random_reduced_sequence(
        d, gamma_dims, mix_seed({seed, 0x67616d6dull, attempt}), budget, mode);

    // block-diagonal images of the coordinate directions
    std::vector<CMatrix> xs(static_cast<std::size_t>(d),
                            CMatrix::Zero(nsum, nsum));
    Eigen::Index at = 0;
    for (const auto& m : spec.gamma.maps) {
      for (Eigen::Index j = 0; j < d; ++j)
        xs[static_cast<std::size_t>(j)].block(at, at, m.target_dim(),
                                              m.target_dim()) =
            m.generators[static_cast<std::size_t>(j)];
      at += m.target_dim();
    }

    for (std::size_t r = 0; r < omega_dims.size(); ++r) {
      std::mt19937_64 rng(mix_seed({seed, 0x69736f6dull, attempt,
                                    static_cast<std::uint64_t>(r)}));
      const CMatrix v = random_unitary(nsum, rng).leftCols(omega_dims[r]);
      std::vector<CMatrix> og;
      for (Eigen::Index j = 0; j < d; ++j)
        og.push_back((v.adjoint() * xs[static_cast<std::size_t>(j)] * v).eval());
      spec.omega.maps.push_back(ParamMap{og});
    }

    const auto report = build_and_verify(
        spec, 0, budget, mix_seed({seed, 0x766572ull, attempt}), mode);
    if (report.ok) return spec;
  }
  throw solver_failure(
      "random_nonreduced_spec: no verified instance within the attempt budget");
}

}  // namespace ncb
