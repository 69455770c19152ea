#include "ncb/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ncb/choquet.hpp"

namespace ncb {

EquivalenceWitness identity_witness(const ParamSequence& g) {
  EquivalenceWitness w;
  for (int k = 0; k < g.num_maps(); ++k) {
    w.sigma.push_back(k);
    const Eigen::Index n = g.maps[static_cast<std::size_t>(k)].target_dim();
    w.unitaries.push_back(CMatrix::Identity(n, n));
  }
  w.theta = RMatrix::Identity(g.source_dim(), g.source_dim());
  return w;
}

Fingerprint fingerprint(const ParamMap& m) {
  Fingerprint fp;
  fp.block_dim = m.target_dim();
  auto sub = orthonormalize_span(m.generators);
  if (sub.dim() == 0) throw invalid_input("fingerprint: zero block system");
  fp.spectrum = frame_operator_spectrum(sub.basis);
  return fp;
}

Fingerprint fingerprint(const OperatorSystem& s, int k) {
  if (k < 0 || k >= static_cast<int>(s.num_blocks()))
    throw invalid_input("fingerprint: block out of range");
  std::vector<CMatrix> comp;
  for (const auto& b : s.space.basis)
    comp.push_back(s.decomposition.irrep(static_cast<std::size_t>(k), b));
  Fingerprint fp;
  fp.block_dim = s.decomposition.blocks[static_cast<std::size_t>(k)].dim;
  auto sub = orthonormalize_span(comp);
  fp.spectrum = frame_operator_spectrum(sub.basis);
  return fp;
}

double fingerprint_distance(const Fingerprint& a, const Fingerprint& b) {
  if (a.block_dim != b.block_dim || a.spectrum.size() != b.spectrum.size())
    return std::numeric_limits<double>::infinity();
  double d = 0;
  for (std::size_t i = 0; i < a.spectrum.size(); ++i)
    d = std::max(d, std::abs(a.spectrum[i] - b.spectrum[i]));
  return d;
}

namespace {

bool witness_shapes_ok(const ParamSequence& g, const ParamSequence& h,
                       const EquivalenceWitness& w) {
  const int n = g.num_maps();
  if (h.num_maps() != n || g.source_dim() != h.source_dim()) return false;
  if (static_cast<int>(w.sigma.size()) != n ||
      static_cast<int>(w.unitaries.size()) != n)
    return false;
  if (w.theta.rows() != g.source_dim() || w.theta.cols() != g.source_dim())
    return false;
  std::vector<bool> hit(static_cast<std::size_t>(n), false);
  for (int k = 0; k < n; ++k) {
    const int sk = w.sigma[static_cast<std::size_t>(k)];
    if (sk < 0 || sk >= n || hit[static_cast<std::size_t>(sk)]) return false;
    hit[static_cast<std::size_t>(sk)] = true;
    const Eigen::Index nk = g.maps[static_cast<std::size_t>(k)].target_dim();
    if (h.maps[static_cast<std::size_t>(sk)].target_dim() != nk) return false;
    if (w.unitaries[static_cast<std::size_t>(k)].rows() != nk ||
        w.unitaries[static_cast<std::size_t>(k)].cols() != nk)
      return false;
  }
  return true;
}

// target of the display for block k, basis direction j: sum_l theta(l,j) h_l
CMatrix display_target(const ParamSequence& h, int sk, const RMatrix& theta,
                       Eigen::Index j) {
  const auto& gen = h.maps[static_cast<std::size_t>(sk)].generators;
  CMatrix t = CMatrix::Zero(gen[0].rows(), gen[0].cols());
  for (Eigen::Index l = 0; l < theta.rows(); ++l)
    t += theta(l, j) * gen[static_cast<std::size_t>(l)];
  return t;
}

}  // namespace

double equivalence_residual(const ParamSequence& g, const ParamSequence& h,
                            const EquivalenceWitness& w) {
  if (!witness_shapes_ok(g, h, w))
    throw invalid_input("equivalence_residual: witness shape mismatch");
  double res = 0;
  for (int k = 0; k < g.num_maps(); ++k) {
    const auto& u = w.unitaries[static_cast<std::size_t>(k)];
    for (Eigen::Index j = 0; j < g.source_dim(); ++j) {
      const CMatrix lhs =
          u * g.maps[static_cast<std::size_t>(k)].generators[static_cast<std::size_t>(j)] *
          u.adjoint();
      res = std::max(
          res, (lhs - display_target(h, w.sigma[static_cast<std::size_t>(k)], w.theta, j))
                   .norm());
    }
  }
  return res;
}

bool verify_equivalence(const ParamSequence& g, const ParamSequence& h,
                        const EquivalenceWitness& w, double tol) {
  if (!witness_shapes_ok(g, h, w))
    throw invalid_input("verify_equivalence: witness shape mismatch");
  for (const auto& u : w.unitaries) {
    const Eigen::Index n = u.rows();
    if ((u.adjoint() * u - CMatrix::Identity(n, n)).norm() > 1e-9) return false;
  }
  const Eigen::Index d = w.theta.rows();
  Eigen::JacobiSVD<RMatrix> svd(w.theta);
  if (svd.singularValues()(d - 1) < 1e-10) return false;
  if ((w.theta * RVector::Ones(d) - RVector::Ones(d)).norm() > 1e-10) return false;
  return equivalence_residual(g, h, w) < tol;
}

namespace {

struct ThetaFit {
  RMatrix theta;
  double residual = 0;  // max column residual of the stacked linear system
};

// least-squares recovery of the real change of parameters given the block
// alignment; always returns the best fit plus its residual
ThetaFit theta_lsq(const ParamSequence& g, const ParamSequence& h,
                   const std::vector<int>& sigma,
                   const std::vector<CMatrix>& us) {
  const Eigen::Index d = g.source_dim();
  Eigen::Index rows = 0;
  for (const auto& m : g.maps) rows += 2 * m.target_dim() * m.target_dim();

  RMatrix a(rows, d);
  for (Eigen::Index l = 0; l < d; ++l) {
    Eigen::Index at = 0;
    for (int k = 0; k < g.num_maps(); ++k) {
      const auto& gen =
          h.maps[static_cast<std::size_t>(sigma[static_cast<std::size_t>(k)])]
              .generators[static_cast<std::size_t>(l)];
      const Eigen::Index sz = gen.rows() * gen.cols();
      a.col(l).segment(at, sz) = vec(gen).real();
      a.col(l).segment(at + sz, sz) = vec(gen).imag();
      at += 2 * sz;
    }
  }
  Eigen::ColPivHouseholderQR<RMatrix> qr(a);

  ThetaFit fit;
  fit.theta = RMatrix(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    RVector b(rows);
    Eigen::Index at = 0;
    for (int k = 0; k < g.num_maps(); ++k) {
      const auto& u = us[static_cast<std::size_t>(k)];
      const CMatrix m =
          u * g.maps[static_cast<std::size_t>(k)].generators[static_cast<std::size_t>(j)] *
          u.adjoint();
      const Eigen::Index sz = m.rows() * m.cols();
      b.segment(at, sz) = vec(m).real();
      b.segment(at + sz, sz) = vec(m).imag();
      at += 2 * sz;
    }
    RVector x = qr.solve(b);
    fit.theta.col(j) = x;
    fit.residual = std::max(fit.residual, (a * x - b).norm());
  }
  return fit;
}

}  // namespace

std::optional<RMatrix> solve_theta(const ParamSequence& g, const ParamSequence& h,
                                   const std::vector<int>& sigma,
                                   const std::vector<CMatrix>& us) {
  EquivalenceWitness probe;
  probe.sigma = sigma;
  probe.unitaries = us;
  probe.theta = RMatrix::Identity(g.source_dim(), g.source_dim());
  if (!witness_shapes_ok(g, h, probe))
    throw invalid_input("solve_theta: shape mismatch");

  auto fit = theta_lsq(g, h, sigma, us);
  if (fit.residual > 1e-8) return std::nullopt;
  const Eigen::Index d = fit.theta.rows();
  Eigen::JacobiSVD<RMatrix> svd(fit.theta);
  if (svd.singularValues()(d - 1) < 1e-10) return std::nullopt;
  if ((fit.theta * RVector::Ones(d) - RVector::Ones(d)).norm() > 1e-10)
    return std::nullopt;
  return fit.theta;
}

namespace {

CMatrix expi(const CMatrix& h, double t) {
  // exp(i t h) for hermitian h, exactly unitary by construction
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(h);
  CVector phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    phases(i) = std::polar(1.0, t * eig.eigenvalues()(i));
  return eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint();
}

struct BlockSpan {
  std::vector<CMatrix> source;  // orthonormal basis of span Gamma_k(Z)
  std::vector<CMatrix> target;  // orthonormal basis of span of the sigma-image
};

double span_mismatch(const BlockSpan& bs, const CMatrix& u,
                     std::vector<CMatrix>* residuals,
                     std::vector<CMatrix>* conjugated) {
  double f = 0;
  for (const auto& b : bs.source) {
    CMatrix m = u * b * u.adjoint();
    CMatrix r = m;
    for (const auto& c : bs.target) r -= trace_inner(c, m) * c;
    f += r.squaredNorm();
    if (residuals) residuals->push_back(std::move(r));
    if (conjugated) conjugated->push_back(std::move(m));
  }
  return f;
}

// steepest-descent direction on the unitary group for sum_i |R_i|^2 with
// dM_i = [W, M_i]: the antihermitian part of sum_i [M_i, R_i^adj]
CMatrix descent_direction(const std::vector<CMatrix>& ms,
                          const std::vector<CMatrix>& rs) {
  CMatrix k = CMatrix::Zero(ms[0].rows(), ms[0].cols());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const CMatrix ra = rs[i].adjoint();
    k += ms[i] * ra - ra * ms[i];
  }
  return 0.5 * (k - k.adjoint());
}

// one backtracking descent flow shared by the two alignment objectives
template <typename Mismatch>
CMatrix descend_unitary(CMatrix u, int iters, const Mismatch& mismatch) {
  double f = mismatch(u, nullptr, nullptr);
  for (int it = 0; it < iters && f > 1e-22; ++it) {
    std::vector<CMatrix> rs, ms;
    mismatch(u, &rs, &ms);
    const CMatrix w = descent_direction(ms, rs);
    const double wn = w.norm();
    if (wn < 1e-14) break;
    const CMatrix hh = Complex(0, -1) * w;  // hermitian generator of exp(t w)
    double t = std::min(0.5, 1.0 / wn);
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      CMatrix cand = expi(hh, t) * u;
      const double fc = mismatch(cand, nullptr, nullptr);
      if (fc < f) {
        u = std::move(cand);
        f = fc;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return u;
}

// gradient flow moving U * span * U^adj onto the target span
CMatrix align_spans(const BlockSpan& bs, CMatrix u) {
  return descend_unitary(std::move(u), 250,
                         [&](const CMatrix& v, std::vector<CMatrix>* rs,
                             std::vector<CMatrix>* ms) {
                           return span_mismatch(bs, v, rs, ms);
                         });
}

// gradient flow moving U g_j U^adj onto fixed targets t_j
CMatrix align_targets(const std::vector<CMatrix>& gens,
                      const std::vector<CMatrix>& targets, CMatrix u,
                      int iters) {
  auto mismatch = [&](const CMatrix& v, std::vector<CMatrix>* rs,
                      std::vector<CMatrix>* ms) {
    double f = 0;
    for (std::size_t j = 0; j < gens.size(); ++j) {
      CMatrix m = v * gens[j] * v.adjoint();
      CMatrix r = m - targets[j];
      f += r.squaredNorm();
      if (rs) rs->push_back(std::move(r));
      if (ms) ms->push_back(std::move(m));
    }
    return f;
  };
  return descend_unitary(std::move(u), iters, mismatch);
}

// joint Gauss-Newton on (U_k, theta) against the equivalence display
void polish(const ParamSequence& g, const ParamSequence& h,
            const std::vector<int>& sigma, std::vector<CMatrix>& us,
            RMatrix& theta) {
  const Eigen::Index d = g.source_dim();
  const int nmaps = g.num_maps();

  std::vector<std::vector<CMatrix>> hu;  // tangent directions per block
  std::vector<Eigen::Index> offset;
  Eigen::Index nparams = 0;
  for (int k = 0; k < nmaps; ++k) {
    hu.push_back(hermitian_units(g.maps[static_cast<std::size_t>(k)].target_dim()));
    offset.push_back(nparams);
    nparams += static_cast<Eigen::Index>(hu.back().size());
  }
  const Eigen::Index ntheta = d * d;

  Eigen::Index rows = 0;
  for (const auto& m : g.maps) rows += 2 * m.target_dim() * m.target_dim() * d;

  for (int pass = 0; pass < 12; ++pass) {
    RMatrix jac = RMatrix::Zero(rows, nparams + ntheta);
    RVector rhs(rows);
    double res = 0;
    Eigen::Index at = 0;
    for (int k = 0; k < nmaps; ++k) {
      const auto& u = us[static_cast<std::size_t>(k)];
      const int sk = sigma[static_cast<std::size_t>(k)];
      for (Eigen::Index j = 0; j < d; ++j) {
        const CMatrix m =
            u * g.maps[static_cast<std::size_t>(k)].generators[static_cast<std::size_t>(j)] *
            u.adjoint();
        const CMatrix f = m - display_target(h, sk, theta, j);
        const Eigen::Index sz = f.rows() * f.cols();
        rhs.segment(at, sz) = -vec(f).real();
        rhs.segment(at + sz, sz) = -vec(f).imag();
        res = std::max(res, f.norm());
        for (std::size_t p = 0; p < hu[static_cast<std::size_t>(k)].size(); ++p) {
          const CMatrix der = Complex(0, 1) * (hu[static_cast<std::size_t>(k)][p] * m -
                                               m * hu[static_cast<std::size_t>(k)][p]);
          jac.col(offset[static_cast<std::size_t>(k)] + static_cast<Eigen::Index>(p))
              .segment(at, sz) = vec(der).real();
          jac.col(offset[static_cast<std::size_t>(k)] + static_cast<Eigen::Index>(p))
              .segment(at + sz, sz) = vec(der).imag();
        }
        for (Eigen::Index l = 0; l < d; ++l) {
          const CMatrix& gen =
              h.maps[static_cast<std::size_t>(sk)].generators[static_cast<std::size_t>(l)];
          jac.col(nparams + l * d + j).segment(at, sz) = -vec(gen).real();
          jac.col(nparams + l * d + j).segment(at + sz, sz) = -vec(gen).imag();
        }
        at += 2 * sz;
      }
    }
    if (res < 1e-13) break;

    Eigen::JacobiSVD<RMatrix> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    RVector step = svd.solve(rhs);
    for (int k = 0; k < nmaps; ++k) {
      CMatrix hk = CMatrix::Zero(us[static_cast<std::size_t>(k)].rows(),
                                 us[static_cast<std::size_t>(k)].rows());
      for (std::size_t p = 0; p < hu[static_cast<std::size_t>(k)].size(); ++p)
        hk += step(offset[static_cast<std::size_t>(k)] + static_cast<Eigen::Index>(p)) *
              hu[static_cast<std::size_t>(k)][p];
      us[static_cast<std::size_t>(k)] = expi(hk, 1.0) * us[static_cast<std::size_t>(k)];
    }
    for (Eigen::Index l = 0; l < d; ++l)
      for (Eigen::Index j = 0; j < d; ++j) theta(l, j) += step(nparams + l * d + j);
  }
}

void enumerate_matchings(const std::vector<std::vector<int>>& feasible,
                         std::vector<int>& cur, std::vector<bool>& used,
                         std::vector<std::vector<int>>& out, std::size_t cap) {
  if (out.size() >= cap) return;
  const std::size_t k = cur.size();
  if (k == feasible.size()) {
    out.push_back(cur);
    return;
  }
  for (int cand : feasible[k]) {
    if (used[static_cast<std::size_t>(cand)]) continue;
    used[static_cast<std::size_t>(cand)] = true;
    cur.push_back(cand);
    enumerate_matchings(feasible, cur, used, out, cap);
    cur.pop_back();
    used[static_cast<std::size_t>(cand)] = false;
  }
}

}  // namespace

IsoResult decide_equivalence(const ParamSequence& g, const ParamSequence& h,
                             int budget, std::uint64_t seed, ExecMode mode) {
  g.validate();
  h.validate();
  IsoResult out;
  if (g.source_dim() != h.source_dim()) {
    out.status = IsoStatus::Negative;
    out.negative_reason = "source dimensions differ";
    return out;
  }
  if (g.num_maps() != h.num_maps()) {
    out.status = IsoStatus::Negative;
    out.negative_reason = "block counts differ";
    return out;
  }
  const int nmaps = g.num_maps();

  std::vector<Fingerprint> fg, fh;
  for (int k = 0; k < nmaps; ++k) {
    fg.push_back(fingerprint(g.maps[static_cast<std::size_t>(k)]));
    fh.push_back(fingerprint(h.maps[static_cast<std::size_t>(k)]));
  }
  std::vector<std::vector<int>> feasible(static_cast<std::size_t>(nmaps));
  for (int k = 0; k < nmaps; ++k)
    for (int l = 0; l < nmaps; ++l)
      if (fingerprint_distance(fg[static_cast<std::size_t>(k)],
                               fh[static_cast<std::size_t>(l)]) <= 1e-6)
        feasible[static_cast<std::size_t>(k)].push_back(l);

  std::vector<std::vector<int>> sigmas;
  {
    std::vector<int> cur;
    std::vector<bool> used(static_cast<std::size_t>(nmaps), false);
    enumerate_matchings(feasible, cur, used, sigmas, 64);
  }
  if (sigmas.empty()) {
    out.status = IsoStatus::Negative;
    out.negative_reason = "no fingerprint-compatible block matching";
    return out;
  }

  auto finish = [&](const std::vector<int>& sigma, std::vector<CMatrix> us)
      -> std::optional<EquivalenceWitness> {
    auto fit = theta_lsq(g, h, sigma, us);
    // per-block alignments fix each span only up to its own symmetry; the
    // alternation below pulls the blocks onto one shared change of parameters
    int stalled = 0;
    for (int round = 0; round < 120 && fit.residual > 1e-9 && stalled < 5;
         ++round) {
      for (int k = 0; k < nmaps; ++k) {
        std::vector<CMatrix> targets;
        for (Eigen::Index j = 0; j < g.source_dim(); ++j)
          targets.push_back(
              display_target(h, sigma[static_cast<std::size_t>(k)], fit.theta, j));
        us[static_cast<std::size_t>(k)] =
            align_targets(g.maps[static_cast<std::size_t>(k)].generators, targets,
                          us[static_cast<std::size_t>(k)], 60);
      }
      const double prev = fit.residual;
      fit = theta_lsq(g, h, sigma, us);
      stalled = fit.residual > 0.999 * prev ? stalled + 1 : 0;
    }
    if (fit.residual > 3e-2) return std::nullopt;  // too far for the polish
    polish(g, h, sigma, us, fit.theta);
    // re-derive theta exactly from the polished unitaries
    auto exact = solve_theta(g, h, sigma, us);
    if (!exact) return std::nullopt;
    EquivalenceWitness w;
    w.sigma = sigma;
    w.unitaries = std::move(us);
    w.theta = *exact;
    if (!verify_equivalence(g, h, w)) return std::nullopt;
    return w;
  };

  // cheap deterministic first attempt per matching: identity alignment
  for (const auto& sigma : sigmas) {
    std::vector<CMatrix> us;
    for (int k = 0; k < nmaps; ++k) {
      const Eigen::Index n = g.maps[static_cast<std::size_t>(k)].target_dim();
      us.push_back(CMatrix::Identity(n, n));
    }
    if (auto w = finish(sigma, std::move(us))) {
      out.status = IsoStatus::Witness;
      out.residual = equivalence_residual(g, h, *w);
      out.witness = std::move(w);
      return out;
    }
  }

  // seeded multistart: align block spans, then recover theta and polish
  std::vector<BlockSpan> spans(static_cast<std::size_t>(nmaps));
  const int per_sigma =
      std::max(1, budget / std::max(1, static_cast<int>(sigmas.size())));
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    const auto& sigma = sigmas[si];
    for (int k = 0; k < nmaps; ++k) {
      spans[static_cast<std::size_t>(k)].source =
          orthonormalize_span(g.maps[static_cast<std::size_t>(k)].generators).basis;
      spans[static_cast<std::size_t>(k)].target =
          orthonormalize_span(
              h.maps[static_cast<std::size_t>(sigma[static_cast<std::size_t>(k)])].generators)
              .basis;
    }
    bool dims_ok = true;
    for (const auto& bs : spans)
      if (bs.source.size() != bs.target.size()) dims_ok = false;
    if (!dims_ok) continue;

    const int chunk = 8;
    for (int base = 0; base < per_sigma; base += chunk) {
      const int count = std::min(chunk, per_sigma - base);
      std::vector<std::optional<EquivalenceWitness>> found(
          static_cast<std::size_t>(count));
      parallel_for(mode, static_cast<std::size_t>(count), [&](std::size_t i) {
        const int r = base + static_cast<int>(i);
        std::vector<CMatrix> us;
        for (int k = 0; k < nmaps; ++k) {
          const Eigen::Index n = g.maps[static_cast<std::size_t>(k)].target_dim();
          std::mt19937_64 rng(mix_seed({seed, static_cast<std::uint64_t>(si),
                                        static_cast<std::uint64_t>(r),
                                        static_cast<std::uint64_t>(k)}));
          CMatrix u = random_unitary(n, rng);
          us.push_back(align_spans(spans[static_cast<std::size_t>(k)], u));
        }
        found[i] = finish(sigma, std::move(us));
      });
      out.restarts += count;
      for (auto& f : found)
        if (f) {
          out.status = IsoStatus::Witness;
          out.residual = equivalence_residual(g, h, *f);
          out.witness = std::move(*f);
          return out;
        }
    }
  }
  out.status = IsoStatus::Inconclusive;
  return out;
}

IsoResult decide_isomorphism(const OperatorSystem& s, const OperatorSystem& t,
                             int budget, std::uint64_t seed, ExecMode mode) {
  for (const OperatorSystem* sys : {&s, &t}) {
    for (int k = 0; k < static_cast<int>(sys->num_blocks()); ++k)
      if (!is_boundary(*sys, k).is_boundary)
        throw invalid_input(
            "decide_isomorphism: input system is not reduced; compute its "
            "C*-envelope and decide on that instead");
  }
  return decide_equivalence(extract_params(s), extract_params(t), budget, seed,
                            mode);
}

}  // namespace ncb
