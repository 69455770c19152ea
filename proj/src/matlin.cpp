#include "ncb/matlin.hpp"

#include <algorithm>
#include <cmath>

namespace ncb {

Complex trace_inner(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw invalid_input("trace_inner: shape mismatch");
  return (a.adjoint() * b).trace();
}

double frobenius_norm(const CMatrix& a) { return a.norm(); }

double operator_norm(const CMatrix& a) {
  if (a.size() == 0) throw invalid_input("operator_norm: empty matrix");
  if (!a.allFinite()) throw invalid_input("operator_norm: non-finite entries");
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

bool is_hermitian(const CMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).norm() <= tol * std::max(1.0, a.norm());
}

CMatrix assemble_block(const std::vector<std::vector<CMatrix>>& cells) {
  if (cells.empty() || cells[0].empty())
    throw invalid_input("assemble_block: empty grid");
  const std::size_t p = cells.size(), q = cells[0].size();
  const Eigen::Index r = cells[0][0].rows(), c = cells[0][0].cols();
  for (const auto& row : cells) {
    if (row.size() != q) throw invalid_input("assemble_block: ragged grid");
    for (const auto& cell : row)
      if (cell.rows() != r || cell.cols() != c)
        throw invalid_input("assemble_block: cell shape mismatch");
  }
  CMatrix out(static_cast<Eigen::Index>(p) * r, static_cast<Eigen::Index>(q) * c);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < q; ++j)
      out.block(static_cast<Eigen::Index>(i) * r, static_cast<Eigen::Index>(j) * c, r, c) =
          cells[i][j];
  return out;
}

CVector vec(const CMatrix& a) {
  return Eigen::Map<const CVector>(a.data(), a.size());
}

CMatrix unvec(const CVector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw invalid_input("unvec: size mismatch");
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

CMatrix MatrixSubspace::project(const CMatrix& x) const {
  if (x.rows() != ambient || x.cols() != ambient)
    throw invalid_input("project: ambient mismatch");
  CMatrix out = CMatrix::Zero(ambient, ambient);
  for (const auto& b : basis) out += trace_inner(b, x) * b;
  return out;
}

double MatrixSubspace::residual(const CMatrix& x) const {
  return (x - project(x)).norm();
}

bool MatrixSubspace::contains(const CMatrix& x, double tol) const {
  return residual(x) <= tol * std::max(1.0, x.norm());
}

bool MatrixSubspace::is_star_closed(double tol) const {
  for (const auto& b : basis)
    if (!contains(b.adjoint(), tol)) return false;
  return true;
}

MatrixSubspace orthonormalize_span(const std::vector<CMatrix>& spanning,
                                   double tol_rank) {
  if (spanning.empty()) return {};
  const Eigen::Index n = spanning[0].rows();
  if (spanning[0].cols() != n)
    throw invalid_input("orthonormalize_span: matrices must be square");
  for (const auto& a : spanning) {
    if (a.rows() != n || a.cols() != n)
      throw invalid_input("orthonormalize_span: mixed shapes");
    if (!a.allFinite())
      throw invalid_input("orthonormalize_span: non-finite entries");
  }
  CMatrix cols(n * n, static_cast<Eigen::Index>(spanning.size()));
  for (std::size_t j = 0; j < spanning.size(); ++j)
    cols.col(static_cast<Eigen::Index>(j)) = vec(spanning[j]);
  Eigen::JacobiSVD<CMatrix> svd(cols, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  MatrixSubspace out;
  out.ambient = n;
  if (sv.size() == 0 || sv(0) <= 0) return out;
  const double cutoff = std::sqrt(tol_rank) * sv(0);
  for (Eigen::Index j = 0; j < sv.size(); ++j) {
    if (sv(j) <= cutoff) break;
    out.basis.push_back(unvec(svd.matrixU().col(j), n, n));
  }
  return out;
}

std::vector<CMatrix> hermitian_basis(const MatrixSubspace& s, double tol) {
  if (!s.is_star_closed(tol))
    throw invalid_input("hermitian_basis: subspace is not *-closed");
  // hermitian parts (b + b*)/2 and (ib - ib*)/2 span the hermitian part, which
  // for a *-closed space has real dimension == dim
  std::vector<CMatrix> cands;
  cands.reserve(2 * s.basis.size());
  for (const auto& b : s.basis) {
    cands.push_back(0.5 * (b + b.adjoint()));
    const CMatrix ib = Complex(0, 1) * b;
    cands.push_back(0.5 * (ib + ib.adjoint()));
  }
  // modified Gram-Schmidt over the reals
  std::vector<CMatrix> out;
  for (auto& c : cands) {
    for (const auto& e : out) c -= trace_inner(e, c).real() * e;
    const double nrm = c.norm();
    if (nrm > 1e-7) out.push_back(c / nrm);
    if (static_cast<Eigen::Index>(out.size()) == s.dim()) break;
  }
  if (static_cast<Eigen::Index>(out.size()) != s.dim())
    throw internal_error("hermitian_basis: dimension drop during sweep");
  return out;
}

std::vector<CMatrix> hermitian_units(Eigen::Index n) {
  if (n < 1) throw invalid_input("hermitian_units: n must be positive");
  std::vector<CMatrix> out;
  const double r = 1.0 / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    CMatrix m = CMatrix::Zero(n, n);
    m(i, i) = 1.0;
    out.push_back(m);
  }
  for (Eigen::Index b = 0; b < n; ++b)
    for (Eigen::Index a = 0; a < b; ++a) {
      CMatrix m = CMatrix::Zero(n, n);
      m(a, b) = r;
      m(b, a) = r;
      out.push_back(m);
      CMatrix w = CMatrix::Zero(n, n);
      w(a, b) = Complex(0, r);
      w(b, a) = Complex(0, -r);
      out.push_back(w);
    }
  return out;
}

std::vector<double> frame_operator_spectrum(const std::vector<CMatrix>& basis) {
  if (basis.empty()) throw invalid_input("frame_operator_spectrum: empty basis");
  const Eigen::Index n = basis[0].rows();
  CMatrix f = CMatrix::Zero(n * n, n * n);
  for (const auto& b : basis) f += kron(b, b.conjugate());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(f, Eigen::EigenvaluesOnly);
  std::vector<double> spec(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
  return spec;
}

std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  // splitmix64 over the concatenated parts
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  for (std::uint64_t p : parts) {
    h += p + 0x9e3779b97f4a7c15ull;
    std::uint64_t z = h;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    h = z ^ (z >> 31);
  }
  return h;
}

CMatrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = Complex(g(rng), g(rng));
  return out;
}

CMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  CMatrix a = random_gaussian(n, n, rng);
  return 0.5 * (a + a.adjoint());
}

CMatrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  CMatrix a = random_gaussian(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(a);
  CMatrix q = qr.householderQ() * CMatrix::Identity(n, n);
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    Complex d = r(j, j);
    q.col(j) *= (std::abs(d) > 0) ? d / std::abs(d) : Complex(1, 0);
  }
  return q;
}

}  // namespace ncb
