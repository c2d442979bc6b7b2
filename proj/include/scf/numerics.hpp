#pragma once

// Dense complex linear algebra used by every other header: a general
// (non-normal) eigenvalue solver, the matrix exponential, singular-value
// norms, numerical rank and spectral-gap utilities.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "scf/errors.hpp"

namespace scf {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInfiniteGap = std::numeric_limits<double>::infinity();

inline void require_finite(const CMatrix& m, const char* where) {
  if (!m.allFinite()) throw Error(ErrorKind::NonFinite, std::string(where) + ": matrix has NaN/Inf entries");
}

inline void require_square(const CMatrix& m, const char* where) {
  if (m.rows() != m.cols() || m.rows() < 1)
    throw Error(ErrorKind::DimensionMismatch, std::string(where) + ": expected a non-empty square matrix");
}

/// Eigenvalues of a square matrix together with the relative residual
/// ||M v - lambda v|| / ||M||_F of the eigenvector computed for each.
struct Spectrum {
  std::vector<Complex> eigenvalues;
  std::vector<double> residuals;
  double cluster_tolerance = 1e-7;

  std::size_t size() const { return eigenvalues.size(); }
};

namespace detail {

inline double abs1(Complex z) { return std::abs(z.real()) + std::abs(z.imag()); }

/// Result of the balancing permutation: rows/columns outside [ilo, ihi] hold
/// isolated eigenvalues and are already upper triangular.
struct Balanced {
  CMatrix h;
  std::vector<Index> perm;  // h(i, j) == m(perm[i], perm[j])
  Index ilo = 0;
  Index ihi = 0;
};

inline void symmetric_swap(Balanced& b, Index i, Index j) {
  if (i == j) return;
  b.h.row(i).swap(b.h.row(j));
  b.h.col(i).swap(b.h.col(j));
  std::swap(b.perm[static_cast<std::size_t>(i)], b.perm[static_cast<std::size_t>(j)]);
}

/// Permutation-only balancing: pushes rows with no off-diagonal entries in
/// the active window to the bottom and such columns to the top. Isolated
/// eigenvalues are exact diagonal entries, which keeps structurally defective
/// inputs (zero columns, zero rows) free of rounding-induced splitting.
inline Balanced isolate_eigenvalues(const CMatrix& m) {
  const Index n = m.rows();
  Balanced b{m, std::vector<Index>(static_cast<std::size_t>(n)), 0, n - 1};
  std::iota(b.perm.begin(), b.perm.end(), Index{0});

  bool found = true;
  while (found && b.ihi > b.ilo) {
    found = false;
    for (Index j = b.ihi; j >= b.ilo; --j) {
      bool zero = true;
      for (Index k = b.ilo; k <= b.ihi && zero; ++k)
        if (k != j && b.h(j, k) != Complex(0.0)) zero = false;
      if (zero) {
        symmetric_swap(b, j, b.ihi);
        --b.ihi;
        found = true;
        break;
      }
    }
  }
  found = true;
  while (found && b.ihi > b.ilo) {
    found = false;
    for (Index j = b.ilo; j <= b.ihi; ++j) {
      bool zero = true;
      for (Index k = b.ilo; k <= b.ihi && zero; ++k)
        if (k != j && b.h(k, j) != Complex(0.0)) zero = false;
      if (zero) {
        symmetric_swap(b, j, b.ilo);
        ++b.ilo;
        found = true;
        break;
      }
    }
  }
  return b;
}

/// Householder reduction of the active window to upper Hessenberg form,
/// accumulating the unitary transform into q.
inline void reduce_to_hessenberg(CMatrix& h, CMatrix& q, Index ilo, Index ihi) {
  const Index n = h.rows();
  for (Index k = ilo; k + 2 <= ihi; ++k) {
    const Index len = ihi - k;
    CVector u = h.block(k + 1, k, len, 1);
    const double xnorm = u.norm();
    if (xnorm == 0.0) continue;
    const Complex alpha = u(0);
    const Complex phase = std::abs(alpha) == 0.0 ? Complex(1.0) : alpha / std::abs(alpha);
    u(0) += phase * xnorm;
    const double unorm2 = u.squaredNorm();
    if (unorm2 == 0.0) continue;
    const double scale = 2.0 / unorm2;

    auto rows = h.block(k + 1, k, len, n - k);
    rows.noalias() -= (scale * u) * (u.adjoint() * rows);
    auto cols = h.block(0, k + 1, ihi + 1, len);
    cols.noalias() -= (cols * u) * (scale * u.adjoint());
    auto qcols = q.block(0, k + 1, n, len);
    qcols.noalias() -= (qcols * u) * (scale * u.adjoint());
    h.block(k + 2, k, len - 1, 1).setZero();
  }
}

struct Givens {
  double c = 1.0;
  Complex s = 0.0;
};

// G = [[c, s], [-conj(s), c]] maps (x, y) to (r, 0).
inline Givens make_givens(Complex x, Complex y) {
  if (y == Complex(0.0)) return {1.0, 0.0};
  if (x == Complex(0.0)) return {0.0, std::conj(y) / std::abs(y)};
  const double ax = std::abs(x);
  const double r = std::hypot(ax, std::abs(y));
  return {ax / r, (x / ax) * std::conj(y) / r};
}

inline void rotate_rows(CMatrix& h, const Givens& g, Index k, Index col_begin) {
  for (Index j = col_begin; j < h.cols(); ++j) {
    const Complex a = h(k, j);
    const Complex b = h(k + 1, j);
    h(k, j) = g.c * a + g.s * b;
    h(k + 1, j) = -std::conj(g.s) * a + g.c * b;
  }
}

inline void rotate_cols(CMatrix& h, const Givens& g, Index k, Index row_end) {
  for (Index i = 0; i <= row_end; ++i) {
    const Complex a = h(i, k);
    const Complex b = h(i, k + 1);
    h(i, k) = g.c * a + std::conj(g.s) * b;
    h(i, k + 1) = -g.s * a + g.c * b;
  }
}

inline bool negligible_subdiagonal(const CMatrix& h, Index k, Index ilo) {
  constexpr double ulp = std::numeric_limits<double>::epsilon();
  constexpr double smlnum = std::numeric_limits<double>::min() / ulp;
  const double sub = abs1(h(k, k - 1));
  if (sub <= smlnum) return true;
  double tst = abs1(h(k - 1, k - 1)) + abs1(h(k, k));
  if (tst == 0.0) {
    if (k - 2 >= ilo) tst += std::abs(h(k - 1, k - 2).real());
    if (k + 1 < h.rows()) tst += std::abs(h(k + 1, k).real());
  }
  if (sub > ulp * tst) return false;
  // Ahues & Tisseur refinement of the classic criterion.
  const double ab = std::max(sub, abs1(h(k - 1, k)));
  const double ba = std::min(sub, abs1(h(k - 1, k)));
  const double aa = std::max(abs1(h(k, k)), abs1(h(k - 1, k - 1) - h(k, k)));
  const double bb = std::min(abs1(h(k, k)), abs1(h(k - 1, k - 1) - h(k, k)));
  const double s = aa + ab;
  if (s == 0.0) return true;
  return ba * (ab / s) <= std::max(smlnum, ulp * (bb * (aa / s)));
}

inline Complex wilkinson_shift(const CMatrix& h, Index i) {
  Complex t = h(i, i);
  const Complex u = std::sqrt(h(i - 1, i)) * std::sqrt(h(i, i - 1));
  double s = abs1(u);
  if (s == 0.0) return t;
  const Complex x = 0.5 * (h(i - 1, i - 1) - t);
  const double sx = abs1(x);
  s = std::max(s, sx);
  Complex y = s * std::sqrt((x / s) * (x / s) + (u / s) * (u / s));
  if (sx > 0.0) {
    const Complex xs = x / sx;
    if (xs.real() * y.real() + xs.imag() * y.imag() < 0.0) y = -y;
  }
  return t - u * (u / (x + y));
}

/// Complex Schur form m(perm, perm) = q * t * q^H, t upper triangular.
struct Schur {
  CMatrix t;
  CMatrix q;
  std::vector<Index> perm;
};

inline Schur schur(const CMatrix& m) {
  const Index n = m.rows();
  Balanced b = isolate_eigenvalues(m);
  CMatrix q = CMatrix::Identity(n, n);
  CMatrix& h = b.h;
  const Index ilo = b.ilo;
  const Index ihi = b.ihi;
  reduce_to_hessenberg(h, q, ilo, ihi);

  const long max_iterations = 100L * static_cast<long>(n);
  long total = 0;
  int its = 0;
  Index hi = ihi;
  while (hi > ilo) {
    Index l = hi;
    for (; l > ilo; --l) {
      if (negligible_subdiagonal(h, l, ilo)) {
        h(l, l - 1) = 0.0;
        break;
      }
    }
    if (l == hi) {
      --hi;
      its = 0;
      continue;
    }
    if (++total > max_iterations)
      throw Error(ErrorKind::NonConvergence, "QR iteration failed to deflate within 100*dim iterations");
    ++its;

    Complex shift;
    if (its % 30 == 10) {
      shift = 0.75 * std::abs(h(l + 1, l).real()) + h(l, l);
    } else if (its % 30 == 20) {
      shift = 0.75 * std::abs(h(hi, hi - 1).real()) + h(hi, hi);
    } else {
      shift = wilkinson_shift(h, hi);
    }

    for (Index k = l; k < hi; ++k) {
      const Complex x = (k == l) ? h(l, l) - shift : h(k, k - 1);
      const Complex y = (k == l) ? h(l + 1, l) : h(k + 1, k - 1);
      const Givens g = make_givens(x, y);
      rotate_rows(h, g, k, k == l ? l : k - 1);
      if (k > l) h(k + 1, k - 1) = 0.0;
      rotate_cols(h, g, k, std::min(k + 2, hi));
      rotate_cols(q, g, k, n - 1);
    }
  }
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) h(i, j) = 0.0;
  return {std::move(h), std::move(q), std::move(b.perm)};
}

/// Right eigenvector of the upper-triangular t for diagonal entry i, by back
/// substitution with near-zero pivots floored at smin.
inline CVector triangular_eigenvector(const CMatrix& t, Index i, double smin) {
  const Index n = t.rows();
  CVector y = CVector::Zero(n);
  y(i) = 1.0;
  const Complex lambda = t(i, i);
  for (Index j = i - 1; j >= 0; --j) {
    Complex sum = 0.0;
    for (Index k = j + 1; k <= i; ++k) sum += t(j, k) * y(k);
    Complex pivot = t(j, j) - lambda;
    if (std::abs(pivot) < smin) pivot = smin;
    y(j) = -sum / pivot;
    const double big = y.cwiseAbs().maxCoeff();
    if (big > 1e100) y /= big;
  }
  return y.normalized();
}

}  // namespace detail

/// All eigenvalues of a general square matrix, with multiplicity.
///
/// Permutation balancing, Householder reduction to Hessenberg form, then
/// single-shift complex QR with Wilkinson shifts and deflation. Each eigenpair
/// is checked: a relative residual above 1e-9 raises NonConvergence.
inline Spectrum eig(const CMatrix& m) {
  require_square(m, "eig");
  require_finite(m, "eig");
  const Index n = m.rows();
  const detail::Schur s = detail::schur(m);
  const double mnorm = m.norm();
  const double smin = std::max(std::numeric_limits<double>::epsilon() * s.t.norm(),
                               std::numeric_limits<double>::min());

  Spectrum out;
  out.eigenvalues.reserve(static_cast<std::size_t>(n));
  out.residuals.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const Complex lambda = s.t(i, i);
    const CVector y = detail::triangular_eigenvector(s.t, i, smin);
    const CVector vp = s.q * y;
    CVector v(n);
    for (Index r = 0; r < n; ++r) v(s.perm[static_cast<std::size_t>(r)]) = vp(r);
    const double res = mnorm == 0.0 ? 0.0 : (m * v - lambda * v).norm() / mnorm;
    if (!(res <= 1e-9))
      throw Error(ErrorKind::NonConvergence, "eigenpair residual " + std::to_string(res) + " exceeds 1e-9");
    out.eigenvalues.push_back(lambda);
    out.residuals.push_back(res);
  }
  return out;
}

/// Matrix exponential: scaling and squaring around the degree-13 diagonal
/// Pade approximant (squaring starts once ||M||_1 exceeds 5.37).
inline CMatrix expm(const CMatrix& m) {
  require_square(m, "expm");
  require_finite(m, "expm");
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;

  const Index n = m.rows();
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const CMatrix a = m / std::ldexp(1.0, squarings);

  const CMatrix id = CMatrix::Identity(n, n);
  const CMatrix a2 = a * a;
  const CMatrix a4 = a2 * a2;
  const CMatrix a6 = a4 * a2;
  const CMatrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id;
  const CMatrix u = a * u_inner;
  const CMatrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id;
  CMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  require_finite(r, "expm result");
  return r;
}

struct SvdNorms {
  double trace_norm = 0.0;
  double op_norm = 0.0;
  double fro_norm = 0.0;
};

inline RVector singular_values(const CMatrix& m) {
  require_finite(m, "singular_values");
  if (m.size() == 0) return RVector();
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues();
}

inline SvdNorms svd_norms(const CMatrix& m) {
  const RVector sv = singular_values(m);
  if (sv.size() == 0) return {};
  return {sv.sum(), sv.maxCoeff(), sv.norm()};
}

/// Number of singular values above tau * sigma_max.
inline int rank_tol(const CMatrix& m, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::OutOfRange, "rank_tol: tau must be positive");
  const RVector sv = singular_values(m);
  if (sv.size() == 0) return 0;
  const double smax = sv.maxCoeff();
  if (smax == 0.0) return 0;
  return static_cast<int>((sv.array() > tau * smax).count());
}

inline double min_gap(std::span<const Complex> values) {
  double gap = kInfiniteGap;
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j) gap = std::min(gap, std::abs(values[i] - values[j]));
  return gap;
}

inline double min_gap(const Spectrum& s) { return min_gap(std::span<const Complex>(s.eigenvalues)); }

/// Greedy minimal-distance matching of two equally sized multisets. Returns
/// the largest matched distance (+inf on size mismatch). Ties are broken by
/// lexicographic (re, im) order of the left element, then the right one.
inline double match_spectra(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) return kInfiniteGap;
  auto lex = [](Complex x, Complex y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  };
  struct Pair {
    double d;
    std::size_t i;
    std::size_t j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) pairs.push_back({std::abs(a[i] - b[j]), i, j});
  std::sort(pairs.begin(), pairs.end(), [&](const Pair& p, const Pair& q) {
    if (p.d != q.d) return p.d < q.d;
    if (a[p.i] != a[q.i]) return lex(a[p.i], a[q.i]);
    return lex(b[p.j], b[q.j]);
  });
  std::vector<bool> used_a(a.size(), false);
  std::vector<bool> used_b(b.size(), false);
  double worst = 0.0;
  std::size_t matched = 0;
  for (const Pair& p : pairs) {
    if (used_a[p.i] || used_b[p.j]) continue;
    used_a[p.i] = used_b[p.j] = true;
    worst = std::max(worst, p.d);
    if (++matched == a.size()) break;
  }
  return worst;
}

/// Eigen-decomposition of a Hermitian matrix (the Hermitian part is used).
/// Eigenvalues ascending; eigenvectors are the columns of `vectors`.
struct HermitianEigen {
  RVector values;
  CMatrix vectors;
};

inline HermitianEigen eigh(const CMatrix& m) {
  require_square(m, "eigh");
  require_finite(m, "eigh");
  const CMatrix herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::NonConvergence, "Hermitian eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline double hermiticity_residual(const CMatrix& m) { return (m - m.adjoint()).norm(); }

/// One cluster of nearly equal eigenvalues with its multiplicities.
struct EigenCluster {
  Complex center;
  int algebraic = 0;
  int geometric = 0;
  bool defective() const { return geometric < algebraic; }
};

/// Eigenvalues, clustered multiplicities, minimum gap and defectiveness.
struct SpectrumReport {
  Spectrum spectrum;
  std::vector<EigenCluster> clusters;
  double min_gap = kInfiniteGap;
  double rank_tolerance = 1e-8;
  bool defective = false;
  bool simple = false;
};

/// Single-linkage clustering of eigenvalues at distance <= tol; clusters are
/// returned in lexicographic (re, im) order of their centers.
inline std::vector<std::vector<Complex>> cluster_eigenvalues(std::span<const Complex> values, double tol) {
  const std::size_t n = values.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(values[i] - values[j]) <= tol) parent[find(i)] = find(j);

  std::vector<std::vector<Complex>> groups;
  std::vector<std::size_t> root_to_group(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_to_group[r] == n) {
      root_to_group[r] = groups.size();
      groups.emplace_back();
    }
    groups[root_to_group[r]].push_back(values[i]);
  }
  auto center = [](const std::vector<Complex>& g) {
    return std::accumulate(g.begin(), g.end(), Complex(0.0)) / static_cast<double>(g.size());
  };
  std::sort(groups.begin(), groups.end(), [&](const auto& x, const auto& y) {
    const Complex cx = center(x);
    const Complex cy = center(y);
    return cx.real() != cy.real() ? cx.real() < cy.real() : cx.imag() < cy.imag();
  });
  return groups;
}

/// Algebraic multiplicities from eigenvalue clustering at `cluster_tol`,
/// geometric ones as dim - rank_tol(M - center * 1, rank_tau).
inline SpectrumReport analyze_spectrum(const CMatrix& m, double cluster_tol = 1e-7, double rank_tau = 1e-8,
                                       double gap_tol = 1e-8) {
  SpectrumReport report;
  report.spectrum = eig(m);
  report.spectrum.cluster_tolerance = cluster_tol;
  report.rank_tolerance = rank_tau;
  report.min_gap = min_gap(report.spectrum);
  report.simple = report.min_gap > gap_tol;
  const Index n = m.rows();
  for (const auto& group : cluster_eigenvalues(report.spectrum.eigenvalues, cluster_tol)) {
    EigenCluster c;
    c.center = std::accumulate(group.begin(), group.end(), Complex(0.0)) / static_cast<double>(group.size());
    c.algebraic = static_cast<int>(group.size());
    const CMatrix shifted = m - c.center * CMatrix::Identity(n, n);
    c.geometric = static_cast<int>(n) - rank_tol(shifted, rank_tau);
    c.geometric = std::clamp(c.geometric, 1, c.algebraic);
    report.defective = report.defective || c.defective();
    report.clusters.push_back(c);
  }
  return report;
}

}  // namespace scf
