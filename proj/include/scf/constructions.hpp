#pragma once

// Concrete maps: the unital channel with n^2 distinct eigenvalues, the convex
// family of non-diagonalizable qubit channels, the two-parameter defective
// unital family and the singular-value feasibility test for unital qubit
// Pauli transfer matrices.

#include <cmath>
#include <numbers>
#include <vector>

#include "scf/channels.hpp"

namespace scf {

/// Permutation matrix C = sum_j |j><j+1| (indices cyclic), so C|k+1> = |k>.
inline CMatrix cyclic_shift(int n) {
  if (n < 1) throw Error(ErrorKind::OutOfRange, "cyclic_shift: n must be positive");
  CMatrix c = CMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) c(j, (j + 1) % n) = 1.0;
  return c;
}

/// Coherence eigenvalue magnitude 1 / (2^j 3^k) with 1-based j < k.
inline double coherence_weight(int j, int k) { return 1.0 / (std::pow(2.0, j) * std::pow(3.0, k)); }

struct PsiChannel {
  int n = 1;
  Superoperator superop;
  std::vector<Complex> expected_spectrum;
  /// Set for n == 1, where the construction collapses to the identity.
  bool degenerate = false;
};

inline std::vector<Complex> psi_expected_spectrum(int n) {
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n) * n);
  for (int k = 0; k < n; ++k) out.push_back(0.5 + 0.5 * std::polar(1.0, 2.0 * std::numbers::pi * k / n));
  for (int j = 1; j <= n; ++j)
    for (int k = j + 1; k <= n; ++k) {
      out.emplace_back(0.0, coherence_weight(j, k));
      out.emplace_back(0.0, -coherence_weight(j, k));
    }
  return out;
}

/// Unital CPTP map acting on populations with A = (1 + C)/2 and multiplying
/// the coherence |j><k| by +-i/(2^j 3^k).
inline PsiChannel build_psi(int n) {
  if (n < 1) throw Error(ErrorKind::OutOfRange, "build_psi: n must be positive");
  const CMatrix a = 0.5 * (CMatrix::Identity(n, n) + cyclic_shift(n));
  CMatrix m = CMatrix::Zero(Index(n) * n, Index(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < n; ++l) m(l * n + l, j * n + j) = a(l, j);
    for (int k = 0; k < n; ++k) {
      if (j < k) m(j * n + k, j * n + k) = Complex(0.0, coherence_weight(j + 1, k + 1));
      if (j > k) m(j * n + k, j * n + k) = Complex(0.0, -coherence_weight(k + 1, j + 1));
    }
  }
  return {n, Superoperator(n, std::move(m)), psi_expected_spectrum(n), n == 1};
}

/// rho -> tr(rho) 1/n.
inline Superoperator reset_channel(int n) {
  CMatrix m = CMatrix::Zero(Index(n) * n, Index(n) * n);
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j) m(l * n + l, j * n + j) = 1.0 / n;
  return {n, std::move(m)};
}

inline PauliTransferMatrix phi_mu_ptm(double mu) {
  PauliTransferMatrix p;
  p.mat.setZero();
  p.mat(0, 0) = 1.0;
  p.mat(1, 3) = -mu;
  return p;
}

/// Convex combination (1 - mu) reset + mu Phi_eq1; mu = 1 is the
/// non-diagonalizable channel rho -> (tr rho 1 + (rho22 - rho11) sigma_x)/2.
inline Superoperator build_phi_mu(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw Error(ErrorKind::OutOfRange, "build_phi_mu: mu must lie in [0, 1]");
  return to_superop(phi_mu_ptm(mu));
}

inline Superoperator eq1_channel() { return build_phi_mu(1.0); }

struct FujiwaraAlgoet {
  bool feasible = false;
  std::array<double, 3> singular_values{};  // descending
};

/// For a unital qubit PTM diag(1, Lambda): feasible iff
/// |s1 + s2| <= 1 + s3 and |s1 - s2| <= 1 - s3 for the ordered singular
/// values of Lambda, with s3 carrying the sign of det(Lambda). This decides
/// complete positivity exactly.
inline FujiwaraAlgoet fujiwara_algoet(const PauliTransferMatrix& ptm, double tol = 1e-12) {
  for (int k = 1; k < 4; ++k)
    if (std::abs(ptm.mat(0, k)) > tol || std::abs(ptm.mat(k, 0)) > tol)
      throw Error(ErrorKind::NotUnitalForm, "first row and column must be (1, 0, 0, 0)");
  if (std::abs(ptm.mat(0, 0) - 1.0) > tol) throw Error(ErrorKind::NotUnitalForm, "PTM(0, 0) must be 1");
  const Eigen::Matrix3d lambda = ptm.mat.bottomRightCorner<3, 3>();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(lambda);
  const Eigen::Vector3d s = svd.singularValues();
  FujiwaraAlgoet out;
  out.singular_values = {s(0), s(1), s(2)};
  // An orientation-reversing block (det < 0) enters with s3 negated.
  const double s3 = lambda.determinant() < 0.0 ? -s(2) : s(2);
  out.feasible = std::abs(s(0) + s(1)) <= 1.0 + s3 + tol && std::abs(s(0) - s(1)) <= 1.0 - s3 + tol;
  return out;
}

/// Unital qubit channel with PTM diag(1, scale * lambda); InfeasiblePTM when
/// the singular-value conditions fail.
inline Superoperator build_unital_qubit(const Eigen::Matrix3d& lambda, double scale = 1.0) {
  PauliTransferMatrix p;
  p.mat.setZero();
  p.mat(0, 0) = 1.0;
  p.mat.bottomRightCorner<3, 3>() = scale * lambda;
  if (!fujiwara_algoet(p).feasible)
    throw Error(ErrorKind::InfeasiblePTM, "Fujiwara-Algoet conditions violated");
  return to_superop(p);
}

/// PTM with Lambda = [[0, a, 0], [0, 0, b], [0, 0, 0]]; feasible iff
/// |a - b| <= 1 and |a + b| <= 1.
inline Superoperator build_remark_family(double a, double b) {
  Eigen::Matrix3d lambda = Eigen::Matrix3d::Zero();
  lambda(0, 1) = a;
  lambda(1, 2) = b;
  return build_unital_qubit(lambda);
}

}  // namespace scf
