#pragma once

// Seeded random generators for channels, generators and test matrices.

#include <random>

#include "scf/channels.hpp"

namespace scf {

inline CMatrix gaussian_matrix(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  CMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = Complex(gauss(rng), gauss(rng));
  return g;
}

inline CVector haar_state(int n, std::mt19937_64& rng) { return detail::haar_state(n, rng); }

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fix.
inline CMatrix haar_unitary(int n, std::mt19937_64& rng) {
  const CMatrix g = gaussian_matrix(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

/// Random full-Kraus-rank channel: K_i = G_i S^{-1/2} with S = sum G_i^H G_i
/// over `count` Ginibre matrices (default n^2).
inline KrausSet random_kraus(int n, std::mt19937_64& rng, int count = 0) {
  if (count <= 0) count = n * n;
  std::vector<CMatrix> gs;
  gs.reserve(static_cast<std::size_t>(count));
  CMatrix s = CMatrix::Zero(n, n);
  for (int i = 0; i < count; ++i) {
    gs.push_back(gaussian_matrix(n, n, rng));
    s += gs.back().adjoint() * gs.back();
  }
  const HermitianEigen e = eigh(s);
  const CMatrix inv_sqrt =
      e.vectors * e.values.cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() * e.vectors.adjoint();
  KrausSet k{n, {}};
  for (const CMatrix& g : gs) k.operators.push_back(g * inv_sqrt);
  return k;
}

inline Superoperator random_cptp(int n, std::mt19937_64& rng) { return to_superop(random_kraus(n, rng)); }

/// Markovian approximation of a random channel, Phi - id.
inline Superoperator random_gksl(int n, std::mt19937_64& rng) {
  return random_cptp(n, rng) - Superoperator::identity(n);
}

/// Hermitian matrix U diag(values) U^H with a Haar-random U.
inline CMatrix random_hermitian_with_spectrum(const RVector& values, std::mt19937_64& rng) {
  const CMatrix u = haar_unitary(static_cast<int>(values.size()), rng);
  return u * values.cast<Complex>().asDiagonal() * u.adjoint();
}

}  // namespace scf
