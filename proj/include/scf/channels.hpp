#pragma once

// Channel data model. A linear map on n x n matrices is carried by its
// n^2 x n^2 representation matrix with the row-stacking convention
// vec(|j><k|) = e_j (x) e_k, i.e. vec(X)[j*n + k] = X(j, k). The Choi matrix is
// unnormalized, J = sum_{jk} |j><k| (x) Phi(|j><k|), so J(j*n+a, k*n+b) equals
// M(a*n+b, j*n+k).

#include <Eigen/Dense>

#include <array>
#include <random>
#include <string>
#include <vector>

#include "scf/numerics.hpp"

namespace scf {

enum class MapKind { channel, generator };

struct Superoperator {
  int n = 1;
  CMatrix mat = CMatrix::Identity(1, 1);

  Superoperator() = default;
  Superoperator(int dim, CMatrix m) : n(dim), mat(std::move(m)) {
    if (n < 1 || mat.rows() != Index(n) * n || mat.cols() != Index(n) * n)
      throw Error(ErrorKind::DimensionMismatch, "superoperator matrix must be n^2 x n^2");
  }

  static Superoperator identity(int n) { return {n, CMatrix::Identity(Index(n) * n, Index(n) * n)}; }
  static Superoperator zero(int n) { return {n, CMatrix::Zero(Index(n) * n, Index(n) * n)}; }

  friend Superoperator operator+(const Superoperator& a, const Superoperator& b) {
    if (a.n != b.n) throw Error(ErrorKind::DimensionMismatch, "superoperator sum");
    return {a.n, a.mat + b.mat};
  }
  friend Superoperator operator-(const Superoperator& a, const Superoperator& b) {
    if (a.n != b.n) throw Error(ErrorKind::DimensionMismatch, "superoperator difference");
    return {a.n, a.mat - b.mat};
  }
  friend Superoperator operator*(double s, const Superoperator& a) { return {a.n, s * a.mat}; }
};

/// Composition a o b (b acts first).
inline Superoperator compose(const Superoperator& a, const Superoperator& b) {
  if (a.n != b.n) throw Error(ErrorKind::DimensionMismatch, "compose");
  return {a.n, a.mat * b.mat};
}

struct ChoiMatrix {
  int n = 1;
  CMatrix mat;
};

struct KrausSet {
  int n = 1;
  std::vector<CMatrix> operators;
};

/// Pauli transfer matrix of a qubit map, P(j, k) = tr(sigma_j Phi(sigma_k)) / 2.
struct PauliTransferMatrix {
  Eigen::Matrix4d mat = Eigen::Matrix4d::Identity();
};

/// Global tolerance set for class certificates.
struct Tolerances {
  double tp = 1e-10;
  double unital = 1e-10;
  double cp = 1e-10;
  double gksl = 1e-10;
  double hermiticity = 1e-10;
  double positivity = 1e-10;
};

/// Numerical evidence of class membership. Residuals are reported verbatim;
/// flags are a deterministic function of the residuals and the tolerances.
///
/// The positivity entry is a sampled minimum of <phi|Phi(psi psi^*)|phi>. It can
/// refute positivity, never prove it.
struct ClassCertificate {
  MapKind kind = MapKind::channel;
  double tp_residual = 0.0;
  double unital_residual = 0.0;
  double cp_min_eig = 0.0;
  double hermiticity_residual = 0.0;
  double gksl_trace_residual = 0.0;
  double gksl_ccp_min_eig = 0.0;
  double positivity_min_sample = 0.0;

  bool tp = false;
  bool unital = false;
  bool cp = false;
  bool positive_heuristic = false;
  bool gksl = false;

  bool cptp() const { return tp && cp; }
  bool ptp() const { return tp && positive_heuristic; }
};

inline CVector vec(const CMatrix& x) {
  const Index n = x.rows();
  CVector v(n * n);
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k) v(j * n + k) = x(j, k);
  return v;
}

inline CMatrix unvec(const CVector& v, int n) {
  CMatrix x(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k) x(j, k) = v(j * n + k);
  return x;
}

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Pauli matrices sigma_0 = 1, sigma_1, sigma_2, sigma_3.
inline const std::array<CMatrix, 4>& pauli_basis() {
  static const std::array<CMatrix, 4> basis = [] {
    std::array<CMatrix, 4> p;
    const Complex i(0.0, 1.0);
    p[0] = CMatrix::Identity(2, 2);
    p[1] = CMatrix::Zero(2, 2);
    p[1](0, 1) = p[1](1, 0) = 1.0;
    p[2] = CMatrix::Zero(2, 2);
    p[2](0, 1) = -i;
    p[2](1, 0) = i;
    p[3] = CMatrix::Zero(2, 2);
    p[3](0, 0) = 1.0;
    p[3](1, 1) = -1.0;
    return p;
  }();
  return basis;
}

inline CMatrix apply(const Superoperator& s, const CMatrix& rho) {
  if (rho.rows() != s.n || rho.cols() != s.n)
    throw Error(ErrorKind::DimensionMismatch, "apply: input must be n x n");
  return unvec(s.mat * vec(rho), s.n);
}

inline ChoiMatrix to_choi(const Superoperator& s) {
  const Index n = s.n;
  ChoiMatrix c{s.n, CMatrix(n * n, n * n)};
  for (Index j = 0; j < n; ++j)
    for (Index a = 0; a < n; ++a)
      for (Index k = 0; k < n; ++k)
        for (Index b = 0; b < n; ++b) c.mat(j * n + a, k * n + b) = s.mat(a * n + b, j * n + k);
  return c;
}

inline Superoperator to_superop(const ChoiMatrix& c) {
  const Index n = c.n;
  if (n < 1 || c.mat.rows() != n * n || c.mat.cols() != n * n)
    throw Error(ErrorKind::DimensionMismatch, "Choi matrix must be n^2 x n^2");
  CMatrix m(n * n, n * n);
  for (Index j = 0; j < n; ++j)
    for (Index a = 0; a < n; ++a)
      for (Index k = 0; k < n; ++k)
        for (Index b = 0; b < n; ++b) m(a * n + b, j * n + k) = c.mat(j * n + a, k * n + b);
  return {c.n, std::move(m)};
}

inline Superoperator to_superop(const KrausSet& k) {
  const Index n = k.n;
  if (n < 1 || k.operators.empty()) throw Error(ErrorKind::DimensionMismatch, "Kraus set must be non-empty");
  CMatrix m = CMatrix::Zero(n * n, n * n);
  for (const CMatrix& op : k.operators) {
    if (op.rows() != n || op.cols() != n) throw Error(ErrorKind::DimensionMismatch, "Kraus operator must be n x n");
    m += kron(op, op.conjugate());
  }
  return {k.n, std::move(m)};
}

inline Superoperator to_superop(const PauliTransferMatrix& p) {
  const auto& sigma = pauli_basis();
  CMatrix m = CMatrix::Zero(4, 4);
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k)
      if (p.mat(j, k) != 0.0) m += (0.5 * p.mat(j, k)) * vec(sigma[j]) * vec(sigma[k]).adjoint();
  return {2, std::move(m)};
}

/// Requires a qubit map. Imaginary parts, which vanish for
/// Hermiticity-preserving maps, are discarded.
inline PauliTransferMatrix to_ptm(const Superoperator& s) {
  if (s.n != 2) throw Error(ErrorKind::NotQubit, "Pauli transfer matrix needs n == 2");
  const auto& sigma = pauli_basis();
  PauliTransferMatrix p;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k) p.mat(j, k) = 0.5 * (vec(sigma[j]).adjoint() * s.mat * vec(sigma[k]))(0).real();
  return p;
}

/// Largest imaginary part dropped by to_ptm.
inline double ptm_imaginary_residual(const Superoperator& s) {
  if (s.n != 2) throw Error(ErrorKind::NotQubit, "Pauli transfer matrix needs n == 2");
  const auto& sigma = pauli_basis();
  double worst = 0.0;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k)
      worst = std::max(worst, std::abs(0.5 * (vec(sigma[j]).adjoint() * s.mat * vec(sigma[k]))(0).imag()));
  return worst;
}

/// Kraus operators from the scaled eigenvectors of the Choi matrix. Negative
/// eigenvalues down to -1e-10 are clipped; eigenvalues at or below 1e-12 of
/// the largest one are dropped.
inline KrausSet to_kraus(const ChoiMatrix& c) {
  const Index n = c.n;
  if (n < 1 || c.mat.rows() != n * n || c.mat.cols() != n * n)
    throw Error(ErrorKind::DimensionMismatch, "Choi matrix must be n^2 x n^2");
  const HermitianEigen e = eigh(c.mat);
  if (e.values(0) < -1e-10)
    throw Error(ErrorKind::NotCP, "Choi matrix has eigenvalue " + std::to_string(e.values(0)));
  const double top = e.values(e.values.size() - 1);
  KrausSet out{c.n, {}};
  for (Index idx = e.values.size() - 1; idx >= 0; --idx) {
    const double lambda = e.values(idx);
    if (top <= 0.0 || lambda <= 1e-12 * top) break;
    CMatrix k(n, n);
    const double scale = std::sqrt(lambda);
    for (Index j = 0; j < n; ++j)
      for (Index a = 0; a < n; ++a) k(a, j) = scale * e.vectors(j * n + a, idx);
    out.operators.push_back(std::move(k));
  }
  if (out.operators.empty()) out.operators.push_back(CMatrix::Zero(n, n));
  return out;
}

/// Partial trace of a Choi matrix over the output factor, (Tr_2 J)(j, k).
inline CMatrix choi_input_marginal(const ChoiMatrix& c) {
  const Index n = c.n;
  CMatrix t = CMatrix::Zero(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k)
      for (Index a = 0; a < n; ++a) t(j, k) += c.mat(j * n + a, k * n + a);
  return t;
}

/// Unnormalized maximally entangled vector sum_j |j>|j>.
inline CVector omega_vector(int n) {
  CVector w = CVector::Zero(Index(n) * n);
  for (Index j = 0; j < n; ++j) w(j * n + j) = 1.0;
  return w;
}

namespace detail {

inline CVector haar_state(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  CVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = Complex(gauss(rng), gauss(rng));
  return v.normalized();
}

inline double pair_value(const Superoperator& s, const CVector& psi, const CVector& phi) {
  const CMatrix out = scf::apply(s, psi * psi.adjoint());
  return (phi.adjoint() * out * phi)(0).real();
}

/// Sampled minimum of <phi|Phi(psi psi^*)|phi> over unit vectors, followed by
/// alternating minimization: phi is set to the lowest eigenvector of
/// Phi(psi psi^*), psi to the lowest eigenvector of Phi^*(phi phi^*).
inline double positivity_sample(const Superoperator& s, std::mt19937_64& rng, int pairs = 2000,
                                 int refinement_steps = 50) {
  CVector best_psi;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < pairs; ++i) {
    CVector psi = haar_state(s.n, rng);
    CVector phi = haar_state(s.n, rng);
    const double v = pair_value(s, psi, phi);
    if (v < best) {
      best = v;
      best_psi = std::move(psi);
    }
  }
  const Superoperator dual{s.n, s.mat.adjoint()};
  CVector psi = best_psi;
  for (int step = 0; step < refinement_steps; ++step) {
    const HermitianEigen out = eigh(scf::apply(s, psi * psi.adjoint()));
    best = std::min(best, out.values(0));
    const CVector phi = out.vectors.col(0);
    const HermitianEigen back = eigh(scf::apply(dual, phi * phi.adjoint()));
    best = std::min(best, back.values(0));
    psi = back.vectors.col(0);
  }
  return best;
}

}  // namespace detail

/// Fills every certificate field. For `generator` the unital residual is
/// ||L(1)||_F; for `channel` it is ||Phi(1) - 1||_F.
inline ClassCertificate certify(const Superoperator& s, MapKind kind, std::mt19937_64& rng,
                                const Tolerances& tol = {}) {
  require_finite(s.mat, "certify");
  const Index n = s.n;
  const CMatrix id = CMatrix::Identity(n, n);
  const ChoiMatrix choi = to_choi(s);
  const CMatrix marginal = choi_input_marginal(choi);

  ClassCertificate c;
  c.kind = kind;
  c.tp_residual = (marginal - id).norm();
  c.gksl_trace_residual = marginal.norm();
  const CMatrix image_of_identity = scf::apply(s, id);
  c.unital_residual = kind == MapKind::channel ? (image_of_identity - id).norm() : image_of_identity.norm();
  c.hermiticity_residual = hermiticity_residual(choi.mat);
  c.cp_min_eig = eigh(choi.mat).values(0);

  const CVector w = omega_vector(s.n);
  const CMatrix proj = CMatrix::Identity(n * n, n * n) - (w * w.adjoint()) / static_cast<double>(n);
  c.gksl_ccp_min_eig = eigh(proj * choi.mat * proj).values(0);
  c.positivity_min_sample = detail::positivity_sample(s, rng);

  const bool hermitian = c.hermiticity_residual <= tol.hermiticity;
  c.tp = c.tp_residual <= tol.tp;
  c.unital = c.unital_residual <= tol.unital;
  c.cp = hermitian && c.cp_min_eig >= -tol.cp;
  c.positive_heuristic = kind == MapKind::channel && c.positivity_min_sample >= -tol.positivity;
  c.gksl = hermitian && c.gksl_trace_residual <= tol.gksl && c.gksl_ccp_min_eig >= -tol.gksl;
  return c;
}

inline ClassCertificate certify(const Superoperator& s, MapKind kind, std::uint64_t seed = 0,
                                const Tolerances& tol = {}) {
  std::mt19937_64 rng(seed);
  return certify(s, kind, rng, tol);
}

}  // namespace scf
