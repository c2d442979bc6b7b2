#pragma once

// Certified norm bounds for superoperators and executable forms of the two
// auxiliary facts the regularizers lean on: the "close to identity implies
// PSD" criterion and exponential contraction of Lindbladian differences.

#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "scf/channels.hpp"

namespace scf {

enum class BoundMethod { choi_trace_sandwich, pure_state_sampling, exact_svd };

inline constexpr std::string_view bound_method_name(BoundMethod m) {
  switch (m) {
    case BoundMethod::choi_trace_sandwich: return "choi_trace_sandwich";
    case BoundMethod::pure_state_sampling: return "pure_state_sampling";
    case BoundMethod::exact_svd: return "exact_svd";
  }
  return "unknown";
}

struct NormBound {
  double lower = 0.0;
  double upper = 0.0;
  BoundMethod method = BoundMethod::choi_trace_sandwich;
};

/// ||J(D)||_1 / n <= ||D||_diamond <= ||J(D)||_1.
inline NormBound diamond_bounds(const Superoperator& delta) {
  const double trace_norm = svd_norms(to_choi(delta).mat).trace_norm;
  return {trace_norm / delta.n, trace_norm, BoundMethod::choi_trace_sandwich};
}

inline Superoperator exp_map(const Superoperator& generator) { return {generator.n, expm(generator.mat)}; }

namespace detail {

// Alternating ascent on ||D(psi psi^*)||_1: with Y = D(psi psi^*) = W S V^H,
// U = W V^H attains Re tr(U^H Y) = ||Y||_1 and the next psi is the top
// eigenvector of the Hermitian part of D^*(U). The value never decreases for
// Hermiticity-preserving D.
inline double trace_norm_ascent(const Superoperator& delta, CVector psi, int steps) {
  const Superoperator dual{delta.n, delta.mat.adjoint()};
  double best = svd_norms(scf::apply(delta, psi * psi.adjoint())).trace_norm;
  for (int step = 0; step < steps; ++step) {
    const CMatrix y = scf::apply(delta, psi * psi.adjoint());
    Eigen::JacobiSVD<CMatrix> svd(y, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const CMatrix u = svd.matrixU() * svd.matrixV().adjoint();
    const HermitianEigen e = eigh(scf::apply(dual, u));
    psi = e.vectors.col(e.vectors.cols() - 1);
    best = std::max(best, svd_norms(scf::apply(delta, psi * psi.adjoint())).trace_norm);
  }
  return best;
}

}  // namespace detail

/// Lower bound on ||D||_{1->1} from Haar-random pure inputs. Every sample
/// that improves on the running maximum is followed by 50 ascent steps, so
/// the result is nondecreasing in `samples` for a fixed seed.
inline double one_to_one_lower(const Superoperator& delta, int samples, std::uint64_t rng_seed) {
  if (samples < 1) throw Error(ErrorKind::OutOfRange, "one_to_one_lower: samples must be >= 1");
  std::mt19937_64 rng(rng_seed);
  double sample_best = -1.0;
  double best = 0.0;
  for (int i = 0; i < samples; ++i) {
    const CVector psi = detail::haar_state(delta.n, rng);
    const double v = svd_norms(scf::apply(delta, psi * psi.adjoint())).trace_norm;
    if (v > sample_best) {
      sample_best = v;
      best = std::max(best, detail::trace_norm_ascent(delta, psi, 50));
    }
  }
  return best;
}

struct PsdCertificate {
  bool certified = false;
  double op_norm_residual = 0.0;  // ||1 - X||_inf
  double min_eigenvalue = 0.0;    // cross-validation value
};

/// Sufficient PSD test for Hermitian X: ||1 - X||_inf <= 1.
inline PsdCertificate psd_cert_lemma8(const CMatrix& x) {
  require_square(x, "psd_cert_lemma8");
  require_finite(x, "psd_cert_lemma8");
  if (hermiticity_residual(x) > 1e-12 * std::max(1.0, x.norm()))
    throw Error(ErrorKind::NotHermitian, "psd_cert_lemma8 needs a Hermitian matrix");
  PsdCertificate c;
  c.op_norm_residual = svd_norms(CMatrix::Identity(x.rows(), x.cols()) - x).op_norm;
  c.certified = c.op_norm_residual <= 1.0 + 1e-12;
  c.min_eigenvalue = eigh(x).values(0);
  return c;
}

/// Gauss-Legendre nodes and weights on [0, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int order) {
  if (order < 1) throw Error(ErrorKind::OutOfRange, "gauss_legendre: order must be >= 1");
  std::vector<double> nodes(static_cast<std::size_t>(order));
  std::vector<double> weights(static_cast<std::size_t>(order));
  for (int i = 0; i < (order + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= order; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = order * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // map [-1, 1] -> [0, 1]
    nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
    nodes[static_cast<std::size_t>(order - 1 - i)] = 0.5 * (1.0 + x);
    weights[static_cast<std::size_t>(i)] = 0.5 * w;
    weights[static_cast<std::size_t>(order - 1 - i)] = 0.5 * w;
  }
  return {nodes, weights};
}

/// || e^A - e^B - int_0^1 e^{(1-s)B} (A - B) e^{sA} ds ||_F with the
/// integral evaluated by Gauss-Legendre quadrature.
inline double duhamel_residual(const CMatrix& a, const CMatrix& b, int quad_order = 32) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorKind::DimensionMismatch, "duhamel_residual: A and B differ in shape");
  if (quad_order < 2) throw Error(ErrorKind::OutOfRange, "duhamel_residual: quad_order must be >= 2");
  const auto [nodes, weights] = gauss_legendre(quad_order);
  const CMatrix diff = a - b;
  CMatrix integral = CMatrix::Zero(a.rows(), a.cols());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    integral += weights[i] * (expm((1.0 - nodes[i]) * b) * diff * expm(nodes[i] * a));
  return (expm(a) - expm(b) - integral).norm();
}

struct ContractionCheck {
  bool holds = false;
  double lhs_lower = 0.0;  // lower bound on ||e^{L1} - e^{L2}||_diamond
  double rhs_upper = 0.0;  // upper bound on ||L1 - L2||_diamond
};

/// Computable consequence of ||e^{L1} - e^{L2}||_diamond <= ||L1 - L2||_diamond:
/// the Choi lower bound of the left side may not exceed the Choi upper bound
/// of the right side.
inline ContractionCheck contraction_check(const Superoperator& l1, const Superoperator& l2,
                                          const Tolerances& tol = {}) {
  if (l1.n != l2.n) throw Error(ErrorKind::DimensionMismatch, "contraction_check");
  if (!certify(l1, MapKind::generator, 0, tol).gksl || !certify(l2, MapKind::generator, 0, tol).gksl)
    throw Error(ErrorKind::NotGKSL, "contraction_check needs two GKSL generators");
  ContractionCheck c;
  c.lhs_lower = diamond_bounds(exp_map(l1) - exp_map(l2)).lower;
  c.rhs_upper = diamond_bounds(l1 - l2).upper;
  c.holds = c.lhs_lower <= c.rhs_upper + 1e-10;
  return c;
}

}  // namespace scf
