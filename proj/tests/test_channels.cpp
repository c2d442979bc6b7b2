#include <catch_amalgamated.hpp>

#include "oracles.hpp"
#include "scf/scf.hpp"

using namespace scf;
using Catch::Matchers::WithinAbs;

namespace {

Superoperator from_map(const oracle::Map& f, int n) { return {n, oracle::superop_of(f, n)}; }

Superoperator transpose_map(int n) {
  return from_map([](const CMatrix& x) { return CMatrix(x.transpose()); }, n);
}

PauliTransferMatrix ptm(const Eigen::Matrix4d& m) {
  PauliTransferMatrix p;
  p.mat = m;
  return p;
}

}  // namespace

TEST_CASE("Superoperator validates its dimension") {
  CHECK_THROWS_AS(Superoperator(2, CMatrix::Identity(3, 3)), Error);
  CHECK_THROWS_AS(scf::apply(Superoperator::identity(2), CMatrix::Identity(3, 3)), Error);
}

TEST_CASE("vec stacks rows") {
  CMatrix x(2, 2);
  x << 1.0, 2.0, 3.0, 4.0;
  const CVector v = vec(x);
  CHECK(v(1) == Complex(2.0));
  CHECK(v(2) == Complex(3.0));
  CHECK(unvec(v, 2) == x);
  CHECK(vec(oracle::unit(3, 1, 2)) == kron(CMatrix::Identity(3, 3).col(1), CMatrix::Identity(3, 3).col(2)));
}

TEST_CASE("to_superop from each representation") {
  const Eigen::Matrix4d eq1 = oracle::ptm_of(oracle::eq1_apply);
  const Superoperator from_ptm = to_superop(ptm(eq1));
  CHECK((from_ptm.mat - oracle::superop_of(oracle::eq1_apply, 2)).norm() < 1e-15);
  CHECK(oracle::multiset_distance(eig(from_ptm.mat).eigenvalues, {1.0, 0.0, 0.0, 0.0}) < 1e-9);

  const Superoperator from_kraus = to_superop(KrausSet{3, {CMatrix::Identity(3, 3)}});
  CHECK(from_kraus.mat == CMatrix::Identity(9, 9));

  const Superoperator from_choi = to_superop(ChoiMatrix{2, oracle::choi_of(oracle::psi_apply, 2)});
  // Reorder the basis as |00>, |11>, |01>, |10>: populations first.
  const std::array<int, 4> order{0, 3, 1, 2};
  CMatrix block = CMatrix::Zero(4, 4);
  block(0, 0) = block(0, 1) = block(1, 0) = block(1, 1) = 0.5;
  block(2, 2) = Complex(0, 1.0 / 18);
  block(3, 3) = Complex(0, -1.0 / 18);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) CHECK(std::abs(from_choi.mat(order[r], order[c]) - block(r, c)) < 1e-16);
}

TEST_CASE("to_choi examples") {
  const ChoiMatrix id = to_choi(Superoperator::identity(2));
  CVector omega = CVector::Zero(4);
  omega(0) = omega(3) = 1.0;
  CHECK(id.mat == omega * omega.adjoint());

  CMatrix expected = CMatrix::Zero(4, 4);
  expected.diagonal().setConstant(0.5);
  expected(0, 3) = Complex(0, 1.0 / 18);
  expected(3, 0) = Complex(0, -1.0 / 18);
  CHECK((to_choi(build_psi(2).superop).mat - expected).norm() < 1e-16);

  const ChoiMatrix eq1 = to_choi(eq1_channel());
  CHECK(std::abs(oracle::min_hermitian_eigenvalue(eq1.mat)) < 1e-14);
  CHECK((eq1.mat - oracle::choi_of(oracle::eq1_apply, 2)).norm() < 1e-15);
}

TEST_CASE("to_kraus examples") {
  const KrausSet id = to_kraus(to_choi(Superoperator::identity(2)));
  REQUIRE(id.operators.size() == 1);
  const CMatrix& k = id.operators[0];
  const Complex phase = k(0, 0);
  CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
  CHECK((k - phase * CMatrix::Identity(2, 2)).norm() < 1e-12);

  const KrausSet psi = to_kraus(to_choi(build_psi(2).superop));
  CHECK(psi.operators.size() == 4);
  CMatrix sum = CMatrix::Zero(2, 2);
  for (const CMatrix& op : psi.operators) sum += op.adjoint() * op;
  CHECK((sum - CMatrix::Identity(2, 2)).norm() < 1e-10);

  CHECK(to_kraus(to_choi(eq1_channel())).operators.size() == 2);

  try {
    to_kraus(to_choi(transpose_map(2)));
    FAIL("expected NotCP");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotCP);
  }
}

TEST_CASE("to_kraus reconstructs random channels") {
  std::mt19937_64 rng(21);
  for (int n : {2, 3, 4}) {
    const Superoperator s = random_cptp(n, rng);
    const KrausSet k = to_kraus(to_choi(s));
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const CMatrix e = oracle::unit(n, j, l);
        CMatrix out = CMatrix::Zero(n, n);
        for (const CMatrix& op : k.operators) out += op * e * op.adjoint();
        CHECK((out - scf::apply(s, e)).norm() < 1e-8);
      }
  }
}

TEST_CASE("certify examples") {
  const ClassCertificate psi = certify(build_psi(3).superop, MapKind::channel);
  CHECK(psi.tp_residual < 1e-12);
  CHECK(psi.unital_residual < 1e-12);
  // Populations only move to the next level, so n(n-2) Choi rows vanish and
  // the smallest Choi eigenvalue is zero up to rounding for n >= 3.
  CHECK(std::abs(psi.cp_min_eig) < 1e-12);
  CHECK(psi.cptp());
  CHECK(certify(build_psi(2).superop, MapKind::channel).cp_min_eig > 0.0);
  CHECK(psi.unital);

  const ClassCertificate id = certify(Superoperator::identity(2), MapKind::channel);
  CHECK(id.tp_residual == 0.0);
  CHECK(id.unital_residual == 0.0);
  CHECK(std::abs(id.cp_min_eig) < 1e-15);
  CHECK(id.cptp());

  const Superoperator l = eq1_channel() - Superoperator::identity(2);
  const ClassCertificate gen = certify(l, MapKind::generator);
  CHECK(gen.gksl_trace_residual < 1e-12);
  CHECK(gen.gksl_ccp_min_eig >= -1e-10);
  CHECK(gen.gksl);

  const ClassCertificate t = certify(transpose_map(2), MapKind::channel);
  CHECK(t.tp);
  CHECK_FALSE(t.cp);
  CHECK(t.positive_heuristic);
  CHECK(t.cp_min_eig < -0.9);

  // A map that sends a pure state to something indefinite.
  const Superoperator neg{2, -CMatrix::Identity(4, 4)};
  const ClassCertificate n = certify(neg, MapKind::channel);
  CHECK_FALSE(n.positive_heuristic);
  CHECK(n.positivity_min_sample < -0.5);
}

TEST_CASE("certify is reproducible for a fixed seed") {
  const Superoperator t = transpose_map(3);
  CHECK(certify(t, MapKind::channel, 7).positivity_min_sample == certify(t, MapKind::channel, 7).positivity_min_sample);
}

TEST_CASE("apply examples") {
  CMatrix rho = CMatrix::Zero(2, 2);
  rho(0, 0) = 1.0;
  CMatrix expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  CHECK((scf::apply(eq1_channel(), rho) - expected).norm() < 1e-16);

  std::mt19937_64 rng(22);
  const CMatrix x = oracle::random_matrix(3, 3, rng);
  CHECK(scf::apply(Superoperator::identity(3), x) == x);

  const CMatrix ones = CMatrix::Ones(2, 2);
  CMatrix image(2, 2);
  image << 1.0, Complex(0, 1.0 / 18), Complex(0, -1.0 / 18), 1.0;
  CHECK((scf::apply(build_psi(2).superop, ones) - image).norm() < 1e-16);
}

TEST_CASE("to_ptm examples") {
  Eigen::Matrix4d eq1 = Eigen::Matrix4d::Zero();
  eq1(0, 0) = 1.0;
  eq1(1, 3) = -1.0;
  CHECK((to_ptm(eq1_channel()).mat - eq1).norm() < 1e-16);
  CHECK((to_ptm(Superoperator::identity(2)).mat - Eigen::Matrix4d::Identity()).norm() < 1e-16);
  for (double lambda : {0.01, 0.1, 0.5, 1.0})
    for (double mu : {0.0, 0.5, 1.0}) {
      const Superoperator mix = (1.0 - lambda) * build_phi_mu(mu) + lambda * build_psi(2).superop;
      CHECK((to_ptm(mix).mat - oracle::mixed_ptm(lambda, mu)).cwiseAbs().maxCoeff() < 1e-14);
    }
  try {
    to_ptm(Superoperator::identity(3));
    FAIL("expected NotQubit");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotQubit);
  }
}

TEST_CASE("to_ptm agrees with the trace formula and is real on Hermiticity-preserving maps") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const oracle::Map f = oracle::random_channel_map(2, 1 + trial % 4, rng);
    const Superoperator s = from_map(f, 2);
    CHECK((to_ptm(s).mat - oracle::ptm_of(f)).norm() < 1e-12);
    CHECK(ptm_imaginary_residual(s) < 1e-12);
    CHECK(std::abs(to_ptm(s).mat(0, 0) - 1.0) < 1e-10);
    CHECK(to_ptm(s).mat.row(0).tail<3>().norm() < 1e-10);
  }
}

TEST_CASE("round trips between representations") {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 3;
    const Superoperator s = random_cptp(n, rng);
    CHECK((to_superop(to_choi(s)).mat - s.mat).norm() < 1e-12);
    CHECK((to_superop(to_kraus(to_choi(s))).mat - s.mat).norm() < 1e-10);
    if (n == 2) CHECK((to_superop(to_ptm(s)).mat - s.mat).norm() < 1e-12);
  }
}

TEST_CASE("random channels certify and compose") {
  std::mt19937_64 rng(25);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + trial % 3;
    const Superoperator a = random_cptp(n, rng);
    const Superoperator b = random_cptp(n, rng);
    const ClassCertificate ca = certify(a, MapKind::channel, 1);
    CHECK(ca.tp_residual < 1e-10);
    CHECK(ca.cp_min_eig >= -1e-10);
    CHECK(certify(compose(a, b), MapKind::channel, 1).cptp());
    CHECK(certify(a - Superoperator::identity(n), MapKind::generator, 1).gksl);
    CHECK(certify(random_gksl(n, rng), MapKind::generator, 1).gksl);
  }
}

TEST_CASE("certificates agree with an independent Choi assembly") {
  std::mt19937_64 rng(26);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + trial % 2;
    const oracle::Map f = oracle::random_channel_map(n, 2, rng);
    const Superoperator s = from_map(f, n);
    const CMatrix j = oracle::choi_of(f, n);
    CHECK((to_choi(s).mat - j).norm() < 1e-14);
    CHECK(std::abs(certify(s, MapKind::channel, 0).cp_min_eig - oracle::min_hermitian_eigenvalue(j)) < 1e-12);
  }
}
