#include "gptlab/theories.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace gptlab {
namespace {

using testing::basis_ket;
using testing::ket;
using testing::qstate;

Eigen::VectorXd spectrum(const StateVec& s) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(s.density(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

TEST(Purify, PureStatePurifiesToProduct) {
  const StateVec s = qstate(2, ket({1, Complex(0, 1)}).normalized());
  const StateVec p = purify(s);
  EXPECT_TRUE(p.is_pure());
  EXPECT_LT(sup_norm(marginalize(p, Side::left).coeffs() - s.coeffs()), 1e-12);
  // Purifying side is itself pure, so the state is a product s (x) |v><v|.
  EXPECT_TRUE(marginalize(p, Side::right).is_pure());
}

TEST(Purify, MaximallyMixedQubitGivesMaximallyEntangled) {
  const StateVec p = purify(StateVec::maximally_mixed(System::quantum(2)));
  EXPECT_TRUE(p.is_pure());
  EXPECT_LT(sup_norm(marginalize(p, Side::left).density() - CMatrix::Identity(2, 2) / 2.0), 1e-12);
  EXPECT_LT(sup_norm(marginalize(p, Side::right).density() - CMatrix::Identity(2, 2) / 2.0), 1e-12);
}

TEST(Purify, SchmidtWeightsMatchSpectrum) {
  CMatrix rho = CMatrix::Zero(2, 2);
  rho(0, 0) = 0.75;
  rho(1, 1) = 0.25;
  const StateVec s = StateVec::from_density(System::quantum(2), rho);
  const StateVec p = purify(s);
  EXPECT_LT(sup_norm(marginalize(p, Side::left).coeffs() - s.coeffs()), 1e-9);
  const Eigen::VectorXd w = spectrum(marginalize(p, Side::right));
  EXPECT_NEAR(w(0), 0.25, 1e-9);
  EXPECT_NEAR(w(1), 0.75, 1e-9);
}

TEST(Purify, MarginalRecoversRandomStates) {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 3;
    const StateVec s = StateVec::from_density(System::quantum(d), testing::random_density(d, rng));
    const StateVec p = purify(s);
    EXPECT_TRUE(p.is_pure());
    EXPECT_LT(sup_norm(marginalize(p, Side::left).coeffs() - s.coeffs()), 1e-9);
  }
}

TEST(Purify, RejectsClassicalSystem) {
  EXPECT_THROW(purify(StateVec::maximally_mixed(System::classical(2))), Error);
}

StateVec conditioned_on(const StateVec& psi, int i) {
  const System sys = psi.system().left();
  return condition(EffectVec::dual_of(StateVec::from_ket(sys, CVector::Unit(sys.hilbert_dim(), i))), psi, Side::left);
}

TEST(FaithfulState, UniformQubit) {
  const StateVec psi = faithful_state({0.5, 0.5}, System::quantum(2));
  const StateVec out = conditioned_on(psi, 0);
  EXPECT_LT(sup_norm(out.coeffs() - qstate(2, basis_ket(2, 0)).coeffs() * 0.5), 1e-12);
}

TEST(FaithfulState, BiasedQubit) {
  const StateVec psi = faithful_state({0.75, 0.25}, System::quantum(2));
  EXPECT_LT(sup_norm(conditioned_on(psi, 1).coeffs() - qstate(2, basis_ket(2, 1)).coeffs() * 0.25), 1e-9);
  EXPECT_LT(sup_norm(conditioned_on(psi, 0).coeffs() - qstate(2, basis_ket(2, 0)).coeffs() * 0.75), 1e-9);
}

TEST(FaithfulState, UniformQutrit) {
  const StateVec psi = faithful_state({1.0 / 3, 1.0 / 3, 1.0 / 3}, System::quantum(3));
  for (int i = 0; i < 3; ++i)
    EXPECT_LT(sup_norm(conditioned_on(psi, i).coeffs() - qstate(3, basis_ket(3, i)).coeffs() / 3.0), 1e-9);
}

TEST(FaithfulState, RejectsZeroWeight) {
  EXPECT_THROW(faithful_state({1.0, 0.0}, System::quantum(2)), Error);
  EXPECT_THROW(faithful_state({0.5, 0.6}, System::quantum(2)), Error);
}

TEST(CheckFaithful, DecidesEquality) {
  const System q2 = System::quantum(2);
  const StateVec psi = faithful_state({0.5, 0.5}, q2);
  const TransformMat x = TransformMat::conjugation(q2, testing::pauli_x());
  const TransformMat id = TransformMat::identity(q2);
  EXPECT_TRUE(check_faithful(x, x, psi));
  EXPECT_FALSE(check_faithful(x, id, psi));
  const TransformMat nudged(q2, q2, x.matrix() + Matrix::Constant(4, 4, 1e-12));
  EXPECT_TRUE(check_faithful(x, nudged, psi));
}

TEST(CheckFaithful, DiscriminatesPerturbationsAboveTenTol) {
  Rng rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Config cfg;
  for (int d : {2, 3}) {
    const System sys = System::quantum(d);
    std::vector<double> p(d);
    for (int i = 0; i < d; ++i) p[i] = (i + 1.0) / (d * (d + 1) / 2.0);
    const StateVec psi = faithful_state(p, sys);
    const TransformMat t = quantum_theory().sample_reversible(sys, rng);
    for (int trial = 0; trial < 40; ++trial) {
      Matrix delta(sys.dim(), sys.dim());
      for (int i = 0; i < delta.size(); ++i) delta.data()[i] = u(rng);
      const double scale = std::pow(10.0, -12.0 + 6.0 * (trial % 7) / 6.0);
      delta *= scale / sup_norm(delta);
      const TransformMat t2(sys, sys, t.matrix() + delta);
      const bool same = check_faithful(t, t2, psi, cfg);
      if (sup_norm(delta) > 10 * cfg.tol) {
        EXPECT_FALSE(same) << "scale " << scale;
      }
      if (sup_norm(delta) < cfg.tol / sys.dim()) {
        EXPECT_TRUE(same) << "scale " << scale;
      }
    }
  }
}

TEST(StrongSymmetry, IdentityWhenTuplesAgree) {
  const std::vector<StateVec> src{qstate(2, basis_ket(2, 0)), qstate(2, basis_ket(2, 1))};
  const TransformMat t = check_strong_symmetry_witness(src, src);
  for (const auto& s : src) EXPECT_LT(sup_norm(apply(t, s).coeffs() - s.coeffs()), 1e-9);
}

TEST(StrongSymmetry, ComputationalToHadamardBasis) {
  const std::vector<StateVec> src{qstate(2, basis_ket(2, 0)), qstate(2, basis_ket(2, 1))};
  const std::vector<StateVec> dst{qstate(2, ket({1, 1}) / std::sqrt(2.0)), qstate(2, ket({1, -1}) / std::sqrt(2.0))};
  const TransformMat t = check_strong_symmetry_witness(src, dst);
  EXPECT_TRUE(t.reversible());
  // Hadamard conjugation realizes the same map on the tuple.
  const TransformMat h = TransformMat::conjugation(System::quantum(2), testing::hadamard());
  for (std::size_t i = 0; i < src.size(); ++i) {
    EXPECT_LT(sup_norm(apply(t, src[i]).coeffs() - dst[i].coeffs()), 1e-9);
    EXPECT_LT(sup_norm(apply(h, src[i]).coeffs() - dst[i].coeffs()), 1e-12);
  }
  const TransformMat round = t.inverse() * t;
  EXPECT_LT(sup_norm(round.matrix() - Matrix::Identity(4, 4)), 1e-9);
}

TEST(StrongSymmetry, ClassicalRelabeling) {
  const System c3 = System::classical(3);
  auto vertex = [&](int i) { return StateVec(c3, Vector::Unit(3, i)); };
  const TransformMat t = check_strong_symmetry_witness({vertex(1), vertex(2)}, {vertex(2), vertex(1)});
  Matrix expect = Matrix::Zero(3, 3);
  expect(0, 0) = expect(2, 1) = expect(1, 2) = 1.0;
  EXPECT_LT(sup_norm(t.matrix() - expect), 1e-15);
}

TEST(StrongSymmetry, RandomFramesMapExactlyAndInvert) {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 3;
    const CMatrix ua = haar_unitary(d, rng), ub = haar_unitary(d, rng);
    std::vector<StateVec> src, dst;
    for (int i = 0; i < 2; ++i) {
      src.push_back(qstate(d, ua.col(i)));
      dst.push_back(qstate(d, ub.col(i)));
    }
    const TransformMat t = check_strong_symmetry_witness(src, dst);
    EXPECT_LT(causality_defect(t), 1e-12);
    for (int i = 0; i < 2; ++i) EXPECT_LT(sup_norm(apply(t, src[i]).coeffs() - dst[i].coeffs()), 1e-9);
    EXPECT_LT(sup_norm((t * t.inverse()).matrix() - Matrix::Identity(9, 9)), 1e-9);
  }
}

TEST(StrongSymmetry, RejectsBadInput) {
  const StateVec zero = qstate(2, basis_ket(2, 0)), plus = qstate(2, ket({1, 1}) / std::sqrt(2.0));
  EXPECT_THROW(check_strong_symmetry_witness({zero, plus}, {zero, qstate(2, basis_ket(2, 1))}), Error);
  EXPECT_THROW(check_strong_symmetry_witness({zero}, {zero, qstate(2, basis_ket(2, 1))}), Error);
  EXPECT_THROW(check_strong_symmetry_witness({StateVec::maximally_mixed(System::quantum(2))}, {zero}), Error);
}

TEST(CompositionAxioms, QuantumHasNoFailures) {
  const CompositionReport r = check_composition_axioms(quantum_theory(), 100, 42);
  EXPECT_EQ(r.trials, 100);
  EXPECT_TRUE(r.ok()) << r.failures.front();
}

TEST(CompositionAxioms, ClassicalHasNoFailures) {
  EXPECT_TRUE(check_composition_axioms(classical_theory(), 50, 7).ok());
}

TEST(CompositionAxioms, MaximallyMixedProduct) {
  const System q2 = System::quantum(2);
  const StateVec mm = compose_parallel(StateVec::maximally_mixed(q2), StateVec::maximally_mixed(q2));
  EXPECT_LT(sup_norm(mm.density() - CMatrix::Identity(4, 4) / 4.0), 1e-15);
}

TEST(UniqueDistinguishing, ClassicalCoordinateCovectors) {
  const System c3 = System::classical(3);
  const Measurement m =
      check_unique_distinguishing({StateVec(c3, Vector::Unit(3, 0)), StateVec(c3, Vector::Unit(3, 1)),
                                   StateVec(c3, Vector::Unit(3, 2))});
  for (int j = 0; j < 3; ++j) EXPECT_EQ(m[j].coeffs(), Vector::Unit(3, j));
}

TEST(UniqueDistinguishing, QubitComputationalBasis) {
  const Measurement m = check_unique_distinguishing({qstate(2, basis_ket(2, 0)), qstate(2, basis_ket(2, 1))});
  ASSERT_EQ(m.size(), 2u);
  for (int j = 0; j < 2; ++j) {
    CMatrix proj = CMatrix::Zero(2, 2);
    proj(j, j) = 1.0;
    EXPECT_LT(sup_norm(m[j].op() - proj), 1e-12);
  }
}

TEST(UniqueDistinguishing, QutritFourierBasis) {
  const int d = 3;
  CMatrix f(d, d);
  const double pi = std::acos(-1.0);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) f(a, b) = std::polar(1.0 / std::sqrt(3.0), 2 * pi * a * b / d);
  std::vector<StateVec> frame;
  for (int i = 0; i < d; ++i) frame.push_back(qstate(d, f.col(i)));
  const Measurement m = check_unique_distinguishing(frame);
  EXPECT_TRUE(m.is_valid());
  for (int j = 0; j < d; ++j) {
    EXPECT_LT(sup_norm(m[j].op() - f.col(j) * f.col(j).adjoint()), 1e-12);
    for (int i = 0; i < d; ++i) EXPECT_NEAR(probability(m[j], frame[i]), i == j ? 1.0 : 0.0, 1e-9);
  }
}

TEST(UniqueDistinguishing, RefusesIncompleteFrame) {
  EXPECT_THROW(check_unique_distinguishing({qstate(3, basis_ket(3, 0)), qstate(3, basis_ket(3, 1))}), Error);
}

TEST(UniqueDistinguishing, RandomFramesSatisfyKronecker) {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 3;
    const CMatrix u = haar_unitary(d, rng);
    std::vector<StateVec> frame;
    for (int i = 0; i < d; ++i) frame.push_back(qstate(d, u.col(i)));
    const Measurement m = check_unique_distinguishing(frame);
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) EXPECT_NEAR(probability(m[j], frame[i]), i == j ? 1.0 : 0.0, 1e-9);
  }
}

}  // namespace
}  // namespace gptlab
