#include "gptlab/interference.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

namespace gptlab {
namespace {

using testing::basis_ket;
using testing::qstate;

CMatrix displayed_qutrit() {
  CMatrix rho(3, 3);
  rho << 0.4, Complex(0.1, 0.2), Complex(0.05, -0.1),  //
      Complex(0.1, -0.2), 0.35, Complex(0.0, 0.15),      //
      Complex(0.05, 0.1), Complex(0.0, -0.15), 0.25;
  return rho;
}

CMatrix act(const TransformMat& t, const CMatrix& rho) {
  const System& sys = t.in_system();
  return apply(t, StateVec::from_density(sys, rho)).density();
}

// Brute-force oracle: I_n from density matrices with Pi_J rho Pi_J directly.
double sorkin_oracle(const CMatrix& rho, const CMatrix& e, Subset subset) {
  const int d = int(rho.rows()), n = subset_size(subset);
  double total = 0.0;
  for (Subset sub = 1; sub <= subset; ++sub) {
    if ((sub & ~subset) != 0) continue;
    CMatrix pi = CMatrix::Zero(d, d);
    for (int i = 0; i < d; ++i)
      if ((sub >> i) & 1u) pi(i, i) = 1.0;
    const double p = (e * pi * rho * pi).trace().real();
    total += ((n - subset_size(sub)) % 2 == 0) ? p : -p;
  }
  return total;
}

TEST(FaceProjector, QutritKeepsTopLeftBlock) {
  const SlitStructure slits = SlitStructure::basis(System::quantum(3), 3);
  const CMatrix rho = displayed_qutrit();
  CMatrix expect = rho;
  expect.row(2).setZero();
  expect.col(2).setZero();
  EXPECT_LT(sup_norm(act(face_projector(slits, make_subset({0, 1})), rho) - expect), 1e-12);
}

TEST(FaceProjector, FullSetIsIdentityAndEmptyIsZero) {
  for (const System& sys : {System::quantum(3), System::classical(4)}) {
    const SlitStructure slits = SlitStructure::basis(sys, sys.capacity());
    EXPECT_LT(sup_norm(face_projector(slits, full_subset(slits.size())).matrix() - Matrix::Identity(sys.dim(), sys.dim())),
              1e-12);
    EXPECT_EQ(sup_norm(face_projector(slits, 0).matrix()), 0.0);
  }
}

TEST(FaceProjector, ClassicalMasksCoordinates) {
  const System c4 = System::classical(4);
  const SlitStructure slits = SlitStructure::basis(c4, 4);
  const StateVec s(c4, Vector::Constant(4, 0.25));
  Vector expect(4);
  expect << 0.25, 0, 0.25, 0;
  EXPECT_LT(sup_norm(apply(face_projector(slits, make_subset({0, 2})), s).coeffs() - expect), 1e-15);
}

TEST(FaceProjector, RejectsSubsetOutsideSlits) {
  const SlitStructure slits = SlitStructure::basis(System::quantum(3), 2);
  EXPECT_THROW(face_projector(slits, make_subset({2})), Error);
}

TEST(CoherenceProjector, QutritKeepsOnlyCoherences) {
  const SlitStructure slits = SlitStructure::basis(System::quantum(3), 3);
  const CMatrix rho = displayed_qutrit();
  CMatrix expect = CMatrix::Zero(3, 3);
  expect(0, 1) = rho(0, 1);
  expect(1, 0) = rho(1, 0);
  const Subset s01 = make_subset({0, 1});
  EXPECT_LT(sup_norm(act(coherence_projector(slits, s01), rho) - expect), 1e-12);

  const Matrix combo = face_projector(slits, s01).matrix() - face_projector(slits, make_subset({0})).matrix() -
                       face_projector(slits, make_subset({1})).matrix();
  EXPECT_LT(sup_norm(coherence_projector(slits, s01).matrix() - combo), 1e-15);
}

TEST(CoherenceProjector, SingletonIsFaceProjector) {
  const SlitStructure slits = SlitStructure::basis(System::quantum(3), 3);
  const Subset s2 = make_subset({2});
  EXPECT_LT(sup_norm(coherence_projector(slits, s2).matrix() - face_projector(slits, s2).matrix()), 1e-15);
  EXPECT_THROW(coherence_projector(slits, 0), Error);
}

TEST(CoherenceProjector, FamilyMatchesStandalone) {
  const SlitStructure slits = SlitStructure::basis(System::quantum(4), 4);
  const ProjectorFamily fam(slits);
  for (Subset s = 1; s <= fam.full(); ++s)
    EXPECT_LT(sup_norm(fam.coherence(s) - coherence_projector(slits, s).matrix()), 1e-14);
}

TEST(DecompositionCoefficient, KnownValues) {
  for (int k = 1; k <= 6; ++k)
    for (int m = 1; m <= k; ++m) {
      EXPECT_EQ(decomposition_coefficient(k, m, k + 1), ((k - m) % 2 == 0) ? 1 : -1);
      for (int n = k; n <= 9; ++n) EXPECT_EQ(decomposition_coefficient(k, k, n), 1);
    }
  EXPECT_EQ(decomposition_coefficient(2, 1, 4), -2);
  EXPECT_EQ(decomposition_coefficient(1, 1, 1), 1);
  EXPECT_THROW(decomposition_coefficient(3, 1, 2), Error);
  EXPECT_THROW(decomposition_coefficient(2, 0, 4), Error);
}

TEST(IdentityResidual, QuantumAndClassicalOrders) {
  EXPECT_LT(identity_residual(ProjectorFamily(SlitStructure::basis(System::quantum(3), 3)), 2), 1e-9);
  EXPECT_GT(identity_residual(ProjectorFamily(SlitStructure::basis(System::quantum(3), 3)), 1), 0.5);
  for (int n = 1; n <= 6; ++n)
    EXPECT_EQ(identity_residual(ProjectorFamily(SlitStructure::basis(System::classical(n), n)), 1), 0.0);
}

TEST(IdentityResidual, RejectsOrderAboveN) {
  const ProjectorFamily fam(SlitStructure::basis(System::quantum(2), 2));
  EXPECT_THROW(identity_residual(fam, 3), Error);
  EXPECT_THROW(coherence_identity_residual(fam, 0), Error);
}

TEST(CoherenceIdentityResidual, QuantumLiesAtTwo) {
  for (int n : {3, 4, 5}) {
    const ProjectorFamily fam(SlitStructure::basis(System::quantum(n), n));
    EXPECT_LT(coherence_identity_residual(fam, 2), 1e-9) << n;
    EXPECT_GT(coherence_identity_residual(fam, 1), 0.1) << n;
  }
  EXPECT_EQ(coherence_identity_residual(ProjectorFamily(SlitStructure::basis(System::classical(4), 4)), 1), 0.0);
}

TEST(CoherenceIdentityResidual, QubitOrderOneIsCoherenceRemover) {
  const SlitStructure slits = SlitStructure::basis(System::quantum(2), 2);
  const ProjectorFamily fam(slits);
  // The defect 1 - P_0 - P_1 is exactly omega_{0,1}, which keeps the two
  // off-diagonal generators with unit weight.
  const Matrix remover = coherence_projector(slits, make_subset({0, 1})).matrix();
  EXPECT_NEAR(coherence_identity_residual(fam, 1), sup_norm(remover), 1e-15);
  EXPECT_NEAR(sup_norm(remover), 1.0, 1e-12);
}

TEST(CoherenceDecompose, QutritPlusState) {
  const ProjectorFamily fam(SlitStructure::basis(System::quantum(3), 3));
  const StateVec plus = qstate(3, testing::ket({1, 1, 0}) / std::sqrt(2.0));
  const auto parts = coherence_decompose(fam, 2, plus);
  EXPECT_EQ(parts.size(), 6u);
  auto density = [&](std::initializer_list<int> s) { return parts.at(make_subset(s)).density(); };
  CMatrix d0 = CMatrix::Zero(3, 3), d1 = CMatrix::Zero(3, 3), c01 = CMatrix::Zero(3, 3);
  d0(0, 0) = 0.5;
  d1(1, 1) = 0.5;
  c01(0, 1) = c01(1, 0) = 0.5;
  EXPECT_LT(sup_norm(density({0}) - d0), 1e-12);
  EXPECT_LT(sup_norm(density({1}) - d1), 1e-12);
  EXPECT_LT(sup_norm(density({0, 1}) - c01), 1e-12);
  EXPECT_LT(sup_norm(density({2})), 1e-12);
  EXPECT_LT(sup_norm(density({0, 2})), 1e-12);
  EXPECT_LT(sup_norm(density({1, 2})), 1e-12);
}

TEST(CoherenceDecompose, BasisStateHasSingleComponent) {
  const ProjectorFamily fam(SlitStructure::basis(System::quantum(3), 3));
  const auto parts = coherence_decompose(fam, 2, qstate(3, basis_ket(3, 1)));
  for (const auto& [subset, part] : parts) {
    if (subset == make_subset({1}))
      EXPECT_LT(sup_norm(part.coeffs() - qstate(3, basis_ket(3, 1)).coeffs()), 1e-12);
    else
      EXPECT_LT(sup_norm(part.coeffs()), 1e-12) << subset_to_string(subset);
  }
}

TEST(CoherenceDecompose, ComponentsSumToState) {
  Rng rng(5);
  const ProjectorFamily fam(SlitStructure::basis(System::quantum(4), 4));
  for (int trial = 0; trial < 100; ++trial) {
    const StateVec s = StateVec::from_density(fam.system(), testing::random_density(4, rng));
    Vector sum = Vector::Zero(s.coeffs().size());
    for (const auto& [subset, part] : coherence_decompose(fam, 2, s)) {
      EXPECT_LT(sup_norm(part.coeffs() - fam.coherence(subset) * s.coeffs()), 1e-15);
      sum += part.coeffs();
    }
    EXPECT_LT(sup_norm(sum - s.coeffs()), 1e-12);
  }
}

TEST(CoherenceDecompose, RefusesOrderBelowTheory) {
  const ProjectorFamily fam(SlitStructure::basis(System::quantum(3), 3));
  EXPECT_THROW(coherence_decompose(fam, 1, StateVec::maximally_mixed(fam.system())), Error);
}

TEST(Sorkin, QutritUniformThirdOrderVanishes) {
  const ProjectorFamily fam(SlitStructure::basis(System::quantum(3), 3));
  const CVector u = testing::ket({1, 1, 1}) / std::sqrt(3.0);
  const StateVec s = qstate(3, u);
  const EffectVec e = EffectVec::dual_of(s);
  EXPECT_LT(std::abs(sorkin_functional(fam, s, e, full_subset(3))), 1e-9);
  EXPECT_GT(std::abs(sorkin_functional(fam, s, e, make_subset({0, 1}))), 0.1);
}

TEST(Sorkin, ClassicalSecondOrderIsExactlyZero) {
  Rng rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const System c3 = System::classical(3);
  const ProjectorFamily fam(SlitStructure::basis(c3, 3));
  for (int trial = 0; trial < 50; ++trial) {
    Vector p(3), e(3);
    for (int i = 0; i < 3; ++i) {
      p(i) = u(rng);
      e(i) = u(rng);
    }
    p /= p.sum();
    for (Subset s : {make_subset({0, 1}), make_subset({0, 2}), make_subset({1, 2})})
      EXPECT_EQ(sorkin_functional(fam, StateVec(c3, p), EffectVec(c3, e), s), 0.0);
  }
}

TEST(Sorkin, QubitPlusStateGivesOneHalf) {
  const ProjectorFamily fam(SlitStructure::basis(System::quantum(2), 2));
  const StateVec plus = qstate(2, testing::ket({1, 1}) / std::sqrt(2.0));
  EXPECT_NEAR(sorkin_functional(fam, plus, EffectVec::dual_of(plus), make_subset({0, 1})), 0.5, 1e-12);
  EXPECT_THROW(sorkin_functional(fam, plus, EffectVec::dual_of(plus), 0), Error);
}

TEST(Sorkin, MatchesDensityOracleAndCoherenceProjector) {
  Rng rng(13);
  const int d = 4;
  const ProjectorFamily fam(SlitStructure::basis(System::quantum(d), d));
  for (int trial = 0; trial < 40; ++trial) {
    const CMatrix rho = testing::random_density(d, rng);
    const CMatrix eop = testing::random_density(d, rng);
    const StateVec s = StateVec::from_density(fam.system(), rho);
    const EffectVec e = EffectVec::from_operator(fam.system(), eop);
    for (Subset sub = 1; sub <= fam.full(); ++sub) {
      const double value = sorkin_functional(fam, s, e, sub);
      EXPECT_NEAR(value, sorkin_oracle(rho, eop, sub), 1e-12);
      EXPECT_NEAR(value, probability(e, StateVec(s.system(), fam.coherence(sub) * s.coeffs())), 1e-12);
      if (subset_size(sub) >= 3) {
        EXPECT_LT(std::abs(value), 1e-12);
      }
    }
  }
}

TEST(MaxOrder, QuantumAndClassical) {
  const InterferenceOrder q3 = max_interference_order(ProjectorFamily(SlitStructure::basis(System::quantum(3), 3)));
  EXPECT_EQ(q3.k, 2);
  EXPECT_TRUE(q3.monotone);
  EXPECT_EQ(max_interference_order(ProjectorFamily(SlitStructure::basis(System::classical(4), 4))).k, 1);
  const InterferenceOrder q4 = max_interference_order(ProjectorFamily(SlitStructure::basis(System::quantum(4), 4)));
  EXPECT_EQ(q4.k, 2);
  ASSERT_EQ(q4.residuals.size(), 4u);
  EXPECT_GT(q4.residuals[0], 0.1);
}

// Slit structures from random frames, so the properties do not depend on the
// computational basis.
SlitStructure random_slits(int d, int n, Rng& rng) {
  const CMatrix u = haar_unitary(d, rng);
  std::vector<StateVec> states;
  for (int i = 0; i < n; ++i) states.push_back(qstate(d, u.col(i)));
  return SlitStructure::from_states(std::move(states));
}

TEST(Properties, ProductRuleAndIdempotence) {
  Rng rng(21);
  for (int trial = 0; trial < 4; ++trial) {
    const int d = 3 + trial % 2;
    const ProjectorFamily fam(random_slits(d, d, rng));
    for (Subset a = 0; a <= fam.full(); ++a) {
      EXPECT_LT(sup_norm(fam.face(a) * fam.face(a) - fam.face(a)), 1e-9);
      for (Subset b = 0; b <= fam.full(); ++b) EXPECT_LT(sup_norm(fam.face(a) * fam.face(b) - fam.face(a & b)), 1e-9);
    }
  }
}

TEST(Properties, FaceProjectorsPreserveCone) {
  Rng rng(22);
  const ProjectorFamily fam(random_slits(4, 3, rng));
  for (int trial = 0; trial < 20; ++trial) {
    const StateVec s = StateVec::from_density(fam.system(), testing::random_density(4, rng));
    for (Subset a = 0; a <= fam.full(); ++a) EXPECT_TRUE(StateVec(s.system(), fam.face(a) * s.coeffs()).in_cone(1e-9));
  }
}

TEST(Properties, MobiusInversionUpToFiveSlits) {
  Rng rng(23);
  for (int n = 1; n <= 5; ++n) {
    const ProjectorFamily fam(random_slits(n, n, rng));
    for (Subset a = 1; a <= fam.full(); ++a) {
      Matrix sum = Matrix::Zero(fam.system().dim(), fam.system().dim());
      for_each_submask(a, [&](Subset b) {
        if (b != 0) sum += fam.coherence(b);
      });
      EXPECT_LT(sup_norm(sum - fam.face(a)), 1e-9) << n << " " << subset_to_string(a);
    }
  }
}

TEST(Properties, ResidualsNonIncreasingInK) {
  Rng rng(24);
  for (int n = 2; n <= 5; ++n) {
    const ProjectorFamily qf(random_slits(n, n, rng));
    const ProjectorFamily cf(SlitStructure::basis(System::classical(n), n));
    for (const ProjectorFamily* fam : {&qf, &cf})
      for (int k = 1; k < n; ++k) {
        EXPECT_LE(identity_residual(*fam, k + 1), identity_residual(*fam, k) + 1e-9);
        EXPECT_LE(coherence_identity_residual(*fam, k + 1), coherence_identity_residual(*fam, k) + 1e-9);
      }
  }
}

TEST(SlitStructure, IncompleteFrameHasRemainderEffect) {
  const SlitStructure slits = SlitStructure::basis(System::quantum(3), 2);
  EXPECT_FALSE(slits.complete());
  EXPECT_EQ(slits.distinguishing().size(), 3u);
  EXPECT_TRUE(slits.distinguishing().is_valid());
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(probability(slits.effect(j), slits.state(i)), i == j ? 1.0 : 0.0, 1e-12);
}

TEST(SlitStructure, RejectsOverlappingOrMixedStates) {
  const StateVec zero = qstate(2, basis_ket(2, 0));
  const StateVec plus = qstate(2, testing::ket({1, 1}) / std::sqrt(2.0));
  EXPECT_THROW(SlitStructure::from_states({zero, plus}), Error);
  EXPECT_THROW(SlitStructure::from_states({StateVec::maximally_mixed(System::quantum(2))}), Error);
  EXPECT_THROW(SlitStructure::basis(System::quantum(2), 3), Error);
  EXPECT_THROW(SlitStructure::basis(System::classical(13), 13), Error);
}

TEST(ProjectorFamily, UncachedFamilyAgrees) {
  // 2^12 * 144^2 doubles exceeds the cache budget, so faces are rebuilt.
  const ProjectorFamily big(SlitStructure::basis(System::quantum(12), 12));
  EXPECT_FALSE(big.cached());
  const ProjectorFamily small(SlitStructure::basis(System::quantum(3), 3));
  EXPECT_TRUE(small.cached());
  const Subset s = make_subset({0, 5, 11});
  EXPECT_LT(sup_norm(big.face(s) - face_projector(big.slits(), s).matrix()), 1e-15);
}

}  // namespace
}  // namespace gptlab
