#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace semiframe;
using semiframe::testing::diff;
using semiframe::testing::random_family;

namespace {

VectorFamily diagonal_family(std::size_t d, double power) {
  ComplexMatrix rows(d, d);
  for (std::size_t k = 0; k < d; ++k) rows(k, k) = std::pow(static_cast<double>(k + 1), power);
  return {d, rows, "diagonal"};
}

}  // namespace

TEST(CanonicalDual, Examples) {
  const auto sp = MeasureSpace::counting(3);
  const auto onb = VectorFamily::orthonormal_basis(3);
  EXPECT_LE(diff(canonical_dual(onb, sp).vectors(), onb.vectors()), 1e-14);
  EXPECT_LE(diff(canonical_dual(diagonal_family(3, 1.0), sp).vectors(), diagonal_family(3, -1.0).vectors()), 1e-14);
}

TEST(CanonicalDual, ReconstructionAndTightness) {
  ProbeGenerator g(41);
  const auto phi = random_family(g, 5, 8);
  const auto sp = MeasureSpace::weighted({1, 2, 0.5, 1, 3, 1, 0.25, 1});
  const auto chi = canonical_dual(phi, sp);
  const auto t = frame_operator(phi, sp);
  for (int s = 0; s < 100; ++s) {
    const CVector f = g.gaussian_vector(5);
    CVector rebuilt(5);
    for (std::size_t n = 0; n < 8; ++n) {
      const Complex c = sp.weight(n) * inner(f, phi.vector(n));
      const CVector x = chi.vector(n);
      for (std::size_t j = 0; j < 5; ++j) rebuilt[j] += c * x[j];
    }
    EXPECT_LE(norm(rebuilt - f), 1e-9 * std::max(1.0, norm(f)));
    // sum mu_n |<T f, chi_n>|^2 = Omega(f, f)
    const CVector tf = t.apply(f);
    double tight = 0.0;
    for (std::size_t n = 0; n < 8; ++n) tight += sp.weight(n) * std::norm(inner(tf, chi.vector(n)));
    const double omega = omega_form(phi, sp, f, f).real();
    EXPECT_NEAR(tight, omega, 1e-8 * omega);
  }
}

TEST(CanonicalDual, ScalesInversely) {
  ProbeGenerator g(42);
  const auto phi = random_family(g, 4, 6);
  const auto sp = MeasureSpace::counting(6);
  const auto chi = canonical_dual(phi, sp);
  const auto chi3 = canonical_dual(phi.scaled(3.0), sp);
  EXPECT_LE(diff(chi3.vectors(), Complex(1.0 / 3.0) * chi.vectors()), 1e-10);
}

TEST(CanonicalDual, RejectsSingularFrameOperator) {
  const auto fam = VectorFamily::from_vectors(2, {{1.0, 0.0}});
  try {
    canonical_dual(fam, MeasureSpace::counting(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularFrameOperator);
  }
}

TEST(DualPair, Examples) {
  const auto sp = MeasureSpace::counting(3);
  const auto onb = VectorFamily::orthonormal_basis(3);
  EXPECT_TRUE(dual_pair_check(onb, onb, sp).verdict);
  EXPECT_TRUE(dual_pair_check(diagonal_family(3, 1.0), diagonal_family(3, -1.0), sp).verdict);
  const auto r = dual_pair_check(onb, onb.scaled(2.0), sp);
  EXPECT_FALSE(r.verdict);
  EXPECT_NEAR(r.max_residual, std::sqrt(3.0), 1e-14);  // Frobenius norm of I
  EXPECT_NEAR(norm(r.witness_defect), 1.0, 1e-14);     // every column is off by 1
  const auto one = VectorFamily::orthonormal_basis(1);
  EXPECT_NEAR(dual_pair_check(one, one.scaled(2.0), MeasureSpace::counting(1)).max_residual, 1.0, 1e-14);
}

TEST(DualPair, SymmetricAndConsistentWithWeakG) {
  ProbeGenerator g(43);
  const auto phi = random_family(g, 4, 7);
  const auto psi = random_family(g, 4, 7);
  const auto sp = MeasureSpace::counting(7);
  const auto a = dual_pair_check(phi, psi, sp), b = dual_pair_check(psi, phi, sp);
  EXPECT_NEAR(a.max_residual, b.max_residual, 1e-12);
  const auto chi = canonical_dual(phi, sp);
  for (const auto* other : {&psi, &chi}) {
    const auto d = dual_pair_check(phi, *other, sp, 1e-9);
    const auto w = weak_G_dual_check(phi, *other, sp, ComplexMatrix::identity(4), 1e-9);
    EXPECT_EQ(d.verdict, w.verdict);
    EXPECT_NEAR(d.max_residual, w.max_residual, 1e-12);
  }
  EXPECT_TRUE(dual_pair_check(phi, chi, sp).verdict);
}

TEST(DualPair, FlagsDegenerateFamilies) {
  const auto zero = VectorFamily(2, ComplexMatrix(2, 2), "zero");
  const auto r = dual_pair_check(zero, VectorFamily::orthonormal_basis(2), MeasureSpace::counting(2));
  EXPECT_FALSE(r.verdict);
  EXPECT_TRUE(r.degenerate_family);
}

TEST(WeakGDual, PartitionExample) {
  const auto sp = MeasureSpace::from_block_sizes({2, 3}, std::vector<double>{0.5, 1.5, 1.0, 2.0, 0.25});
  const ComplexMatrix g = ComplexMatrix::from_rows({{2.0, 1.0}, {1.0, 3.0}});
  ComplexMatrix phi(5, 2), psi(5, 2);
  for (std::size_t k = 0; k < 2; ++k) {
    const double s = 1.0 / std::sqrt(sp.block_weight(k));
    for (const auto x : sp.blocks()[k]) {
      psi(x, k) = s;
      for (std::size_t j = 0; j < 2; ++j) phi(x, j) = s * g(j, k);
    }
  }
  EXPECT_TRUE(weak_G_dual_check({2, phi}, {2, psi}, sp, g).verdict);
}

TEST(WeakGDual, OperatorImageOfFrameWithAnyDual) {
  // phi = G zeta with zeta a frame and psi a (non-canonical) dual of zeta
  ProbeGenerator gen(44);
  const auto zeta = random_family(gen, 3, 6);
  const auto sp = MeasureSpace::counting(6);
  const auto chi = canonical_dual(zeta, sp);
  // add h_n with sum_n <f, h_n> zeta_n = 0: h rows from the kernel of the synthesis operator
  const ComplexMatrix synth = synthesis_operator(zeta, sp);
  const ComplexMatrix proj = ComplexMatrix::identity(6) - pinv(synth) * synth;
  const ComplexMatrix w = proj * gen.gaussian_matrix(6, 3);
  const VectorFamily other(3, chi.vectors() + w.conjugated(), "other dual");
  ASSERT_TRUE(dual_pair_check(zeta, other, sp).verdict);
  ASSERT_GT(diff(other.vectors(), chi.vectors()), 1e-3);
  const ComplexMatrix g = gen.gaussian_matrix(3, 3);
  EXPECT_TRUE(weak_G_dual_check(zeta.mapped(g, "G zeta"), other, sp, g).verdict);
}

TEST(LowerFromFrame, Examples) {
  const auto sp = MeasureSpace::counting(3);
  const auto onb = VectorFamily::orthonormal_basis(3);
  EXPECT_LE(diff(lower_from_frame(onb, onb, sp).vectors(), onb.vectors()), 1e-14);
  const auto phi = diagonal_family(3, 1.0);
  EXPECT_LE(diff(lower_from_frame(diagonal_family(3, -1.0), phi, sp).vectors(), phi.vectors()), 1e-13);
}

TEST(LowerFromFrame, RoundTripThroughCanonicalDual) {
  ProbeGenerator g(45);
  const auto phi = random_family(g, 5, 9);
  const auto sp = MeasureSpace::counting(9);
  const auto chi = canonical_dual(phi, sp);
  const auto eta = lower_from_frame(chi, phi, sp);
  EXPECT_LE(diff(eta.vectors(), phi.vectors()), 1e-9 * phi.vectors().frobenius_norm());
  EXPECT_LE(diff(canonical_dual(eta, sp).vectors(), chi.vectors()), 1e-8);
}
