#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace semiframe;
using semiframe::testing::diff;
using semiframe::testing::random_family;

namespace {

VectorFamily scaled_basis(std::size_t d) {
  ComplexMatrix rows(d, d);
  for (std::size_t k = 0; k < d; ++k) rows(k, k) = static_cast<double>(k + 1);
  return {d, rows, "n e_n"};
}

}  // namespace

TEST(MeasureSpace, ValidatesWeightsAndPartitions) {
  EXPECT_THROW(MeasureSpace::weighted({1.0, 0.0}), Error);
  EXPECT_THROW(MeasureSpace::weighted({1.0, -2.0}), Error);
  EXPECT_THROW(MeasureSpace::partitioned({1.0, 1.0, 1.0}, {{0, 1}, {1, 2}}), Error);
  EXPECT_THROW(MeasureSpace::partitioned({1.0, 1.0, 1.0}, {{0, 1}}), Error);
  const auto sp = MeasureSpace::from_block_sizes({2, 3}, std::vector<double>{1, 2, 3, 4, 5});
  EXPECT_EQ(sp.block_count(), 2u);
  EXPECT_DOUBLE_EQ(sp.block_weight(0), 3.0);
  EXPECT_DOUBLE_EQ(sp.block_weight(1), 12.0);
  EXPECT_EQ(sp.block_of(4), 1u);
}

TEST(AnalysisOperator, Examples) {
  const auto sp3 = MeasureSpace::counting(3);
  EXPECT_LE(diff(analysis_operator(VectorFamily::orthonormal_basis(3), sp3).matrix, ComplexMatrix::identity(3)), 0.0);
  EXPECT_LE(diff(analysis_operator(scaled_basis(3), sp3).matrix, ComplexMatrix::diagonal({1.0, 2.0, 3.0})), 0.0);
  const auto c = analysis_operator(VectorFamily::orthonormal_basis(2), MeasureSpace::weighted({4.0, 1.0})).matrix;
  EXPECT_LE(diff(c, ComplexMatrix::diagonal({2.0, 1.0})), 0.0);
}

TEST(AnalysisOperator, RowContract) {
  ProbeGenerator g(21);
  const auto fam = random_family(g, 4, 7);
  const auto sp = MeasureSpace::weighted({0.5, 1, 2, 3, 0.25, 1, 4});
  const auto c = analysis_operator(fam, sp);
  const CVector f = g.gaussian_vector(4);
  const CVector cf = c.apply(f);
  double energy = 0.0;
  for (std::size_t n = 0; n < 7; ++n) {
    const Complex expected = std::sqrt(sp.weight(n)) * inner(f, fam.vector(n));
    EXPECT_LE(std::abs(cf[n] - expected), 1e-12);
    energy += sp.weight(n) * std::norm(inner(f, fam.vector(n)));
  }
  EXPECT_NEAR(std::pow(norm(cf), 2), energy, 1e-10 * energy);
}

TEST(AnalysisOperator, RejectsMisalignedMeasure) {
  try {
    analysis_operator(VectorFamily::orthonormal_basis(3), MeasureSpace::counting(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
}

TEST(FrameOperator, Examples) {
  const auto sp = MeasureSpace::counting(3);
  EXPECT_LE(diff(frame_operator(VectorFamily::orthonormal_basis(3), sp), ComplexMatrix::identity(3)), 0.0);
  EXPECT_LE(diff(frame_operator(scaled_basis(3), sp), ComplexMatrix::diagonal({1.0, 4.0, 9.0})), 0.0);
}

TEST(FrameOperator, MatchesOuterProductSum) {
  ProbeGenerator g(22);
  const auto fam = random_family(g, 5, 9);
  std::vector<double> w;
  for (int i = 0; i < 9; ++i) w.push_back(0.5 + g.uniform());
  const auto sp = MeasureSpace::weighted(w);
  ComplexMatrix brute(5, 5);
  for (std::size_t n = 0; n < 9; ++n) {
    const CVector v = fam.vector(n);
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 5; ++j) brute(i, j) += w[n] * v[i] * std::conj(v[j]);
  }
  const auto t = frame_operator(fam, sp);
  EXPECT_LE(diff(t, brute), 1e-10 * brute.frobenius_norm());
  EXPECT_GE(hermitian_eig(t).min(), -1e-10);
}

TEST(FrameOperator, UnitaryCovarianceAndScaling) {
  ProbeGenerator g(23);
  const auto fam = random_family(g, 6, 10);
  const auto sp = MeasureSpace::counting(10);
  const ComplexMatrix u = g.unitary(6);
  const auto t = frame_operator(fam, sp);
  const auto tu = frame_operator(fam.mapped(u, "U phi"), sp);
  EXPECT_LE(diff(tu, u * t * u.adjoint()), 1e-10 * t.frobenius_norm());
  const auto e1 = hermitian_eig(t), e2 = hermitian_eig(tu);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(e1.eigenvalues[k], e2.eigenvalues[k], 1e-9);
  const auto t3 = frame_operator(fam.scaled(3.0), sp);
  EXPECT_LE(diff(t3, Complex(9.0) * t), 1e-10 * 9.0 * t.frobenius_norm());
}

TEST(OmegaForm, Examples) {
  const auto sp = MeasureSpace::counting(3);
  const CVector e1 = basis_vector(3, 0);
  EXPECT_NEAR(omega_form(VectorFamily::orthonormal_basis(3), sp, e1, e1).real(), 1.0, 1e-15);
  const double s = 1.0 / std::sqrt(3.0);
  const CVector f{s, s, s};
  EXPECT_NEAR(omega_form(scaled_basis(3), sp, f, f).real(), 14.0 / 3.0, 1e-13);
}

TEST(OmegaForm, AgreesWithAnalysisInnerProduct) {
  ProbeGenerator g(24);
  for (int trial = 0; trial < 20; ++trial) {
    const auto fam = random_family(g, 4, 6);
    const auto sp = MeasureSpace::counting(6);
    const auto c = analysis_operator(fam, sp);
    const CVector f = g.gaussian_vector(4), h = g.gaussian_vector(4);
    const Complex direct = omega_form(fam, sp, f, h);
    const Complex via_c = inner(c.apply(f), c.apply(h));
    EXPECT_LE(std::abs(direct - via_c), 1e-12 * (1.0 + norm(f) * norm(h)) * (1.0 + c.matrix.frobenius_norm() * c.matrix.frobenius_norm()));
    EXPECT_GE(omega_form(fam, sp, f, f).real(), 0.0);
  }
}

TEST(OperatorSpec, SectionsAndAdjoints) {
  const auto diag = OperatorSpec::diagonal([](std::size_t i) { return Complex(0.0, static_cast<double>(i + 1)); });
  const ComplexMatrix s = diag.section(3);
  EXPECT_EQ(s(2, 2), Complex(0.0, 3.0));
  EXPECT_EQ(diag.adjoint().section(3)(2, 2), Complex(0.0, -3.0));
  EXPECT_LE(OperatorSpec::zero().section(4).frobenius_norm(), 0.0);
  EXPECT_LE(diff(OperatorSpec::identity().section(2), ComplexMatrix::identity(2)), 0.0);
  EXPECT_EQ(OperatorSpec::scaled_identity(Complex(2.0, 1.0)).adjoint().section(2)(1, 1), Complex(2.0, -1.0));
  const auto dense = OperatorSpec::dense(ComplexMatrix::from_rows({{1.0, 2.0}, {3.0, 4.0}}));
  EXPECT_EQ(dense.section(1)(0, 0), Complex(1.0));
  EXPECT_EQ(dense.adjoint().section(2)(0, 1), Complex(3.0));
  EXPECT_THROW(dense.section(3), Error);
}

TEST(ScaleNorm, Examples) {
  const CVector f{1.0, 1.0};
  const auto g = ComplexMatrix::diagonal({1.0, 3.0});
  EXPECT_NEAR(scale_norm(g, 0.0, f), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(scale_norm(g, 2.0, f), std::sqrt(20.0), 1e-12);
  EXPECT_THROW(scale_norm(ComplexMatrix::diagonal({-1.0, 1.0}), 1.0, f), Error);
}

TEST(ScaleNorm, MonotoneInAlphaForPositiveG) {
  ProbeGenerator g(25);
  const ComplexMatrix x = g.gaussian_matrix(5, 5);
  const ComplexMatrix pos = hermitian_part(x.adjoint() * x);
  for (int trial = 0; trial < 20; ++trial) {
    const CVector f = g.unit_vector(5);
    double previous = 0.0;
    for (const double alpha : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
      const double v = scale_norm(pos, alpha, f);
      EXPECT_GE(v, previous - 1e-12);
      previous = v;
    }
  }
}

TEST(Geometry, GramInnerProduct) {
  const ComplexMatrix k = ComplexMatrix::from_rows({{2.0, 1.0}, {1.0, 2.0}});
  const auto geom = Geometry::from_gram(k);
  const CVector f{1.0, 0.0}, h{0.0, 1.0};
  EXPECT_NEAR(geom.inner(f, h).real(), 1.0, 1e-14);
  const ComplexMatrix d = geom.norm_factor(2);
  EXPECT_LE(diff(d * d, k), 1e-12);
  EXPECT_THROW(Geometry::from_gram(ComplexMatrix::diagonal({1.0, -1.0})), Error);
}

TEST(TruncationSchedule, MustIncrease) {
  EXPECT_THROW(TruncationSchedule::make({4, 4}), Error);
  EXPECT_THROW(TruncationSchedule::make({}), Error);
  EXPECT_TRUE(TruncationSchedule::make({2, 4}).supports_trend());
  EXPECT_FALSE(TruncationSchedule::make({2}).supports_trend());
}
