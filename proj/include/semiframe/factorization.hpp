#pragma once

// Douglas-type factorizations.
//
// At finite section the closed extensions R of C_phi* and Q of C_psi*
// coincide with C_phi* and C_psi*; every result says so in its note.
// Among the non-unique factors the minimal-norm one is always returned.

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "semiframe/diagnostics.hpp"
#include "semiframe/duality.hpp"
#include "semiframe/numkernel.hpp"
#include "semiframe/spaces.hpp"

namespace semiframe {

struct FactorizationResult {
  ComplexMatrix factor;                   // U, M or N
  std::optional<ComplexMatrix> companion; // O for the upper factorization
  double lambda_hat = 0.0;                // majorization constant
  double residual = 0.0;
  bool minimal_norm = true;
  std::string note;
};

struct AtomicCoefficients {
  CVector coefficients;  // a_f(n) in the sqrt(mu)-scaled sequence space
  double gamma = 0.0;    // ||a_f|| <= gamma ||f||
};

/// Given ||T1* f|| <= lambda ||T2 f||, returns the minimal-norm U with
/// T1 = T2* U, namely (T2*)^+ T1. T1 maps into the space T2 acts on.
inline FactorizationResult douglas_factor(const ComplexMatrix& t1, const ComplexMatrix& t2, double tol = 1e-9) {
  if (t1.rows() != t2.cols()) throw Error(ErrorKind::DimensionMismatch, "douglas_factor operands");
  const ComplexMatrix numerator = hermitian_part(t1 * t1.adjoint());
  const auto rs = ratio_spectrum(numerator, t2);
  if (rs.kernel_leak > detail::leak_tolerance(numerator)) {
    throw Error(ErrorKind::MajorizationViolated,
                "ker(T2) is not contained in ker(T1*) (||T1* w||^2 = " + std::to_string(rs.kernel_leak) + ")",
                rs.leak_witness);
  }
  FactorizationResult out;
  out.lambda_hat = rs.range_empty() ? 0.0 : std::sqrt(std::max(0.0, rs.values.back()));
  out.factor = pinv(t2.adjoint()) * t1;
  out.residual = (t2.adjoint() * out.factor - t1).frobenius_norm();
  if (out.residual > tol * std::max(1.0, t1.frobenius_norm())) {
    throw Error(ErrorKind::MajorizationViolated,
                "factor does not reproduce T1 (residual " + std::to_string(out.residual) + ")");
  }
  return out;
}

/// B = C_phi* M.
inline FactorizationResult lower_factorize(const ComplexMatrix& b, const VectorFamily& phi, const MeasureSpace& sp) {
  if (b.rows() != phi.dim() || !b.is_square()) throw Error(ErrorKind::DimensionMismatch, "lower_factorize");
  auto out = douglas_factor(b, analysis_operator(phi, sp).matrix, 1e-9);
  out.note = "R = C_phi* (extension collapses at finite section)";
  return out;
}

inline FactorizationResult lower_factorize(const OperatorSpec& b, const VectorFamily& phi, const MeasureSpace& sp) {
  return lower_factorize(b.section(phi.dim()), phi, sp);
}

/// psi_n with (M h)(n) = sqrt(mu_n) <h, psi_n>.
inline VectorFamily bessel_dual_from_factor(const FactorizationResult& result, const MeasureSpace& sp) {
  const ComplexMatrix& m = result.factor;
  if (m.rows() != sp.size()) throw Error(ErrorKind::DimensionMismatch, "factor rows do not match the measure space");
  ComplexMatrix rows(m.rows(), m.cols());
  for (std::size_t n = 0; n < m.rows(); ++n) {
    const double s = 1.0 / std::sqrt(sp.weight(n));
    for (std::size_t j = 0; j < m.cols(); ++j) rows(n, j) = std::conj(m(n, j)) * s;
  }
  return {m.cols(), std::move(rows), "Bessel weak dual"};
}

/// a_f(n) = sqrt(mu_n) <f, psi_n>, checked against B f = sum_n a_f(n) sqrt(mu_n) phi_n.
inline AtomicCoefficients atomic_coefficients(std::span<const Complex> f, const VectorFamily& psi,
                                              const MeasureSpace& sp, const ComplexMatrix& b, const VectorFamily& phi,
                                              double tol = 1e-8) {
  if (f.size() != psi.dim() || b.rows() != phi.dim() || b.cols() != f.size()) {
    throw Error(ErrorKind::DimensionMismatch, "atomic_coefficients");
  }
  const ComplexMatrix c_psi = analysis_operator(psi, sp).matrix;
  AtomicCoefficients out;
  out.coefficients = c_psi.apply(f);
  out.gamma = spectral_norm(c_psi);
  const CVector rebuilt = synthesis_operator(phi, sp).apply(out.coefficients);
  const CVector target = b.apply(f);
  const double res = norm(rebuilt - target);
  if (res > tol * std::max(1.0, b.frobenius_norm() * norm(f))) {
    throw Error(ErrorKind::ReconstructionFailed,
                "coefficients do not reproduce B f (residual " + std::to_string(res) + ")", target - rebuilt);
  }
  return out;
}

inline AtomicCoefficients atomic_coefficients(std::span<const Complex> f, const VectorFamily& psi,
                                              const MeasureSpace& sp, const OperatorSpec& b, const VectorFamily& phi,
                                              double tol = 1e-8) {
  return atomic_coefficients(f, psi, sp, b.section(phi.dim()), phi, tol);
}

/// C_psi* = F N with N = O*, O = C_psi (F*)^+ (zero on R(F*)^perp).
inline FactorizationResult upper_factorize(const VectorFamily& psi, const MeasureSpace& sp, const ComplexMatrix& f) {
  const auto bound = weak_upper_alpha(psi, sp, f);
  if (bound.verdict == Verdict::Fails) {
    throw Error(ErrorKind::UnsatisfiableBound, "no alpha bounds the analysis energy by ||F* u||^2",
                bound.extremizer);
  }
  const ComplexMatrix c = analysis_operator(psi, sp).matrix;
  const ComplexMatrix o = c * pinv(f.adjoint());
  FactorizationResult out;
  out.companion = o;
  out.factor = o.adjoint();
  out.lambda_hat = std::sqrt(bound.constant);
  out.residual = (f * out.factor - c.adjoint()).frobenius_norm();
  out.note = "Q = C_psi* (extension collapses at finite section)";
  if (out.residual > 1e-8 * std::max(1.0, c.frobenius_norm())) {
    out.note += "; range(C_psi*) not inside range(F): residual reported";
  }
  return out;
}

inline FactorizationResult upper_factorize(const VectorFamily& psi, const MeasureSpace& sp, const OperatorSpec& f) {
  return upper_factorize(psi, sp, f.section(psi.dim()));
}

/// Given psi with weak upper constant alpha for F and phi a weak F-dual of
/// psi, the family A phi satisfies alpha^{-1} ||F* u||^2 <= sum |<u, A phi_n>|^2.
/// constant = actual infimum of the right side over ||F* u||^2, secondary = 1/alpha.
inline BoundsReport aphi_lower_chain(const VectorFamily& psi, const VectorFamily& phi, const MeasureSpace& sp,
                                     const ComplexMatrix& f, const ComplexMatrix& a, double tol = 1e-8) {
  const auto premise = weak_G_dual_check(psi, phi, sp, f, tol);
  if (!premise.verdict) {
    throw Error(ErrorKind::DualityViolated,
                "phi is not a weak F-dual of psi (residual " + std::to_string(premise.max_residual) + ")",
                premise.witness_defect);
  }
  const auto upper = weak_upper_alpha(psi, sp, f);
  if (upper.verdict == Verdict::Fails) {
    throw Error(ErrorKind::UnsatisfiableBound, "psi is not a weak upper semi-frame for F", upper.extremizer);
  }
  const VectorFamily a_phi = phi.mapped(a, "A applied to " + phi.label());
  auto r = weak_A_frame_alpha(a_phi, sp, f);
  r.kind = "aphi_lower_chain";
  const double target = upper.constant > 0.0 ? 1.0 / upper.constant : std::numeric_limits<double>::infinity();
  r.secondary = target;
  double energy = 0.0;
  for (std::size_t n = 0; n < a_phi.count(); ++n) energy += sp.weight(n) * std::pow(norm(a_phi.vector_span(n)), 2);
  r.residual = energy;
  r.note = "residual holds the partial sum of mu_n ||A phi_n||^2";
  if (r.verdict != Verdict::HoldsVacuously) {
    r.verdict = r.constant >= target - 1e-8 ? Verdict::Holds : Verdict::Fails;
  }
  return r;
}

inline BoundsReport aphi_lower_chain(const VectorFamily& psi, const VectorFamily& phi, const MeasureSpace& sp,
                                     const OperatorSpec& f, const OperatorSpec& a, double tol = 1e-8) {
  return aphi_lower_chain(psi, phi, sp, f.section(psi.dim()), a.section(psi.dim()), tol);
}

}  // namespace semiframe
