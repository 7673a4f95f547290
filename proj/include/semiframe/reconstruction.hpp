#pragma once

// Coercivity of the form Omega on the graph norm of A* and the weak
// expansion it yields.

#include <cmath>
#include <string>

#include "semiframe/numkernel.hpp"
#include "semiframe/spaces.hpp"

namespace semiframe {

struct CoercivityReport {
  double alpha_prime = 0.0;
  double gamma = 0.0;
  bool holds = false;
  CVector extremizer;  // minimizer of the pencil
  std::string note;
};

/// alpha' (||f||^2 + ||A* f||^2) <= Omega(f, f) <= gamma (||f||^2 + ||A* f||^2).
inline CoercivityReport coercivity_constants(const VectorFamily& phi, const MeasureSpace& sp, const ComplexMatrix& a) {
  if (a.rows() != phi.dim() || !a.is_square()) throw Error(ErrorKind::DimensionMismatch, "coercivity_constants");
  const ComplexMatrix graph = vstack(ComplexMatrix::identity(phi.dim()), a.adjoint());
  const auto rs = ratio_spectrum(frame_operator(phi, sp), graph);
  CoercivityReport r;
  r.alpha_prime = std::max(0.0, rs.values.front());
  r.gamma = std::max(0.0, rs.values.back());
  r.extremizer = rs.vector(0);
  r.holds = r.alpha_prime > 1e-12 * std::max(1.0, r.gamma);
  r.note = "D(A*) = D(C_phi) assumed; a finite section cannot test it";
  return r;
}

inline CoercivityReport coercivity_constants(const VectorFamily& phi, const MeasureSpace& sp, const OperatorSpec& a) {
  return coercivity_constants(phi, sp, a.section(phi.dim()));
}

/// w with Omega(w, f) = <rhs, f> for all f, i.e. T w = rhs.
inline CVector weak_expansion(const VectorFamily& phi, const MeasureSpace& sp, const ComplexMatrix& a,
                              std::span<const Complex> rhs) {
  if (rhs.size() != phi.dim()) throw Error(ErrorKind::DimensionMismatch, "weak_expansion right-hand side");
  const auto c = coercivity_constants(phi, sp, a);
  if (!c.holds) {
    throw Error(ErrorKind::NotCoercive, "Omega is not coercive on the graph norm (alpha' = " +
                                            std::to_string(c.alpha_prime) + ")", c.extremizer);
  }
  return solve_psd(frame_operator(phi, sp), rhs);
}

inline CVector weak_expansion(const VectorFamily& phi, const MeasureSpace& sp, const OperatorSpec& a,
                              std::span<const Complex> rhs) {
  return weak_expansion(phi, sp, a.section(phi.dim()), rhs);
}

}  // namespace semiframe
