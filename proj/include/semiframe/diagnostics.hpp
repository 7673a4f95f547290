#pragma once

// Frame constants and classification at finite section.
//
// Every constant is an exact extremal (generalized) Rayleigh quotient of the
// section; nothing is sampled. Unboundedness is read off from trends across
// a truncation schedule.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semiframe/numkernel.hpp"
#include "semiframe/spaces.hpp"

namespace semiframe {

enum class Verdict { Holds, Fails, Diverges, HoldsVacuously };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Fails: return "fails";
    case Verdict::Diverges: return "diverges";
    case Verdict::HoldsVacuously: return "holds_vacuously";
  }
  return "unknown";
}

enum class Trend { Bounded, Diverges, Vanishes, Indeterminate };

inline const char* to_string(Trend t) {
  switch (t) {
    case Trend::Bounded: return "bounded";
    case Trend::Diverges: return "diverges";
    case Trend::Vanishes: return "vanishes";
    case Trend::Indeterminate: return "indeterminate";
  }
  return "unknown";
}

struct TrendPoint {
  std::size_t dimension = 0;
  double constant = 0.0;
};

struct TrendFit {
  double slope = 0.0;
  Trend trend = Trend::Indeterminate;
};

/// Least-squares slope of log(constant) against log(dimension).
/// |s| <= 0.1 bounded, s >= 0.5 diverges, s <= -0.5 vanishes.
/// A zero constant anywhere in a nonzero series means "vanishes"; an
/// identically zero series is bounded.
inline TrendFit fit_trend(std::span<const TrendPoint> points) {
  if (points.size() < 2) throw Error(ErrorKind::InvalidArgument, "trend needs at least two truncations");
  bool all_zero = true;
  bool any_zero = false;
  for (const auto& p : points) {
    if (p.constant > 0.0) all_zero = false;
    else any_zero = true;
  }
  if (all_zero) return {0.0, Trend::Bounded};
  if (any_zero) return {-std::numeric_limits<double>::infinity(), Trend::Vanishes};
  for (const auto& p : points) {
    if (!std::isfinite(p.constant)) return {std::numeric_limits<double>::infinity(), Trend::Diverges};
  }

  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += std::log(static_cast<double>(p.dimension));
    my += std::log(p.constant);
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0.0, sxx = 0.0;
  for (const auto& p : points) {
    const double dx = std::log(static_cast<double>(p.dimension)) - mx;
    sxy += dx * (std::log(p.constant) - my);
    sxx += dx * dx;
  }
  const double s = sxy / sxx;
  Trend t = Trend::Indeterminate;
  if (std::abs(s) <= 0.1) t = Trend::Bounded;
  else if (s >= 0.5) t = Trend::Diverges;
  else if (s <= -0.5) t = Trend::Vanishes;
  return {s, t};
}

struct BoundsReport {
  std::string kind;
  double constant = 0.0;
  std::optional<double> secondary;  // upper constant of a two-sided bound
  CVector extremizer;               // unit norm
  std::vector<TrendPoint> per_truncation;
  Verdict verdict = Verdict::Holds;
  double residual = 0.0;
  std::string note;
};

namespace detail {

struct FormSpectrum {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;
};

/// Extremal values of ||C f||^2 / ||f||^2 in the given geometry.
inline FormSpectrum form_spectrum(const VectorFamily& fam, const MeasureSpace& sp, const Geometry& geom) {
  const ComplexMatrix form = frame_form(fam, sp, geom);
  if (geom.euclidean()) {
    auto eig = hermitian_eig(form);
    return {std::move(eig.eigenvalues), std::move(eig.eigenvectors)};
  }
  auto rs = ratio_spectrum(form, geom.norm_factor(fam.dim()));
  return {std::move(rs.values), std::move(rs.vectors)};
}

inline double leak_tolerance(const ComplexMatrix& numerator) {
  return 1e-9 * std::max(1.0, numerator.frobenius_norm());
}

}  // namespace detail

/// Smallest M with sum mu_n |<f, phi_n>|^2 <= M ||f||^2.
inline BoundsReport bessel_bound(const VectorFamily& fam, const MeasureSpace& sp, const Geometry& geom = {}) {
  const auto fs = detail::form_spectrum(fam, sp, geom);
  BoundsReport r;
  r.kind = "bessel_bound";
  r.constant = fs.values.back();
  r.extremizer = fs.vectors.column(fs.values.size() - 1);
  r.per_truncation = {{fam.dim(), r.constant}};
  return r;
}

/// rank(C) = d, i.e. <f, phi_n> = 0 for all n forces f = 0.
inline bool mu_total_check(const VectorFamily& fam, const MeasureSpace& sp, const Geometry& geom = {}) {
  const auto c = analysis_operator(fam, sp, geom).matrix;
  if (fam.count() == 0) return false;
  const std::size_t target = geom.euclidean() ? fam.dim() : svd(geom.norm_factor(fam.dim())).rank();
  return svd(c).rank() == target;
}

/// Largest m with m ||f||^2 <= sum mu_n |<f, phi_n>|^2.
inline BoundsReport lower_frame_bound(const VectorFamily& fam, const MeasureSpace& sp, const Geometry& geom = {}) {
  const auto fs = detail::form_spectrum(fam, sp, geom);
  BoundsReport r;
  r.kind = "lower_frame_bound";
  r.constant = std::max(0.0, fs.values.front());
  r.extremizer = fs.vectors.column(0);
  r.per_truncation = {{fam.dim(), r.constant}};
  const bool positive = fs.values.front() > 1e-8 * fs.values.back() || mu_total_check(fam, sp, geom);
  r.verdict = (positive && r.constant > 0.0) ? Verdict::Holds : Verdict::Fails;
  return r;
}

// ---------------------------------------------------------------------------
// Classification across truncations
// ---------------------------------------------------------------------------

enum class FrameClassValue { Frame, UpperSemiFrame, LowerSemiFrame, BesselNotTotal, TotalOnly, Degenerate };

inline const char* to_string(FrameClassValue v) {
  switch (v) {
    case FrameClassValue::Frame: return "frame";
    case FrameClassValue::UpperSemiFrame: return "upper_semi_frame";
    case FrameClassValue::LowerSemiFrame: return "lower_semi_frame";
    case FrameClassValue::BesselNotTotal: return "bessel_not_total";
    case FrameClassValue::TotalOnly: return "total_only";
    case FrameClassValue::Degenerate: return "degenerate";
  }
  return "unknown";
}

struct SectionSpectrum {
  std::size_t dimension = 0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool mu_total = false;
};

struct FrameClass {
  FrameClassValue value = FrameClassValue::Degenerate;
  TrendFit lambda_min;
  TrendFit lambda_max;
  bool mu_total_everywhere = false;
  std::vector<SectionSpectrum> sections;
};

inline FrameClassValue decide_frame_class(Trend lmin, Trend lmax, bool total) {
  const bool lower_ok = lmin == Trend::Bounded && total;
  if (lower_ok && lmax == Trend::Bounded) return FrameClassValue::Frame;
  if (lmax == Trend::Bounded && lmin == Trend::Vanishes && total) return FrameClassValue::UpperSemiFrame;
  if (lower_ok && lmax == Trend::Diverges) return FrameClassValue::LowerSemiFrame;
  if (lmax == Trend::Bounded && !total) return FrameClassValue::BesselNotTotal;
  if (lmin == Trend::Vanishes && lmax == Trend::Diverges && total) return FrameClassValue::TotalOnly;
  return FrameClassValue::Degenerate;
}

namespace detail {
inline void check_consistent(const VectorFamily& coarse, const VectorFamily& fine) {
  for (std::size_t n = 0; n < std::min(coarse.count(), fine.count()); ++n) {
    const auto a = coarse.vector_span(n);
    const auto b = fine.vector_span(n);
    double diff = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) diff = std::max(diff, std::abs(a[j] - b[j]));
    if (diff > 1e-12 * std::max(1.0, norm(a))) {
      throw Error(ErrorKind::InconsistentGenerator,
                  "vector " + std::to_string(n + 1) + " of '" + coarse.label() + "' changes between truncations " +
                      std::to_string(coarse.dim()) + " and " + std::to_string(fine.dim()),
                  {}, n + 1);
    }
  }
}
}  // namespace detail

inline FrameClass classify(const FamilyGenerator& gen, const MeasureRule& rule, const TruncationSchedule& schedule) {
  if (!schedule.supports_trend()) throw Error(ErrorKind::InvalidArgument, "classify needs at least two truncations");
  FrameClass out;
  std::optional<VectorFamily> previous;
  std::vector<TrendPoint> mins, maxs;
  out.mu_total_everywhere = true;
  for (const auto d : schedule.dims) {
    VectorFamily fam = gen.materialize(d);
    if (previous) detail::check_consistent(*previous, fam);
    const MeasureSpace sp = rule(fam.count(), d);
    const auto eig = hermitian_eig(frame_operator(fam, sp));
    SectionSpectrum s;
    s.dimension = d;
    s.lambda_max = std::max(0.0, eig.max());
    s.mu_total = (eig.min() > 1e-8 * eig.max()) || mu_total_check(fam, sp);
    s.lambda_min = s.mu_total ? std::max(0.0, eig.min()) : 0.0;
    out.mu_total_everywhere = out.mu_total_everywhere && s.mu_total;
    mins.push_back({d, s.lambda_min});
    maxs.push_back({d, s.lambda_max});
    out.sections.push_back(s);
    previous = std::move(fam);
  }
  out.lambda_min = fit_trend(mins);
  out.lambda_max = fit_trend(maxs);
  out.value = decide_frame_class(out.lambda_min.trend, out.lambda_max.trend, out.mu_total_everywhere);
  return out;
}

/// Trend of sum mu_n |<u, phi_n>|^2 for fixed probes u = e_1, ..., e_k
/// (zero-padded), one fit per probe.
inline std::vector<TrendFit> analysis_energy_trend(const FamilyGenerator& gen, const MeasureRule& rule,
                                                   const TruncationSchedule& schedule, std::size_t probes = 3) {
  std::vector<std::vector<TrendPoint>> series(probes);
  for (const auto d : schedule.dims) {
    const VectorFamily fam = gen.materialize(d);
    const auto c = analysis_operator(fam, rule(fam.count(), d)).matrix;
    for (std::size_t k = 0; k < probes && k < d; ++k) {
      double e = 0.0;
      for (std::size_t n = 0; n < c.rows(); ++n) e += std::norm(c(n, k));
      series[k].push_back({d, e});
    }
  }
  std::vector<TrendFit> fits;
  for (const auto& s : series) {
    if (s.size() >= 2) fits.push_back(fit_trend(s));
  }
  return fits;
}

// ---------------------------------------------------------------------------
// Operator-relative bounds
// ---------------------------------------------------------------------------

/// Largest alpha with alpha ||A* u||^2 <= sum mu_n |<u, phi_n>|^2 for all u.
/// Computed as 1 / sup ||A* u||^2 / ||C u||^2; a u with C u = 0 but
/// A* u != 0 forces alpha = 0.
inline BoundsReport weak_A_frame_alpha(const VectorFamily& fam, const MeasureSpace& sp, const ComplexMatrix& a) {
  if (a.rows() != fam.dim() || !a.is_square()) throw Error(ErrorKind::DimensionMismatch, "weak_A_frame_alpha");
  BoundsReport r;
  r.kind = "weak_A_frame_alpha";
  r.note = "finiteness clause is a trend statement; not enforced at a single section";
  const auto vacuous = [&] {
    r.constant = std::numeric_limits<double>::infinity();
    r.verdict = Verdict::HoldsVacuously;
    r.extremizer = basis_vector(fam.dim(), 0);
    r.per_truncation = {{fam.dim(), r.constant}};
    r.note = "A* = 0: every alpha works";
    return r;
  };
  if (a.frobenius_norm() == 0.0) return vacuous();

  const ComplexMatrix c = analysis_operator(fam, sp).matrix;
  const ComplexMatrix numerator = hermitian_part(a * a.adjoint());
  const auto rs = ratio_spectrum(numerator, c);
  if (rs.kernel_leak > detail::leak_tolerance(numerator)) {
    r.constant = 0.0;
    r.verdict = Verdict::Fails;
    r.extremizer = rs.leak_witness;
    r.residual = rs.kernel_leak;
    r.per_truncation = {{fam.dim(), 0.0}};
    r.note = "some u with C u = 0 has A* u != 0";
    return r;
  }
  if (rs.range_empty() || rs.values.back() <= 0.0) return vacuous();
  r.constant = 1.0 / rs.values.back();
  r.extremizer = rs.vector(rs.values.size() - 1);
  r.per_truncation = {{fam.dim(), r.constant}};
  r.verdict = r.constant > 0.0 ? Verdict::Holds : Verdict::Fails;
  return r;
}

inline BoundsReport weak_A_frame_alpha(const VectorFamily& fam, const MeasureSpace& sp, const OperatorSpec& a) {
  return weak_A_frame_alpha(fam, sp, a.section(fam.dim()));
}

/// Smallest alpha with sum mu_n |<u, psi_n>|^2 <= alpha ||F* u||^2.
inline BoundsReport weak_upper_alpha(const VectorFamily& psi, const MeasureSpace& sp, const ComplexMatrix& f) {
  if (f.rows() != psi.dim() || !f.is_square()) throw Error(ErrorKind::DimensionMismatch, "weak_upper_alpha");
  BoundsReport r;
  r.kind = "weak_upper_alpha";
  const ComplexMatrix t = frame_operator(psi, sp);
  const auto rs = ratio_spectrum(t, f.adjoint());
  if (rs.kernel_leak > detail::leak_tolerance(t)) {
    r.constant = std::numeric_limits<double>::infinity();
    r.verdict = Verdict::Fails;
    r.extremizer = rs.leak_witness;
    r.residual = rs.kernel_leak;
    r.per_truncation = {{psi.dim(), r.constant}};
    r.note = "some u with F* u = 0 has positive analysis energy";
    return r;
  }
  if (rs.range_empty()) {
    r.constant = 0.0;
    r.verdict = Verdict::HoldsVacuously;
    r.extremizer = basis_vector(psi.dim(), 0);
    r.per_truncation = {{psi.dim(), 0.0}};
    return r;
  }
  r.constant = std::max(0.0, rs.values.back());
  r.extremizer = rs.vector(rs.values.size() - 1);
  r.per_truncation = {{psi.dim(), r.constant}};
  return r;
}

inline BoundsReport weak_upper_alpha(const VectorFamily& psi, const MeasureSpace& sp, const OperatorSpec& f) {
  return weak_upper_alpha(psi, sp, f.section(psi.dim()));
}

namespace detail {

/// Bounds of f* S f / ||f||^2 for a form matrix S that should be Hermitian.
inline BoundsReport hermitian_form_bounds(std::string kind, const ComplexMatrix& s, std::size_t d, double tol_herm) {
  BoundsReport r;
  r.kind = std::move(kind);
  r.residual = (s - s.adjoint()).frobenius_norm();
  const auto eig = hermitian_eig(hermitian_part(s));
  r.constant = eig.min();
  r.secondary = eig.max();
  r.extremizer = eig.vector(0);
  r.per_truncation = {{d, r.constant}};
  if (r.residual > tol_herm * s.frobenius_norm()) {
    r.verdict = Verdict::Fails;
    r.note = "form is not Hermitian; constants are those of its Hermitian part";
  } else {
    r.verdict = r.constant > 0.0 ? Verdict::Holds : Verdict::Fails;
  }
  return r;
}

}  // namespace detail

/// Two-sided bounds of sum mu_n <f, psi_n> <C psi_n, f>. The form matrix is
/// S_C = C T_psi; constant/secondary are m_C/M_C.
inline BoundsReport controlled_frame_bounds(const VectorFamily& psi, const MeasureSpace& sp, const ComplexMatrix& c,
                                            double tol_herm = kHermTol) {
  if (c.rows() != psi.dim() || !c.is_square()) throw Error(ErrorKind::DimensionMismatch, "controlled_frame_bounds");
  return detail::hermitian_form_bounds("controlled_frame_bounds", c * frame_operator(psi, sp), psi.dim(), tol_herm);
}

inline BoundsReport controlled_frame_bounds(const VectorFamily& psi, const MeasureSpace& sp, const OperatorSpec& c,
                                            double tol_herm = kHermTol) {
  return controlled_frame_bounds(psi, sp, c.section(psi.dim()), tol_herm);
}

struct AltUpperReport {
  BoundsReport composed;    // sum |<A f, psi_n>|^2 <= M ||f||^2
  BoundsReport real_part;   // Re sum <f, psi_n><psi_n, A f> <= M ||f||^2
  BoundsReport a_bessel;    // sum <f, psi_n><A* psi_n, f> <= M ||f||^2
};

/// The three candidate upper A-semi-frame constants; each constant is the
/// smallest admissible M.
inline AltUpperReport alt_upper_checks(const VectorFamily& psi, const MeasureSpace& sp, const ComplexMatrix& a,
                                       double tol_herm = kHermTol) {
  if (a.rows() != psi.dim() || !a.is_square()) throw Error(ErrorKind::DimensionMismatch, "alt_upper_checks");
  const std::size_t d = psi.dim();
  const ComplexMatrix t = frame_operator(psi, sp);
  AltUpperReport out;

  {
    const auto eig = hermitian_eig(hermitian_part(a.adjoint() * t * a));
    auto& r = out.composed;
    r.kind = "alt_upper_composed";
    r.constant = eig.max();
    r.extremizer = eig.vector(d - 1);
    r.per_truncation = {{d, r.constant}};
  }
  {
    const ComplexMatrix s = t * a;
    const auto eig = hermitian_eig(hermitian_part(s));
    auto& r = out.real_part;
    r.kind = "alt_upper_real_part";
    r.constant = eig.max();
    r.extremizer = eig.vector(d - 1);
    r.residual = (s - s.adjoint()).frobenius_norm();
    r.per_truncation = {{d, r.constant}};
  }
  {
    // sum_n mu_n (A* psi_n)(psi_n)*
    const VectorFamily moved = psi.mapped(a.adjoint(), psi.label() + " under A*");
    const ComplexMatrix s = synthesis_operator(moved, sp) * analysis_operator(psi, sp).matrix;
    auto r = detail::hermitian_form_bounds("alt_upper_a_bessel", s, d, tol_herm);
    const auto eig = hermitian_eig(hermitian_part(s));
    r.constant = eig.max();
    r.secondary.reset();
    r.extremizer = eig.vector(d - 1);
    r.per_truncation = {{d, r.constant}};
    if (r.verdict == Verdict::Fails && r.note.empty()) r.verdict = Verdict::Holds;
    out.a_bessel = std::move(r);
  }
  return out;
}

inline AltUpperReport alt_upper_checks(const VectorFamily& psi, const MeasureSpace& sp, const OperatorSpec& a,
                                       double tol_herm = kHermTol) {
  return alt_upper_checks(psi, sp, a.section(psi.dim()), tol_herm);
}

}  // namespace semiframe
