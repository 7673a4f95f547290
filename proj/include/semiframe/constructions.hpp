#pragma once

// Generators for the standard semi-frame examples: weighted bases and
// frames, metric-operator families, partition families and families of
// kernel sections in a reproducing kernel space.

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semiframe/diagnostics.hpp"
#include "semiframe/numkernel.hpp"
#include "semiframe/spaces.hpp"

namespace semiframe {

/// n -> m_n, n 1-based.
struct WeightSequence {
  std::function<Complex(std::size_t n)> generator;
  std::optional<double> sup_bound;  // delta with |m_n| < delta
  bool vanishing = false;           // some subsequence tends to zero

  /// m_n with the invariants checked.
  Complex at(std::size_t n) const {
    const Complex m = generator(n);
    if (m == Complex{0.0, 0.0} || !std::isfinite(std::abs(m))) {
      throw Error(ErrorKind::ZeroWeight, "weight m_" + std::to_string(n) + " is zero or not finite", {}, n);
    }
    if (sup_bound && !(std::abs(m) < *sup_bound)) {
      throw Error(ErrorKind::BoundViolated, "|m_" + std::to_string(n) + "| is not below the declared bound", {}, n);
    }
    return m;
  }
};

struct FamilyPair {
  VectorFamily psi;
  VectorFamily phi;
};

/// psi_n = m_n e_n, phi_n = e_n / conj(m_n).
inline FamilyPair weighted_onb_pair(const WeightSequence& m, std::size_t d) {
  if (d == 0) throw Error(ErrorKind::InvalidArgument, "dimension must be positive");
  ComplexMatrix psi(d, d), phi(d, d);
  for (std::size_t k = 0; k < d; ++k) {
    const Complex w = m.at(k + 1);
    psi(k, k) = w;
    phi(k, k) = 1.0 / std::conj(w);
  }
  return {{d, std::move(psi), "weighted onb (psi)"}, {d, std::move(phi), "weighted onb (phi)"}};
}

/// Both families of the weighted pair as truncation-consistent generators.
inline std::pair<FamilyGenerator, FamilyGenerator> weighted_onb_generators(const WeightSequence& m) {
  FamilyGenerator psi{"weighted onb (psi)", [](std::size_t d) { return d; },
                      [m](std::size_t n, std::size_t d) {
                        CVector v(d);
                        v[n] = m.at(n + 1);
                        return v;
                      }};
  FamilyGenerator phi{"weighted onb (phi)", [](std::size_t d) { return d; },
                      [m](std::size_t n, std::size_t d) {
                        CVector v(d);
                        v[n] = 1.0 / std::conj(m.at(n + 1));
                        return v;
                      }};
  return {std::move(psi), std::move(phi)};
}

/// psi_n = m_n theta_n, phi_n = theta_n / conj(m_n).
inline FamilyPair weighted_frame_pair(const WeightSequence& m, const VectorFamily& theta,
                                      const MeasureSpace& sp) {
  const auto lower = lower_frame_bound(theta, sp);
  if (lower.verdict != Verdict::Holds) {
    throw Error(ErrorKind::NotAFrame, "family '" + theta.label() + "' has no positive lower frame bound",
                lower.extremizer);
  }
  ComplexMatrix psi = theta.vectors();
  ComplexMatrix phi = theta.vectors();
  for (std::size_t n = 0; n < theta.count(); ++n) {
    const Complex w = m.at(n + 1);
    const Complex s = 1.0 / std::conj(w);
    for (std::size_t j = 0; j < theta.dim(); ++j) {
      psi(n, j) *= w;
      phi(n, j) *= s;
    }
  }
  return {{theta.dim(), std::move(psi), "weighted frame (psi)"}, {theta.dim(), std::move(phi), "weighted frame (phi)"}};
}

/// Three equiangular unit vectors in C^2; tight with bound 3/2.
inline VectorFamily mercedes_frame() {
  const double h = std::sqrt(3.0) / 2.0;
  return VectorFamily::from_vectors(2, {{0.0, 1.0}, {-h, -0.5}, {h, -0.5}}, "mercedes");
}

/// G = I + S* S.
inline OperatorSpec metric_from_operator(const OperatorSpec& s) {
  using Kind = OperatorSpec::Kind;
  switch (s.kind()) {
    case Kind::Zero: return OperatorSpec::identity();
    case Kind::Identity: return OperatorSpec::scaled_identity(2.0);
    case Kind::ScaledIdentity: {
      const double a = std::abs(s.diagonal_entry(0));
      return OperatorSpec::scaled_identity(1.0 + a * a);
    }
    case Kind::Diagonal:
      return OperatorSpec::diagonal(
          [s](std::size_t i) {
            const double a = std::abs(s.diagonal_entry(i));
            return Complex{1.0 + a * a, 0.0};
          },
          "I + " + s.label() + "* " + s.label());
    case Kind::Dense: {
      const ComplexMatrix m = s.section(*s.native_dim());
      ComplexMatrix g = ComplexMatrix::identity(m.rows()) + m.adjoint() * m;
      return OperatorSpec::dense(hermitian_part(g), "I + " + s.label() + "* " + s.label());
    }
  }
  throw Error(ErrorKind::InvalidArgument, "unknown operator kind");
}

namespace detail {

inline ComplexMatrix metric_section(const OperatorSpec& g, std::size_t d) {
  const ComplexMatrix m = g.section(d);
  if (hermitian_defect(m) > kHermTol * std::max(1.0, m.max_abs())) {
    throw Error(ErrorKind::NotMetric, "operator '" + g.label() + "' is not Hermitian");
  }
  const auto eig = hermitian_eig(m);
  if (eig.min() < 1.0 - 1e-10) {
    throw Error(ErrorKind::NotMetric, "operator '" + g.label() + "' has an eigenvalue below 1", eig.vector(0));
  }
  return m;
}

}  // namespace detail

/// phi_n = G e_n.
inline VectorFamily lower_from_metric(const OperatorSpec& g, std::size_t d) {
  const ComplexMatrix m = detail::metric_section(g, d);
  return {d, m.adjoint().conjugated(), "G e_n"};
}

/// For x in block X_k: phi_x = G e_k / sqrt(mu(X_k)), psi_x = e_k / sqrt(mu(X_k)).
/// The ambient dimension defaults to the number of blocks.
inline FamilyPair partition_G_family(const OperatorSpec& g, const MeasureSpace& sp,
                                     std::optional<std::size_t> dim = std::nullopt) {
  if (!sp.has_partition()) throw Error(ErrorKind::PartitionMissing, "measure space has no partition");
  const std::size_t d = dim.value_or(sp.block_count());
  if (d < sp.block_count()) throw Error(ErrorKind::DimensionMismatch, "more blocks than dimensions");
  const ComplexMatrix gm = g.section(d);
  ComplexMatrix phi(sp.size(), d), psi(sp.size(), d);
  for (std::size_t k = 0; k < sp.block_count(); ++k) {
    const double s = 1.0 / std::sqrt(sp.block_weight(k));
    for (const auto x : sp.blocks()[k]) {
      psi(x, k) = s;
      for (std::size_t j = 0; j < d; ++j) phi(x, j) = s * gm(j, k);
    }
  }
  return {{d, std::move(psi), "partition (psi)"}, {d, std::move(phi), "partition (phi)"}};
}

// ---------------------------------------------------------------------------
// Kernel families
// ---------------------------------------------------------------------------

/// Kernel sections k_x on a finite grid. Elements of the kernel space are
/// coefficient vectors c (f = sum_x c_x k_x) and <f, g>_K = g* K f.
struct KernelFamily {
  std::vector<double> points;
  ComplexMatrix gram;          // K[x][y] = <k_y, k_x>
  std::vector<double> weight;  // m(x) at each point
  int power = 1;
};

struct KernelPair {
  VectorFamily phi;  // m(x)^n k_x
  VectorFamily psi;  // m(x)^-n k_x
  Geometry geometry;
};

inline std::vector<double> uniform_grid(std::size_t count, double lo, double hi) {
  std::vector<double> x(count);
  if (count == 1) {
    x[0] = 0.5 * (lo + hi);
    return x;
  }
  for (std::size_t i = 0; i < count; ++i) x[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return x;
}

/// K[x][y] = exp(-(x - y)^2 / (2 h^2)).
inline ComplexMatrix gaussian_gram(const std::vector<double>& points, double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error(ErrorKind::InvalidArgument, "bandwidth must be positive");
  const std::size_t n = points.size();
  ComplexMatrix k(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double t = points[i] - points[j];
      k(i, j) = std::exp(-t * t / (2.0 * bandwidth * bandwidth));
    }
  return k;
}

inline KernelFamily gaussian_kernel_family(std::vector<double> points, double bandwidth,
                                           const std::function<double(double)>& weight, int power) {
  KernelFamily kf;
  kf.gram = gaussian_gram(points, bandwidth);
  for (const double x : points) kf.weight.push_back(weight(x));
  kf.points = std::move(points);
  kf.power = power;
  return kf;
}

/// phi_x = m(x)^n k_x and psi_x = m(x)^-n k_x in coefficient space.
inline KernelPair rkhs_pair(const KernelFamily& kf) {
  const std::size_t n = kf.points.size();
  if (n == 0 || kf.gram.rows() != n || !kf.gram.is_square() || kf.weight.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "kernel family sizes disagree");
  }
  if (kf.power < 0) throw Error(ErrorKind::InvalidArgument, "power must be non-negative");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(kf.weight[i] >= 1.0) || !std::isfinite(kf.weight[i])) {
      throw Error(ErrorKind::InvalidArgument, "weight must be at least 1", {}, i + 1);
    }
  }
  Geometry geom;
  try {
    geom = Geometry::from_gram(kf.gram);
  } catch (const Error& e) {
    throw Error(ErrorKind::NotPSDKernel, std::string("kernel Gram matrix rejected: ") + e.message());
  }
  ComplexMatrix phi(n, n), psi(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::pow(kf.weight[i], kf.power);
    phi(i, i) = w;
    psi(i, i) = 1.0 / w;
  }
  return {{n, std::move(phi), "m^n k_x"}, {n, std::move(psi), "m^-n k_x"}, std::move(geom)};
}

/// A = diag(a_n), required to satisfy |a_n| <= 1/|m_n| for n <= d.
inline OperatorSpec diagonal_A_for(const WeightSequence& m, const std::function<Complex(std::size_t)>& a,
                                   std::size_t d) {
  for (std::size_t n = 1; n <= d; ++n) {
    if (std::abs(a(n)) > (1.0 + 1e-12) / std::abs(m.at(n))) {
      throw Error(ErrorKind::BoundViolated, "|a_" + std::to_string(n) + "| exceeds 1/|m_" + std::to_string(n) + "|",
                  {}, n);
    }
  }
  return OperatorSpec::diagonal([a](std::size_t i) { return a(i + 1); }, "A");
}

}  // namespace semiframe
