#pragma once

// Discrete measure spaces, vector families and the objects built from them:
// analysis matrices, the form Omega, generalized frame operators, operator
// sections and Hilbert-scale norms.
//
// Conventions used throughout the library:
//   * index n in code is 0-based; closed-form rules are written in the
//     1-based index (phi_n = n e_n means vector k is (k+1) e_k);
//   * row n of an analysis matrix is sqrt(mu_n) * conj(phi_n)^T, so the
//     weighted sequence space L^2(mu) becomes plain C^N;
//   * <f, g> is linear in f.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semiframe/numkernel.hpp"

namespace semiframe {

// ---------------------------------------------------------------------------
// MeasureSpace
// ---------------------------------------------------------------------------

class MeasureSpace {
 public:
  MeasureSpace() = default;

  static MeasureSpace counting(std::size_t n) { return MeasureSpace(std::vector<double>(n, 1.0), {}); }

  static MeasureSpace weighted(std::vector<double> weights) { return MeasureSpace(std::move(weights), {}); }

  static MeasureSpace partitioned(std::vector<double> weights, std::vector<std::vector<std::size_t>> blocks) {
    return MeasureSpace(std::move(weights), std::move(blocks));
  }

  /// Consecutive blocks of the given sizes; unit weights unless supplied.
  static MeasureSpace from_block_sizes(const std::vector<std::size_t>& sizes,
                                       std::optional<std::vector<double>> weights = std::nullopt) {
    std::vector<std::vector<std::size_t>> blocks;
    std::size_t next = 0;
    for (const auto s : sizes) {
      std::vector<std::size_t> b(s);
      for (auto& i : b) i = next++;
      blocks.push_back(std::move(b));
    }
    return MeasureSpace(weights ? std::move(*weights) : std::vector<double>(next, 1.0), std::move(blocks));
  }

  std::size_t size() const noexcept { return weights_.size(); }
  double weight(std::size_t n) const { return weights_.at(n); }
  const std::vector<double>& weights() const noexcept { return weights_; }

  bool has_partition() const noexcept { return !blocks_.empty(); }
  const std::vector<std::vector<std::size_t>>& blocks() const noexcept { return blocks_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }

  double block_weight(std::size_t k) const {
    double s = 0.0;
    for (const auto i : blocks_.at(k)) s += weights_[i];
    return s;
  }

  std::size_t block_of(std::size_t n) const {
    for (std::size_t k = 0; k < blocks_.size(); ++k)
      for (const auto i : blocks_[k])
        if (i == n) return k;
    throw Error(ErrorKind::PartitionMissing, "index not covered by the partition");
  }

 private:
  MeasureSpace(std::vector<double> weights, std::vector<std::vector<std::size_t>> blocks)
      : weights_(std::move(weights)), blocks_(std::move(blocks)) {
    for (const double w : weights_) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw Error(ErrorKind::InvalidArgument, "measure weights must be finite and positive");
      }
    }
    if (!blocks_.empty()) {
      std::vector<int> seen(weights_.size(), 0);
      for (const auto& b : blocks_) {
        if (b.empty()) throw Error(ErrorKind::InvalidArgument, "empty partition block");
        for (const auto i : b) {
          if (i >= weights_.size() || seen[i]++ != 0) {
            throw Error(ErrorKind::InvalidArgument, "partition blocks must be disjoint and in range");
          }
        }
      }
      for (const int s : seen) {
        if (s == 0) throw Error(ErrorKind::InvalidArgument, "partition blocks must cover the index set");
      }
    }
  }

  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> blocks_;
};

// ---------------------------------------------------------------------------
// Vector families
// ---------------------------------------------------------------------------

class VectorFamily {
 public:
  VectorFamily() = default;
  VectorFamily(std::size_t ambient_dim, ComplexMatrix vectors, std::string label = {})
      : dim_(ambient_dim), vectors_(std::move(vectors)), label_(std::move(label)) {
    if (!vectors_.empty() && vectors_.cols() != dim_) {
      throw Error(ErrorKind::DimensionMismatch, "family vectors do not match the ambient dimension");
    }
    if (!vectors_.all_finite()) throw Error(ErrorKind::InvalidArgument, "family has non-finite entries");
  }

  static VectorFamily from_vectors(std::size_t ambient_dim, const std::vector<CVector>& vectors,
                                   std::string label = {}) {
    return {ambient_dim, vectors.empty() ? ComplexMatrix{} : ComplexMatrix::from_rows(vectors), std::move(label)};
  }

  /// e_1, ..., e_d.
  static VectorFamily orthonormal_basis(std::size_t d, std::string label = "onb") {
    return {d, ComplexMatrix::identity(d), std::move(label)};
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t count() const noexcept { return vectors_.rows(); }
  const std::string& label() const noexcept { return label_; }
  const ComplexMatrix& vectors() const noexcept { return vectors_; }
  CVector vector(std::size_t n) const { return vectors_.row(n); }
  std::span<const Complex> vector_span(std::size_t n) const { return vectors_.row_span(n); }

  /// Family {op * phi_n}.
  VectorFamily mapped(const ComplexMatrix& op, std::string label) const {
    if (op.cols() != dim_) throw Error(ErrorKind::DimensionMismatch, "operator does not act on the family");
    // rows of (op * Phi^T)^T = Phi op^T
    ComplexMatrix transposed = op.adjoint().conjugated();
    return {op.rows(), vectors_ * transposed, std::move(label)};
  }

  VectorFamily scaled(Complex c) const { return {dim_, c * vectors_, label_}; }

 private:
  std::size_t dim_ = 0;
  ComplexMatrix vectors_;
  std::string label_;
};

/// A family defined at every truncation: `count(d)` vectors, vector n
/// (0-based) given in the d-dimensional section. Truncation-consistent
/// generators return the first d coordinates of one fixed vector.
struct FamilyGenerator {
  std::string label;
  std::function<std::size_t(std::size_t d)> count;
  std::function<CVector(std::size_t n, std::size_t d)> vector;

  VectorFamily materialize(std::size_t d) const {
    const std::size_t n = count(d);
    ComplexMatrix rows(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      const CVector v = vector(i, d);
      if (v.size() != d) throw Error(ErrorKind::DimensionMismatch, "generator returned a vector of wrong length");
      rows.set_row(i, v);
    }
    return {d, std::move(rows), label};
  }
};

/// Measure attached to a family with `count` members at truncation d.
using MeasureRule = std::function<MeasureSpace(std::size_t count, std::size_t d)>;

inline MeasureRule counting_rule() {
  return [](std::size_t count, std::size_t) { return MeasureSpace::counting(count); };
}

struct TruncationSchedule {
  std::vector<std::size_t> dims;

  static TruncationSchedule make(std::vector<std::size_t> dims) {
    if (dims.empty()) throw Error(ErrorKind::InvalidArgument, "empty truncation schedule");
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (dims[k] == 0 || (k > 0 && dims[k] <= dims[k - 1])) {
        throw Error(ErrorKind::InvalidArgument, "truncation schedule must be positive and strictly increasing");
      }
    }
    return {std::move(dims)};
  }

  bool supports_trend() const noexcept { return dims.size() >= 2; }
};

// ---------------------------------------------------------------------------
// Inner-product geometry
// ---------------------------------------------------------------------------

/// Euclidean by default; with a Gram matrix K the inner product of coefficient
/// vectors is <f, g>_K = g* K f.
class Geometry {
 public:
  Geometry() = default;

  static Geometry from_gram(ComplexMatrix k) {
    const auto eig = hermitian_eig(k);
    if (eig.min() < -1e-10 * std::max(1.0, eig.max())) {
      throw Error(ErrorKind::NotPSD, "Gram matrix is not positive semidefinite");
    }
    Geometry g;
    g.factor_ = hermitian_function(eig, [](double l) { return l > 0.0 ? std::sqrt(l) : 0.0; });
    g.gram_ = std::move(k);
    return g;
  }

  bool euclidean() const noexcept { return !gram_.has_value(); }
  const ComplexMatrix& gram() const { return gram_.value(); }

  Complex inner(std::span<const Complex> f, std::span<const Complex> g) const {
    if (euclidean()) return semiframe::inner(f, g);
    return semiframe::inner(gram_->apply(f), g);
  }
  double norm(std::span<const Complex> f) const { return std::sqrt(std::max(0.0, inner(f, f).real())); }

  /// D with ||D f|| = ||f||_K.
  ComplexMatrix norm_factor(std::size_t d) const {
    check_dim(d);
    return euclidean() ? ComplexMatrix::identity(d) : *factor_;
  }

  void check_dim(std::size_t d) const {
    if (!euclidean() && gram_->rows() != d) {
      throw Error(ErrorKind::DimensionMismatch, "Gram matrix does not match the ambient dimension");
    }
  }

 private:
  std::optional<ComplexMatrix> gram_;
  std::optional<ComplexMatrix> factor_;
};

// ---------------------------------------------------------------------------
// Analysis / synthesis / frame operators
// ---------------------------------------------------------------------------

struct AnalysisMatrix {
  ComplexMatrix matrix;  // N x d
  MeasureSpace measure;

  CVector apply(std::span<const Complex> f) const { return matrix.apply(f); }
};

namespace detail {
inline void require_aligned(const VectorFamily& fam, const MeasureSpace& sp) {
  if (fam.count() != sp.size()) {
    throw Error(ErrorKind::DimensionMismatch, "family '" + fam.label() + "' has " + std::to_string(fam.count()) +
                                                  " vectors but the measure space has " + std::to_string(sp.size()) +
                                                  " points");
  }
}
}  // namespace detail

/// (C f)(n) = sqrt(mu_n) <f, phi_n>.
inline AnalysisMatrix analysis_operator(const VectorFamily& fam, const MeasureSpace& sp, const Geometry& geom = {}) {
  detail::require_aligned(fam, sp);
  geom.check_dim(fam.dim());
  ComplexMatrix c(fam.count(), fam.dim());
  for (std::size_t n = 0; n < fam.count(); ++n) {
    const double s = std::sqrt(sp.weight(n));
    const auto v = fam.vector_span(n);
    for (std::size_t j = 0; j < fam.dim(); ++j) c(n, j) = s * std::conj(v[j]);
  }
  if (!geom.euclidean()) c = c * geom.gram();
  return {std::move(c), sp};
}

/// d x N matrix a -> sum_n sqrt(mu_n) a_n phi_n.
inline ComplexMatrix synthesis_operator(const VectorFamily& fam, const MeasureSpace& sp) {
  detail::require_aligned(fam, sp);
  ComplexMatrix s(fam.dim(), fam.count());
  for (std::size_t n = 0; n < fam.count(); ++n) {
    const double w = std::sqrt(sp.weight(n));
    const auto v = fam.vector_span(n);
    for (std::size_t j = 0; j < fam.dim(); ++j) s(j, n) = w * v[j];
  }
  return s;
}

/// Matrix of the form Omega in the given geometry: Omega(f, g) = g* F f
/// with F = C* C. In the Euclidean geometry this is the frame operator.
inline ComplexMatrix frame_form(const VectorFamily& fam, const MeasureSpace& sp, const Geometry& geom = {}) {
  const auto c = analysis_operator(fam, sp, geom).matrix;
  return hermitian_part(c.adjoint() * c);
}

/// T = C* C = sum_n mu_n phi_n phi_n*.
inline ComplexMatrix frame_operator(const VectorFamily& fam, const MeasureSpace& sp) {
  return frame_form(fam, sp);
}

/// Omega(f, g) = sum_n mu_n <f, phi_n> <phi_n, g>, summed directly.
inline Complex omega_form(const VectorFamily& fam, const MeasureSpace& sp, std::span<const Complex> f,
                          std::span<const Complex> g, const Geometry& geom = {}) {
  detail::require_aligned(fam, sp);
  if (f.size() != fam.dim() || g.size() != fam.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "omega_form arguments");
  }
  geom.check_dim(fam.dim());
  Complex s{0.0, 0.0};
  for (std::size_t n = 0; n < fam.count(); ++n) {
    const auto v = fam.vector_span(n);
    s += sp.weight(n) * geom.inner(f, v) * geom.inner(v, g);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

class OperatorSpec {
 public:
  enum class Kind { Dense, Diagonal, Zero, Identity, ScaledIdentity };

  static OperatorSpec dense(ComplexMatrix m, std::string label = "dense") {
    if (!m.is_square() || m.empty()) throw Error(ErrorKind::DimensionMismatch, "dense operator must be square");
    if (!m.all_finite()) throw Error(ErrorKind::InvalidArgument, "operator has non-finite entries");
    OperatorSpec op(Kind::Dense, std::move(label));
    op.matrix_ = std::move(m);
    return op;
  }

  /// diag(a_1, a_2, ...); `entry` receives the 0-based position.
  static OperatorSpec diagonal(std::function<Complex(std::size_t)> entry, std::string label = "diagonal") {
    OperatorSpec op(Kind::Diagonal, std::move(label));
    op.entry_ = std::move(entry);
    return op;
  }

  static OperatorSpec zero() { return OperatorSpec(Kind::Zero, "zero"); }
  static OperatorSpec identity() { return OperatorSpec(Kind::Identity, "identity"); }
  static OperatorSpec scaled_identity(Complex c) {
    OperatorSpec op(Kind::ScaledIdentity, "scaled identity");
    op.scale_ = c;
    return op;
  }

  Kind kind() const noexcept { return kind_; }
  const std::string& label() const noexcept { return label_; }
  std::optional<std::size_t> native_dim() const {
    return kind_ == Kind::Dense ? std::optional<std::size_t>(matrix_.rows()) : std::nullopt;
  }

  Complex diagonal_entry(std::size_t i) const {
    switch (kind_) {
      case Kind::Diagonal: return entry_(i);
      case Kind::Zero: return 0.0;
      case Kind::Identity: return 1.0;
      case Kind::ScaledIdentity: return scale_;
      case Kind::Dense: return matrix_(i, i);
    }
    return 0.0;
  }

  /// Compression to the first d basis vectors.
  ComplexMatrix section(std::size_t d) const {
    switch (kind_) {
      case Kind::Dense:
        if (d > matrix_.rows()) {
          throw Error(ErrorKind::DimensionMismatch, "operator '" + label_ + "' has no section of dimension " +
                                                        std::to_string(d));
        }
        return matrix_.block(d, d);
      case Kind::Zero: return ComplexMatrix(d, d);
      default: {
        ComplexMatrix m(d, d);
        for (std::size_t i = 0; i < d; ++i) {
          m(i, i) = diagonal_entry(i);
          const Complex x = m(i, i);
          if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
            throw Error(ErrorKind::InvalidArgument, "operator '" + label_ + "' has a non-finite diagonal entry");
          }
        }
        return m;
      }
    }
  }

  OperatorSpec adjoint() const {
    OperatorSpec op = *this;
    op.label_ = label_ + "*";
    switch (kind_) {
      case Kind::Dense: op.matrix_ = matrix_.adjoint(); break;
      case Kind::Diagonal: {
        auto entry = entry_;
        op.entry_ = [entry](std::size_t i) { return std::conj(entry(i)); };
        break;
      }
      case Kind::ScaledIdentity: op.scale_ = std::conj(scale_); break;
      default: break;
    }
    return op;
  }

 private:
  OperatorSpec(Kind kind, std::string label) : kind_(kind), label_(std::move(label)) {}

  Kind kind_;
  std::string label_;
  ComplexMatrix matrix_;
  std::function<Complex(std::size_t)> entry_;
  Complex scale_{1.0, 0.0};
};

/// ||(I + G)^{alpha/2} f|| by spectral calculus.
inline double scale_norm(const ComplexMatrix& g, double alpha, std::span<const Complex> f) {
  if (g.rows() != f.size()) throw Error(ErrorKind::DimensionMismatch, "scale_norm");
  if (alpha == 0.0) return norm(f);
  const auto eig = hermitian_eig(g);
  if (eig.min() < -1e-10 * std::max(1.0, std::abs(eig.max()))) {
    throw Error(ErrorKind::NotPSD, "G has a negative eigenvalue");
  }
  if (1.0 + eig.min() < 1e-12) throw Error(ErrorKind::NotPSD, "I + G is not positive definite");
  const auto power = hermitian_function(eig, [alpha](double l) { return std::pow(1.0 + l, alpha / 2.0); });
  return norm(power.apply(f));
}

inline double scale_norm(const OperatorSpec& g, double alpha, std::span<const Complex> f) {
  return scale_norm(g.section(f.size()), alpha, f);
}

}  // namespace semiframe
