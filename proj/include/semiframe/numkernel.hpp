#pragma once

// Dense complex linear algebra for desk-scale problems (d up to ~1024).
// Hermitian eigenproblems use cyclic complex Jacobi rotations, singular value
// decompositions use one-sided (Hestenes) Jacobi on the columns.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semiframe/error.hpp"

namespace semiframe {

inline constexpr double kRankTol = 1e-11;
inline constexpr double kHermTol = 1e-9;

// ---------------------------------------------------------------------------
// Vectors
// ---------------------------------------------------------------------------

/// <a, b>, linear in the first argument.
inline Complex inner(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::DimensionMismatch, "inner product of vectors with different lengths");
  }
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
  return s;
}

inline double norm(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

inline CVector operator+(const CVector& a, const CVector& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "vector sum");
  CVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline CVector operator-(const CVector& a, const CVector& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::DimensionMismatch, "vector difference");
  CVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline CVector operator*(Complex s, const CVector& a) {
  CVector r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
  return r;
}

inline CVector basis_vector(std::size_t d, std::size_t k) {
  CVector e(d, Complex{0.0, 0.0});
  e.at(k) = 1.0;
  return e;
}

inline CVector normalized(CVector v) {
  const double n = norm(v);
  if (n > 0.0) {
    for (auto& x : v) x /= n;
  }
  return v;
}

// ---------------------------------------------------------------------------
// ComplexMatrix
// ---------------------------------------------------------------------------

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, Complex{0.0, 0.0}) {}

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const Complex> d) {
    ComplexMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  }

  static ComplexMatrix diagonal(std::initializer_list<Complex> d) {
    return diagonal(std::span<const Complex>(d.begin(), d.size()));
  }

  static ComplexMatrix from_rows(const std::vector<CVector>& rows) {
    if (rows.empty()) return {};
    ComplexMatrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols_) {
        throw Error(ErrorKind::DimensionMismatch, "ragged rows");
      }
      std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + i * m.cols_);
    }
    return m;
  }

  static ComplexMatrix from_columns(const std::vector<CVector>& cols) {
    return from_rows(cols).adjoint().conjugated();
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }
  bool is_square() const noexcept { return rows_ == cols_; }

  Complex& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Complex& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const Complex> row_span(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  CVector row(std::size_t i) const {
    auto s = row_span(i);
    return {s.begin(), s.end()};
  }
  CVector column(std::size_t j) const {
    CVector c(rows_);
    for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  void set_column(std::size_t j, std::span<const Complex> c) {
    for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = c[i];
  }
  void set_row(std::size_t i, std::span<const Complex> r) {
    std::copy(r.begin(), r.end(), data_.begin() + i * cols_);
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix r(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
  }

  ComplexMatrix conjugated() const {
    ComplexMatrix r = *this;
    for (auto& x : r.data_) x = std::conj(x);
    return r;
  }

  /// Top-left block.
  ComplexMatrix block(std::size_t rows, std::size_t cols) const {
    if (rows > rows_ || cols > cols_) {
      throw Error(ErrorKind::DimensionMismatch, "block exceeds matrix");
    }
    ComplexMatrix r(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) r(i, j) = (*this)(i, j);
    return r;
  }

  /// Columns [first, first + count).
  ComplexMatrix columns(std::size_t first, std::size_t count) const {
    ComplexMatrix r(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < count; ++j) r(i, j) = (*this)(i, first + j);
    return r;
  }

  CVector apply(std::span<const Complex> v) const {
    if (v.size() != cols_) throw Error(ErrorKind::DimensionMismatch, "matrix-vector product");
    CVector r(rows_, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < rows_; ++i) {
      Complex s{0.0, 0.0};
      const Complex* row = data_.data() + i * cols_;
      for (std::size_t j = 0; j < cols_; ++j) s += row[j] * v[j];
      r[i] = s;
    }
    return r;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (const auto& x : data_) s += std::norm(x);
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](const Complex& x) {
      return std::isfinite(x.real()) && std::isfinite(x.imag());
    });
  }

  ComplexMatrix& operator+=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  ComplexMatrix& operator-=(const ComplexMatrix& o) {
    require_same_shape(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  ComplexMatrix& operator*=(Complex s) {
    for (auto& x : data_) x *= s;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols_ != b.rows_) throw Error(ErrorKind::DimensionMismatch, "matrix product");
    ComplexMatrix r(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
      Complex* out = r.data_.data() + i * r.cols_;
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex{0.0, 0.0}) continue;
        const Complex* brow = b.data_.data() + k * b.cols_;
        for (std::size_t j = 0; j < b.cols_; ++j) out[j] += aik * brow[j];
      }
    }
    return r;
  }

 private:
  void require_same_shape(const ComplexMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) {
      throw Error(ErrorKind::DimensionMismatch, "matrix shapes differ");
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Complex> data_;
};

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  ComplexMatrix h = a + a.adjoint();
  h *= 0.5;
  return h;
}

/// Largest entrywise |A - A*|.
inline double hermitian_defect(const ComplexMatrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

/// Stacks `top` over `bottom` (same column count).
inline ComplexMatrix vstack(const ComplexMatrix& top, const ComplexMatrix& bottom) {
  if (top.cols() != bottom.cols()) throw Error(ErrorKind::DimensionMismatch, "vstack");
  ComplexMatrix r(top.rows() + bottom.rows(), top.cols());
  for (std::size_t i = 0; i < top.rows(); ++i) r.set_row(i, top.row_span(i));
  for (std::size_t i = 0; i < bottom.rows(); ++i) r.set_row(top.rows() + i, bottom.row_span(i));
  return r;
}

// ---------------------------------------------------------------------------
// Jacobi rotations
// ---------------------------------------------------------------------------

namespace detail {

/// Unitary 2x2 U with U* [[a, c], [conj(c), b]] U diagonal (a, b real).
struct Rotation {
  Complex u00, u01, u10, u11;
  double t;  // new diagonal: a - t|c|, b + t|c|
};

inline Rotation jacobi_rotation(double a, double b, Complex c) {
  const double mag = std::abs(c);
  const double theta = (b - a) / (2.0 * mag);
  const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
  const double cs = 1.0 / std::sqrt(t * t + 1.0);
  const double sn = t * cs;
  const Complex phase = std::conj(c / mag);
  return {cs, sn, -phase * sn, phase * cs, t};
}

/// M <- M U on columns p, q.
inline void rotate_columns(ComplexMatrix& m, std::size_t p, std::size_t q, const Rotation& r) {
  for (std::size_t k = 0; k < m.rows(); ++k) {
    const Complex mp = m(k, p);
    const Complex mq = m(k, q);
    m(k, p) = mp * r.u00 + mq * r.u10;
    m(k, q) = mp * r.u01 + mq * r.u11;
  }
}

/// M <- U* M on rows p, q.
inline void rotate_rows(ComplexMatrix& m, std::size_t p, std::size_t q, const Rotation& r) {
  for (std::size_t k = 0; k < m.cols(); ++k) {
    const Complex mp = m(p, k);
    const Complex mq = m(q, k);
    m(p, k) = std::conj(r.u00) * mp + std::conj(r.u10) * mq;
    m(q, k) = std::conj(r.u01) * mp + std::conj(r.u11) * mq;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Hermitian eigendecomposition
// ---------------------------------------------------------------------------

struct HermitianEig {
  std::vector<double> eigenvalues;  // ascending
  ComplexMatrix eigenvectors;       // columns

  CVector vector(std::size_t k) const { return eigenvectors.column(k); }
  double min() const { return eigenvalues.front(); }
  double max() const { return eigenvalues.back(); }
};

/// Cyclic Jacobi. Stops when the off-diagonal Frobenius mass drops below
/// 1e-13 * ||A||_F or after 100 sweeps.
inline HermitianEig hermitian_eig(const ComplexMatrix& a, double tol_herm = kHermTol) {
  if (!a.is_square() || a.empty()) {
    throw Error(ErrorKind::DimensionMismatch, "hermitian_eig needs a non-empty square matrix");
  }
  if (hermitian_defect(a) > tol_herm * std::max(1.0, a.max_abs())) {
    throw Error(ErrorKind::NotHermitian, "matrix is not Hermitian within tolerance");
  }
  const std::size_t n = a.rows();
  ComplexMatrix w = hermitian_part(a);
  for (std::size_t i = 0; i < n; ++i) w(i, i) = w(i, i).real();
  ComplexMatrix v = ComplexMatrix::identity(n);

  const double threshold = 1e-13 * w.frobenius_norm();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) off += std::norm(w(i, j));
    if (std::sqrt(off) <= threshold) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const Complex c = w(p, q);
        if (std::abs(c) <= 1e-300) continue;
        const double app = w(p, p).real();
        const double aqq = w(q, q).real();
        const auto rot = detail::jacobi_rotation(app, aqq, c);
        const double mag = std::abs(c);
        detail::rotate_columns(w, p, q, rot);
        detail::rotate_rows(w, p, q, rot);
        detail::rotate_columns(v, p, q, rot);
        w(p, q) = 0.0;
        w(q, p) = 0.0;
        w(p, p) = app - rot.t * mag;
        w(q, q) = aqq + rot.t * mag;
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return w(x, x).real() < w(y, y).real(); });
  HermitianEig out;
  out.eigenvalues.reserve(n);
  out.eigenvectors = ComplexMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues.push_back(w(order[k], order[k]).real());
    for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// V f(Lambda) V* for a Hermitian matrix.
template <typename Fn>
ComplexMatrix hermitian_function(const HermitianEig& eig, Fn&& fn) {
  const std::size_t n = eig.eigenvalues.size();
  ComplexMatrix r(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    const double fk = fn(eig.eigenvalues[k]);
    if (fk == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const Complex vik = eig.eigenvectors(i, k) * fk;
      for (std::size_t j = 0; j < n; ++j) r(i, j) += vik * std::conj(eig.eigenvectors(j, k));
    }
  }
  return r;
}

/// A^p for Hermitian PSD A; negative round-off eigenvalues are clamped to 0.
inline ComplexMatrix psd_power(const ComplexMatrix& a, double p) {
  const auto eig = hermitian_eig(a);
  return hermitian_function(eig, [p](double l) { return l > 0.0 ? std::pow(l, p) : 0.0; });
}

// ---------------------------------------------------------------------------
// Singular value decomposition
// ---------------------------------------------------------------------------

/// A = U diag(s) V*, with U m x n (columns for zero singular values are zero),
/// s descending (length n), V n x n unitary.
struct Svd {
  ComplexMatrix u;
  std::vector<double> singular_values;
  ComplexMatrix v;

  double max() const { return singular_values.empty() ? 0.0 : singular_values.front(); }
  std::size_t rank(double tol_rank = kRankTol) const {
    const double cut = tol_rank * max();
    return static_cast<std::size_t>(std::count_if(singular_values.begin(), singular_values.end(),
                                                  [&](double s) { return s > cut && s > 0.0; }));
  }
};

/// One-sided Jacobi on the columns of A.
inline Svd svd(const ComplexMatrix& a) {
  if (a.empty()) throw Error(ErrorKind::DimensionMismatch, "svd of an empty matrix");
  const std::size_t m = a.rows();
  const std::size_t n = a.cols();
  ComplexMatrix w = a;
  ComplexMatrix v = ComplexMatrix::identity(n);
  constexpr double eps = 1e-15;

  std::vector<double> col_norm2(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += std::norm(w(k, j));
      col_norm2[j] = s;
    }
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = col_norm2[p];
        const double beta = col_norm2[q];
        if (alpha == 0.0 || beta == 0.0) continue;
        Complex gamma{0.0, 0.0};
        for (std::size_t k = 0; k < m; ++k) gamma += std::conj(w(k, p)) * w(k, q);
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const auto rot = detail::jacobi_rotation(alpha, beta, gamma);
        detail::rotate_columns(w, p, q, rot);
        detail::rotate_columns(v, p, q, rot);
        const double mag = std::abs(gamma);
        col_norm2[p] = std::max(0.0, alpha - rot.t * mag);
        col_norm2[q] = std::max(0.0, beta + rot.t * mag);
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) s += std::norm(w(k, j));
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  Svd out;
  out.u = ComplexMatrix(m, n);
  out.v = ComplexMatrix(n, n);
  out.singular_values.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.singular_values.push_back(sigma[j]);
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v(i, j);
    if (sigma[j] > 0.0) {
      for (std::size_t i = 0; i < m; ++i) out.u(i, k) = w(i, j) / sigma[j];
    }
  }
  return out;
}

inline double spectral_norm(const ComplexMatrix& a) { return svd(a).max(); }

/// Moore-Penrose pseudoinverse; singular values at or below tol_rank * s_max
/// are treated as zero.
inline ComplexMatrix pinv(const ComplexMatrix& a, double tol_rank = kRankTol) {
  if (!(tol_rank > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol_rank must be positive");
  const auto s = svd(a);
  ComplexMatrix r(a.cols(), a.rows());
  const std::size_t rank = s.rank(tol_rank);
  for (std::size_t k = 0; k < rank; ++k) {
    const double inv = 1.0 / s.singular_values[k];
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const Complex vik = s.v(i, k) * inv;
      for (std::size_t j = 0; j < a.rows(); ++j) r(i, j) += vik * std::conj(s.u(j, k));
    }
  }
  return r;
}

/// Minimal-norm solution of T x = b for Hermitian PSD T. Eigenvalues at or
/// below tol_rank * lambda_max span the kernel.
inline CVector solve_psd(const ComplexMatrix& t, std::span<const Complex> b, double tol_rank = kRankTol) {
  if (b.size() != t.rows()) throw Error(ErrorKind::DimensionMismatch, "solve_psd right-hand side");
  const auto eig = hermitian_eig(t);
  const double scale = std::max(std::abs(eig.min()), std::abs(eig.max()));
  if (eig.min() < -1e-9 * std::max(1.0, scale)) {
    throw Error(ErrorKind::NotPSD, "matrix has a negative eigenvalue");
  }
  const double cut = tol_rank * std::max(eig.max(), 0.0);
  const std::size_t n = t.rows();
  CVector x(n, Complex{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) {
    const double lk = eig.eigenvalues[k];
    if (lk <= cut || lk <= 0.0) continue;
    const CVector vk = eig.vector(k);
    const Complex coef = inner(b, vk) / lk;
    for (std::size_t i = 0; i < n; ++i) x[i] += coef * vk[i];
  }
  const CVector tx = t.apply(x);
  double res = 0.0;
  for (std::size_t i = 0; i < n; ++i) res += std::norm(tx[i] - b[i]);
  res = std::sqrt(res);
  if (res > 1e-9 * std::max(1.0, norm(b))) {
    throw Error(ErrorKind::OutOfRange, "right-hand side is not in the range of T (residual " +
                                           std::to_string(res) + ")");
  }
  return x;
}

// ---------------------------------------------------------------------------
// Ratio spectra  <N u, u> / ||D u||^2
// ---------------------------------------------------------------------------

/// Spectrum of the pencil (N, D*D) on ker(D)^perp, obtained by whitening with
/// the singular values of D, together with the largest value of <N w, w> over
/// unit w in ker(D).
struct RatioSpectrum {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // unit-norm extremizers in the original space, one column per value
  double kernel_leak = 0.0;
  CVector leak_witness;
  std::size_t kernel_dim = 0;

  bool range_empty() const { return values.empty(); }
  CVector vector(std::size_t k) const { return vectors.column(k); }
};

inline RatioSpectrum ratio_spectrum(const ComplexMatrix& numerator, const ComplexMatrix& denominator,
                                    double tol_rank = kRankTol) {
  if (!numerator.is_square() || numerator.rows() != denominator.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "ratio_spectrum operands");
  }
  const std::size_t n = numerator.rows();
  const auto s = svd(denominator);
  const std::size_t r = s.rank(tol_rank);

  RatioSpectrum out;
  out.kernel_dim = n - r;
  if (r > 0) {
    // H = S^-1 Vr* N Vr S^-1
    ComplexMatrix whiten(n, r);
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t i = 0; i < n; ++i) whiten(i, k) = s.v(i, k) / s.singular_values[k];
    const ComplexMatrix h = hermitian_part(whiten.adjoint() * numerator * whiten);
    const auto eig = hermitian_eig(h);
    out.values = eig.eigenvalues;
    out.vectors = ComplexMatrix(n, r);
    for (std::size_t k = 0; k < r; ++k) {
      const CVector u = normalized(whiten.apply(eig.vector(k)));
      out.vectors.set_column(k, u);
    }
  }
  if (r < n) {
    const ComplexMatrix z = s.v.columns(r, n - r);
    const auto eig = hermitian_eig(hermitian_part(z.adjoint() * numerator * z));
    out.kernel_leak = std::max(0.0, eig.max());
    out.leak_witness = normalized(z.apply(eig.vector(eig.eigenvalues.size() - 1)));
  }
  return out;
}

}  // namespace semiframe
