#pragma once

// Probe vectors for randomized checks.
//
// Generator: std::mt19937_64 seeded with the 64-bit seed. Uniforms in (0, 1)
// are (x >> 11 + 0.5) * 2^-53; normals come from the Box-Muller transform
// (both outputs used, cosine branch first). A complex standard normal has
// independent N(0, 1/2) real and imaginary parts. The stream is therefore
// identical across standard libraries, unlike std::normal_distribution.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>

#include "semiframe/numkernel.hpp"

namespace semiframe {

class ProbeGenerator {
 public:
  explicit ProbeGenerator(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream for a numbered consumer (e.g. a task index).
  static ProbeGenerator for_stream(std::uint64_t seed, std::uint64_t stream) {
    return ProbeGenerator(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  }

  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() {
    if (spare_) {
      const double s = *spare_;
      spare_.reset();
      return s;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    return r * std::cos(angle);
  }

  Complex complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

  CVector gaussian_vector(std::size_t d) {
    CVector v(d);
    for (auto& x : v) x = complex_normal();
    return v;
  }

  CVector unit_vector(std::size_t d) { return normalized(gaussian_vector(d)); }

  ComplexMatrix gaussian_matrix(std::size_t rows, std::size_t cols) {
    ComplexMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = complex_normal();
    return m;
  }

  /// Random unitary from the Gram-Schmidt orthonormalization of a Gaussian matrix.
  ComplexMatrix unitary(std::size_t n) {
    ComplexMatrix q(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      CVector v = gaussian_vector(n);
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t k = 0; k < j; ++k) {
          const CVector qk = q.column(k);
          const Complex c = inner(v, qk);
          for (std::size_t i = 0; i < n; ++i) v[i] -= c * qk[i];
        }
      }
      q.set_column(j, normalized(v));
    }
    return q;
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace semiframe
