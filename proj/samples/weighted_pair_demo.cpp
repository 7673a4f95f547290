// Classifies the pair psi_n = e_n / n, phi_n = n e_n over growing sections
// and factors the identity through the analysis operator of phi.

#include <cstdio>

#include "semiframe/semiframe.hpp"

using namespace semiframe;

int main() {
  const WeightSequence m{[](std::size_t n) { return Complex{1.0 / static_cast<double>(n), 0.0}; }, 1.5, true};
  const auto [psi_gen, phi_gen] = weighted_onb_generators(m);
  const auto schedule = TruncationSchedule::make({8, 16, 32, 64});

  for (const auto* gen : {&psi_gen, &phi_gen}) {
    const auto cls = classify(*gen, counting_rule(), schedule);
    std::printf("%-20s %-18s slope(min) %+.3f  slope(max) %+.3f\n", gen->label.c_str(), to_string(cls.value),
                cls.lambda_min.slope, cls.lambda_max.slope);
    for (const auto& s : cls.sections) {
      std::printf("  d = %3zu  lambda_min = %.6g  lambda_max = %.6g\n", s.dimension, s.lambda_min, s.lambda_max);
    }
  }

  const std::size_t d = 6;
  const auto pair = weighted_onb_pair(m, d);
  const auto sp = MeasureSpace::counting(d);
  const auto fac = lower_factorize(ComplexMatrix::identity(d), pair.phi, sp);
  const auto dual = bessel_dual_from_factor(fac, sp);
  std::printf("\nI = C_phi* M at d = %zu: residual %.2e, lambda = %.6g, Bessel bound of the dual %.6g\n", d,
              fac.residual, fac.lambda_hat, bessel_bound(dual, sp).constant);
  return 0;
}
