// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "../test_support.hpp"

using namespace semiframe;
using semiframe::testing::bisect_eigenvalue;
using semiframe::testing::outer;
using semiframe::testing::random_family;
namespace fs = std::filesystem;

namespace {

// Collects the reasons a criterion failed.
struct Check {
  std::vector<std::string> failures;

  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
  }
  void le(double value, double bound, const std::string& what) {
    expect(value <= bound, what + ": " + std::to_string(value) + " > " + std::to_string(bound));
  }
};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

WeightSequence inverse_n() {
  return {[](std::size_t n) { return Complex(1.0 / static_cast<double>(n)); }, 1.5, true};
}

// 1. Weighted pair classification with exact diagonal values.
void weighted_pair_classification(Check& c) {
  const auto [psi, phi] = weighted_onb_generators(inverse_n());
  const auto sched = TruncationSchedule::make({8, 16, 32, 64, 128, 256});
  const auto cp = classify(psi, counting_rule(), sched);
  const auto cf = classify(phi, counting_rule(), sched);
  c.expect(cp.value == FrameClassValue::UpperSemiFrame, std::string("psi class ") + to_string(cp.value));
  c.expect(cf.value == FrameClassValue::LowerSemiFrame, std::string("phi class ") + to_string(cf.value));
  c.le(cp.lambda_min.slope, -1.8, "psi lambda_min slope");
  c.expect(cf.lambda_max.slope >= 1.8, "phi lambda_max slope " + std::to_string(cf.lambda_max.slope));
  c.expect(cp.lambda_max.trend == Trend::Bounded, "psi lambda_max trend");
  c.expect(cf.lambda_min.trend == Trend::Bounded, "phi lambda_min trend");
  for (std::size_t i = 0; i < sched.dims.size(); ++i) {
    const double d = static_cast<double>(sched.dims[i]);
    c.le(rel(cp.sections[i].lambda_max, 1.0), 1e-10, "psi lambda_max");
    c.le(rel(cp.sections[i].lambda_min, 1.0 / (d * d)), 1e-10, "psi lambda_min");
    c.le(rel(cf.sections[i].lambda_min, 1.0), 1e-10, "phi lambda_min");
    c.le(rel(cf.sections[i].lambda_max, d * d), 1e-10, "phi lambda_max");
  }
}

std::vector<VectorFamily> random_frames(std::uint64_t seed, std::size_t count, std::size_t d, std::size_t n) {
  ProbeGenerator g(seed);
  std::vector<VectorFamily> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(random_family(g, d, n));
  return out;
}

// 2. The canonical dual is a tight frame with bound 1 for <f, g>_C = <C f, C g>.
void canonical_dual_tightness(Check& c) {
  ProbeGenerator g(2002);
  const auto sp = MeasureSpace::counting(24);
  for (const auto& phi : random_frames(2001, 25, 16, 24)) {
    const auto chi = canonical_dual(phi, sp);
    const auto cphi = analysis_operator(phi, sp);
    const auto inner_c = [&](const CVector& f, const CVector& h) { return inner(cphi.apply(f), cphi.apply(h)); };
    for (int s = 0; s < 10; ++s) {
      const CVector f = g.gaussian_vector(16);
      double energy = 0.0;
      for (std::size_t n = 0; n < chi.count(); ++n) energy += sp.weight(n) * std::norm(inner_c(f, chi.vector(n)));
      const double norm_c = inner_c(f, f).real();
      c.le(std::abs(energy - norm_c) / norm_c, 1e-8, "tight identity");
      CVector recon(16);
      for (std::size_t n = 0; n < chi.count(); ++n)
        recon = recon + (sp.weight(n) * inner(f, phi.vector(n))) * chi.vector(n);
      c.le(norm(recon - f) / norm(f), 1e-8, "reconstruction");
    }
  }
}

// 3. Mapping the canonical dual back through T recovers the family.
void converse_round_trip(Check& c) {
  const auto sp = MeasureSpace::counting(24);
  for (const auto& phi : random_frames(2001, 25, 16, 24)) {
    const auto back = lower_from_frame(canonical_dual(phi, sp), phi, sp);
    c.le((back.vectors() - phi.vectors()).max_abs(), 1e-9, "round trip");
  }
}

// 4. Douglas factorization: recovery, norm bound, minimality, violations.
void douglas_suite(Check& c) {
  ProbeGenerator g(4004);
  const std::size_t d = 12, n = 20;
  const auto sp = MeasureSpace::counting(n);
  for (int trial = 0; trial < 50; ++trial) {
    const auto phi = random_family(g, d, n);
    const auto cm = analysis_operator(phi, sp).matrix;
    const ComplexMatrix b = cm.adjoint() * g.gaussian_matrix(n, d);
    const auto r = lower_factorize(b, phi, sp);
    c.le((cm.adjoint() * r.factor - b).frobenius_norm(), 1e-9, "C* M - B");
    const double m_norm = spectral_norm(r.factor);
    c.le(m_norm, r.lambda_hat + 1e-9, "||M|| vs lambda_hat");
    const ComplexMatrix proj = ComplexMatrix::identity(n) - cm * pinv(cm);  // onto ker C*
    for (int k = 0; k < 50; ++k) {
      const ComplexMatrix alt = r.factor + proj * g.gaussian_matrix(n, d);
      c.le((cm.adjoint() * alt - b).frobenius_norm(), 1e-9 * std::max(1.0, b.frobenius_norm()), "alternative");
      c.le(m_norm, spectral_norm(alt) + 1e-9, "minimal norm");
    }
  }
  for (int trial = 0; trial < 10; ++trial) {
    const CVector u = g.unit_vector(d);
    const ComplexMatrix p = ComplexMatrix::identity(d) - outer(u, u);
    const auto phi = random_family(g, d, n).mapped(p, "deficient");  // u spans ker C
    const ComplexMatrix b = g.gaussian_matrix(d, d);
    try {
      lower_factorize(b, phi, sp);
      c.expect(false, "adversarial instance accepted");
    } catch (const Error& e) {
      c.expect(e.kind() == ErrorKind::MajorizationViolated, std::string("kind ") + to_string(e.kind()));
      const CVector w = e.witness();
      c.expect(w.size() == d, "witness size");
      if (w.size() != d) continue;
      const auto cm = analysis_operator(phi, sp).matrix;
      c.le(norm(cm.apply(w)), 1e-8 * cm.frobenius_norm() * norm(w), "witness in ker C");
      c.expect(norm(b.adjoint().apply(w)) > 1e-3 * norm(w), "witness outside ker B*");
    }
  }
}

// 5. Factor, Bessel weak dual and atomic coefficients close the loop.
void lower_atomic_loop(Check& c) {
  ProbeGenerator g(5005);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t d = 6 + static_cast<std::size_t>(trial % 5), n = d + 5;
    std::vector<double> w(n);
    for (auto& x : w) x = 0.25 + std::norm(g.gaussian_vector(1)[0]);
    const auto sp = MeasureSpace::weighted(w);
    VectorFamily phi = random_family(g, d, n);
    ComplexMatrix b;
    if (trial % 2 == 0) {
      b = g.gaussian_matrix(d, d);
    } else {  // rank-deficient C with B = C* M0
      const CVector u = g.unit_vector(d);
      phi = phi.mapped(ComplexMatrix::identity(d) - outer(u, u), "deficient");
      b = analysis_operator(phi, sp).matrix.adjoint() * g.gaussian_matrix(n, d);
    }
    const auto fac = lower_factorize(b, phi, sp);
    const auto psi = bessel_dual_from_factor(fac, sp);
    const double m_norm = spectral_norm(fac.factor);
    c.le(bessel_bound(psi, sp).constant, m_norm * m_norm + 1e-9, "Bessel bound of psi");
    for (int s = 0; s < 20; ++s) {
      const CVector f = g.gaussian_vector(d), u = g.gaussian_vector(d);
      Complex sum = 0.0;
      for (std::size_t k = 0; k < n; ++k) sum += sp.weight(k) * inner(f, psi.vector(k)) * inner(phi.vector(k), u);
      const Complex lhs = inner(b.apply(f), u);
      c.le(std::abs(lhs - sum) / std::max(1.0, b.frobenius_norm() * norm(f) * norm(u)), 1e-8, "weak dual identity");
    }
    for (int s = 0; s < 100; ++s) {
      const CVector f = g.gaussian_vector(d);
      const auto a = atomic_coefficients(f, psi, sp, b, phi);
      c.le(norm(a.coefficients), a.gamma * norm(f) + 1e-9, "atomic bound");
    }
  }
}

// 6. gamma^2 alpha is a lower frame bound when A* is bounded below by gamma.
void surjective_reduction(Check& c) {
  ProbeGenerator g(6006);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 5 + static_cast<std::size_t>(trial % 4), n = 2 * d;
    const auto phi = random_family(g, d, n);
    const auto sp = MeasureSpace::counting(n);
    const ComplexMatrix a = g.gaussian_matrix(d, d);
    const double gamma = svd(a.adjoint()).singular_values.back();
    const auto alpha = weak_A_frame_alpha(phi, sp, a);
    c.expect(gamma > 0.0 && alpha.verdict == Verdict::Holds, "premises");
    c.expect(lower_frame_bound(phi, sp).constant >= gamma * gamma * alpha.constant - 1e-8, "reduction bound");
  }
}

// 7. The A phi chain on diagonal and random instances.
void aphi_chain(Check& c) {
  {
    const std::size_t d = 8;
    ComplexMatrix psi(d, d), phi(d, d);
    for (std::size_t k = 0; k < d; ++k) {
      psi(k, k) = 1.0 / static_cast<double>(k + 1);
      phi(k, k) = static_cast<double>(k + 1);
    }
    const auto id = ComplexMatrix::identity(d);
    const auto r = aphi_lower_chain(VectorFamily(d, psi), VectorFamily(d, phi), MeasureSpace::counting(d), id, id);
    c.expect(r.verdict == Verdict::Holds, "diagonal verdict");
    c.le(rel(r.constant, 1.0), 1e-12, "diagonal infimum");
  }
  ProbeGenerator g(7007);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 4 + static_cast<std::size_t>(trial % 4), n = 2 * d;
    const auto sp = MeasureSpace::counting(n);
    const auto psi = random_family(g, d, n);
    const ComplexMatrix f = g.gaussian_matrix(d, d);
    const auto phi = canonical_dual(psi, sp).mapped(f.adjoint(), "F* chi");  // sum mu psi_n phi_n* = F
    const auto r = aphi_lower_chain(psi, phi, sp, f, f);
    c.expect(r.verdict == Verdict::Holds, "random verdict");
    c.expect(r.constant >= *r.secondary - 1e-8, "random infimum");
  }
  const std::size_t d = 5;
  const auto sp = MeasureSpace::counting(d);
  const auto psi = random_family(g, d, d);
  const auto phi = canonical_dual(psi, sp);
  const VectorFamily noisy(d, phi.vectors() + Complex(0.1 * phi.vectors().max_abs()) * g.gaussian_matrix(d, d));
  try {
    aphi_lower_chain(psi, noisy, sp, ComplexMatrix::identity(d), ComplexMatrix::identity(d));
    c.expect(false, "broken duality accepted");
  } catch (const Error& e) {
    c.expect(e.kind() == ErrorKind::DualityViolated, std::string("kind ") + to_string(e.kind()));
  }
}

// 8. Controlled frame bounds against an eigen oracle and a Rayleigh sweep.
void controlled_frames(Check& c) {
  ProbeGenerator g(8008);
  const std::size_t d = 16, n = 24;
  const auto sp = MeasureSpace::counting(n);
  for (int trial = 0; trial < 5; ++trial) {
    const auto psi = random_family(g, d, n);
    const ComplexMatrix t = frame_operator(psi, sp);
    const ComplexMatrix cop = 0.5 * ComplexMatrix::identity(d) + 0.2 * t + 0.03 * (t * t);
    const auto r = controlled_frame_bounds(psi, sp, cop);
    const ComplexMatrix s = hermitian_part(cop * t);
    const double lo = bisect_eigenvalue(s, 0), hi = bisect_eigenvalue(s, d - 1);
    c.le(rel(r.constant, lo), 1e-9, "m_C vs oracle");
    c.le(rel(*r.secondary, hi), 1e-9, "M_C vs oracle");
    double smin = std::numeric_limits<double>::infinity(), smax = 0.0;
    const auto cpsi = analysis_operator(psi, sp);
    for (int k = 0; k < 1000; ++k) {
      const CVector f = g.unit_vector(d);
      // sum_n mu_n <f, psi_n> <C psi_n, f> = <C T f, f>
      const CVector a = cpsi.apply(f);
      Complex q = 0.0;
      for (std::size_t m = 0; m < n; ++m) q += a[m] * inner(cop.apply(psi.vector(m)), f);
      smin = std::min(smin, q.real());
      smax = std::max(smax, q.real());
    }
    c.expect(smin >= r.constant - 1e-9, "sample min");
    c.le(smax, *r.secondary + 1e-9, "sample max");
    const auto plain = controlled_frame_bounds(psi, sp, ComplexMatrix::identity(d));
    c.le(std::abs(plain.constant - lower_frame_bound(psi, sp).constant), 1e-10, "identity lower");
    c.le(std::abs(*plain.secondary - bessel_bound(psi, sp).constant), 1e-10, "identity upper");
  }
}

// 9. Gaussian kernel fixture.
void rkhs_fixture(Check& c) {
  ProbeGenerator g(9009);
  const auto m = [](double x) { return 1.0 + x * x; };
  const auto kf = gaussian_kernel_family(uniform_grid(8, -1.0, 1.0), 0.5, m, 1);
  const auto pair = rkhs_pair(kf);
  const auto sp = MeasureSpace::counting(8);
  for (int s = 0; s < 20; ++s) {
    const CVector coef = g.gaussian_vector(8);
    for (std::size_t x = 0; x < 8; ++x) {
      Complex fx = 0.0;
      for (std::size_t y = 0; y < 8; ++y) fx += coef[y] * kf.gram(x, y);
      c.le(std::abs(fx - pair.geometry.inner(coef, basis_vector(8, x))), 1e-10 * std::max(1.0, std::abs(fx)),
           "reproducing identity");
    }
  }
  // sum_x <f, psi_x>_K phi_x = K f, and K^-1 psi is an exact dual of phi.
  const auto weak = weak_G_dual_check(pair.phi, pair.psi, sp, kf.gram, 1e-8, pair.geometry);
  c.expect(weak.verdict, "weak K-dual residual " + std::to_string(weak.max_residual));
  const auto eig = hermitian_eig(kf.gram);
  const ComplexMatrix k_inv = hermitian_function(eig, [](double l) { return 1.0 / l; });
  const auto exact = dual_pair_check(pair.phi, pair.psi.mapped(k_inv, "K^-1 psi"), sp, 1e-8, pair.geometry);
  c.expect(exact.verdict, "exact dual residual " + std::to_string(exact.max_residual));
  std::vector<Complex> diag;
  for (const double x : kf.points) diag.push_back(m(x));
  const ComplexMatrix mult = ComplexMatrix::diagonal(diag);
  const std::vector<double> alphas{0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
  for (int s = 0; s < 20; ++s) {
    const CVector f = g.gaussian_vector(8);
    double prev = 0.0;
    for (const double a : alphas) {
      const double v = scale_norm(mult, a, f);
      c.expect(v >= prev * (1.0 - 1e-12), "scale_norm monotone");
      prev = v;
    }
  }
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SEMIFRAME_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 10. Deterministic CLI output and strict validation.
void cli_determinism(Check& c) {
  const fs::path src(SEMIFRAME_SOURCE_DIR);
  const fs::path tmp = fs::temp_directory_path() / "semiframe_acceptance";
  fs::remove_all(tmp);
  for (const char* name : {"rkhs_gaussian.json", "discrete_weighted.json", "metric_operator.json"}) {
    const fs::path spec = src / "specs" / name;
    const fs::path a = tmp / (std::string(name) + ".a"), b = tmp / (std::string(name) + ".b");
    const std::string base = "run --seed 42 --spec \"" + spec.string() + "\" --out ";
    c.expect(run_cli(base + "\"" + a.string() + "\"") == 0, std::string(name) + " first run exit code");
    c.expect(run_cli(base + "\"" + b.string() + "\"") == 0, std::string(name) + " second run exit code");
    const std::string ra = slurp(a / "report.json"), rb = slurp(b / "report.json");
    c.expect(!ra.empty() && ra == rb, std::string(name) + " reports differ");
  }
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(src / "tests" / "data" / "malformed")) {
    ++count;
    const int code = run_cli("validate --spec \"" + entry.path().string() + "\"");
    c.expect(code == 2, entry.path().filename().string() + " exit code " + std::to_string(code));
  }
  c.expect(count == 10, "malformed corpus has " + std::to_string(count) + " files");
  fs::remove_all(tmp);
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    std::function<void(Check&)> body;
    double budget_seconds;
  };
  const std::vector<Criterion> criteria = {
      {1, "weighted pair classification", weighted_pair_classification, 10.0},
      {2, "canonical dual tightness", canonical_dual_tightness, 5.0},
      {3, "lower family from canonical dual", converse_round_trip, 60.0},
      {4, "Douglas factorization suite", douglas_suite, 60.0},
      {5, "lower factorization loop", lower_atomic_loop, 60.0},
      {6, "surjective reduction", surjective_reduction, 60.0},
      {7, "A phi lower chain", aphi_chain, 60.0},
      {8, "controlled frame bounds", controlled_frames, 60.0},
      {9, "kernel space fixture", rkhs_fixture, 60.0},
      {10, "CLI determinism and validation", cli_determinism, 60.0},
  };
  int failed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (const auto& cr : criteria) {
    Check check;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    check.le(secs, cr.budget_seconds, "runtime");
    const bool ok = check.failures.empty();
    failed += ok ? 0 : 1;
    std::printf("%s criterion %d: %s (%.2f s)\n", ok ? "PASS" : "FAIL", cr.id, cr.title, secs);
    for (const auto& f : check.failures) std::printf("    %s\n", f.c_str());
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%d of %zu criteria passed in %.2f s\n", static_cast<int>(criteria.size()) - failed, criteria.size(),
              total);
  return failed == 0 ? 0 : 1;
}
