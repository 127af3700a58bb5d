#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>

#include "rittlab/certificates.hpp"
#include "rittlab/fractional.hpp"
#include "rittlab/functionals.hpp"
#include "rittlab/measure.hpp"
#include "rittlab/symbol.hpp"

using namespace rittlab;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("angular ratio flags the pure shift and clears the real symbols") {
  // Shift by one: |symbol| = 1 everywhere while 1 - symbol != 0, so the
  // ratio is infinite away from t = 0 and the check must fail with a
  // witness frequency.
  FourierSymbol shift = symbol_from_measure(make_measure({{1, 1.0}}));
  ConditionReport bad = angular_ratio(shift, 512);
  CHECK(!bad.holds);
  CHECK(bad.has_witness);
  CHECK(!std::isfinite(bad.constants.at("sup")));

  // Lazy walk: the symbol is real with values in [0, 1), so the ratio is
  // identically 1.
  ConditionReport lazy = angular_ratio(closed_form_lazy_walk(), 512);
  CHECK(lazy.holds);
  CHECK(lazy.constants.at("sup") == doctest::Approx(1.0).epsilon(1e-9));

  ConditionReport nu = angular_ratio(closed_form_nu_alpha(0.5), 512);
  CHECK(nu.holds);
  CHECK(std::isfinite(nu.constants.at("sup")));
  CHECK(nu.constants.at("sup") >= 1.0);
}

TEST_CASE("M1 constants for the lazy walk pin the quadratic floor") {
  // 1 - |psi| = sin^2(pi t) and sin^2(pi t)/t^2 decreases on (0, 1/2],
  // so the fitted lower constant is exactly sin^2(pi/2)/(1/4) = 4 (the
  // grid contains t = 1/2). The derivative constant is
  // sup pi sin(2 pi t)/t = 2 pi^2, approached as t -> 0.
  FourierSymbol lazy = closed_form_lazy_walk();
  ConditionReport rep = check_m1(lazy, power_majorant(2.0), 1024);
  CHECK(rep.holds);
  CHECK(rep.constants.at("c1_raw") == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(rep.constants.at("c3_raw") ==
        doctest::Approx(2.0 * kPi * kPi).epsilon(1e-3));
  CHECK(rep.constants.at("c1") < rep.constants.at("c1_raw"));
  CHECK(rep.constants.at("c3") > rep.constants.at("c3_raw"));

  // The shift has |symbol| = 1, so the infimum of (1-|symbol|)/h is 0 and
  // M1 must fail.
  FourierSymbol shift = symbol_from_measure(make_measure({{1, 1.0}}));
  ConditionReport bad = check_m1(shift, power_majorant(2.0), 256);
  CHECK(!bad.holds);
  CHECK(bad.has_witness);
}

TEST_CASE("M2 holds for the fractional walk with its natural majorant") {
  FourierSymbol nu = closed_form_nu_alpha(0.5);
  CHECK(nu.majorant_exponent() == doctest::Approx(0.5));
  ConditionReport rep = check_m2(nu, power_majorant(0.5), 1024);
  CHECK(rep.holds);
  for (const char* part :
       {"part_lower_gap", "part_distance", "part_first_derivative",
        "part_second_derivative", "part_doubling"})
    CHECK(rep.constants.at(part) == 1.0);

  // |1 - symbol| = (2 sin(pi t))^{1/2}, so the distance constant is
  // sup (2 sin(pi t)/t)^{1/2} = sqrt(2 pi), approached as t -> 0.
  CHECK(rep.constants.at("c2_raw") ==
        doctest::Approx(std::sqrt(2.0 * kPi)).epsilon(1e-4));
  // 1 - |symbol| <= |1 - symbol| pointwise, so c1 <= c2; at t = 1/2 the
  // gap ratio is (2 - sqrt(2)) * sqrt(2) ~ 0.8284, an upper bound for the
  // infimum.
  CHECK(rep.constants.at("c1_raw") > 0.0);
  CHECK(rep.constants.at("c1_raw") <=
        (2.0 - std::sqrt(2.0)) * std::sqrt(2.0) + 1e-9);
  CHECK(rep.constants.at("c1_raw") <= rep.constants.at("c2_raw"));

  SymbolBounds b = estimate_bounds(nu, power_majorant(0.5), 1024);
  CHECK(b.valid);
  CHECK(b.c1 > 0.0);
  CHECK(b.c2 >= b.c1);
}

TEST_CASE("ritt trend for the pure shift grows linearly") {
  SignedMeasure shift = make_measure({{1, 1.0}});
  RittTrend tr = ritt_constant(shift, 64);
  REQUIRE(tr.n.size() == 64);
  for (std::size_t i = 0; i < tr.n.size(); ++i) {
    CHECK(tr.n[i] == static_cast<std::int64_t>(i) + 1);
    // mu^n - mu^{n+1} = delta_n - delta_{n+1}: total variation exactly 2.
    CHECK(tr.value[i] == 2.0 * static_cast<double>(i + 1));
    CHECK(tr.slack[i] == 0.0);
  }
  CHECK(tr.sup == 128.0);
  CHECK(tr.argmax == 64);
}

TEST_CASE("ritt trend for the lazy walk flattens out") {
  RittTrend tr = ritt_constant(lazy_walk_measure(), 256);
  CHECK(tr.sup > 0.3);
  CHECK(tr.sup < 2.0);
  // The normalized differences settle: the last value sits within 5% of
  // the value at half the horizon.
  double a = tr.value[127];
  double b = tr.value[255];
  CHECK(std::abs(b - a) <= 0.05 * a);
  // Truncation allowance shows up in the slack channel.
  RittTrend tr2 = ritt_constant(lazy_walk_measure(), 32, 1e-6);
  CHECK(tr2.slack.back() >= 0.0);
  CHECK(tr2.slack.back() <= 32 * 1e-6 + 1e-18);
}

TEST_CASE("capped quantity A matches a direct Riemann evaluation") {
  // Family capped at N = 8 for the lazy walk, alpha = 1, s = 3, m = 1:
  //   S(t) = (1 - psi) * (sum_{n<=8} n psi^{3n})^{1/3},  psi = cos^2(pi t)
  //   A = 2 * integral over (0, 1/2] of S(t)/t dt.
  // The integrand is smooth and vanishes linearly at 0, so a midpoint rule
  // on [2^-20, 1/2] (the quadrature window; below it only ~1e-11 of mass
  // remains) is an independent oracle.
  FourierSymbol lazy = closed_form_lazy_walk();
  CertificateReport rep = lemma_quantities(lazy, 1.0, 3.0, 1.0, 8, 1e-8);
  const QuantityReport* q = rep.find("A");
  REQUIRE(q != nullptr);
  CHECK(!q->diverged);
  CHECK(q->converged);

  const double lo = 0x1p-20;
  const double hi = 0.5;
  const std::int64_t M = 400000;
  const double h = (hi - lo) / static_cast<double>(M);
  double acc = 0.0;
  for (std::int64_t i = 0; i < M; ++i) {
    double t = lo + (static_cast<double>(i) + 0.5) * h;
    double c = std::cos(kPi * t);
    double psi = c * c;
    double r = psi * psi * psi;
    double fam = 0.0, rp = r;
    for (int n = 1; n <= 8; ++n, rp *= r) fam += n * rp;
    acc += 2.0 / t * (1.0 - psi) * std::cbrt(fam);
  }
  double brute = acc * h;
  CHECK(q->value == doctest::Approx(brute).epsilon(1e-4));
  CHECK(q->tail < 1e-8 * brute);
}

TEST_CASE("one-sided support zeroes the origin mass") {
  FourierSymbol nu = closed_form_nu_alpha(0.5);
  CertificateReport rep = lemma_quantities(nu, 1.0, 3.0, 1.0, 16, 1e-6);
  const QuantityReport* e = rep.find("E");
  REQUIRE(e != nullptr);
  CHECK(e->value == 0.0);
  CHECK(e->tail == 0.0);
  CHECK(!e->diverged);
  CHECK(!e->note.empty());

  // The lazy walk charges both signs, so its E quantity is a genuine
  // positive integral.
  CertificateReport rep2 =
      lemma_quantities(closed_form_lazy_walk(), 1.0, 3.0, 1.0, 16, 1e-6);
  const QuantityReport* e2 = rep2.find("E");
  REQUIRE(e2 != nullptr);
  CHECK(e2->value > 0.0);
  CHECK(std::isfinite(e2->value));
}

TEST_CASE("full-family certificate is finite above the exponent threshold") {
  // alpha = 1, m = 1: s = 3 puts s*m = 3 above alpha + 1 = 2 and every
  // quantity must come out finite; at s = 1 the A integral genuinely
  // diverges like t^{-3/2} and the refinement-growth rule must say so.
  FourierSymbol nu = closed_form_nu_alpha(0.5);
  CertificateReport good = lemma_quantities(nu, 1.0, 3.0, 1.0, 0, 1e-6);
  for (const char* name : {"A", "B", "B_log", "C", "D", "E"}) {
    const QuantityReport* q = good.find(name);
    REQUIRE(q != nullptr);
    CHECK(!q->diverged);
    CHECK(std::isfinite(q->value));
    CHECK(std::isfinite(q->tail));
  }
  CHECK(good.route_integral);
  CHECK(good.route_log);

  CertificateReport bad = lemma_quantities(nu, 1.0, 1.0, 1.0, 0, 1e-6);
  const QuantityReport* a = bad.find("A");
  REQUIRE(a != nullptr);
  CHECK(a->diverged);
  CHECK(!bad.route_integral);
  CHECK(!bad.route_log);
}

TEST_CASE("gap certificate stays finite for the fractional walk") {
  FourierSymbol nu = closed_form_nu_alpha(0.5);
  GapSequence gaps = gap_subsequence(0.5, 256);
  CertificateReport rep = lemma_gap_quantities(nu, gaps, 0.0, 2.0, 1e-6);
  const QuantityReport* a = rep.find("A");
  REQUIRE(a != nullptr);
  CHECK(!a->diverged);
  CHECK(std::isfinite(a->value));
  const QuantityReport* e = rep.find("E");
  REQUIRE(e != nullptr);
  CHECK(e->value == 0.0);
}

TEST_CASE("certificate input validation") {
  FourierSymbol lazy = closed_form_lazy_walk();
  CHECK_THROWS_AS(lemma_quantities(lazy, 1.0, 0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(lemma_quantities(lazy, 1.0, 2.0, -1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(lemma_quantities(lazy, -1.5, 2.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(lemma_quantities(lazy, 1.0, 2.0, 1.0, 0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(lemma_quantities(lazy, 1.0, 2.0, 1.0, -1),
                  std::invalid_argument);
  CHECK_THROWS_AS(angular_ratio(lazy, 4), std::invalid_argument);
  GapSequence gaps = gap_subsequence(0.5, 64);
  CHECK_THROWS_AS(lemma_gap_quantities(lazy, gaps, -0.5, 2.0),
                  std::invalid_argument);
  GapSequence tiny;
  tiny.n = {4};
  CHECK_THROWS_AS(lemma_gap_quantities(lazy, tiny, 0.0, 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(ritt_constant(lazy_walk_measure(), 0),
                  std::invalid_argument);
}
