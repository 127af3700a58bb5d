#include <cmath>
#include <complex>
#include <filesystem>
#include <stdexcept>

#include <doctest.h>

#include "rittlab/fractional.hpp"
#include "rittlab/measure.hpp"
#include "rittlab/symbol.hpp"

using namespace rittlab;
using cplx = std::complex<double>;

namespace {
double cdist(cplx a, cplx b) { return std::abs(a - b); }
}  // namespace

TEST_CASE("lazy walk: measure route equals cos^2(pi t)") {
  FourierSymbol closed = closed_form_lazy_walk();
  FourierSymbol fromm = symbol_from_measure(lazy_walk_measure());
  for (int i = 0; i < 101; ++i) {
    double t = -0.5 + i / 100.0;
    SymbolValue a = closed(t);
    SymbolValue b = fromm(t);
    double c = std::cos(M_PI * t);
    CHECK(cdist(a.value, cplx(c * c, 0.0)) < 1e-12);
    CHECK(cdist(a.value, b.value) < 1e-12);
    CHECK(cdist(a.d1, b.d1) < 1e-10);
    CHECK(cdist(a.d2, b.d2) < 1e-8);
  }
}

TEST_CASE("nu_alpha closed form vs truncated measure") {
  double alpha = 0.5;
  std::int64_t K = 1 << 12;
  FourierSymbol closed = closed_form_nu_alpha(alpha);
  SignedMeasure nu = nu_alpha_measure(alpha, K);
  FourierSymbol fromm = symbol_from_measure(nu);
  double slack = nu.tail_bound() + 1e-12;
  for (int i = 1; i <= 64; ++i) {
    double t = i / 129.0;  // avoids 0 and 1/2 exactly
    CHECK(cdist(closed(t).value, fromm(t).value) < slack);
  }
}

TEST_CASE("conjugate symmetry of real measures") {
  FourierSymbol sym = symbol_from_measure(nu_alpha_measure(0.7, 256));
  for (int i = 1; i <= 20; ++i) {
    double t = i / 43.0;
    SymbolValue p = sym(t), q = sym(-t);
    CHECK(cdist(q.value, std::conj(p.value)) < 1e-13);
    CHECK(cdist(q.d1, -std::conj(p.d1)) < 1e-10);
  }
}

TEST_CASE("symbol of a convolution is the product") {
  SignedMeasure a = lazy_walk_measure();
  SignedMeasure b = nu_alpha_measure(0.5, 64);
  FourierSymbol sa = symbol_from_measure(a);
  FourierSymbol sb = symbol_from_measure(b);
  FourierSymbol sc = symbol_from_measure(convolve(a, b));
  for (int i = 1; i <= 16; ++i) {
    double t = i / 37.0;
    CHECK(cdist(sc(t).value, sa(t).value * sb(t).value) < 1e-12);
  }
}

TEST_CASE("finite differences confirm the derivatives") {
  FourierSymbol sym = symbol_from_measure(lazy_walk_measure());
  double h = 1e-5;
  for (int i = 1; i <= 10; ++i) {
    double t = i / 23.0;
    cplx fd1 = (sym(t + h).value - sym(t - h).value) / (2.0 * h);
    cplx fd2 =
        (sym(t + h).value - 2.0 * sym(t).value + sym(t - h).value) / (h * h);
    SymbolValue v = sym(t);
    CHECK(cdist(v.d1, fd1) < 1e-5);
    CHECK(cdist(v.d2, fd2) < 1e-3);
  }
}

TEST_CASE("delta_symbol builds psi^n (1-psi)^m") {
  FourierSymbol base = closed_form_lazy_walk();
  FourierSymbol fam = delta_symbol(base, 8, 2.0, 3.0);
  for (int i = 1; i <= 12; ++i) {
    double t = i / 29.0;
    cplx psi = base(t).value;
    cplx want = 3.0 * std::pow(psi, 8) * std::pow(cplx(1.0, 0.0) - psi, 2);
    CHECK(cdist(fam(t).value, want) < 1e-12);
  }
}

TEST_CASE("delta_symbol derivatives by finite differences") {
  FourierSymbol base = closed_form_nu_alpha(0.5);
  FourierSymbol fam = delta_symbol(base, 4, 1.5);
  double h = 1e-6;
  for (int i = 1; i <= 8; ++i) {
    double t = 0.05 + i / 20.0;  // stay away from both singular ends
    if (t >= 0.49) break;
    cplx fd1 = (fam(t + h).value - fam(t - h).value) / (2.0 * h);
    CHECK(cdist(fam(t).d1, fd1) / std::max(1.0, std::abs(fd1)) < 1e-6);
    cplx fd2 =
        (fam(t + h).value - 2.0 * fam(t).value + fam(t - h).value) / (h * h);
    CHECK(cdist(fam(t).d2, fd2) / std::max(1.0, std::abs(fd2)) < 1e-4);
  }
}

TEST_CASE("singular symbols refuse the cutoff window") {
  FourierSymbol nu = closed_form_nu_alpha(0.5);
  CHECK(nu.min_abs_t() == doctest::Approx(kSymbolCutoff));
  CHECK_THROWS_AS(nu(1e-7), std::domain_error);
  CHECK_THROWS_AS(nu(1.0 + 1e-7), std::domain_error);  // mod 1
  CHECK_NOTHROW(nu(kSymbolCutoff));
  CHECK_NOTHROW(nu(0.5));

  // integer m keeps a smooth base smooth; fractional m does not
  FourierSymbol lazy = closed_form_lazy_walk();
  CHECK(lazy.min_abs_t() == 0.0);
  CHECK_NOTHROW(lazy(1e-12));
  CHECK(delta_symbol(lazy, 4, 2.0).min_abs_t() == 0.0);
  CHECK(delta_symbol(lazy, 4, 0.5).min_abs_t() ==
        doctest::Approx(kSymbolCutoff));
  CHECK(delta_symbol(nu, 4, 2.0).min_abs_t() ==
        doctest::Approx(kSymbolCutoff));
}

TEST_CASE("alpha = 1 collapses to the unit shift symbol") {
  FourierSymbol nu1 = closed_form_nu_alpha(1.0);
  for (int i = 0; i <= 10; ++i) {
    double t = -0.5 + i / 10.0;
    cplx want = std::exp(cplx(0.0, -2.0 * M_PI * t));
    CHECK(cdist(nu1(t).value, want) < 1e-12);
  }
}

TEST_CASE("symbol registry") {
  CHECK_NOTHROW(resolve_symbol("nu_alpha:0.5"));
  CHECK_NOTHROW(resolve_symbol("lazy_walk"));
  CHECK_THROWS_AS(resolve_symbol("unknown_model"), std::invalid_argument);

  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() / "rittlab_symbol_rt.txt";
  save_measure(lazy_walk_measure(), p.string());
  FourierSymbol sym = resolve_symbol("from_file:" + p.string());
  CHECK(std::abs(sym(0.25).value.real() - 0.5) < 1e-12);
  fs::remove(p);
}

TEST_CASE("power majorant") {
  MajorantFunction h = power_majorant(1.5, 2.0);
  CHECK(h.value(0.1) == doctest::Approx(2.0 * std::pow(0.1, 1.5)));
  CHECK(h.value(-0.1) == doctest::Approx(h.value(0.1)));
  CHECK(h.deriv(0.1) == doctest::Approx(3.0 * std::pow(0.1, 0.5)));
}
