#include "rittlab/symbol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace rittlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using cplx = std::complex<double>;

// z^e with explicit handling of z == 0 (std::pow of a complex zero can
// produce NaNs depending on the branch taken).
cplx cpow_real(cplx z, double e) {
  if (e == 0.0) return {1.0, 0.0};
  if (z == cplx{0.0, 0.0}) {
    if (e > 0.0) return {0.0, 0.0};
    return {std::numeric_limits<double>::infinity(), 0.0};
  }
  return std::pow(z, e);
}

cplx cpow_int(cplx z, std::int64_t k) {
  return cpow_real(z, static_cast<double>(k));
}

}  // namespace

double MajorantFunction::value(double t) const {
  return c * std::pow(std::abs(t), a);
}

double MajorantFunction::deriv(double t) const {
  return c * a * std::pow(std::abs(t), a - 1.0);
}

MajorantFunction power_majorant(double a, double c) {
  if (!(a > 0.0) || !(c > 0.0))
    throw std::invalid_argument("power_majorant: need a > 0, c > 0");
  return MajorantFunction{a, c};
}

FourierSymbol::FourierSymbol(Eval eval, std::string model,
                             bool positive_support,
                             std::vector<double> singular_points,
                             double majorant_exponent, double min_abs_t)
    : eval_(std::move(eval)),
      model_(std::move(model)),
      positive_support_(positive_support),
      singular_points_(std::move(singular_points)),
      majorant_exponent_(majorant_exponent),
      min_abs_t_(min_abs_t) {}

SymbolValue FourierSymbol::operator()(double t) const {
  if (min_abs_t_ > 0.0) {
    double r = t - std::round(t);  // representative in [-1/2, 1/2]
    if (std::abs(r) < min_abs_t_)
      throw std::domain_error(
          "FourierSymbol: |t| below the evaluation cutoff " +
          std::to_string(min_abs_t_) + " for model '" + model_ + "'");
  }
  return eval_(t);
}

FourierSymbol symbol_from_measure(const SignedMeasure& mu) {
  std::vector<Atom> atoms = mu.atoms();
  bool positive = !atoms.empty();
  for (const Atom& a : atoms)
    if (a.offset < 1) positive = false;
  auto eval = [atoms](double t) {
    SymbolValue out;
    for (const Atom& a : atoms) {
      double theta = -kTwoPi * static_cast<double>(a.offset) * t;
      cplx e{std::cos(theta), std::sin(theta)};
      cplx ik{0.0, -kTwoPi * static_cast<double>(a.offset)};
      out.value += a.weight * e;
      out.d1 += a.weight * ik * e;
      out.d2 += a.weight * ik * ik * e;
    }
    return out;
  };
  return FourierSymbol(eval, "finite_sum", positive, {}, 2.0);
}

FourierSymbol closed_form_nu_alpha(double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("closed_form_nu_alpha: need alpha in (0,1]");
  auto eval = [alpha](double t) {
    double theta = -kTwoPi * t;
    cplx w{std::cos(theta), std::sin(theta)};
    cplx u = cplx{1.0, 0.0} - w;         // Re(u) >= 0: principal power is safe
    cplx du = cplx{0.0, kTwoPi} * w;
    cplx ddu = cplx{kTwoPi * kTwoPi, 0.0} * w;
    SymbolValue out;
    out.value = cplx{1.0, 0.0} - cpow_real(u, alpha);
    out.d1 = -alpha * cpow_real(u, alpha - 1.0) * du;
    out.d2 = -alpha * ((alpha - 1.0) * cpow_real(u, alpha - 2.0) * du * du +
                       cpow_real(u, alpha - 1.0) * ddu);
    return out;
  };
  std::vector<double> sing;
  if (alpha < 1.0) sing.push_back(0.0);
  double cutoff = alpha < 1.0 ? kSymbolCutoff : 0.0;
  return FourierSymbol(eval, "nu_alpha", true, sing, alpha, cutoff);
}

FourierSymbol closed_form_lazy_walk() {
  auto eval = [](double t) {
    SymbolValue out;
    double th = kTwoPi * t;
    out.value = 0.5 + 0.5 * std::cos(th);
    out.d1 = -std::numbers::pi * std::sin(th);
    out.d2 = -0.5 * kTwoPi * kTwoPi * std::cos(th);
    return out;
  };
  return FourierSymbol(eval, "lazy_walk", false, {}, 2.0);
}

FourierSymbol delta_symbol(const FourierSymbol& base, std::int64_t n,
                           double m, double prefactor) {
  if (n < 0) throw std::invalid_argument("delta_symbol: need n >= 0");
  if (m < 0.0) throw std::invalid_argument("delta_symbol: need m >= 0");
  auto eval = [base_eval = base, n, m, prefactor](double t) {
    SymbolValue b = base_eval(t);
    cplx psi = b.value, dpsi = b.d1, ddpsi = b.d2;
    cplx u = cplx{1.0, 0.0} - psi;
    double dn = static_cast<double>(n);

    cplx um = cpow_real(u, m);
    cplx um1 = cpow_real(u, m - 1.0);
    cplx pn = cpow_int(psi, n);
    cplx pn1 = n >= 1 ? cpow_int(psi, n - 1) : cplx{0.0, 0.0};

    SymbolValue out;
    out.value = prefactor * pn * um;

    cplx d1{0.0, 0.0};
    if (n >= 1) d1 += dn * pn1 * dpsi * um;
    if (m != 0.0) d1 -= m * pn * dpsi * um1;
    out.d1 = prefactor * d1;

    cplx d2{0.0, 0.0};
    if (n >= 2)
      d2 += dn * (dn - 1.0) * cpow_int(psi, n - 2) * dpsi * dpsi * um;
    if (n >= 1) {
      d2 += dn * pn1 * ddpsi * um;
      if (m != 0.0) d2 -= 2.0 * dn * m * pn1 * dpsi * dpsi * um1;
    }
    if (m != 0.0) {
      d2 -= m * pn * ddpsi * um1;
      if (m != 1.0)
        d2 += m * (m - 1.0) * pn * dpsi * dpsi * cpow_real(u, m - 2.0);
    }
    out.d2 = prefactor * d2;
    return out;
  };

  std::vector<double> sing = base.singular_points();
  bool m_fractional = m != std::floor(m);
  if (m_fractional) {
    bool has_zero = false;
    for (double t : sing) has_zero = has_zero || t == 0.0;
    if (!has_zero) sing.push_back(0.0);
  }
  double cutoff = base.min_abs_t();
  if (m_fractional) cutoff = std::max(cutoff, kSymbolCutoff);
  return FourierSymbol(eval, "composite", base.positive_support(), sing,
                       base.majorant_exponent(), cutoff);
}

FourierSymbol resolve_symbol(const std::string& key) {
  if (key == "lazy_walk") return closed_form_lazy_walk();
  if (key.rfind("nu_alpha:", 0) == 0)
    return closed_form_nu_alpha(std::stod(key.substr(9)));
  if (key.rfind("from_file:", 0) == 0)
    return symbol_from_measure(load_measure(key.substr(10)));
  throw std::invalid_argument("resolve_symbol: unknown key '" + key + "'");
}

}  // namespace rittlab
