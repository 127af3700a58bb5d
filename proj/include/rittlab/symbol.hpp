#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rittlab/measure.hpp"

namespace rittlab {

// Value and first two derivatives of a symbol at one frequency.
struct SymbolValue {
  std::complex<double> value{0.0, 0.0};
  std::complex<double> d1{0.0, 0.0};
  std::complex<double> d2{0.0, 0.0};
};

// Power-law majorant h(t) = c * |t|^a used by the certificate conditions.
struct MajorantFunction {
  double a = 2.0;
  double c = 1.0;
  double value(double t) const;
  double deriv(double t) const;  // derivative of h at |t|, i.e. c*a*|t|^(a-1)
};

MajorantFunction power_majorant(double a, double c = 1.0);

// Frequencies closer than this (mod 1) to a singular point are refused by
// symbols whose derivatives blow up there.
inline constexpr double kSymbolCutoff = 0x1p-20;

// A 1-periodic symbol t -> mu-hat(t) with two derivatives. The convention
// throughout is mu-hat(t) = sum_k mu(k) e^{-2 pi i k t}.
class FourierSymbol {
 public:
  using Eval = std::function<SymbolValue(double)>;

  FourierSymbol() = default;
  FourierSymbol(Eval eval, std::string model, bool positive_support,
                std::vector<double> singular_points,
                double majorant_exponent, double min_abs_t = 0.0);

  // Throws std::domain_error when |t mod 1| < min_abs_t() (derivatives are
  // unbounded near the singular frequency; callers must stay outside the
  // cutoff or use the analytic majorants instead).
  SymbolValue operator()(double t) const;

  const std::string& model() const { return model_; }
  // True when every atom of the underlying measure sits at offset >= 1.
  bool positive_support() const { return positive_support_; }
  // Frequencies (mod 1) where the derivative formulas blow up.
  const std::vector<double>& singular_points() const {
    return singular_points_;
  }
  // Natural exponent a for the decay majorant 1 - |mu-hat| >~ |t|^a.
  double majorant_exponent() const { return majorant_exponent_; }
  // Lower evaluation cutoff around t = 0 (mod 1); 0 for smooth symbols.
  double min_abs_t() const { return min_abs_t_; }

 private:
  Eval eval_;
  std::string model_ = "zero";
  bool positive_support_ = false;
  std::vector<double> singular_points_;
  double majorant_exponent_ = 2.0;
  double min_abs_t_ = 0.0;
};

// Trigonometric-sum symbol of a finite measure; derivatives are exact.
FourierSymbol symbol_from_measure(const SignedMeasure& mu);

// Closed form for the fractional one-sided measure with parameter
// alpha in (0,1]: value 1 - (1 - e^{-2 pi i t})^alpha.
FourierSymbol closed_form_nu_alpha(double alpha);

// Closed form for the lazy walk (1/2) delta_0 + (1/4) delta_{-1} +
// (1/4) delta_{+1}: value cos^2(pi t), real.
FourierSymbol closed_form_lazy_walk();

// Symbol of prefactor * mu-hat(t)^n * (1 - mu-hat(t))^m built from the base
// symbol's value/d1/d2. n >= 0 integer, m >= 0 real (principal branch).
FourierSymbol delta_symbol(const FourierSymbol& base, std::int64_t n,
                           double m, double prefactor = 1.0);

// Registry keys: "nu_alpha:<alpha>", "lazy_walk", "from_file:<path>".
FourierSymbol resolve_symbol(const std::string& key);

}  // namespace rittlab
