#pragma once

#include <cstdint>

namespace rittlab {

// Result of summing sum_{n>=1} n^p x^n for x in [0,1).
// `value` is a lower bound of the true sum, `value + tail_bound` an upper
// bound; exact closed forms report tail_bound = 0.
struct PowerSum {
  double value = 0.0;
  double tail_bound = 0.0;
  std::int64_t terms_used = 0;

  double upper() const { return value + tail_bound; }
};

// sum_{n>=1} n^p x^n for 0 <= x < 1 and p >= -1.
//
// Integer p uses the rational closed form (Eulerian-number numerator over
// (1-x)^{p+1}); p = -1 is -log(1-x). Non-integer exponents fall back to
// direct summation with a certified geometric tail majorant, stopping once
// the tail bound drops below rel_tol * partial_sum.
PowerSum power_sum(double p, double x, double rel_tol = 1e-12);

// sup_{0<=x<1} (1-x)^{p+1} * sum_{n>=1} n^p x^n, padded upward by 5%.
// Used to convert |mu-hat| <= 1 - c*h bounds into series bounds
// sum n^p |mu-hat|^n <= const / (c*h)^{p+1}. Values are cached per p.
double power_sum_envelope(double p);

// Certified upper bound for sum_{n>=1} n^p x^n that stays cheap for x
// arbitrarily close to 1: exact closed form for integer p, direct series
// while 1-x is moderate, the envelope bound power_sum_envelope(p)/(1-x)^{p+1}
// otherwise.
double power_sum_upper(double p, double x);

// Least-squares slope of log(value) against log(level). Inputs must be
// positive and the same length (>= 2). Used to report growth exponents of
// level tables.
double log_log_slope(const double* levels, const double* values, int count);

}  // namespace rittlab
