#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rittlab/functionals.hpp"
#include "rittlab/measure.hpp"
#include "rittlab/symbol.hpp"

namespace rittlab {

// Outcome of checking one symbol-side condition on a grid.
struct ConditionReport {
  std::string condition;
  bool holds = false;
  std::map<std::string, double> constants;  // fitted/checked constants
  double witness_t = 0.0;                   // a failing frequency, if any
  bool has_witness = false;
  int grid = 0;
  std::string note;
};

// sup over (0, 1/2] of |1 - mu-hat| / (1 - |mu-hat|), with grid refinement
// around the maximizer. holds = the sup is finite on the grid scales
// (ratio stable under refinement); constants["sup"] carries the value.
ConditionReport angular_ratio(const FourierSymbol& symbol, int grid = 4096);

// |mu-hat(t)| <= 1 - c1 h(t) and |mu-hat'(t)| <= c3 h(t)/|t| on (0, 1/2].
// c1 is fitted as the infimum of (1-|mu-hat|)/h over three nested grids
// and must stabilize; fails (holds=false) if the infimum drains to 0.
ConditionReport check_m1(const FourierSymbol& symbol,
                         const MajorantFunction& h, int grid = 4096);

// The five-part variant: in addition to the M1 bounds, |1 - mu-hat| <= c2 h,
// h' * |t| comparable to h, and |mu-hat''(t)| <= c4 h(t)/t^2. One report;
// constants c1..c4 and per-part booleans in `constants`.
ConditionReport check_m2(const FourierSymbol& symbol,
                         const MajorantFunction& h, int grid = 4096);

// Empirical symbol bounds on (0, 1/2], padded by 5%: used to build
// integrable majorants for the certificate tails near t = 0.
struct SymbolBounds {
  MajorantFunction h;
  double c1 = 0.0;  // 1 - |mu-hat(t)|  >= c1 * h(t)
  double c2 = 0.0;  // |1 - mu-hat(t)|  <= c2 * h(t)
  double c3 = 0.0;  // |mu-hat'(t)|     <= c3 * h(t) / |t|
  double c4 = 0.0;  // |mu-hat''(t)|    <= c4 * h(t) / t^2
  bool valid = false;
};

SymbolBounds estimate_bounds(const FourierSymbol& symbol,
                             const MajorantFunction& h, int grid = 4096);

// sup_n n * ||mu^{* n} - mu^{* (n+1)}||_1 over 1 <= n <= N, computed
// incrementally (one convolution per step).
struct RittTrend {
  std::vector<std::int64_t> n;
  std::vector<double> value;   // n * ||mu^n - mu^{n+1}||_1
  std::vector<double> slack;   // accumulated truncation allowance at n
  double sup = 0.0;
  std::int64_t argmax = 0;
};

RittTrend ritt_constant(const SignedMeasure& mu, std::int64_t N,
                        double eps = 0.0);

// One integral/series quantity of a certificate computation.
struct QuantityReport {
  std::string name;
  double value = 0.0;       // certified upper estimate when finite
  double tail = 0.0;        // bound on everything not captured in `value`
  bool diverged = false;    // integrable-majorant test failed, or the
                            // refinement levels keep growing
  bool converged = true;    // quadrature/series reached its tolerance
  double growth = 0.0;      // relative change across refinement levels
  std::string note;
};

struct CertificateReport {
  std::vector<QuantityReport> quantities;
  double alpha = 0.0, s = 1.0, m = 0.0, tol = 0.0;
  bool route_integral = false;  // A, B, C, D, E all finite
  bool route_log = false;       // A, B-log, C, E all finite
  const QuantityReport* find(const std::string& name) const;
};

// Quantities A, B, B_log, C, D, E for the family
// Delta_n(t) = n^{alpha/s} mu-hat(t)^n (1 - mu-hat(t))^m over n >= 1
// (N > 0 caps the family at n <= N; N = 0 sums the full family through
// closed-form series envelopes):
//   A      2 * integral over (0,1/2] of (1/t)  * ( sum_n |Delta_n|^s )^{1/s}
//   B      2 * integral of t                   * ( sum_n |Delta_n''|^s )^{1/s}
//   B_log  2 * integral of (1 + |log t|)       * ( sum_n |Delta_n'|^s )^{1/s}
//   C      sum_{k>=2} (1/k)   * ( sum_n |Delta_n(1/k)|^s )^{1/s}
//   D      sum_{k>=2} (1/k^3) * ( sum_n |Delta_n''(1/k)|^s )^{1/s}
//   E      l1-style bound on the mass the inverse transforms leave at the
//          origin, <= 2 * integral of ( sum_n |Delta_n|^s )^{1/s}; exactly 0
//          for positively supported measures (reported as such)
// Values are certified upper estimates: derivative families are majorized
// term-splitting-wise (triangle inequality in l^s), the singular window
// (0, t_min = 2^-20] is covered by analytic power bounds built from
// `bounds` (estimated from the symbol when not supplied), the rest by
// graded quadrature. alpha = -1 substitutes n^{-1} <= n^{sm/2 - 1} to keep
// the envelopes power-shaped. diverged follows the refinement-growth rule
// (last refinement level grew the quantity by > 10%).
CertificateReport lemma_quantities(const FourierSymbol& symbol, double alpha,
                                   double s, double m, std::int64_t N = 0,
                                   double tol = 1e-8,
                                   const SymbolBounds* bounds = nullptr);

// Same quantities for the gap-endpoint family
// Delta_k(t) = n_k^beta mu-hat^{n_k} (1 - mu-hat^{g_k}), g_k = n_{k+1}-n_k,
// k = 1..(#gaps - 1).
CertificateReport lemma_gap_quantities(const FourierSymbol& symbol,
                                       const GapSequence& gaps, double beta,
                                       double s, double tol = 1e-8,
                                       const SymbolBounds* bounds = nullptr);

}  // namespace rittlab
