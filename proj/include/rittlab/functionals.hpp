#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rittlab/fractional.hpp"
#include "rittlab/measure.hpp"

namespace rittlab {

// Pointwise functional of an orbit plus its l1 norm. truncation_N is the
// number of orbit terms actually summed; tail_estimate, when available,
// bounds the l1 mass the cutoff discards (nullopt = no usable bound).
struct FunctionalResult {
  SpatialSequence pointwise{0, {0.0}};
  double l1_norm = 0.0;
  int truncation_N = 0;
  std::optional<double> tail_estimate;
};

// Strictly increasing positive integers n_1 < n_2 < ... with the spacing
// n_{k+1} = n_k + max(1, round(n_k^alpha)).
struct GapSequence {
  double alpha = 0.0;
  std::vector<std::int64_t> n;
};

GapSequence gap_subsequence(double alpha, std::int64_t N_max,
                            std::int64_t n_first = 1);

// ( sum_{n=1}^{N} n^alpha |terms[n]|^s )^{1/s} per site.
FunctionalResult square_function(const Trajectory& traj, double alpha,
                                 double s);

// sup_{1<=n<=N} n^alpha |terms[n]| per site.
FunctionalResult maximal_function(const Trajectory& traj, double alpha);

// Exact s-variation of a finite real sequence: the supremum of
// ( sum_j |x_{i_{j+1}} - x_{i_j}|^s )^{1/s} over increasing index chains.
// Requires s >= 1. Exhaustive over the (compressed) local extrema.
double variation_norm(std::span<const double> x, double s);

// Oscillation sum for cut points 1 <= m_1 < m_2 < ... (1-based positions
// into x, which represents indices 1..L): blocks are the inclusive ranges
// [m_k, m_{k+1}] plus the final [m_last, L]; each contributes
// (max - min over the block)^s.
double oscillation_norm(std::span<const double> x, std::span<const std::int64_t> cuts,
                        double s);

enum class BlockMode { kEndpointDiff, kBlockMax, kBlockVariation };

// Long-variation functionals along a gap subsequence, per site:
//   kEndpointDiff:   ( sum_k n_k^{beta s} |v(n_k) - v(n_{k+1})|^s )^{1/s}
//   kBlockMax:       same with sup_{n_k < n <= n_{k+1}} |v(n) - v(n_k)|
//   kBlockVariation: same with the s-variation of v over [n_k, n_{k+1}]
// where v(n) = terms[n] at the site. Blocks with n_{k+1} > N are dropped.
FunctionalResult block_functional(const Trajectory& traj,
                                  const GapSequence& gaps, double beta,
                                  double s, BlockMode mode);

// --- streaming accumulators (single pass over an orbit) ---------------

// s-variation of a streamed sequence: keeps only the compressed extrema
// seen so far; value() runs the exact chain search over them.
class VariationAccumulator {
 public:
  void push(double v);
  double value(double s) const;  // s-variation of everything pushed
  std::size_t kept() const { return pts_.size(); }

 private:
  std::vector<double> pts_;
  double last_ = 0.0;
  int dir_ = 0;  // sign of the last movement
  bool any_ = false;
};

}  // namespace rittlab
