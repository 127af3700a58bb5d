#pragma once

#include <functional>

namespace rittlab {

struct QuadResult {
  double value = 0.0;
  double error_estimate = 0.0;
  bool converged = false;
  long evals = 0;
};

// Adaptive integration of f over [a, b] (0 < a < b) with an initial
// partition graded geometrically toward a, then bisection of the interval
// with the largest Gauss 7/15 discrepancy until the summed discrepancy is
// below rel_tol * |integral| (or abs_floor, whichever is larger).
//
// The grading matters: every integrand we feed this has its mass piled up
// against the left endpoint (weights like t^{-1} near 0), and a uniform
// initial partition stalls there.
QuadResult integrate_graded(const std::function<double(double)>& f, double a,
                            double b, double rel_tol = 1e-9,
                            double abs_floor = 0.0, int max_intervals = 4000);

}  // namespace rittlab
