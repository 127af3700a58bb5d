#include "rittlab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

namespace rittlab {

namespace {

// Gauss-Legendre nodes/weights on [-1, 1], positive half (symmetric).
constexpr double kG7Node[] = {0.0, 0.4058451513773972, 0.7415311855993945,
                              0.9491079123427585};
constexpr double kG7Weight[] = {0.4179591836734694, 0.3818300505051189,
                                0.2797053914892766, 0.1294849661688697};

constexpr double kG15Node[] = {0.0,
                               0.2011940939974345,
                               0.3941513470775634,
                               0.5709721726085388,
                               0.7244177313601701,
                               0.8482065834104272,
                               0.9372733924007060,
                               0.9879925180204854};
constexpr double kG15Weight[] = {0.2025782419255613, 0.1984314853271116,
                                 0.1861610000155622, 0.1662692058169939,
                                 0.1395706779261543, 0.1071592204671719,
                                 0.0703660474881081, 0.0307532419961173};

struct Piece {
  double a, b;
  double g15;   // 15-point value
  double err;   // |g15 - g7|
};

Piece evaluate(const std::function<double(double)>& f, double a, double b,
               long* evals) {
  double half = 0.5 * (b - a);
  double mid = 0.5 * (a + b);
  double g7 = kG7Weight[0] * f(mid);
  for (int i = 1; i < 4; ++i) {
    double d = half * kG7Node[i];
    g7 += kG7Weight[i] * (f(mid - d) + f(mid + d));
  }
  g7 *= half;
  double g15 = kG15Weight[0] * f(mid);
  for (int i = 1; i < 8; ++i) {
    double d = half * kG15Node[i];
    g15 += kG15Weight[i] * (f(mid - d) + f(mid + d));
  }
  g15 *= half;
  *evals += 22;
  return Piece{a, b, g15, std::abs(g15 - g7)};
}

}  // namespace

QuadResult integrate_graded(const std::function<double(double)>& f, double a,
                            double b, double rel_tol, double abs_floor,
                            int max_intervals) {
  if (!(a > 0.0) || !(b > a)) throw std::invalid_argument("integrate_graded: need 0 < a < b");
  QuadResult out;

  auto cmp = [](const Piece& x, const Piece& y) { return x.err < y.err; };
  std::priority_queue<Piece, std::vector<Piece>, decltype(cmp)> pq(cmp);

  // Geometric breakpoints a, 2a, 4a, ... toward b.
  std::vector<double> cuts{a};
  for (double t = 2.0 * a; t < b; t *= 2.0) cuts.push_back(t);
  cuts.push_back(b);
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Piece p = evaluate(f, cuts[i], cuts[i + 1], &out.evals);
    total += p.g15;
    total_err += p.err;
    pq.push(p);
  }

  int intervals = static_cast<int>(cuts.size()) - 1;
  while (total_err > std::max(rel_tol * std::abs(total), abs_floor) &&
         intervals < max_intervals) {
    Piece worst = pq.top();
    pq.pop();
    double mid = 0.5 * (worst.a + worst.b);
    Piece left = evaluate(f, worst.a, mid, &out.evals);
    Piece right = evaluate(f, mid, worst.b, &out.evals);
    total += left.g15 + right.g15 - worst.g15;
    total_err += left.err + right.err - worst.err;
    pq.push(left);
    pq.push(right);
    ++intervals;
  }

  out.value = total;
  out.error_estimate = total_err;
  out.converged =
      total_err <= std::max(rel_tol * std::abs(total), abs_floor);
  return out;
}

}  // namespace rittlab
