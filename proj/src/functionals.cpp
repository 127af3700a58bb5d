#include "rittlab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rittlab {

namespace {

void require_s(double s) {
  if (!(s >= 1.0))
    throw std::invalid_argument("functional: need s >= 1");
}

// Union of the supports of all terms; returns {0, -1} when every term is
// empty.
std::pair<std::int64_t, std::int64_t> support_range(const Trajectory& traj) {
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  for (const SpatialSequence& t : traj.terms) {
    if (t.empty()) continue;
    lo = std::min(lo, t.lo());
    hi = std::max(hi, t.hi());
  }
  if (lo > hi) return {0, -1};
  return {lo, hi};
}

// Max total chain weight sum |e_j - e_i|^s over increasing chains through
// the compressed extrema (single points count 0).
double chain_weight(const std::vector<double>& e, double s) {
  const std::size_t n = e.size();
  if (n < 2) return 0.0;
  std::vector<double> w(n, 0.0);
  double best = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    double wj = 0.0;
    for (std::size_t i = 0; i < j; ++i) {
      double cand = w[i] + std::pow(std::abs(e[j] - e[i]), s);
      if (cand > wj) wj = cand;
    }
    w[j] = wj;
    if (wj > best) best = wj;
  }
  return best;
}

// Compress to weak local extrema: first point, every direction change, last
// point. Flat steps are skipped.
std::vector<double> compress_extrema(std::span<const double> x) {
  std::vector<double> e;
  int dir = 0;
  for (double v : x) {
    if (e.empty()) {
      e.push_back(v);
      continue;
    }
    if (v == e.back()) continue;
    int d = v > e.back() ? 1 : -1;
    if (d == dir)
      e.back() = v;
    else
      e.push_back(v);
    dir = d;
  }
  return e;
}

}  // namespace

GapSequence gap_subsequence(double alpha, std::int64_t N_max,
                            std::int64_t n_first) {
  if (!(alpha >= 0.0) || alpha > 1.0)
    throw std::invalid_argument("gap_subsequence: need alpha in [0,1]");
  if (n_first < 1) throw std::invalid_argument("gap_subsequence: need n_first >= 1");
  GapSequence out;
  out.alpha = alpha;
  for (std::int64_t n = n_first; n <= N_max;) {
    out.n.push_back(n);
    std::int64_t step = std::max<std::int64_t>(
        1, std::llround(std::pow(static_cast<double>(n), alpha)));
    n += step;
  }
  return out;
}

FunctionalResult square_function(const Trajectory& traj, double alpha,
                                 double s) {
  require_s(s);
  FunctionalResult out;
  out.truncation_N = static_cast<int>(traj.terms.size());
  auto [lo, hi] = support_range(traj);
  if (lo > hi) return out;
  std::vector<double> acc(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (std::size_t i = 0; i < traj.terms.size(); ++i) {
    const SpatialSequence& t = traj.terms[i];
    double wn = std::pow(static_cast<double>(i + 1), alpha);
    for (std::int64_t site = t.lo(); site <= t.hi(); ++site) {
      double v = std::abs(t.at(site));
      if (v != 0.0)
        acc[static_cast<std::size_t>(site - lo)] += wn * std::pow(v, s);
    }
  }
  double l1 = 0.0;
  for (double& a : acc) {
    a = std::pow(a, 1.0 / s);
    l1 += a;
  }
  std::int64_t w = traj.terms.empty() ? SpatialSequence::kDefaultHalfwidth
                                      : traj.terms.front().max_halfwidth();
  out.pointwise = SpatialSequence(lo, std::move(acc), w);
  out.l1_norm = l1;
  return out;
}

FunctionalResult maximal_function(const Trajectory& traj, double alpha) {
  FunctionalResult out;
  out.truncation_N = static_cast<int>(traj.terms.size());
  auto [lo, hi] = support_range(traj);
  if (lo > hi) return out;
  std::vector<double> acc(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (std::size_t i = 0; i < traj.terms.size(); ++i) {
    const SpatialSequence& t = traj.terms[i];
    double wn = std::pow(static_cast<double>(i + 1), alpha);
    for (std::int64_t site = t.lo(); site <= t.hi(); ++site) {
      double v = wn * std::abs(t.at(site));
      std::size_t idx = static_cast<std::size_t>(site - lo);
      if (v > acc[idx]) acc[idx] = v;
    }
  }
  double l1 = 0.0;
  for (double a : acc) l1 += a;
  std::int64_t w = traj.terms.empty() ? SpatialSequence::kDefaultHalfwidth
                                      : traj.terms.front().max_halfwidth();
  out.pointwise = SpatialSequence(lo, std::move(acc), w);
  out.l1_norm = l1;
  return out;
}

double variation_norm(std::span<const double> x, double s) {
  require_s(s);
  if (x.size() < 2) return 0.0;
  std::vector<double> e = compress_extrema(x);
  return std::pow(chain_weight(e, s), 1.0 / s);
}

double oscillation_norm(std::span<const double> x,
                        std::span<const std::int64_t> cuts, double s) {
  require_s(s);
  if (cuts.empty()) throw std::invalid_argument("oscillation_norm: no cut points");
  const auto L = static_cast<std::int64_t>(x.size());
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    if (cuts[i] < 1 || cuts[i] > L)
      throw std::invalid_argument("oscillation_norm: cut out of range");
    if (i > 0 && cuts[i] <= cuts[i - 1])
      throw std::invalid_argument("oscillation_norm: cuts must increase");
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    std::int64_t a = cuts[k];
    std::int64_t b = k + 1 < cuts.size() ? cuts[k + 1] : L;
    double mn = x[static_cast<std::size_t>(a - 1)];
    double mx = mn;
    for (std::int64_t n = a; n <= b; ++n) {
      double v = x[static_cast<std::size_t>(n - 1)];
      mn = std::min(mn, v);
      mx = std::max(mx, v);
    }
    sum += std::pow(mx - mn, s);
  }
  return std::pow(sum, 1.0 / s);
}

FunctionalResult block_functional(const Trajectory& traj,
                                  const GapSequence& gaps, double beta,
                                  double s, BlockMode mode) {
  require_s(s);
  const auto N = static_cast<std::int64_t>(traj.terms.size());
  FunctionalResult out;
  out.truncation_N = static_cast<int>(N);
  if (gaps.n.size() < 2) throw std::invalid_argument("block_functional: need >= 2 gap points");
  auto [lo, hi] = support_range(traj);
  if (lo > hi) return out;

  // blocks [n_k, n_{k+1}] entirely within 1..N
  std::vector<std::pair<std::int64_t, std::int64_t>> blocks;
  for (std::size_t k = 0; k + 1 < gaps.n.size(); ++k)
    if (gaps.n[k + 1] <= N && gaps.n[k] >= 1)
      blocks.push_back({gaps.n[k], gaps.n[k + 1]});

  std::vector<double> acc(static_cast<std::size_t>(hi - lo + 1), 0.0);
  std::vector<double> slice;
  for (std::int64_t site = lo; site <= hi; ++site) {
    double total = 0.0;
    for (auto [a, b] : blocks) {
      double w = std::pow(static_cast<double>(a), beta * s);
      double va = traj.terms[static_cast<std::size_t>(a - 1)].at(site);
      double contrib = 0.0;
      switch (mode) {
        case BlockMode::kEndpointDiff: {
          double vb = traj.terms[static_cast<std::size_t>(b - 1)].at(site);
          contrib = std::pow(std::abs(va - vb), s);
          break;
        }
        case BlockMode::kBlockMax: {
          double mx = 0.0;
          for (std::int64_t n = a + 1; n <= b; ++n)
            mx = std::max(mx, std::abs(traj.terms[static_cast<std::size_t>(n - 1)].at(site) - va));
          contrib = std::pow(mx, s);
          break;
        }
        case BlockMode::kBlockVariation: {
          slice.clear();
          for (std::int64_t n = a; n <= b; ++n)
            slice.push_back(traj.terms[static_cast<std::size_t>(n - 1)].at(site));
          double v = variation_norm(slice, s);
          contrib = std::pow(v, s);
          break;
        }
      }
      total += w * contrib;
    }
    acc[static_cast<std::size_t>(site - lo)] = std::pow(total, 1.0 / s);
  }
  double l1 = 0.0;
  for (double a : acc) l1 += a;
  std::int64_t w = traj.terms.empty() ? SpatialSequence::kDefaultHalfwidth
                                      : traj.terms.front().max_halfwidth();
  out.pointwise = SpatialSequence(lo, std::move(acc), w);
  out.l1_norm = l1;
  return out;
}

void VariationAccumulator::push(double v) {
  if (!any_) {
    pts_.push_back(v);
    last_ = v;
    any_ = true;
    return;
  }
  if (v == last_) return;
  int d = v > last_ ? 1 : -1;
  if (d == dir_ && !pts_.empty())
    pts_.back() = v;
  else
    pts_.push_back(v);
  dir_ = d;
  last_ = v;
}

double VariationAccumulator::value(double s) const {
  require_s(s);
  return std::pow(chain_weight(pts_, s), 1.0 / s);
}

}  // namespace rittlab
