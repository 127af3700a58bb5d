#include "rittlab/series.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace rittlab {

namespace {

bool is_integer(double p) {
  return p == std::floor(p) && std::abs(p) < 1e9;
}

// Eulerian-number triangle row for n: A(n,0..n-1).
std::vector<double> eulerian_row(int n) {
  std::vector<double> row{1.0};
  for (int m = 2; m <= n; ++m) {
    std::vector<double> next(m, 0.0);
    for (int k = 0; k < m; ++k) {
      double left = (k > 0 && k - 1 < static_cast<int>(row.size()))
                        ? row[k - 1]
                        : 0.0;
      double here = (k < static_cast<int>(row.size())) ? row[k] : 0.0;
      next[k] = (m - k) * left + (k + 1) * here;
    }
    row = std::move(next);
  }
  return row;
}

PowerSum integer_power_sum(int p, double x) {
  PowerSum out;
  out.terms_used = 0;
  if (p == -1) {
    out.value = -std::log1p(-x);
    return out;
  }
  if (p == 0) {
    out.value = x / (1.0 - x);
    return out;
  }
  // sum n^p x^n = (sum_k A(p,k) x^{p-k}) / (1-x)^{p+1}
  std::vector<double> row = eulerian_row(p);
  double num = 0.0;
  for (int k = 0; k < p; ++k) num += row[k] * std::pow(x, p - k);
  out.value = num / std::pow(1.0 - x, p + 1);
  return out;
}

}  // namespace

PowerSum power_sum(double p, double x, double rel_tol) {
  if (!(x >= 0.0 && x < 1.0)) throw std::invalid_argument("power_sum: need 0 <= x < 1");
  if (p < -1.0) throw std::invalid_argument("power_sum: need p >= -1");
  if (x == 0.0) return {};
  if (is_integer(p)) return integer_power_sum(static_cast<int>(p), x);

  PowerSum out;
  double term_base = x;  // x^n
  double sum = 0.0;
  std::int64_t n = 0;
  const std::int64_t n_max = 200'000'000;
  while (true) {
    ++n;
    sum += std::pow(static_cast<double>(n), p) * term_base;
    // Tail after n: for p > 0, n'^p <= n^p e^{p (n'-n)/n} turns the tail
    // into a geometric series with ratio x e^{p/n}; for p < 0 the plain
    // ratio x works since n^p is decreasing.
    double ratio = p > 0.0 ? x * std::exp(p / static_cast<double>(n + 1)) : x;
    if (ratio < 1.0) {
      double next = std::pow(static_cast<double>(n + 1), p) * term_base * x;
      double tail = next / (1.0 - ratio);
      if (tail <= rel_tol * sum || n >= n_max) {
        out.value = sum;
        out.tail_bound = tail;
        out.terms_used = n;
        return out;
      }
    } else if (n >= n_max) {
      throw std::runtime_error("power_sum: did not converge");
    }
    term_base *= x;
    if (term_base == 0.0) {
      out.value = sum;
      out.tail_bound = 0.0;
      out.terms_used = n;
      return out;
    }
  }
}

double power_sum_envelope(double p) {
  static std::map<double, double> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;

  // The envelope (1-x)^{p+1} sum n^p x^n tends to Gamma(p+1) as x -> 1-;
  // scan a grid dense near 1 for any interior bump and keep the max of the
  // two. (For every integer p the closed forms show the sup is the limit.)
  double best = std::tgamma(p + 1.0);
  for (int j = 1; j <= 120; ++j) {
    double x = 1.0 - std::pow(10.0, -4.0 * j / 120.0);  // .9 down to 1-1e-4
    PowerSum ps = power_sum(p, x, 1e-8);
    double env = std::pow(1.0 - x, p + 1.0) * ps.upper();
    if (env > best) best = env;
  }
  for (int j = 1; j < 40; ++j) {
    double x = j / 40.0;
    PowerSum ps = power_sum(p, x, 1e-8);
    double env = std::pow(1.0 - x, p + 1.0) * ps.upper();
    if (env > best) best = env;
  }
  double padded = best * 1.05;
  cache[p] = padded;
  return padded;
}

double power_sum_upper(double p, double x) {
  if (!(x >= 0.0 && x < 1.0))
    throw std::invalid_argument("power_sum_upper: need 0 <= x < 1");
  if (x == 0.0) return 0.0;
  if (is_integer(p)) return integer_power_sum(static_cast<int>(p), x).value;
  if (1.0 - x > 1e-4) return power_sum(p, x, 1e-10).upper();
  return power_sum_envelope(p) * std::pow(1.0 - x, -(p + 1.0));
}

double log_log_slope(const double* levels, const double* values, int count) {
  if (count < 2) throw std::invalid_argument("log_log_slope: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < count; ++i) {
    if (!(levels[i] > 0.0) || !(values[i] > 0.0))
      throw std::invalid_argument("log_log_slope: need positive data");
    double lx = std::log(levels[i]);
    double ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double denom = count * sxx - sx * sx;
  return (count * sxy - sx * sy) / denom;
}

}  // namespace rittlab
