#include "rittlab/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "rittlab/convolution.hpp"

namespace rittlab {

namespace {

bool near_integer(double m) {
  return std::abs(m - std::round(m)) < 1e-13;
}

SignedMeasure measure_from_map(const std::map<std::int64_t, double>& w,
                               double tail, std::string label) {
  std::vector<Atom> atoms;
  atoms.reserve(w.size());
  for (const auto& [k, v] : w)
    if (v != 0.0) atoms.push_back({k, v});
  return make_measure(std::move(atoms), tail, std::move(label));
}

}  // namespace

FracCoefficients frac_coeff(double alpha, std::int64_t K) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("frac_coeff: need alpha in (0,1]");
  if (K < 1) throw std::invalid_argument("frac_coeff: need K >= 1");
  FracCoefficients out;
  out.alpha = alpha;
  out.g.resize(static_cast<std::size_t>(K));
  double g = alpha;
  double sum = 0.0;
  for (std::int64_t k = 1; k <= K; ++k) {
    out.g[static_cast<std::size_t>(k - 1)] = g;
    sum += g;
    g *= (static_cast<double>(k) - alpha) / static_cast<double>(k + 1);
  }
  out.partial_sum = sum;
  out.tail = frac_tail(alpha, K);
  return out;
}

double frac_tail(double alpha, std::int64_t K) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("frac_tail: need alpha in (0,1]");
  if (K < 1) throw std::invalid_argument("frac_tail: need K >= 1");
  if (alpha == 1.0) return 0.0;
  double g = alpha;
  for (std::int64_t k = 1; k < K; ++k)
    g *= (static_cast<double>(k) - alpha) / static_cast<double>(k + 1);
  // telescoping the recursion gives sum_{k>K} g = g(alpha,K) (K-alpha)/alpha
  return g * (static_cast<double>(K) - alpha) / alpha;
}

std::int64_t frac_K_for(double alpha, double eps, std::int64_t K_cap) {
  if (!(eps > 0.0)) throw std::invalid_argument("frac_K_for: need eps > 0");
  if (alpha == 1.0) return 1;
  double g = alpha;
  for (std::int64_t k = 1; k <= K_cap; ++k) {
    double tail = g * (static_cast<double>(k) - alpha) / alpha;
    if (tail <= eps) return k;
    g *= (static_cast<double>(k) - alpha) / static_cast<double>(k + 1);
  }
  return K_cap;
}

SignedMeasure nu_alpha_measure(double alpha, std::int64_t K,
                               double drop_below) {
  FracCoefficients c = frac_coeff(alpha, K);
  std::vector<Atom> atoms;
  atoms.reserve(c.g.size());
  double dropped = 0.0;
  for (std::int64_t k = 1; k <= K; ++k) {
    double w = c.g[static_cast<std::size_t>(k - 1)];
    if (w < drop_below)
      dropped += w;
    else if (w != 0.0)
      atoms.push_back({k, w});
  }
  return make_measure(std::move(atoms), c.tail + dropped,
                      "nu_alpha:" + std::to_string(alpha));
}

SignedMeasure difference_measure(const SignedMeasure& mu, double m,
                                 std::int64_t K_cap, double eps) {
  if (m < 0.0) throw std::invalid_argument("difference_measure: need m >= 0");
  if (near_integer(m)) m = std::round(m);
  double p_real = std::floor(m);
  double beta = m - p_real;
  auto p = static_cast<std::int64_t>(p_real);

  // delta_0 - mu
  std::map<std::int64_t, double> base_w;
  base_w[0] = 1.0;
  for (const Atom& a : mu.atoms()) base_w[a.offset] -= a.weight;
  SignedMeasure base = measure_from_map(base_w, mu.tail_bound(), "");

  SignedMeasure integer_part =
      p > 0 ? convolution_power(base, p, beta > 0.0 ? eps / 2 : eps)
            : delta_measure(0);

  if (beta == 0.0) {
    integer_part.set_label("difference^" + std::to_string(p));
    return integer_part;
  }

  if (mu.total_variation() > 1.0 + 1e-12)
    throw std::invalid_argument(
        "difference_measure: fractional power needs total variation <= 1");

  std::int64_t K = frac_K_for(beta, eps / 2, K_cap);
  FracCoefficients c = frac_coeff(beta, K);
  double series_tail = c.tail;

  std::map<std::int64_t, double> frac_w;
  frac_w[0] = 1.0;
  SignedMeasure pk = mu;  // mu^{* k}
  double per_step = eps / (4.0 * static_cast<double>(K));
  for (std::int64_t k = 1; k <= K; ++k) {
    double g = c.g[static_cast<std::size_t>(k - 1)];
    for (const Atom& a : pk.atoms()) frac_w[a.offset] -= g * a.weight;
    series_tail += g * pk.tail_bound();
    if (k < K) pk = truncate(convolve(pk, mu), per_step);
  }
  SignedMeasure frac_part = measure_from_map(frac_w, series_tail, "");

  SignedMeasure out = p > 0 ? convolve(integer_part, frac_part) : frac_part;
  out.set_label("difference^" + std::to_string(m));
  return out;
}

Trajectory trajectory(const SignedMeasure& mu, double m,
                      const SpatialSequence& f, int N, double eps) {
  if (N < 0) throw std::invalid_argument("trajectory: need N >= 0");
  Trajectory out;
  out.m = m;
  SignedMeasure diff = difference_measure(mu, m);
  out.seed = apply_to_sequence(diff, f);
  out.seed.compact(0.0);
  out.terms.reserve(static_cast<std::size_t>(N));
  out.error_budget.reserve(static_cast<std::size_t>(N));
  SpatialSequence cur = out.seed;
  double per = N > 0 ? eps / N : 0.0;
  for (int n = 1; n <= N; ++n) {
    cur = apply_to_sequence(mu, cur);
    cur.trim_edges(per);
    out.terms.push_back(cur);
    out.error_budget.push_back(cur.window_tail());
  }
  return out;
}

struct TrajectoryStream::Engine {
  std::int64_t kmax = 0;
  double tv = 0.0;
  double mu_tail = 0.0;
  KernelConvolver conv;

  Engine(std::int64_t kmax_, double tv_, double tail_,
         std::vector<double> kernel)
      : kmax(kmax_), tv(tv_), mu_tail(tail_), conv(std::move(kernel)) {}
};

TrajectoryStream::TrajectoryStream(const SignedMeasure& mu, double m,
                                   SpatialSequence f, int N_hint,
                                   double compact_budget) {
  if (mu.empty()) throw std::invalid_argument("TrajectoryStream: empty measure");
  SignedMeasure diff = difference_measure(mu, m);
  seed_ = apply_to_sequence(diff, std::move(f));
  seed_.compact(0.0);
  current_ = seed_;
  per_step_budget_ = N_hint > 0 ? compact_budget / N_hint : 0.0;

  const std::int64_t kmin = mu.min_offset();
  const std::int64_t kmax = mu.max_offset();
  std::vector<double> kernel(static_cast<std::size_t>(kmax - kmin + 1), 0.0);
  for (const Atom& a : mu.atoms())
    kernel[static_cast<std::size_t>(kmax - a.offset)] = a.weight;
  engine_ = new Engine(kmax, mu.total_variation(), mu.tail_bound(),
                       std::move(kernel));
}

TrajectoryStream::~TrajectoryStream() { delete engine_; }

void TrajectoryStream::advance() {
  ++n_;
  if (current_.empty()) {
    double t = current_.window_tail();
    current_.add_window_tail(
        std::max(0.0, (engine_->tv + engine_->mu_tail - 1.0) * t));
    return;
  }
  const double f_l1 = current_.l1_norm();
  const double f_tail = current_.window_tail();
  std::vector<double> vals = engine_->conv.apply(current_.values());
  SpatialSequence next(current_.lo() - engine_->kmax, std::move(vals),
                       current_.max_halfwidth());
  next.add_window_tail(engine_->tv * f_tail +
                       engine_->mu_tail * (f_l1 + f_tail));
  next.trim_edges(per_step_budget_);
  current_ = std::move(next);
}

SignedMeasure resolve_measure(const std::string& key, std::int64_t K,
                              double drop_below) {
  if (key == "lazy_walk") return lazy_walk_measure();
  if (key.rfind("nu_alpha:", 0) == 0)
    return nu_alpha_measure(std::stod(key.substr(9)), K, drop_below);
  if (key.rfind("delta:", 0) == 0)
    return delta_measure(std::stoll(key.substr(6)));
  if (key.rfind("from_file:", 0) == 0) return load_measure(key.substr(10));
  throw std::invalid_argument("resolve_measure: unknown key '" + key + "'");
}

}  // namespace rittlab
