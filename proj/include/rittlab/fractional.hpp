#pragma once

#include <cstdint>
#include <vector>

#include "rittlab/measure.hpp"

namespace rittlab {

// Coefficients g(alpha, k) = alpha |alpha-1| ... |alpha-k+1| / k! for
// k = 1..K, alpha in (0,1]. All nonnegative; they sum to 1 over k >= 1.
struct FracCoefficients {
  double alpha = 0.0;
  std::vector<double> g;     // g[k-1] holds g(alpha, k)
  double partial_sum = 0.0;  // sum of the stored coefficients
  double tail = 0.0;         // 1 - partial_sum (exact remainder, >= 0)
};

// Computed by the first-order recursion g(alpha,1) = alpha,
// g(alpha,k+1) = g(alpha,k) * (k - alpha) / (k + 1).
FracCoefficients frac_coeff(double alpha, std::int64_t K);

// Upper bound for the remainder sum_{k>K} g(alpha,k), derived from the
// closed form of the partial sums: tail(K) = g(alpha,K) * K / alpha... the
// identity sum_{k>K} g = g(alpha,K)*(K-alpha)/alpha holds exactly, and this
// returns it.
double frac_tail(double alpha, std::int64_t K);

// Smallest K with frac_tail(alpha,K) <= eps, capped at K_cap.
std::int64_t frac_K_for(double alpha, double eps, std::int64_t K_cap);

// One-sided fractional measure: atoms g(alpha,k) at offsets +k for k <= K;
// the discarded remainder goes into tail_bound. Weights below drop_below
// are additionally truncated (mass-tracked).
SignedMeasure nu_alpha_measure(double alpha, std::int64_t K,
                               double drop_below = 0.0);

// (delta_0 - mu)^{* p} * (delta_0 - sum_k g(beta,k) mu^{* k}) for
// m = p + beta, p integer >= 0, beta in [0,1). Integer m is exact; a
// fractional part expands the series until its measure-side tail is <= eps
// (at most K_cap terms — the realized tail lands in tail_bound either way).
SignedMeasure difference_measure(const SignedMeasure& mu, double m,
                                 std::int64_t K_cap = 1 << 12,
                                 double eps = 1e-12);

// Materialized orbit: seed = (I - T_mu)^m f and terms[n-1] = T_mu^n seed
// for n = 1..N, each step one convolution. error_budget[n-1] is the
// accumulated window/tail slack of terms[n-1] (an upper bound on the l1
// distance to the untruncated value).
struct Trajectory {
  double m = 0.0;
  SpatialSequence seed{0, {0.0}};
  std::vector<SpatialSequence> terms;
  std::vector<double> error_budget;
};

Trajectory trajectory(const SignedMeasure& mu, double m,
                      const SpatialSequence& f, int N, double eps = 0.0);

// Streaming form of the same orbit: holds only the current term. The
// kernel spectrum is cached, so each advance() costs one forward and one
// inverse transform (or a direct pass when small). compact_budget is the
// total l1 mass the stream may shave off array edges across all steps.
class TrajectoryStream {
 public:
  TrajectoryStream(const SignedMeasure& mu, double m, SpatialSequence f,
                   int N_hint = 4096, double compact_budget = 0.0);
  ~TrajectoryStream();
  TrajectoryStream(const TrajectoryStream&) = delete;
  TrajectoryStream& operator=(const TrajectoryStream&) = delete;

  const SpatialSequence& seed() const { return seed_; }
  const SpatialSequence& current() const { return current_; }
  std::int64_t n() const { return n_; }
  void advance();

 private:
  struct Engine;
  Engine* engine_ = nullptr;
  SpatialSequence seed_{0, {0.0}};
  SpatialSequence current_{0, {0.0}};
  std::int64_t n_ = 0;
  double per_step_budget_ = 0.0;
};

// Registry keys: "nu_alpha:<alpha>", "lazy_walk", "delta:<k>",
// "from_file:<path>". K and drop_below apply to the nu_alpha family.
SignedMeasure resolve_measure(const std::string& key, std::int64_t K = 1 << 14,
                              double drop_below = 0.0);

}  // namespace rittlab
