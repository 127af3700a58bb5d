#pragma once

// Finitely supported signed measures on Z and dense windowed sequences.
// Measures act on sequences by (T_mu f)(x) = sum_k mu(k) f(x + k); the plain
// left shift is T_{delta_1}.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rittlab {

struct Atom {
    std::int64_t offset = 0;
    double weight = 0.0;
};

// Sorted atom list plus an l1 bound on everything that has been dropped
// (series truncation, convolution-power truncation). tail_bound is carried
// through the algebra so results stay honest about what they approximate.
class SignedMeasure {
  public:
    SignedMeasure() = default;
    SignedMeasure(std::vector<Atom> atoms, double tail_bound, std::string label);

    const std::vector<Atom>& atoms() const { return atoms_; }
    double tail_bound() const { return tail_bound_; }
    const std::string& label() const { return label_; }
    void set_label(std::string s) { label_ = std::move(s); }
    void set_tail_bound(double t);

    bool empty() const { return atoms_.empty(); }
    std::size_t size() const { return atoms_.size(); }
    std::int64_t min_offset() const;  // throws on empty
    std::int64_t max_offset() const;
    double at(std::int64_t offset) const;  // 0 when absent

    double total_variation() const;  // sum |weight|, tail excluded
    double total_mass() const;       // sum weight

  private:
    std::vector<Atom> atoms_;      // sorted by offset, weights nonzero
    double tail_bound_ = 0.0;
    std::string label_;
};

// Validates, sorts, drops exact zeros. Duplicate offsets or non-finite data
// are construction errors.
SignedMeasure make_measure(std::vector<Atom> atoms, double tail_bound = 0.0,
                           std::string label = {});

SignedMeasure delta_measure(std::int64_t offset = 0);
SignedMeasure lazy_walk_measure();  // 1/2 at 0, 1/4 at +-1

double total_variation(const SignedMeasure& mu);

SignedMeasure convolve(const SignedMeasure& a, const SignedMeasure& b);

// n-fold convolution power by repeated squaring. eps is a global l1 budget,
// split geometrically over the multiply steps (the final step may drop eps/2,
// the one before eps/4, ...); whatever is dropped is added to tail_bound.
SignedMeasure convolution_power(const SignedMeasure& mu, std::int64_t n, double eps = 0.0);

// Drops smallest-|weight| atoms while the removed mass stays <= eps; among
// equal |weight| the larger |offset| goes first. Removed mass joins tail_bound.
SignedMeasure truncate(const SignedMeasure& mu, double eps);

// Dense values on [lo, lo+size). Sites outside [-max_halfwidth, max_halfwidth]
// are clipped after each operation and their |mass| accrues to window_tail,
// together with the acting measure's tail_bound contribution, so window_tail
// is an l1 bound on the distance to the exact result.
class SpatialSequence {
  public:
    static constexpr std::int64_t kDefaultHalfwidth = std::int64_t{1} << 22;

    SpatialSequence() = default;
    SpatialSequence(std::int64_t lo, std::vector<double> values,
                    std::int64_t max_halfwidth = kDefaultHalfwidth);
    static SpatialSequence delta(std::int64_t site = 0,
                                 std::int64_t max_halfwidth = kDefaultHalfwidth);

    std::int64_t lo() const { return lo_; }
    std::int64_t hi() const { return lo_ + static_cast<std::int64_t>(values_.size()) - 1; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    double at(std::int64_t site) const;

    std::int64_t max_halfwidth() const { return max_halfwidth_; }
    void set_max_halfwidth(std::int64_t w);

    double window_tail() const { return window_tail_; }
    void add_window_tail(double extra);

    double l1_norm() const;
    double linf_norm() const;

    // drop margins with |value| <= threshold; dropped mass -> window_tail
    void compact(double threshold = 0.0);
    // greedily drop edge values (smaller side first) while their total
    // |mass| stays <= budget; dropped mass -> window_tail
    void trim_edges(double budget);
    // clip to [-max_halfwidth, max_halfwidth], clipped |mass| -> window_tail
    void clamp_to_window();

  private:
    std::int64_t lo_ = 0;
    std::vector<double> values_;
    std::int64_t max_halfwidth_ = kDefaultHalfwidth;
    double window_tail_ = 0.0;
};

// (T_mu f)(x) = sum_k mu(k) f(x+k). Result window inherits f's halfwidth.
SpatialSequence apply_to_sequence(const SignedMeasure& mu, const SpatialSequence& f);

SpatialSequence subtract(const SpatialSequence& a, const SpatialSequence& b);

// Text form: optional "# label ..." line, a "# tail_bound <v>" line, then one
// "offset weight" pair per line.
std::string to_text(const SignedMeasure& mu);
SignedMeasure measure_from_text(const std::string& text);
void save_measure(const SignedMeasure& mu, const std::string& path);
SignedMeasure load_measure(const std::string& path);

}  // namespace rittlab
