#include "rittlab/measure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rittlab/convolution.hpp"

namespace rittlab {

namespace {

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

}  // namespace

SignedMeasure::SignedMeasure(std::vector<Atom> atoms, double tail_bound, std::string label)
    : atoms_(std::move(atoms)), tail_bound_(tail_bound), label_(std::move(label)) {}

void SignedMeasure::set_tail_bound(double t) {
    check_finite(t, "tail_bound");
    if (t < 0.0) throw std::invalid_argument("tail_bound must be >= 0");
    tail_bound_ = t;
}

std::int64_t SignedMeasure::min_offset() const {
    if (atoms_.empty()) throw std::logic_error("empty measure has no support");
    return atoms_.front().offset;
}

std::int64_t SignedMeasure::max_offset() const {
    if (atoms_.empty()) throw std::logic_error("empty measure has no support");
    return atoms_.back().offset;
}

double SignedMeasure::at(std::int64_t offset) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), offset,
                               [](const Atom& a, std::int64_t o) { return a.offset < o; });
    if (it != atoms_.end() && it->offset == offset) return it->weight;
    return 0.0;
}

double SignedMeasure::total_variation() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += std::abs(a.weight);
    return s;
}

double SignedMeasure::total_mass() const {
    double s = 0.0;
    for (const Atom& a : atoms_) s += a.weight;
    return s;
}

SignedMeasure make_measure(std::vector<Atom> atoms, double tail_bound, std::string label) {
    check_finite(tail_bound, "tail_bound");
    if (tail_bound < 0.0) throw std::invalid_argument("tail_bound must be >= 0");
    for (const Atom& a : atoms) check_finite(a.weight, "weight");
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.offset < b.offset; });
    for (std::size_t i = 1; i < atoms.size(); ++i) {
        if (atoms[i].offset == atoms[i - 1].offset)
            throw std::invalid_argument("duplicate offset in measure");
    }
    atoms.erase(std::remove_if(atoms.begin(), atoms.end(),
                               [](const Atom& a) { return a.weight == 0.0; }),
                atoms.end());
    return SignedMeasure(std::move(atoms), tail_bound, std::move(label));
}

SignedMeasure delta_measure(std::int64_t offset) {
    return make_measure({{offset, 1.0}}, 0.0, "delta");
}

SignedMeasure lazy_walk_measure() {
    return make_measure({{-1, 0.25}, {0, 0.5}, {1, 0.25}}, 0.0, "lazy_walk");
}

double total_variation(const SignedMeasure& mu) { return mu.total_variation(); }

SignedMeasure convolve(const SignedMeasure& a, const SignedMeasure& b) {
    if (a.empty() || b.empty()) {
        double tail = a.tail_bound() * (b.total_variation() + b.tail_bound()) +
                      b.tail_bound() * a.total_variation();
        return SignedMeasure({}, tail, {});
    }
    const std::int64_t alo = a.min_offset(), blo = b.min_offset();
    std::vector<double> da(static_cast<std::size_t>(a.max_offset() - alo + 1), 0.0);
    std::vector<double> db(static_cast<std::size_t>(b.max_offset() - blo + 1), 0.0);
    for (const Atom& at : a.atoms()) da[static_cast<std::size_t>(at.offset - alo)] = at.weight;
    for (const Atom& at : b.atoms()) db[static_cast<std::size_t>(at.offset - blo)] = at.weight;
    std::vector<double> dc = conv_dense(da, db);
    std::vector<Atom> atoms;
    atoms.reserve(dc.size());
    for (std::size_t i = 0; i < dc.size(); ++i) {
        if (dc[i] != 0.0) atoms.push_back({alo + blo + static_cast<std::int64_t>(i), dc[i]});
    }
    // |a*b - exact| <= tail_a (TV_b + tail_b) + tail_b TV_a
    double tail = a.tail_bound() * (b.total_variation() + b.tail_bound()) +
                  b.tail_bound() * a.total_variation();
    return SignedMeasure(std::move(atoms), tail, {});
}

SignedMeasure truncate(const SignedMeasure& mu, double eps) {
    check_finite(eps, "eps");
    if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
    if (eps == 0.0 || mu.empty()) return mu;
    std::vector<std::size_t> idx(mu.size());
    std::iota(idx.begin(), idx.end(), 0);
    const auto& atoms = mu.atoms();
    std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        const double wi = std::abs(atoms[i].weight), wj = std::abs(atoms[j].weight);
        if (wi != wj) return wi < wj;
        const std::int64_t oi = std::abs(atoms[i].offset), oj = std::abs(atoms[j].offset);
        if (oi != oj) return oi > oj;  // equal |weight|: larger |offset| goes first
        return atoms[i].offset < atoms[j].offset;
    });
    std::vector<bool> drop(mu.size(), false);
    double dropped = 0.0;
    for (std::size_t i : idx) {
        const double w = std::abs(atoms[i].weight);
        if (dropped + w <= eps) {
            dropped += w;
            drop[i] = true;
        } else {
            break;  // ordering is by |weight|, nothing later fits either
        }
    }
    if (dropped == 0.0) return mu;
    std::vector<Atom> kept;
    kept.reserve(mu.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (!drop[i]) kept.push_back(atoms[i]);
    }
    return SignedMeasure(std::move(kept), mu.tail_bound() + dropped, mu.label());
}

SignedMeasure convolution_power(const SignedMeasure& mu, std::int64_t n, double eps) {
    if (n < 0) throw std::invalid_argument("convolution power needs n >= 0");
    check_finite(eps, "eps");
    if (eps < 0.0) throw std::invalid_argument("eps must be >= 0");
    if (n == 0) return delta_measure(0);
    if (n == 1) return mu;

    // count multiply steps of the square-and-multiply ladder so the budget can
    // be split geometrically with the final step getting eps/2
    int steps = 0;
    for (std::int64_t m = n; m > 1; m >>= 1) {
        ++steps;                  // squaring
        if (m & 1) ++steps;       // trailing multiply
    }
    int step_index = 0;
    auto step_budget = [&]() {
        ++step_index;
        return eps * std::ldexp(1.0, step_index - steps - 1);  // eps * 2^(i-steps-1)
    };

    // process bits of n from the top
    int top = 63;
    while (((n >> top) & 1) == 0) --top;
    SignedMeasure acc = mu;
    for (int b = top - 1; b >= 0; --b) {
        acc = truncate(convolve(acc, acc), step_budget());
        if ((n >> b) & 1) acc = truncate(convolve(acc, mu), step_budget());
    }
    acc.set_label(mu.label());
    return acc;
}

SpatialSequence::SpatialSequence(std::int64_t lo, std::vector<double> values,
                                 std::int64_t max_halfwidth)
    : lo_(lo), values_(std::move(values)), max_halfwidth_(max_halfwidth) {
    if (max_halfwidth_ <= 0) throw std::invalid_argument("max_halfwidth must be > 0");
    for (double v : values_) check_finite(v, "value");
    clamp_to_window();
}

SpatialSequence SpatialSequence::delta(std::int64_t site, std::int64_t max_halfwidth) {
    return SpatialSequence(site, {1.0}, max_halfwidth);
}

double SpatialSequence::at(std::int64_t site) const {
    if (site < lo_ || site > hi()) return 0.0;
    return values_[static_cast<std::size_t>(site - lo_)];
}

void SpatialSequence::set_max_halfwidth(std::int64_t w) {
    if (w <= 0) throw std::invalid_argument("max_halfwidth must be > 0");
    max_halfwidth_ = w;
    clamp_to_window();
}

void SpatialSequence::add_window_tail(double extra) {
    check_finite(extra, "window_tail");
    if (extra < 0.0) throw std::invalid_argument("window_tail increment must be >= 0");
    window_tail_ += extra;
}

double SpatialSequence::l1_norm() const {
    double s = 0.0;
    for (double v : values_) s += std::abs(v);
    return s;
}

double SpatialSequence::linf_norm() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
}

void SpatialSequence::compact(double threshold) {
    std::size_t b = 0, e = values_.size();
    double dropped = 0.0;
    while (b < e && std::abs(values_[b]) <= threshold) dropped += std::abs(values_[b++]);
    while (e > b && std::abs(values_[e - 1]) <= threshold) dropped += std::abs(values_[--e]);
    window_tail_ += dropped;
    if (b == 0 && e == values_.size()) return;
    if (b >= e) {
        lo_ = 0;
        values_.clear();
        return;
    }
    lo_ += static_cast<std::int64_t>(b);
    values_.assign(values_.begin() + static_cast<std::ptrdiff_t>(b),
                   values_.begin() + static_cast<std::ptrdiff_t>(e));
}

void SpatialSequence::trim_edges(double budget) {
    if (budget <= 0.0) {
        compact(0.0);
        return;
    }
    std::size_t b = 0, e = values_.size();
    double spent = 0.0;
    while (e - b > 1) {
        double left = std::abs(values_[b]);
        double right = std::abs(values_[e - 1]);
        double next = std::min(left, right);
        if (spent + next > budget) break;
        spent += next;
        if (left <= right) ++b; else --e;
    }
    window_tail_ += spent;
    if (b > 0 || e < values_.size()) {
        lo_ += static_cast<std::int64_t>(b);
        values_.assign(values_.begin() + static_cast<std::ptrdiff_t>(b),
                       values_.begin() + static_cast<std::ptrdiff_t>(e));
    }
    compact(0.0);
}

void SpatialSequence::clamp_to_window() {
    if (values_.empty()) return;
    const std::int64_t w = max_halfwidth_;
    double clipped = 0.0;
    if (lo_ < -w) {
        const std::int64_t cut = std::min<std::int64_t>(-w - lo_,
                                                        static_cast<std::int64_t>(values_.size()));
        for (std::int64_t i = 0; i < cut; ++i) clipped += std::abs(values_[static_cast<std::size_t>(i)]);
        values_.erase(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(cut));
        lo_ += cut;
    }
    if (!values_.empty() && hi() > w) {
        const std::int64_t cut = std::min<std::int64_t>(hi() - w,
                                                        static_cast<std::int64_t>(values_.size()));
        for (std::int64_t i = 0; i < cut; ++i)
            clipped += std::abs(values_[values_.size() - 1 - static_cast<std::size_t>(i)]);
        values_.resize(values_.size() - static_cast<std::size_t>(cut));
    }
    if (values_.empty()) lo_ = 0;
    window_tail_ += clipped;
}

SpatialSequence apply_to_sequence(const SignedMeasure& mu, const SpatialSequence& f) {
    if (mu.empty() || f.empty()) {
        SpatialSequence out(0, {}, f.max_halfwidth());
        out.add_window_tail(mu.total_variation() * f.window_tail() +
                            mu.tail_bound() * (f.l1_norm() + f.window_tail()));
        return out;
    }
    // out(x) = sum_k mu(k) f(x+k) = correlation; densify mu reversed
    const std::int64_t kmin = mu.min_offset(), kmax = mu.max_offset();
    std::vector<double> g(static_cast<std::size_t>(kmax - kmin + 1), 0.0);
    for (const Atom& a : mu.atoms())
        g[static_cast<std::size_t>(kmax - a.offset)] = a.weight;  // reversed
    std::vector<double> vals = conv_dense(g, f.values());
    // index i of vals corresponds to site lo_f - kmax + i
    SpatialSequence out(f.lo() - kmax, std::move(vals), f.max_halfwidth());
    out.add_window_tail(mu.total_variation() * f.window_tail() +
                        mu.tail_bound() * (f.l1_norm() + f.window_tail()));
    return out;
}

SpatialSequence subtract(const SpatialSequence& a, const SpatialSequence& b) {
    if (a.empty() && b.empty()) {
        SpatialSequence out(0, {}, std::min(a.max_halfwidth(), b.max_halfwidth()));
        out.add_window_tail(a.window_tail() + b.window_tail());
        return out;
    }
    const std::int64_t lo = a.empty() ? b.lo() : (b.empty() ? a.lo() : std::min(a.lo(), b.lo()));
    const std::int64_t hi = a.empty() ? b.hi() : (b.empty() ? a.hi() : std::max(a.hi(), b.hi()));
    std::vector<double> v(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (std::int64_t x = lo; x <= hi; ++x)
        v[static_cast<std::size_t>(x - lo)] = a.at(x) - b.at(x);
    SpatialSequence out(lo, std::move(v), std::min(a.max_halfwidth(), b.max_halfwidth()));
    out.add_window_tail(a.window_tail() + b.window_tail());
    return out;
}

std::string to_text(const SignedMeasure& mu) {
    std::ostringstream os;
    os.precision(17);
    if (!mu.label().empty()) os << "# label " << mu.label() << "\n";
    os << "# tail_bound " << mu.tail_bound() << "\n";
    for (const Atom& a : mu.atoms()) os << a.offset << " " << a.weight << "\n";
    return os.str();
}

SignedMeasure measure_from_text(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    std::vector<Atom> atoms;
    double tail = 0.0;
    std::string label;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream ls(line.substr(1));
            std::string key;
            ls >> key;
            if (key == "tail_bound") {
                if (!(ls >> tail)) throw std::invalid_argument("bad tail_bound line");
            } else if (key == "label") {
                std::getline(ls, label);
                const auto pos = label.find_first_not_of(" \t");
                label = pos == std::string::npos ? std::string{} : label.substr(pos);
            }
            continue;
        }
        std::istringstream ls(line);
        Atom a;
        if (!(ls >> a.offset >> a.weight))
            throw std::invalid_argument("bad measure line: " + line);
        atoms.push_back(a);
    }
    return make_measure(std::move(atoms), tail, std::move(label));
}

void save_measure(const SignedMeasure& mu, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << to_text(mu);
}

SignedMeasure load_measure(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return measure_from_text(ss.str());
}

}  // namespace rittlab
