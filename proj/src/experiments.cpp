#include "rittlab/experiments.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "rittlab/fractional.hpp"
#include "rittlab/functionals.hpp"
#include "rittlab/measure.hpp"
#include "rittlab/series.hpp"

namespace rittlab {

namespace {

using json = nlohmann::ordered_json;
using clock_type = std::chrono::steady_clock;

const char* const kProbeNames[] = {"main-theorem", "open-question",
                                   "corollary-sup", "variation",
                                   "longvar", "lp-square"};

bool known_probe(const std::string& p) {
  for (const char* n : kProbeNames)
    if (p == n) return true;
  return false;
}

int env_thread_count() {
  const char* s = std::getenv("RITTLAB_THREADS");
  if (s == nullptr) return 1;
  long v = std::strtol(s, nullptr, 10);
  if (v < 1) return 1;
  if (v > 64) return 64;
  return static_cast<int>(v);
}

// Run fn(0..count-1), across RITTLAB_THREADS workers when that helps.
template <typename Fn>
void for_each_index(std::size_t count, Fn&& fn) {
  std::size_t workers = std::min<std::size_t>(env_thread_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Portable uniform double in [-1, 1): identical streams on every platform,
// unlike std::uniform_real_distribution.
double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1p-53 * 2.0 - 1.0;
}

struct NamedInput {
  std::string name;
  SpatialSequence f;
};

std::vector<NamedInput> make_inputs(const ExperimentConfig& cfg) {
  std::vector<NamedInput> out;
  out.push_back({"delta0", SpatialSequence::delta(0, cfg.W)});
  std::mt19937_64 rng(cfg.seed);
  for (int i = 1; i <= cfg.random_count; ++i) {
    std::vector<double> v(static_cast<std::size_t>(cfg.random_support));
    double sum = 0.0;
    for (double& x : v) {
      x = unit_double(rng);
      sum += std::abs(x);
    }
    if (!(sum > 0.0)) {
      v[0] = 1.0;
      sum = 1.0;
    }
    for (double& x : v) x /= sum;
    char name[32];
    std::snprintf(name, sizeof name, "random%02d", i);
    out.push_back(
        {name, SpatialSequence(-(cfg.random_support - 1), std::move(v), cfg.W)});
  }
  return out;
}

// Per-site state over the union of the orbit supports seen so far. New
// slots are default-constructed; `prime` (when given) initializes them.
template <typename T>
class SiteTable {
 public:
  template <typename Prime>
  void ensure(std::int64_t lo, std::int64_t hi, Prime&& prime) {
    if (!any_) {
      lo_ = lo;
      vals_.resize(static_cast<std::size_t>(hi - lo + 1));
      for (T& v : vals_) prime(v);
      any_ = true;
      return;
    }
    if (lo < lo_) {
      std::size_t add = static_cast<std::size_t>(lo_ - lo);
      vals_.insert(vals_.begin(), add, T{});
      for (std::size_t i = 0; i < add; ++i) prime(vals_[i]);
      lo_ = lo;
    }
    std::int64_t cur_hi = lo_ + static_cast<std::int64_t>(vals_.size()) - 1;
    if (hi > cur_hi) {
      std::size_t old = vals_.size();
      vals_.resize(old + static_cast<std::size_t>(hi - cur_hi));
      for (std::size_t i = old; i < vals_.size(); ++i) prime(vals_[i]);
    }
  }
  void ensure(std::int64_t lo, std::int64_t hi) {
    ensure(lo, hi, [](T&) {});
  }
  bool any() const { return any_; }
  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const {
    return lo_ + static_cast<std::int64_t>(vals_.size()) - 1;
  }
  T& at(std::int64_t site) { return vals_[static_cast<std::size_t>(site - lo_)]; }
  std::vector<T>& raw() { return vals_; }
  const std::vector<T>& raw() const { return vals_; }

 private:
  std::vector<T> vals_;
  std::int64_t lo_ = 0;
  bool any_ = false;
};

double pow_s(double av, double s) {
  if (s == 1.0) return av;
  if (s == 2.0) return av * av;
  if (s == 3.0) return av * av * av;
  return std::pow(av, s);
}

std::vector<std::int64_t> levels_for(std::int64_t N) {
  std::vector<std::int64_t> out;
  for (std::int64_t l = std::max<std::int64_t>(1, N / 16); l < N; l *= 2)
    out.push_back(l);
  out.push_back(N);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

struct RunRow {
  std::int64_t n = 0;
  double value = 0.0;
  double tail = 0.0;
};
using RunTable = std::vector<RunRow>;

// 5%-over-one-doubling heuristic on the last two level rows.
std::string classify(const RunTable& t) {
  if (t.size() < 2) return "insufficient-levels";
  const RunRow& last = t.back();
  const RunRow& prev = t[t.size() - 2];
  bool flat = last.value - prev.value <= 0.05 * prev.value + 1e-15;
  return flat ? "consistent-with-bounded" : "growth";
}

bool monotone_increasing(const RunTable& t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (!(t[i].value > t[i - 1].value)) return false;
  return true;
}

json slope_json(const RunTable& t) {
  std::size_t k = std::min<std::size_t>(3, t.size());
  if (k < 2) return nullptr;
  std::vector<double> lv, va;
  for (std::size_t i = t.size() - k; i < t.size(); ++i) {
    if (!(t[i].value > 0.0) || !(t[i].n > 0)) return nullptr;
    lv.push_back(static_cast<double>(t[i].n));
    va.push_back(t[i].value);
  }
  return log_log_slope(lv.data(), va.data(), static_cast<int>(k));
}

json table_json(const RunTable& t) {
  json rows = json::array();
  for (const RunRow& r : t)
    rows.push_back(json{{"n", r.n}, {"value", r.value}, {"window_tail", r.tail}});
  return rows;
}

struct ArmResultOut {
  std::string input;
  RunTable rows;
  json extra;  // optional probe-specific fields (object)
};

struct ArmOut {
  std::string name;
  json meta;  // alpha/s/beta/mode/threshold fields
  std::vector<ArmResultOut> results;
  std::string verdict = "none";
};

ReportRecord finish_probe(const ExperimentConfig& cfg,
                          const std::vector<ArmOut>& arms,
                          clock_type::time_point t0) {
  json j;
  j["probe"] = cfg.probe;
  j["config"] = json::parse(cfg.to_json_text());
  json ja = json::array();
  for (const ArmOut& a : arms) {
    json aj;
    aj["name"] = a.name;
    for (auto& [k, v] : a.meta.items()) aj[k] = v;
    aj["verdict"] = a.verdict;
    json rs = json::array();
    for (const ArmResultOut& r : a.results) {
      json rj;
      rj["input"] = r.input;
      rj["classification"] = classify(r.rows);
      rj["slope_top3"] = slope_json(r.rows);
      if (r.extra.is_object())
        for (auto& [k, v] : r.extra.items()) rj[k] = v;
      rj["levels"] = table_json(r.rows);
      rs.push_back(std::move(rj));
    }
    aj["results"] = std::move(rs);
    ja.push_back(std::move(aj));
  }
  j["arms"] = std::move(ja);
  ReportRecord rec;
  rec.payload = j.dump(2) + "\n";
  rec.wall_ms =
      std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
  return rec;
}

// verdict aggregation: hypothesis arms pass when every input is flat
std::string aggregate_verdict(const ArmOut& arm, bool threshold_met) {
  if (!threshold_met) return "none";
  for (const ArmResultOut& r : arm.results)
    if (classify(r.rows) != "consistent-with-bounded") return "growth";
  return "consistent-with-bounded";
}

json arm_meta(double alpha, double s, double beta, const std::string& mode,
              const std::string& threshold, bool met) {
  return json{{"alpha", alpha}, {"s", s},
              {"beta", beta},   {"mode", mode},
              {"threshold", threshold}, {"threshold_met", met}};
}

}  // namespace

// ---------------------------------------------------------------------------
// config plumbing

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  if (!j.is_object())
    throw std::invalid_argument("config: expected a JSON object");
  ExperimentConfig c;
  for (auto& [key, val] : j.items()) {
    if (key == "probe") {
      c.probe = val.get<std::string>();
    } else if (key == "measure") {
      c.measure = val.get<std::string>();
    } else if (key == "K") {
      c.K = val.get<std::int64_t>();
    } else if (key == "measure_eps") {
      c.measure_eps = val.get<double>();
    } else if (key == "m") {
      c.m = val.get<double>();
    } else if (key == "N") {
      c.N = val.get<int>();
    } else if (key == "W") {
      c.W = val.get<std::int64_t>();
    } else if (key == "alpha") {
      c.alpha = val.get<double>();
    } else if (key == "s") {
      c.s = val.get<double>();
    } else if (key == "beta") {
      c.beta = val.get<double>();
    } else if (key == "gaps_alpha") {
      c.gaps_alpha = val.get<double>();
    } else if (key == "random_count") {
      c.random_count = val.get<int>();
    } else if (key == "random_support") {
      c.random_support = val.get<int>();
    } else if (key == "seed") {
      c.seed = val.get<std::uint64_t>();
    } else if (key == "tol") {
      c.tol = val.get<double>();
    } else if (key == "out_dir") {
      c.out_dir = val.get<std::string>();
    } else if (key == "arms") {
      if (!val.is_array())
        throw std::invalid_argument("config: arms must be an array");
      for (auto& aj : val) {
        ArmSpec a;
        for (auto& [ak, av] : aj.items()) {
          if (ak == "name") {
            a.name = av.get<std::string>();
          } else if (ak == "alpha") {
            a.alpha = av.get<double>();
          } else if (ak == "s") {
            a.s = av.get<double>();
          } else if (ak == "beta") {
            a.beta = av.get<double>();
          } else if (ak == "mode") {
            a.mode = av.get<std::string>();
          } else {
            throw std::invalid_argument("config: unknown arm key '" + ak + "'");
          }
        }
        c.arms.push_back(std::move(a));
      }
    } else {
      throw std::invalid_argument("config: unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string ExperimentConfig::to_json_text() const {
  json j;
  j["probe"] = probe;
  j["measure"] = measure;
  j["K"] = K;
  j["measure_eps"] = measure_eps;
  j["m"] = m;
  j["N"] = N;
  j["W"] = W;
  j["alpha"] = alpha;
  j["s"] = s;
  j["beta"] = beta;
  j["gaps_alpha"] = gaps_alpha;
  j["random_count"] = random_count;
  j["random_support"] = random_support;
  j["seed"] = seed;
  j["tol"] = tol;
  json arr = json::array();
  for (const ArmSpec& a : arms)
    arr.push_back(json{{"name", a.name},
                       {"alpha", a.alpha},
                       {"s", a.s},
                       {"beta", a.beta},
                       {"mode", a.mode}});
  j["arms"] = std::move(arr);
  j["out_dir"] = out_dir;
  return j.dump(2);
}

void ExperimentConfig::validate() const {
  if (!known_probe(probe))
    throw std::invalid_argument("config: unknown probe '" + probe + "'");
  if (measure.empty()) throw std::invalid_argument("config: measure is empty");
  if (K < 1) throw std::invalid_argument("config: need K >= 1");
  if (measure_eps < 0.0)
    throw std::invalid_argument("config: need measure_eps >= 0");
  if (m < 0.0) throw std::invalid_argument("config: need m >= 0");
  if (N < 1) throw std::invalid_argument("config: need N >= 1");
  if (W < 1) throw std::invalid_argument("config: need W >= 1");
  if (!(alpha > -1.0)) throw std::invalid_argument("config: need alpha > -1");
  if (!(s >= 1.0)) throw std::invalid_argument("config: need s >= 1");
  if (!(beta > -1.0)) throw std::invalid_argument("config: need beta > -1");
  if (!(gaps_alpha >= 0.0) || gaps_alpha > 1.0)
    throw std::invalid_argument("config: need gaps_alpha in [0, 1]");
  if (random_count < 0)
    throw std::invalid_argument("config: need random_count >= 0");
  if (random_support < 1)
    throw std::invalid_argument("config: need random_support >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("config: need tol > 0");
  for (const ArmSpec& a : arms)
    if (!(a.s >= 1.0))
      throw std::invalid_argument("config: arm '" + a.name + "' needs s >= 1");
}

std::string ReportRecord::rendered() const {
  json j = json::parse(payload);
  j["timing"] = json{{"wall_ms", wall_ms}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// probes

namespace {

// Shared runner for the probes whose per-site statistic is a weighted power
// sum sum_{n<=L} (n+shift)^{weight_exp} |term_n(x)|^s, aggregated across
// sites in l^q and normalized by `norm`.
RunTable weighted_power_run(const SignedMeasure& mu, double m,
                            const SpatialSequence& f, std::int64_t N,
                            const std::vector<std::int64_t>& levels,
                            double weight_exp, double s, double q, double shift,
                            double norm) {
  TrajectoryStream st(mu, m, f, static_cast<int>(N), 0.0);
  SiteTable<double> acc;
  RunTable rows;
  std::size_t next_level = 0;
  for (std::int64_t n = 1; n <= N && next_level < levels.size(); ++n) {
    st.advance();
    const SpatialSequence& cur = st.current();
    double w = std::pow(static_cast<double>(n) + shift, weight_exp);
    if (!cur.empty()) {
      acc.ensure(cur.lo(), cur.hi());
      double* base = &acc.at(cur.lo());
      const std::vector<double>& v = cur.values();
      for (std::size_t i = 0; i < v.size(); ++i)
        base[i] += w * pow_s(std::abs(v[i]), s);
    }
    if (n == levels[next_level]) {
      double total = 0.0;
      for (double a : acc.raw()) total += pow_s(std::pow(a, 1.0 / s), q);
      double R = std::pow(total, 1.0 / q) / norm;
      rows.push_back({n, R, cur.window_tail()});
      ++next_level;
    }
  }
  return rows;
}

double l2_norm(const SpatialSequence& f) {
  double t = 0.0;
  for (double v : f.values()) t += v * v;
  return std::sqrt(t);
}

}  // namespace

ReportRecord run_main_theorem_probe(const ExperimentConfig& cfg) {
  auto t0 = clock_type::now();
  SignedMeasure mu = resolve_measure(cfg.measure, cfg.K, cfg.measure_eps);
  std::vector<NamedInput> inputs = make_inputs(cfg);
  std::vector<std::int64_t> levels = levels_for(cfg.N);

  std::vector<ArmSpec> arms = cfg.arms;
  if (arms.empty()) {
    arms.push_back({"hypothesis", cfg.alpha, cfg.s, 0.0, "hypothesis"});
    arms.push_back({"contrast_s1", cfg.alpha, 1.0, 0.0, "contrast"});
  }

  std::vector<std::vector<RunTable>> tables(
      arms.size(), std::vector<RunTable>(inputs.size()));
  for_each_index(inputs.size(), [&](std::size_t i) {
    const NamedInput& in = inputs[i];
    double norm = in.f.l1_norm();
    TrajectoryStream st(mu, cfg.m, in.f, cfg.N, 0.0);
    std::vector<SiteTable<double>> acc(arms.size());
    std::vector<RunTable> rows(arms.size());
    std::size_t next_level = 0;
    for (std::int64_t n = 1; n <= cfg.N && next_level < levels.size(); ++n) {
      st.advance();
      const SpatialSequence& cur = st.current();
      if (!cur.empty()) {
        const std::vector<double>& v = cur.values();
        for (std::size_t a = 0; a < arms.size(); ++a) {
          double w = std::pow(static_cast<double>(n), arms[a].alpha);
          acc[a].ensure(cur.lo(), cur.hi());
          double* base = &acc[a].at(cur.lo());
          for (std::size_t k = 0; k < v.size(); ++k)
            base[k] += w * pow_s(std::abs(v[k]), arms[a].s);
        }
      }
      if (n == levels[next_level]) {
        for (std::size_t a = 0; a < arms.size(); ++a) {
          double total = 0.0;
          for (double x : acc[a].raw()) total += std::pow(x, 1.0 / arms[a].s);
          rows[a].push_back({n, total / norm, cur.window_tail()});
        }
        ++next_level;
      }
    }
    for (std::size_t a = 0; a < arms.size(); ++a)
      tables[a][i] = std::move(rows[a]);
  });

  std::vector<ArmOut> outs;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    ArmOut o;
    o.name = arms[a].name;
    bool met = arms[a].s * cfg.m > arms[a].alpha + 1.0;
    o.meta = arm_meta(arms[a].alpha, arms[a].s, arms[a].beta, arms[a].mode,
                      "s*m > alpha+1", met);
    for (std::size_t i = 0; i < inputs.size(); ++i)
      o.results.push_back({inputs[i].name, std::move(tables[a][i]), json()});
    o.verdict = aggregate_verdict(o, met);
    outs.push_back(std::move(o));
  }
  return finish_probe(cfg, outs, t0);
}

ReportRecord run_open_question_probe(const ExperimentConfig& cfg) {
  auto t0 = clock_type::now();
  if (!(cfg.m > 0.0))
    throw std::invalid_argument("open-question probe: need m > 0");
  SignedMeasure mu = resolve_measure(cfg.measure, cfg.K, cfg.measure_eps);
  std::vector<NamedInput> inputs = make_inputs(cfg);
  std::vector<std::int64_t> levels = levels_for(cfg.N);

  std::vector<ArmSpec> arms = cfg.arms;
  if (arms.empty()) {
    double s_end = (cfg.alpha + 1.0) / cfg.m;
    if (s_end < 1.0)
      throw std::invalid_argument(
          "open-question probe: endpoint exponent (alpha+1)/m falls below 1");
    arms.push_back({"endpoint", cfg.alpha, s_end, 0.0, "endpoint"});
    arms.push_back({"above", cfg.alpha, s_end + 0.1, 0.0, "side"});
    arms.push_back(
        {"below", cfg.alpha, std::max(1.0, s_end - 0.1), 0.0, "side"});
  }

  std::vector<std::vector<RunTable>> tables(
      arms.size(), std::vector<RunTable>(inputs.size()));
  for_each_index(inputs.size(), [&](std::size_t i) {
    for (std::size_t a = 0; a < arms.size(); ++a)
      tables[a][i] = weighted_power_run(mu, cfg.m, inputs[i].f, cfg.N, levels,
                                        arms[a].alpha, arms[a].s, 1.0, 0.0,
                                        inputs[i].f.l1_norm());
  });

  std::vector<ArmOut> outs;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    ArmOut o;
    o.name = arms[a].name;
    double gap = arms[a].s * cfg.m - (arms[a].alpha + 1.0);
    std::string regime = std::abs(gap) < 1e-9
                             ? "endpoint"
                             : (gap > 0.0 ? "above-threshold" : "below-threshold");
    o.meta = arm_meta(arms[a].alpha, arms[a].s, arms[a].beta, arms[a].mode,
                      "s*m vs alpha+1", gap > 1e-9);
    o.meta["regime"] = regime;
    for (std::size_t i = 0; i < inputs.size(); ++i)
      o.results.push_back({inputs[i].name, std::move(tables[a][i]), json()});
    // the endpoint carries no verdict by design; the side arms report theirs
    o.verdict = regime == "above-threshold" ? aggregate_verdict(o, true) : "none";
    outs.push_back(std::move(o));
  }
  return finish_probe(cfg, outs, t0);
}

ReportRecord run_corollary_sup_probe(const ExperimentConfig& cfg) {
  auto t0 = clock_type::now();
  SignedMeasure mu = resolve_measure(cfg.measure, cfg.K, cfg.measure_eps);
  std::vector<NamedInput> inputs = make_inputs(cfg);
  std::vector<std::int64_t> levels = levels_for(cfg.N);

  std::vector<RunTable> max_tables(inputs.size());
  std::vector<RunTable> decay_tables(inputs.size());
  for_each_index(inputs.size(), [&](std::size_t i) {
    const NamedInput& in = inputs[i];
    double norm = in.f.l1_norm();
    TrajectoryStream st(mu, cfg.m, in.f, cfg.N, 0.0);
    SiteTable<double> run_max;
    RunTable rows, decay;
    std::size_t next_level = 0;
    for (std::int64_t n = 1; n <= cfg.N && next_level < levels.size(); ++n) {
      st.advance();
      const SpatialSequence& cur = st.current();
      double w = std::pow(static_cast<double>(n), cfg.alpha);
      if (!cur.empty()) {
        run_max.ensure(cur.lo(), cur.hi());
        double* base = &run_max.at(cur.lo());
        const std::vector<double>& v = cur.values();
        for (std::size_t k = 0; k < v.size(); ++k)
          base[k] = std::max(base[k], w * std::abs(v[k]));
      }
      if (n == levels[next_level]) {
        double total = 0.0;
        for (double x : run_max.raw()) total += x;
        rows.push_back({n, total / norm, cur.window_tail()});
        decay.push_back({n, w * cur.linf_norm(), cur.window_tail()});
        ++next_level;
      }
    }
    max_tables[i] = std::move(rows);
    decay_tables[i] = std::move(decay);
  });

  std::vector<ArmOut> outs;
  {
    ArmOut o;
    o.name = "maximal_l1";
    bool met = cfg.alpha < cfg.m;
    o.meta = arm_meta(cfg.alpha, cfg.s, cfg.beta, "maximal", "alpha < m", met);
    for (std::size_t i = 0; i < inputs.size(); ++i)
      o.results.push_back({inputs[i].name, std::move(max_tables[i]), json()});
    o.verdict = aggregate_verdict(o, met);
    outs.push_back(std::move(o));
  }
  {
    ArmOut o;
    o.name = "terminal_decay";
    o.meta = arm_meta(cfg.alpha, cfg.s, cfg.beta, "decay",
                      "n^alpha * max-site |term_n| -> 0", true);
    bool all_decay = true;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const RunTable& t = decay_tables[i];
      bool dec = t.size() >= 2 && t.back().value < t.front().value;
      all_decay = all_decay && dec;
      json extra{{"decays", dec}};
      o.results.push_back({inputs[i].name, std::move(decay_tables[i]), extra});
    }
    o.verdict = all_decay ? "decays" : "no-decay";
    outs.push_back(std::move(o));
  }
  return finish_probe(cfg, outs, t0);
}

ReportRecord run_variation_probe(const ExperimentConfig& cfg) {
  auto t0 = clock_type::now();
  SignedMeasure mu = resolve_measure(cfg.measure, cfg.K, cfg.measure_eps);
  std::vector<NamedInput> inputs = make_inputs(cfg);
  std::vector<std::int64_t> levels = levels_for(cfg.N);

  std::vector<ArmSpec> arms = cfg.arms;
  if (arms.empty()) {
    arms.push_back({"beta0_s1", 0.0, 1.0, 0.0, "hypothesis"});
    arms.push_back({"beta03_s2", 0.0, 2.0, 0.3, "hypothesis"});
  }

  struct BlockState {
    SiteTable<double> bmax, bmin, osc_acc;
  };

  // tables[arm][input]: 0 = v(s), 1 = o(s)
  std::vector<std::vector<std::array<RunTable, 2>>> tables(
      arms.size(), std::vector<std::array<RunTable, 2>>(inputs.size()));
  for_each_index(inputs.size(), [&](std::size_t i) {
    const NamedInput& in = inputs[i];
    double norm = in.f.l1_norm();
    TrajectoryStream st(mu, cfg.m, in.f, cfg.N, 0.0);
    std::vector<SiteTable<VariationAccumulator>> var(arms.size());
    std::vector<BlockState> blocks(arms.size());
    std::size_t next_level = 0;
    auto prime_var = [](VariationAccumulator& a) { a.push(0.0); };
    for (std::int64_t n = 1; n <= cfg.N && next_level < levels.size(); ++n) {
      st.advance();
      const SpatialSequence& cur = st.current();
      std::int64_t lo = cur.empty() ? 0 : cur.lo();
      std::int64_t hi = cur.empty() ? 0 : cur.hi();
      for (std::size_t a = 0; a < arms.size(); ++a) {
        double w = std::pow(static_cast<double>(n), arms[a].beta);
        if (!cur.empty()) {
          var[a].ensure(lo, hi, prime_var);
          blocks[a].bmax.ensure(lo, hi);
          blocks[a].bmin.ensure(lo, hi);
          blocks[a].osc_acc.ensure(lo, hi);
        }
        if (!var[a].any()) continue;
        std::int64_t tlo = var[a].lo(), thi = var[a].hi();
        for (std::int64_t x = tlo; x <= thi; ++x) {
          double v = (x >= lo && x <= hi && !cur.empty()) ? cur.at(x) : 0.0;
          double wv = w * v;
          var[a].at(x).push(wv);
          double& mx = blocks[a].bmax.at(x);
          double& mn = blocks[a].bmin.at(x);
          if (n == 1) {
            mx = wv;
            mn = wv;
          } else {
            mx = std::max(mx, wv);
            mn = std::min(mn, wv);
          }
        }
      }
      // dyadic block [2^j, 2^{j+1}]: close at the right endpoint, whose
      // value also seeds the next block
      bool close = (n & (n - 1)) == 0 && n > 1;
      if (close) {
        for (std::size_t a = 0; a < arms.size(); ++a) {
          if (!var[a].any()) continue;
          double w = std::pow(static_cast<double>(n), arms[a].beta);
          std::int64_t tlo = blocks[a].osc_acc.lo(),
                       thi = blocks[a].osc_acc.hi();
          for (std::int64_t x = tlo; x <= thi; ++x) {
            blocks[a].osc_acc.at(x) += pow_s(
                blocks[a].bmax.at(x) - blocks[a].bmin.at(x), arms[a].s);
            double v = (x >= lo && x <= hi && !cur.empty()) ? cur.at(x) : 0.0;
            blocks[a].bmax.at(x) = w * v;
            blocks[a].bmin.at(x) = w * v;
          }
        }
      }
      if (n == levels[next_level]) {
        for (std::size_t a = 0; a < arms.size(); ++a) {
          double tv = 0.0, to = 0.0;
          if (var[a].any()) {
            std::int64_t tlo = var[a].lo(), thi = var[a].hi();
            for (std::int64_t x = tlo; x <= thi; ++x) {
              tv += var[a].at(x).value(arms[a].s);
              double o = blocks[a].osc_acc.at(x);
              if (!close)  // current block still open: add its span so far
                o += pow_s(blocks[a].bmax.at(x) - blocks[a].bmin.at(x),
                           arms[a].s);
              to += std::pow(o, 1.0 / arms[a].s);
            }
          }
          double wt = cur.window_tail();
          tables[a][i][0].push_back({n, tv / norm, wt});
          tables[a][i][1].push_back({n, to / norm, wt});
        }
        ++next_level;
      }
    }
  });

  std::vector<ArmOut> outs;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    bool met = arms[a].s * (cfg.m - arms[a].beta) > 1.0;
    for (int which = 0; which < 2; ++which) {
      ArmOut o;
      o.name = arms[a].name + (which == 0 ? "_v" : "_o");
      o.meta = arm_meta(arms[a].alpha, arms[a].s, arms[a].beta, arms[a].mode,
                        "s*(m - beta) > 1", met);
      o.meta["functional"] = which == 0 ? "variation" : "oscillation";
      for (std::size_t i = 0; i < inputs.size(); ++i)
        o.results.push_back(
            {inputs[i].name, std::move(tables[a][i][which]), json()});
      o.verdict = aggregate_verdict(o, met);
      outs.push_back(std::move(o));
    }
  }
  return finish_probe(cfg, outs, t0);
}

ReportRecord run_longvar_probe(const ExperimentConfig& cfg) {
  auto t0 = clock_type::now();
  SignedMeasure mu = resolve_measure(cfg.measure, cfg.K, cfg.measure_eps);
  std::vector<NamedInput> inputs = make_inputs(cfg);
  double ga = cfg.gaps_alpha;
  if (!(ga > 0.0) || !(ga < 1.0))
    throw std::invalid_argument("longvar probe: need gaps_alpha in (0, 1)");
  GapSequence gaps = gap_subsequence(ga, cfg.N);
  if (gaps.n.size() < 2)
    throw std::invalid_argument("longvar probe: gap sequence too short");

  std::vector<ArmSpec> arms = cfg.arms;
  if (arms.empty()) {
    arms.push_back({"endpoint", 0.0, cfg.s, cfg.beta, "endpoint"});
    arms.push_back({"blockmax", 0.0, cfg.s, cfg.beta, "blockmax"});
    arms.push_back({"blockvar", 0.0, cfg.s, cfg.beta, "blockvar"});
    arms.push_back({"contrast_endpoint", 0.0, 1.1, 0.4, "endpoint"});
  }
  for (const ArmSpec& a : arms)
    if (a.mode != "endpoint" && a.mode != "blockmax" && a.mode != "blockvar")
      throw std::invalid_argument("longvar probe: arm '" + a.name +
                                  "' needs mode endpoint|blockmax|blockvar");

  // level targets snapped to block closures
  std::vector<std::int64_t> closures(gaps.n.begin() + 1, gaps.n.end());
  std::vector<std::int64_t> levels;
  for (std::int64_t target : levels_for(cfg.N)) {
    auto it = std::lower_bound(closures.begin(), closures.end(), target);
    levels.push_back(it == closures.end() ? closures.back() : *it);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::int64_t n_last = closures.back();

  std::vector<std::vector<RunTable>> tables(
      arms.size(), std::vector<RunTable>(inputs.size()));
  for_each_index(inputs.size(), [&](std::size_t i) {
    const NamedInput& in = inputs[i];
    double norm = in.f.l1_norm();
    TrajectoryStream st(mu, cfg.m, in.f, cfg.N, 0.0);
    SiteTable<double> v_start;  // shared: all arms use the same blocks
    std::vector<SiteTable<double>> acc(arms.size()), bmax(arms.size());
    std::vector<SiteTable<VariationAccumulator>> bvar(arms.size());
    std::vector<RunTable> rows(arms.size());
    std::size_t block = 0;       // index into gaps.n: current block start
    std::size_t next_level = 0;
    for (std::int64_t n = 1; n <= n_last && next_level < levels.size(); ++n) {
      st.advance();
      const SpatialSequence& cur = st.current();
      std::int64_t lo = cur.empty() ? 0 : cur.lo();
      std::int64_t hi = cur.empty() ? 0 : cur.hi();
      if (!cur.empty()) {
        v_start.ensure(lo, hi);
        for (std::size_t a = 0; a < arms.size(); ++a) {
          acc[a].ensure(lo, hi);
          if (arms[a].mode == "blockmax") bmax[a].ensure(lo, hi);
          if (arms[a].mode == "blockvar")
            bvar[a].ensure(lo, hi,
                           [](VariationAccumulator& v) { v.push(0.0); });
        }
      }
      if (n == gaps.n[block]) {
        // block start: record v(n_k) and reset the per-block state
        std::int64_t tlo = v_start.any() ? v_start.lo() : 0;
        std::int64_t thi = v_start.any() ? v_start.hi() : -1;
        for (std::int64_t x = tlo; x <= thi; ++x) {
          double v = (!cur.empty() && x >= lo && x <= hi) ? cur.at(x) : 0.0;
          v_start.at(x) = v;
          for (std::size_t a = 0; a < arms.size(); ++a) {
            if (arms[a].mode == "blockmax") bmax[a].at(x) = 0.0;
            if (arms[a].mode == "blockvar") {
              bvar[a].at(x) = VariationAccumulator();
              bvar[a].at(x).push(v);
            }
          }
        }
      } else if (v_start.any()) {
        std::int64_t tlo = v_start.lo(), thi = v_start.hi();
        for (std::int64_t x = tlo; x <= thi; ++x) {
          double v = (!cur.empty() && x >= lo && x <= hi) ? cur.at(x) : 0.0;
          for (std::size_t a = 0; a < arms.size(); ++a) {
            if (arms[a].mode == "blockmax")
              bmax[a].at(x) =
                  std::max(bmax[a].at(x), std::abs(v - v_start.at(x)));
            if (arms[a].mode == "blockvar") bvar[a].at(x).push(v);
          }
        }
      }
      if (block + 1 < gaps.n.size() && n == gaps.n[block + 1]) {
        // close block [n_k, n_{k+1}]
        double nk = static_cast<double>(gaps.n[block]);
        std::int64_t tlo = v_start.any() ? v_start.lo() : 0;
        std::int64_t thi = v_start.any() ? v_start.hi() : -1;
        for (std::size_t a = 0; a < arms.size(); ++a) {
          double w = std::pow(nk, arms[a].beta * arms[a].s);
          for (std::int64_t x = tlo; x <= thi; ++x) {
            double v = (!cur.empty() && x >= lo && x <= hi) ? cur.at(x) : 0.0;
            double piece = 0.0;
            if (arms[a].mode == "endpoint") {
              piece = pow_s(std::abs(v - v_start.at(x)), arms[a].s);
            } else if (arms[a].mode == "blockmax") {
              piece = pow_s(bmax[a].at(x), arms[a].s);
            } else {
              double bv = bvar[a].at(x).value(arms[a].s);
              piece = pow_s(bv, arms[a].s);
            }
            acc[a].at(x) += w * piece;
          }
        }
        if (n == levels[next_level]) {
          for (std::size_t a = 0; a < arms.size(); ++a) {
            double total = 0.0;
            for (double x : acc[a].raw()) total += std::pow(x, 1.0 / arms[a].s);
            rows[a].push_back({n, total / norm, cur.window_tail()});
          }
          ++next_level;
        }
        ++block;
        // reopen: n is also the next block's start
        for (std::int64_t x = tlo; x <= thi; ++x) {
          double v = (!cur.empty() && x >= lo && x <= hi) ? cur.at(x) : 0.0;
          v_start.at(x) = v;
          for (std::size_t a = 0; a < arms.size(); ++a) {
            if (arms[a].mode == "blockmax") bmax[a].at(x) = 0.0;
            if (arms[a].mode == "blockvar") {
              bvar[a].at(x) = VariationAccumulator();
              bvar[a].at(x).push(v);
            }
          }
        }
      }
    }
    for (std::size_t a = 0; a < arms.size(); ++a)
      tables[a][i] = std::move(rows[a]);
  });

  std::vector<ArmOut> outs;
  for (std::size_t a = 0; a < arms.size(); ++a) {
    double denom = 1.0 - ga - arms[a].beta;
    double threshold = arms[a].mode == "blockvar"
                           ? (denom > 0.0 ? 1.0 / denom : -1.0)
                           : (denom > 0.0 ? (1.0 - ga) / denom : -1.0);
    bool met = threshold > 0.0 && arms[a].s > threshold;
    ArmOut o;
    o.name = arms[a].name;
    o.meta = arm_meta(arms[a].alpha, arms[a].s, arms[a].beta, arms[a].mode,
                      arms[a].mode == "blockvar" ? "s > 1/(1-a-beta)"
                                                 : "s > (1-a)/(1-a-beta)",
                      met);
    o.meta["gaps_alpha"] = ga;
    o.meta["threshold_value"] = threshold;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      json extra{{"monotone", monotone_increasing(tables[a][i])}};
      o.results.push_back({inputs[i].name, std::move(tables[a][i]), extra});
    }
    o.verdict = aggregate_verdict(o, met);
    outs.push_back(std::move(o));
  }
  return finish_probe(cfg, outs, t0);
}

ReportRecord run_lp_square_probe(const ExperimentConfig& cfg) {
  auto t0 = clock_type::now();
  if (!(cfg.m >= 1.0))
    throw std::invalid_argument("lp-square probe: need m >= 1");
  SignedMeasure mu = resolve_measure(cfg.measure, cfg.K, cfg.measure_eps);
  std::vector<NamedInput> inputs = make_inputs(cfg);
  std::vector<std::int64_t> levels = levels_for(cfg.N);
  double weight_exp = 2.0 * cfg.m - 1.0;  // (n+1)^{2m'+1} with m = m'+1

  std::vector<RunTable> tables(inputs.size());
  for_each_index(inputs.size(), [&](std::size_t i) {
    const NamedInput& in = inputs[i];
    double norm = l2_norm(in.f);
    TrajectoryStream st(mu, cfg.m, in.f, cfg.N, 0.0);
    RunTable rows;
    double acc = 0.0;
    std::size_t next_level = 0;
    for (std::int64_t n = 1; n <= cfg.N && next_level < levels.size(); ++n) {
      st.advance();
      const SpatialSequence& cur = st.current();
      double w = std::pow(static_cast<double>(n) + 1.0, weight_exp);
      double e2 = 0.0;
      for (double v : cur.values()) e2 += v * v;
      acc += w * e2;
      if (n == levels[next_level]) {
        rows.push_back({n, std::sqrt(acc) / norm, cur.window_tail()});
        ++next_level;
      }
    }
    tables[i] = std::move(rows);
  });

  ArmOut o;
  o.name = "l2_square";
  o.meta = arm_meta(1.0, 2.0, cfg.beta, "l2",
                    "finite for power-bounded analytic operators", true);
  o.meta["weight_exponent"] = weight_exp;
  for (std::size_t i = 0; i < inputs.size(); ++i)
    o.results.push_back({inputs[i].name, std::move(tables[i]), json()});
  o.verdict = aggregate_verdict(o, true);
  return finish_probe(cfg, {o}, t0);
}

ReportRecord run_probe(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.probe == "main-theorem") return run_main_theorem_probe(cfg);
  if (cfg.probe == "open-question") return run_open_question_probe(cfg);
  if (cfg.probe == "corollary-sup") return run_corollary_sup_probe(cfg);
  if (cfg.probe == "variation") return run_variation_probe(cfg);
  if (cfg.probe == "longvar") return run_longvar_probe(cfg);
  if (cfg.probe == "lp-square") return run_lp_square_probe(cfg);
  throw std::invalid_argument("run_probe: unknown probe '" + cfg.probe + "'");
}

// ---------------------------------------------------------------------------

namespace {

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
            c == '_' || c == '.')
               ? c
               : '_';
  return out.empty() ? std::string("x") : out;
}

}  // namespace

void write_outputs(const ReportRecord& record, const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) return;
  namespace fs = std::filesystem;
  fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    if (!out) throw std::runtime_error("write_outputs: cannot write report.json");
    out << record.payload;
  }
  json j = json::parse(record.payload);
  if (!j.contains("arms")) return;
  for (const json& arm : j["arms"]) {
    std::string an = safe_name(arm.value("name", "arm"));
    for (const json& res : arm["results"]) {
      std::string in = safe_name(res.value("input", "input"));
      std::string stem = an + "_" + in;
      {
        std::ofstream csv(dir / (stem + ".csv"), std::ios::binary);
        csv << "level,value,window_tail\n";
        for (const json& row : res["levels"])
          csv << row["n"].get<std::int64_t>() << ','
              << row["value"].get<double>() << ','
              << row["window_tail"].get<double>() << '\n';
      }
      {
        std::ofstream dat(dir / (stem + ".dat"), std::ios::binary);
        for (const json& row : res["levels"])
          dat << row["n"].get<std::int64_t>() << ' '
              << row["value"].get<double>() << '\n';
      }
    }
  }
}

}  // namespace rittlab
