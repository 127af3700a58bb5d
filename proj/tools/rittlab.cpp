// Command-line workbench for the convolution-operator calculus library:
// fractional coefficients, convolution powers, Ritt trends, symbol-side
// certificates, orbit functionals, and the config-driven probes.
//
// RITTLAB_THREADS controls how many worker threads the probes use for
// independent inputs (default 1).

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rittlab/certificates.hpp"
#include "rittlab/experiments.hpp"
#include "rittlab/fractional.hpp"
#include "rittlab/functionals.hpp"
#include "rittlab/measure.hpp"
#include "rittlab/symbol.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace rittlab;

json finite_or(double v, const char* marker) {
  return std::isfinite(v) ? json(v) : json(marker);
}

json condition_json(const ConditionReport& r) {
  json j;
  j["condition"] = r.condition;
  j["holds"] = r.holds;
  json c = json::object();
  for (const auto& [k, v] : r.constants) c[k] = finite_or(v, "infinite");
  j["constants"] = std::move(c);
  if (r.has_witness) j["witness_t"] = r.witness_t;
  j["grid"] = r.grid;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json certificate_json(const CertificateReport& r) {
  json j;
  j["alpha"] = r.alpha;
  j["s"] = r.s;
  j["m"] = r.m;
  j["tol"] = r.tol;
  j["route_integral"] = r.route_integral;
  j["route_log"] = r.route_log;
  json qs = json::array();
  for (const QuantityReport& q : r.quantities) {
    json qj;
    qj["name"] = q.name;
    qj["value"] = q.diverged ? json("diverged") : finite_or(q.value, "infinite");
    qj["tail"] = finite_or(q.tail, "infinite");
    qj["diverged"] = q.diverged;
    qj["converged"] = q.converged;
    qj["growth"] = finite_or(q.growth, "infinite");
    if (!q.note.empty()) qj["note"] = q.note;
    qs.push_back(std::move(qj));
  }
  j["quantities"] = std::move(qs);
  return j;
}

// input keys: "delta0", "delta:<site>", "file:<path>" (measure text format)
SpatialSequence input_sequence(const std::string& key, std::int64_t W) {
  if (key == "delta0" || key == "delta") return SpatialSequence::delta(0, W);
  if (key.rfind("delta:", 0) == 0) {
    std::int64_t site = std::stoll(key.substr(6));
    return SpatialSequence::delta(site, W);
  }
  if (key.rfind("file:", 0) == 0) {
    SignedMeasure mu = load_measure(key.substr(5));
    if (mu.atoms().empty())
      throw std::invalid_argument("input file carries no entries");
    std::int64_t lo = mu.atoms().front().offset, hi = lo;
    for (const Atom& a : mu.atoms()) {
      lo = std::min(lo, a.offset);
      hi = std::max(hi, a.offset);
    }
    std::vector<double> v(static_cast<std::size_t>(hi - lo + 1), 0.0);
    for (const Atom& a : mu.atoms())
      v[static_cast<std::size_t>(a.offset - lo)] += a.weight;
    return SpatialSequence(lo, std::move(v), W);
  }
  throw std::invalid_argument("unknown input '" + key +
                              "' (want delta0, delta:<site>, file:<path>)");
}

void write_site_csv(const std::string& path, const SpatialSequence& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "site,value\n";
  for (std::int64_t x = f.lo(); x <= f.hi(); ++x)
    out << x << ',' << f.at(x) << '\n';
}

void write_site_dat(const std::string& path, const SpatialSequence& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (std::int64_t x = f.lo(); x <= f.hi(); ++x)
    out << x << ' ' << f.at(x) << '\n';
}

json functional_json(const FunctionalResult& r) {
  json j;
  j["l1_norm"] = r.l1_norm;
  j["truncation_N"] = r.truncation_N;
  j["tail_estimate"] =
      r.tail_estimate ? json(*r.tail_estimate) : json(nullptr);
  j["support"] = json{{"lo", r.pointwise.lo()},
                      {"hi", r.pointwise.hi()},
                      {"size", r.pointwise.size()}};
  j["window_tail"] = r.pointwise.window_tail();
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "workbench for convolution operators on l1(Z): fractional "
      "differences, square/variation functionals, symbol certificates, "
      "and boundedness probes (set RITTLAB_THREADS to parallelize probes)"};
  app.require_subcommand(1);

  // --- coeffs -------------------------------------------------------------
  double co_alpha = 0.5;
  std::int64_t co_K = 32;
  double co_eps = 0.0;
  auto* coeffs = app.add_subcommand(
      "coeffs", "binomial-series coefficients g(alpha, k), two-column output");
  coeffs->add_option("--alpha", co_alpha, "fractional exponent in (0, 1]")
      ->required();
  coeffs->add_option("-K,--count", co_K, "number of coefficients (default 32)");
  coeffs->add_option("--eps", co_eps,
                     "choose K so the dropped tail is at most eps");

  // --- conv-power ----------------------------------------------------------
  std::string cp_measure = "nu_alpha:0.5";
  std::int64_t cp_n = 1, cp_K = 1 << 14;
  double cp_eps = 0.0;
  std::string cp_out;
  auto* convp = app.add_subcommand("conv-power",
                                   "n-th convolution power of a measure");
  convp->add_option("--measure", cp_measure,
                    "measure key (nu_alpha:<a>, lazy_walk, delta:<k>, "
                    "from_file:<path>)");
  convp->add_option("-n,--power", cp_n, "convolution power")->required();
  convp->add_option("-K,--trunc", cp_K, "series truncation for the measure");
  convp->add_option("--eps", cp_eps, "per-step weight-drop threshold");
  convp->add_option("--out", cp_out, "write the result measure to this file");

  // --- ritt ----------------------------------------------------------------
  std::string rt_measure = "nu_alpha:0.5";
  std::int64_t rt_N = 64, rt_K = 1 << 14;
  double rt_eps = 0.0;
  std::string rt_dat;
  auto* ritt = app.add_subcommand(
      "ritt", "trend of n * ||mu^n - mu^(n+1)||_1 up to N");
  ritt->add_option("--measure", rt_measure, "measure key");
  ritt->add_option("-N,--steps", rt_N, "largest power (default 64)");
  ritt->add_option("-K,--trunc", rt_K, "series truncation for the measure");
  ritt->add_option("--eps", rt_eps, "per-step weight-drop threshold");
  ritt->add_option("--dat", rt_dat, "write two-column n/value plot data here");

  // --- certify ---------------------------------------------------------------
  std::string cf_symbol = "nu_alpha:0.5";
  double cf_alpha = 1.0, cf_s = 3.0, cf_m = 1.0, cf_beta = 0.0, cf_tol = 1e-8;
  double cf_gaps_alpha = -1.0;
  std::int64_t cf_cap = 0, cf_gaps_N = 4096;
  int cf_grid = 4096;
  bool cf_skip_cond = false;
  auto* certify = app.add_subcommand(
      "certify",
      "symbol-side certificate: angular ratio, majorant conditions, and the "
      "A/B/C/D/E quantities");
  certify->add_option("--symbol", cf_symbol,
                      "symbol key (nu_alpha:<a>, lazy_walk, from_file:<path>)");
  certify->add_option("--alpha", cf_alpha, "weight exponent (default 1)");
  certify->add_option("-s,--power", cf_s, "exponent s >= 1 (default 3)");
  certify->add_option("-m,--diff", cf_m, "difference power (default 1)");
  certify->add_option("--gaps-alpha", cf_gaps_alpha,
                      "evaluate the gap-family quantities along the spacing "
                      "exponent instead of the n^alpha family");
  certify->add_option("--gaps-N", cf_gaps_N,
                      "largest index of the gap sequence (default 4096)");
  certify->add_option("--beta", cf_beta, "gap-family weight exponent");
  certify->add_option("--tol", cf_tol, "quadrature tolerance (default 1e-8)");
  certify->add_option("--cap", cf_cap,
                      "cap the family at n <= cap (0 = full series)");
  certify->add_option("--grid", cf_grid, "condition-check grid (default 4096)");
  certify->add_flag("--skip-conditions", cf_skip_cond,
                    "quantities only, no condition checks");

  // --- square-fn -------------------------------------------------------------
  std::string sq_measure = "nu_alpha:0.5", sq_input = "delta0";
  std::int64_t sq_K = 1 << 14, sq_W = 1 << 16;
  double sq_eps = 0.0, sq_m = 1.0, sq_alpha = 1.0, sq_s = 3.0;
  int sq_N = 512;
  std::string sq_csv, sq_dat;
  auto* sqf = app.add_subcommand(
      "square-fn", "weighted square function of an orbit, per site");
  sqf->add_option("--measure", sq_measure, "measure key");
  sqf->add_option("-K,--trunc", sq_K, "series truncation for the measure");
  sqf->add_option("--measure-eps", sq_eps, "weight-drop threshold");
  sqf->add_option("-m,--diff", sq_m, "difference power (default 1)");
  sqf->add_option("--alpha", sq_alpha, "weight exponent (default 1)");
  sqf->add_option("-s,--power", sq_s, "exponent s >= 1 (default 3)");
  sqf->add_option("-N,--steps", sq_N, "orbit length (default 512)");
  sqf->add_option("-W,--window", sq_W, "window halfwidth (default 65536)");
  sqf->add_option("--input", sq_input,
                  "seed sequence: delta0, delta:<site>, file:<path>");
  sqf->add_option("--csv", sq_csv, "write site,value CSV here");
  sqf->add_option("--dat", sq_dat, "write two-column plot data here");

  // --- var-norm ---------------------------------------------------------------
  std::string vn_measure = "nu_alpha:0.5", vn_input = "delta0",
              vn_mode = "endpoint";
  std::int64_t vn_K = 1 << 14, vn_W = 1 << 16;
  double vn_eps = 0.0, vn_m = 0.0, vn_beta = 0.0, vn_s = 2.0,
         vn_gaps_alpha = 0.5;
  int vn_N = 512;
  std::string vn_csv, vn_dat;
  auto* varn = app.add_subcommand(
      "var-norm",
      "variation/oscillation functionals of an orbit along a gap sequence");
  varn->add_option("--measure", vn_measure, "measure key");
  varn->add_option("-K,--trunc", vn_K, "series truncation for the measure");
  varn->add_option("--measure-eps", vn_eps, "weight-drop threshold");
  varn->add_option("-m,--diff", vn_m, "difference power (default 0)");
  varn->add_option("--beta", vn_beta, "block weight exponent (default 0)");
  varn->add_option("-s,--power", vn_s, "exponent s >= 1 (default 2)");
  varn->add_option("-N,--steps", vn_N, "orbit length (default 512)");
  varn->add_option("-W,--window", vn_W, "window halfwidth (default 65536)");
  varn->add_option("--gaps-alpha", vn_gaps_alpha,
                   "spacing exponent of the gap sequence (default 0.5)");
  varn->add_option("--mode", vn_mode,
                   "endpoint | blockmax | blockvar | full (single block)");
  varn->add_option("--input", vn_input,
                   "seed sequence: delta0, delta:<site>, file:<path>");
  varn->add_option("--csv", vn_csv, "write site,value CSV here");
  varn->add_option("--dat", vn_dat, "write two-column plot data here");

  // --- probe / run -------------------------------------------------------------
  std::string pr_name;
  ExperimentConfig pr_cfg;
  int pr_random = -1;
  auto* probe = app.add_subcommand(
      "probe",
      "run one named probe (main-theorem, open-question, corollary-sup, "
      "variation, longvar, lp-square)");
  probe->add_option("name", pr_name, "probe name")->required();
  probe->add_option("--measure", pr_cfg.measure, "measure key");
  probe->add_option("-K,--trunc", pr_cfg.K, "series truncation");
  probe->add_option("--measure-eps", pr_cfg.measure_eps,
                    "weight-drop threshold");
  probe->add_option("-m,--diff", pr_cfg.m, "difference power");
  probe->add_option("-N,--steps", pr_cfg.N, "orbit length");
  probe->add_option("-W,--window", pr_cfg.W, "window halfwidth");
  probe->add_option("--alpha", pr_cfg.alpha, "weight exponent");
  probe->add_option("-s,--power", pr_cfg.s, "exponent s >= 1");
  probe->add_option("--beta", pr_cfg.beta, "block weight exponent");
  probe->add_option("--gaps-alpha", pr_cfg.gaps_alpha,
                    "gap-sequence spacing exponent");
  probe->add_option("--random", pr_random,
                    "random l1-normalized inputs besides delta0 "
                    "(default 20 for main-theorem, else 0)");
  probe->add_option("--support", pr_cfg.random_support,
                    "support length of the random inputs");
  probe->add_option("--seed", pr_cfg.seed, "RNG seed");
  probe->add_option("--tol", pr_cfg.tol, "tolerance knob recorded in reports");
  probe->add_option("--out", pr_cfg.out_dir,
                    "directory for report.json + CSV + plot data");

  std::string run_path, run_out;
  bool run_has_seed = false;
  std::uint64_t run_seed = 0;
  auto* runc = app.add_subcommand("run", "run a probe from a JSON config file");
  runc->add_option("config", run_path, "config file (JSON)")->required();
  runc->add_option("--seed", run_seed, "override the config seed")
      ->each([&](const std::string&) { run_has_seed = true; });
  runc->add_option("--out", run_out, "override the output directory");

  try {
    app.parse(argc, argv);

    if (*coeffs) {
      std::int64_t K = co_K;
      if (co_eps > 0.0) K = frac_K_for(co_alpha, co_eps, std::int64_t{1} << 26);
      FracCoefficients fc = frac_coeff(co_alpha, K);
      std::printf("# alpha=%.17g K=%lld tail=%.17g\n", co_alpha,
                  static_cast<long long>(K), fc.tail);
      for (std::int64_t k = 1; k <= K; ++k)
        std::printf("%lld %.17g\n", static_cast<long long>(k),
                    fc.g[static_cast<std::size_t>(k - 1)]);
      return 0;
    }

    if (*convp) {
      SignedMeasure mu = resolve_measure(cp_measure, cp_K, 0.0);
      SignedMeasure pw = convolution_power(mu, cp_n, cp_eps);
      if (!cp_out.empty()) {
        save_measure(pw, cp_out);
        std::fprintf(stderr, "wrote %s (%zu entries, |.|_1 = %.12g)\n",
                     cp_out.c_str(), pw.atoms().size(), total_variation(pw));
      } else {
        std::cout << to_text(pw);
      }
      return 0;
    }

    if (*ritt) {
      SignedMeasure mu = resolve_measure(rt_measure, rt_K, 0.0);
      RittTrend tr = ritt_constant(mu, rt_N, rt_eps);
      json j;
      j["measure"] = rt_measure;
      j["N"] = rt_N;
      j["sup"] = tr.sup;
      j["argmax"] = tr.argmax;
      json rows = json::array();
      for (std::size_t i = 0; i < tr.n.size(); ++i)
        rows.push_back(json{{"n", tr.n[i]},
                            {"value", tr.value[i]},
                            {"slack", tr.slack[i]}});
      j["trend"] = std::move(rows);
      std::cout << j.dump(2) << '\n';
      if (!rt_dat.empty()) {
        std::ofstream out(rt_dat, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + rt_dat);
        for (std::size_t i = 0; i < tr.n.size(); ++i)
          out << tr.n[i] << ' ' << tr.value[i] << '\n';
      }
      return 0;
    }

    if (*certify) {
      FourierSymbol sym = resolve_symbol(cf_symbol);
      json j;
      j["symbol"] = cf_symbol;
      if (!cf_skip_cond) {
        MajorantFunction h = power_majorant(sym.majorant_exponent(), 1.0);
        json conds;
        conds["angular_ratio"] = condition_json(angular_ratio(sym, cf_grid));
        conds["m1"] = condition_json(check_m1(sym, h, cf_grid));
        conds["m2"] = condition_json(check_m2(sym, h, cf_grid));
        j["conditions"] = std::move(conds);
      }
      if (cf_gaps_alpha >= 0.0) {
        GapSequence gaps = gap_subsequence(cf_gaps_alpha, cf_gaps_N);
        j["family"] = json{{"kind", "gaps"},
                           {"gaps_alpha", cf_gaps_alpha},
                           {"count", gaps.n.size()},
                           {"beta", cf_beta}};
        j["certificate"] = certificate_json(
            lemma_gap_quantities(sym, gaps, cf_beta, cf_s, cf_tol));
      } else {
        j["family"] = json{{"kind", "powers"}, {"cap", cf_cap}};
        j["certificate"] = certificate_json(
            lemma_quantities(sym, cf_alpha, cf_s, cf_m, cf_cap, cf_tol));
      }
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*sqf) {
      SignedMeasure mu = resolve_measure(sq_measure, sq_K, sq_eps);
      SpatialSequence f = input_sequence(sq_input, sq_W);
      Trajectory traj = trajectory(mu, sq_m, f, sq_N, sq_eps);
      FunctionalResult r = square_function(traj, sq_alpha, sq_s);
      json j;
      j["command"] = "square-fn";
      j["measure"] = sq_measure;
      j["input"] = sq_input;
      j["m"] = sq_m;
      j["alpha"] = sq_alpha;
      j["s"] = sq_s;
      j["N"] = sq_N;
      j["W"] = sq_W;
      json fj = functional_json(r);
      for (auto& [k, v] : fj.items()) j[k] = v;
      std::cout << j.dump(2) << '\n';
      if (!sq_csv.empty()) write_site_csv(sq_csv, r.pointwise);
      if (!sq_dat.empty()) write_site_dat(sq_dat, r.pointwise);
      return 0;
    }

    if (*varn) {
      SignedMeasure mu = resolve_measure(vn_measure, vn_K, vn_eps);
      SpatialSequence f = input_sequence(vn_input, vn_W);
      Trajectory traj = trajectory(mu, vn_m, f, vn_N, vn_eps);
      GapSequence gaps;
      BlockMode mode;
      if (vn_mode == "full") {
        gaps.alpha = 0.0;
        gaps.n = {1, vn_N};
        mode = BlockMode::kBlockVariation;
      } else {
        gaps = gap_subsequence(vn_gaps_alpha, vn_N);
        if (vn_mode == "endpoint") {
          mode = BlockMode::kEndpointDiff;
        } else if (vn_mode == "blockmax") {
          mode = BlockMode::kBlockMax;
        } else if (vn_mode == "blockvar") {
          mode = BlockMode::kBlockVariation;
        } else {
          throw std::invalid_argument("unknown mode '" + vn_mode + "'");
        }
      }
      FunctionalResult r = block_functional(traj, gaps, vn_beta, vn_s, mode);
      json j;
      j["command"] = "var-norm";
      j["measure"] = vn_measure;
      j["input"] = vn_input;
      j["m"] = vn_m;
      j["beta"] = vn_beta;
      j["s"] = vn_s;
      j["N"] = vn_N;
      j["W"] = vn_W;
      j["mode"] = vn_mode;
      j["gaps_alpha"] = vn_mode == "full" ? json(nullptr) : json(vn_gaps_alpha);
      j["blocks"] = gaps.n.size() - 1;
      json fj = functional_json(r);
      for (auto& [k, v] : fj.items()) j[k] = v;
      std::cout << j.dump(2) << '\n';
      if (!vn_csv.empty()) write_site_csv(vn_csv, r.pointwise);
      if (!vn_dat.empty()) write_site_dat(vn_dat, r.pointwise);
      return 0;
    }

    if (*probe) {
      pr_cfg.probe = pr_name;
      pr_cfg.random_count =
          pr_random >= 0 ? pr_random : (pr_name == "main-theorem" ? 20 : 0);
      ReportRecord rec = run_probe(pr_cfg);
      std::cout << rec.rendered();
      if (!pr_cfg.out_dir.empty()) {
        write_outputs(rec, pr_cfg);
        std::fprintf(stderr, "wrote %s/report.json and per-arm tables\n",
                     pr_cfg.out_dir.c_str());
      }
      return 0;
    }

    if (*runc) {
      ExperimentConfig cfg = ExperimentConfig::from_file(run_path);
      if (run_has_seed) cfg.seed = run_seed;
      if (!run_out.empty()) cfg.out_dir = run_out;
      ReportRecord rec = run_probe(cfg);
      std::cout << rec.rendered();
      if (!cfg.out_dir.empty()) {
        write_outputs(rec, cfg);
        std::fprintf(stderr, "wrote %s/report.json and per-arm tables\n",
                     cfg.out_dir.c_str());
      }
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
