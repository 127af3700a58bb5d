#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rittlab {

// One weighted-sum arm evaluated during a probe: weight n^alpha on |.|^s.
struct ArmSpec {
  std::string name;
  double alpha = 0.0;
  double s = 1.0;
  double beta = 0.0;    // block/variation weight, when the probe uses one
  std::string mode;     // probe-specific qualifier ("endpoint", ...)
};

struct ExperimentConfig {
  std::string probe = "main-theorem";
  std::string measure = "nu_alpha:0.5";
  std::int64_t K = 1 << 18;          // measure truncation length
  double measure_eps = 0.0;          // extra weight-drop threshold
  double m = 1.0;                    // difference power
  int N = 4096;                      // orbit length
  std::int64_t W = 1 << 18;          // window halfwidth
  double alpha = 1.0;                // weight exponent (hypothesis arm)
  double s = 3.0;                    // power (hypothesis arm)
  double beta = 0.0;                 // block weight exponent
  double gaps_alpha = 0.5;           // spacing exponent of the gap sequence
  int random_count = 0;              // extra random unit-l1 inputs
  int random_support = 64;
  std::uint64_t seed = 20260817ull;
  double tol = 1e-6;
  std::vector<ArmSpec> arms;         // optional override of the probe's arms
  std::string out_dir;               // empty = no files written

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);
  std::string to_json_text() const;
  void validate() const;  // throws std::invalid_argument
};

// A probe report. `payload` is a deterministic JSON document (same config +
// seed => identical bytes); wall-clock timing travels separately and is
// appended only in the pretty rendering.
struct ReportRecord {
  std::string payload;
  double wall_ms = 0.0;
  std::string rendered() const;  // payload with timing attached
};

ReportRecord run_probe(const ExperimentConfig& cfg);  // dispatch on cfg.probe

ReportRecord run_main_theorem_probe(const ExperimentConfig& cfg);
ReportRecord run_open_question_probe(const ExperimentConfig& cfg);
ReportRecord run_corollary_sup_probe(const ExperimentConfig& cfg);
ReportRecord run_variation_probe(const ExperimentConfig& cfg);
ReportRecord run_longvar_probe(const ExperimentConfig& cfg);
ReportRecord run_lp_square_probe(const ExperimentConfig& cfg);

// Write report.json plus one CSV per arm (level table) into cfg.out_dir.
void write_outputs(const ReportRecord& record, const ExperimentConfig& cfg);

}  // namespace rittlab
