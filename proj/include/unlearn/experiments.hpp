#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unlearn/glm.hpp"

namespace unlearn {

enum class ScaleMode { fixed, theoretical, empirical };

struct ScaleSpec {
  ScaleMode mode = ScaleMode::fixed;
  double fixed_r = 0.0;  // fixed mode
  int m0 = 50;           // empirical mode: subsets per calibration

  // "fixed:<r>", "theoretical", "empirical:<m0>"
  static ScaleSpec parse(const std::string& text);
  std::string to_string() const;
};

struct ExperimentConfig {
  std::string kind;  // p_scaling | m_scaling | noise_comparison
  LossKind loss = LossKind::logistic;
  double lambda = 1.0;
  double nu = 1.0;
  double sigma = 1.0;       // linear generator noise (squared loss only)
  std::vector<int> p_grid;  // p_scaling: n = p at every point
  int n = 0;                // fixed size for m_scaling / noise_comparison
  std::vector<int> m_grid;  // m_scaling
  int m = 1;                // removal count elsewhere
  int trials = 100;
  std::uint64_t seed = 1;
  double epsilon = 0.1;
  ScaleSpec scale;
  int n_test = 10000;
  int workers = 0;           // 0 = hardware concurrency
  std::string output_dir;    // empty means the current directory

  void validate() const;
};

// Flat key-value config with [sections]; unknown keys are rejected by
// their full section.key path.
ExperimentConfig load_config(const std::string& path);

// One Monte Carlo trial at one grid point.
struct ExperimentRecord {
  int n = 0, p = 0, m = 0;
  double lambda = 0.0, epsilon = 0.0;
  int trial = 0;
  double err_exact = 0.0, err_t1 = 0.0, err_t2 = 0.0;
  double ged_t1 = 0.0, ged_t2 = 0.0;
  double in_sample_t1 = 0.0, in_sample_t2 = 0.0;
  double out_sample_t1 = 0.0, out_sample_t2 = 0.0;
  double noise_norm_t1 = 0.0, noise_norm_t2 = 0.0;
  double seconds = 0.0;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  // in natural-log space
  double r2 = 0.0;
};

// OLS on (log x, log y); rejects nonpositive values and fewer than 3 points.
SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

struct ExperimentSummary {
  std::vector<ExperimentRecord> records;
  // quantity name -> slope of log mean error against log p (or log m)
  std::vector<std::pair<std::string, SlopeFit>> slopes;
  std::uint64_t digest = 0;  // over correctness columns (timing excluded)
  std::string csv_path;
};

// Runs the configured experiment, writing <kind>.csv, <kind>_slopes.csv
// (scaling runs), <kind>_paired_loss.csv (noise comparison) and the SVG
// charts into cfg.output_dir. Trials execute in parallel but the outputs
// are reduced in (grid point, trial) order, so reruns with the same config
// produce identical correctness columns.
ExperimentSummary run_experiment(const ExperimentConfig& cfg);

}  // namespace unlearn
