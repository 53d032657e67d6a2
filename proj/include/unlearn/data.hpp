#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "unlearn/glm.hpp"
#include "unlearn/rng.hpp"

namespace unlearn {

struct DatasetMeta {
  int n = 0;
  int p = 0;
  std::uint64_t seed = 0;
  std::string generator;  // "logistic", "linear", or "csv"
};

struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::optional<Eigen::VectorXd> beta_star;  // ground truth when synthetic
  DatasetMeta meta;
};

// beta* ~ N(0, I_p); rows x_i ~ N(0, I_p/n); y_i ~ Bernoulli(sigmoid(x_i' beta*)).
Dataset generate_logistic(int n, int p, RngStream& rng);
// Same design; y_i = x_i' beta* + sigma * N(0,1).
Dataset generate_linear(int n, int p, double sigma, RngStream& rng);

// CSV layout: header "y,x1,...,xp", one row per observation. Values are
// written with 17 significant digits so save/load round-trips doubles
// exactly. Malformed input raises ConfigError with the offending line.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);

// Fitted (or unlearned) coefficient vector plus enough metadata to rebuild
// the model spec and trace where it came from.
struct ModelFile {
  ModelSpec spec;
  Eigen::VectorXd beta;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = true;
  int n = 0;
  std::uint64_t seed = 0;
  // Set on unlearned models only.
  int steps = -1;
  double epsilon = 0.0;
  double noise_scale = -1.0;
};

// Key-value text with a leading format-version line; exact round-trip.
void save_model(const ModelFile& m, const std::string& path);
ModelFile load_model(const std::string& path);

}  // namespace unlearn
