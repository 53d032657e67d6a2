// Command-line front end: fitting, unlearning, calibration, certification
// checks, and the Monte Carlo experiment harness.
//
// Exit codes: 0 success, 2 usage/config error, 3 numerical failure.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "unlearn/data.hpp"
#include "unlearn/errors.hpp"
#include "unlearn/experiments.hpp"
#include "unlearn/metrics.hpp"
#include "unlearn/noise.hpp"
#include "unlearn/solver.hpp"
#include "unlearn/unlearn.hpp"

namespace {

using namespace unlearn;

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::vector<int> parse_index_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("--remove: bad index '" + item + "'");
    }
  }
  return out;
}

struct FitArgs {
  std::string data_path;
  std::vector<int> synthetic;  // n p
  std::string loss = "logistic";
  double lambda = 1.0;
  double nu = 1.0;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string save_data;
  double tol = 0.0;  // 0 = default 1e-10*sqrt(p)
  int max_iter = 100;
};

int cmd_fit(const FitArgs& a) {
  ModelSpec spec{loss_from_name(a.loss), Regularizer{RegKind::ridge, a.lambda, a.nu}};
  spec.validate();

  Dataset ds;
  if (!a.synthetic.empty()) {
    RngStream rng(a.seed);
    ds = spec.loss == LossKind::logistic
             ? generate_logistic(a.synthetic[0], a.synthetic[1], rng)
             : generate_linear(a.synthetic[0], a.synthetic[1], a.sigma, rng);
  } else {
    ds = load_csv(a.data_path);
    ds.meta.seed = a.seed;
  }
  if (ds.meta.n < 1) throw ConfigError("dataset has no rows");

  std::printf("config: loss=%s lambda=%.17g nu=%.17g n=%d p=%d seed=%llu\n",
              loss_name(spec.loss), a.lambda, a.nu, ds.meta.n, ds.meta.p,
              static_cast<unsigned long long>(a.seed));

  const Objective obj(spec, ds.X, ds.y);
  const double tol = a.tol > 0.0 ? a.tol : default_tol_abs(obj.p());
  const FitResult res = fit(obj, Eigen::VectorXd::Zero(obj.p()), tol, a.max_iter);

  std::printf("fit: n=%d p=%d iterations=%d grad_norm=%.3e converged=%d\n", obj.n(),
              obj.p(), res.iterations, res.grad_norm, res.converged ? 1 : 0);

  if (!a.save_data.empty()) save_csv(ds, a.save_data);
  ModelFile mf;
  mf.spec = spec;
  mf.beta = res.beta;
  mf.grad_norm = res.grad_norm;
  mf.iterations = res.iterations;
  mf.converged = res.converged;
  mf.n = ds.meta.n;
  mf.seed = a.seed;
  save_model(mf, a.out);

  if (!res.converged) {
    std::fprintf(stderr, "fit did not converge within %d iterations\n", a.max_iter);
    return kExitNumerical;
  }
  return 0;
}

struct UnlearnArgs {
  std::string model_path;
  std::string data_path;
  std::string remove;
  int remove_random = -1;
  std::string steps = "2";
  double epsilon = 0.1;
  std::string scale = "theoretical";
  std::uint64_t seed = 1;
  std::string out;
  bool verify_exact = false;
  int workers = 1;
};

int cmd_unlearn(const UnlearnArgs& a) {
  const ModelFile mf = load_model(a.model_path);
  Dataset ds = load_csv(a.data_path);
  if (ds.meta.p != mf.beta.size()) {
    throw ConfigError("model p=" + std::to_string(mf.beta.size()) +
                      " does not match dataset p=" + std::to_string(ds.meta.p));
  }
  if (ds.meta.n != mf.n) {
    throw ConfigError("model was trained on n=" + std::to_string(mf.n) +
                      " rows, dataset has " + std::to_string(ds.meta.n));
  }
  const Objective obj(mf.spec, ds.X, ds.y);
  RngStream rng(a.seed);

  RemovalRequest req{};
  if (!a.remove.empty() && a.remove_random >= 0) {
    throw ConfigError("give either --remove or --remove-random, not both");
  }
  RngStream rng_pick = rng.substream(1);
  RngStream rng_calib = rng.substream(2);
  RngStream rng_noise = rng.substream(3);
  RngStream rng_probe = rng.substream(4);
  if (!a.remove.empty()) {
    req = RemovalRequest::of(parse_index_list(a.remove), obj.n());
  } else if (a.remove_random >= 0) {
    req = RemovalRequest::random(obj.n(), a.remove_random, rng_pick);
  } else {
    throw ConfigError("one of --remove or --remove-random is required");
  }

  int steps;
  if (a.steps == "auto") {
    steps = min_newton_steps(req.m(), obj.n());
  } else {
    try {
      steps = std::stoi(a.steps);
    } catch (const std::exception&) {
      throw ConfigError("--steps: expected an integer or 'auto'");
    }
    if (steps < 0) throw ConfigError("--steps: must be >= 0");
  }

  const ScaleSpec scale_spec = ScaleSpec::parse(a.scale);
  double r = 0.0;
  switch (scale_spec.mode) {
    case ScaleMode::fixed:
      r = scale_spec.fixed_r;
      break;
    case ScaleMode::theoretical: {
      if (req.m() < 1) throw ConfigError("--scale theoretical requires m >= 1");
      TheoryConstants tc;
      tc.lambda = mf.spec.reg.lambda;
      tc.gamma0 = static_cast<double>(obj.n()) / obj.p();
      tc.n = obj.n();
      tc.p = obj.p();
      tc.m = req.m();
      tc.t = std::max(1, steps);
      tc.nu = mf.spec.reg.nu;
      r = theoretical_scale(tc);
      break;
    }
    case ScaleMode::empirical: {
      if (req.m() < 1) throw ConfigError("--scale empirical requires m >= 1");
      const auto cal = calibrate_empirical(obj, mf.beta, req.m(), {std::max(1, steps)},
                                           scale_spec.m0, rng_calib, a.workers);
      r = cal[0].scale;
      break;
    }
  }

  std::printf("config: model=%s data=%s m=%d steps=%d epsilon=%.17g scale=%s r=%.17g seed=%llu\n",
              a.model_path.c_str(), a.data_path.c_str(), req.m(), steps, a.epsilon,
              scale_spec.to_string().c_str(), r,
              static_cast<unsigned long long>(a.seed));

  const UnlearnResult res =
      unlearn::unlearn(obj, mf.beta, req, steps, r, a.epsilon, rng_noise);

  std::printf("unlearn: steps=%d noise_norm=%.6e\n", steps, res.noise.norm());

  if (a.verify_exact) {
    const Objective wo = obj.without(req.indices);
    const FitResult retrain = fit(wo, res.iterates.back(), default_tol_abs(obj.p()));
    if (!retrain.converged) throw NumericalError("verification retrain did not converge");
    const Eigen::VectorXd exact = newton_polish(wo, retrain.beta);
    for (std::size_t t = 0; t < res.iterates.size(); ++t) {
      std::printf("verify: t=%zu err=%.6e\n", t, (res.iterates[t] - exact).norm());
    }
    if (r > 0.0) {
      const CertReport rep = certify_check(res.iterates.back(), exact, r,
                                           a.epsilon, 1000, rng_probe);
      std::printf(
          "certify: delta_norm=%.6e scale=%.6e epsilon=%.17g satisfied=%d "
          "max_log_ratio=%.6e bound=%.6e\n",
          rep.delta_norm, rep.scale, rep.epsilon, rep.satisfied ? 1 : 0,
          rep.max_observed_log_ratio, rep.epsilon * rep.delta_norm / rep.scale);
    } else {
      std::printf("certify: skipped (scale r = 0)\n");
    }
  }

  ModelFile out = mf;
  out.beta = res.perturbed;
  out.seed = a.seed;
  out.steps = steps;
  out.epsilon = a.epsilon;
  out.noise_scale = r;
  save_model(out, a.out);
  return 0;
}

struct CalibrateArgs {
  std::string data_path;
  std::string loss = "logistic";
  double lambda = 1.0;
  double nu = 1.0;
  int m = 1;
  int steps = 2;
  int m0 = 50;
  std::uint64_t seed = 1;
  int workers = 1;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const ModelSpec spec{loss_from_name(a.loss), Regularizer{RegKind::ridge, a.lambda, a.nu}};
  const Dataset ds = load_csv(a.data_path);
  std::printf("config: data=%s loss=%s lambda=%.17g m=%d steps=%d m0=%d seed=%llu\n",
              a.data_path.c_str(), a.loss.c_str(), a.lambda, a.m, a.steps, a.m0,
              static_cast<unsigned long long>(a.seed));

  const Objective obj(spec, ds.X, ds.y);
  const FitResult full = fit(obj);
  if (!full.converged) throw NumericalError("full fit did not converge");
  RngStream rng(a.seed);
  const auto cal =
      calibrate_empirical(obj, full.beta, a.m, {a.steps}, a.m0, rng, a.workers);
  std::printf("calibrate: steps=%d raw_max=%.6e factor=%.6f scale=%.6e\n", cal[0].steps,
              cal[0].raw_max, cal[0].factor, cal[0].scale);

  TheoryConstants tc;
  tc.lambda = a.lambda;
  tc.gamma0 = static_cast<double>(obj.n()) / obj.p();
  tc.n = obj.n();
  tc.p = obj.p();
  tc.m = a.m;
  tc.t = a.steps;
  tc.nu = a.nu;
  std::printf("calibrate: theoretical=%.6e\n", theoretical_scale(tc));
  return 0;
}

struct CertifyArgs {
  std::string unlearned_path;
  std::string exact_path;
  double scale = 0.0;
  double epsilon = 0.1;
  int probes = 1000;
  std::uint64_t seed = 1;
};

int cmd_certify(const CertifyArgs& a) {
  const ModelFile tilde = load_model(a.unlearned_path);
  const ModelFile exact = load_model(a.exact_path);
  if (tilde.beta.size() != exact.beta.size()) {
    throw ConfigError("model dimensions differ");
  }
  double scale = a.scale;
  if (scale <= 0.0) {
    if (tilde.noise_scale > 0.0) {
      scale = tilde.noise_scale;
    } else {
      throw ConfigError("--scale must be > 0 (or stored in the unlearned model)");
    }
  }
  std::printf("config: unlearned=%s exact=%s scale=%.17g epsilon=%.17g probes=%d seed=%llu\n",
              a.unlearned_path.c_str(), a.exact_path.c_str(), scale, a.epsilon, a.probes,
              static_cast<unsigned long long>(a.seed));
  RngStream rng(a.seed);
  const CertReport rep =
      certify_check(tilde.beta, exact.beta, scale, a.epsilon, a.probes, rng);
  std::printf(
      "certify: delta_norm=%.6e scale=%.6e epsilon=%.17g satisfied=%d "
      "max_log_ratio=%.6e bound=%.6e\n",
      rep.delta_norm, rep.scale, rep.epsilon, rep.satisfied ? 1 : 0,
      rep.max_observed_log_ratio, rep.epsilon * rep.delta_norm / rep.scale);
  return 0;
}

struct ExperimentArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
};

int cmd_experiment(const ExperimentArgs& a) {
  ExperimentConfig cfg = load_config(a.config_path);
  if (a.seed) cfg.seed = *a.seed;
  if (a.trials) cfg.trials = *a.trials;
  if (a.workers) cfg.workers = *a.workers;
  if (a.out_dir) {
    cfg.output_dir = *a.out_dir;
  } else if (cfg.output_dir.empty()) {
    const char* env = std::getenv("UNLEARN_OUT_DIR");
    cfg.output_dir = env != nullptr ? env : ".";
  }
  cfg.validate();

  std::printf("config: experiment=%s trials=%d seed=%llu workers=%d scale=%s epsilon=%.17g out=%s\n",
              cfg.kind.c_str(), cfg.trials, static_cast<unsigned long long>(cfg.seed),
              cfg.workers, cfg.scale.to_string().c_str(), cfg.epsilon,
              cfg.output_dir.c_str());

  const ExperimentSummary summary = run_experiment(cfg);
  for (const auto& [name, f] : summary.slopes) {
    std::printf("slope: %s slope=%.4f intercept=%.4f r2=%.4f\n", name.c_str(), f.slope,
                f.intercept, f.r2);
  }
  std::printf("experiment: records=%zu csv=%s digest=%016llx\n", summary.records.size(),
              summary.csv_path.c_str(),
              static_cast<unsigned long long>(summary.digest));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified data removal for regularized GLMs"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Train the regularized model exactly");
  auto* fit_data = fit_cmd->add_option("--data", fit_args.data_path, "Dataset CSV");
  auto* fit_synth = fit_cmd->add_option("--synthetic", fit_args.synthetic,
                                        "Generate a synthetic dataset: n p")
                        ->expected(2);
  fit_data->excludes(fit_synth);
  fit_cmd->add_option("--loss", fit_args.loss, "logistic | squared")
      ->check(CLI::IsMember({"logistic", "squared"}));
  fit_cmd->add_option("--lambda", fit_args.lambda, "Ridge strength (> 0)");
  fit_cmd->add_option("--nu", fit_args.nu, "Declared strong-convexity constant");
  fit_cmd->add_option("--sigma", fit_args.sigma, "Linear-model noise sd");
  fit_cmd->add_option("--seed", fit_args.seed, "Root seed");
  fit_cmd->add_option("--out", fit_args.out, "Model file to write")->required();
  fit_cmd->add_option("--save-data", fit_args.save_data, "Also write the dataset CSV");
  fit_cmd->add_option("--tol", fit_args.tol, "Gradient-norm tolerance");
  fit_cmd->add_option("--max-iter", fit_args.max_iter, "Newton iteration cap");

  UnlearnArgs un_args;
  auto* un_cmd = app.add_subcommand("unlearn", "Remove rows with Newton steps plus noise");
  un_cmd->add_option("--model", un_args.model_path, "Fitted model file")->required();
  un_cmd->add_option("--data", un_args.data_path, "Training dataset CSV")->required();
  un_cmd->add_option("--remove", un_args.remove, "Comma-separated row indices");
  un_cmd->add_option("--remove-random", un_args.remove_random, "Remove m random rows");
  un_cmd->add_option("--steps", un_args.steps, "Newton step count or 'auto'");
  un_cmd->add_option("--epsilon", un_args.epsilon, "Privacy parameter (> 0)");
  un_cmd->add_option("--scale", un_args.scale,
                     "Noise scale: fixed:<r> | theoretical | empirical:<m0>");
  un_cmd->add_option("--seed", un_args.seed, "Root seed");
  un_cmd->add_option("--out", un_args.out, "Unlearned model file to write")->required();
  un_cmd->add_flag("--verify-exact", un_args.verify_exact,
                   "Retrain exactly and report per-step errors");
  un_cmd->add_option("--workers", un_args.workers, "Calibration threads");

  CalibrateArgs cal_args;
  auto* cal_cmd = app.add_subcommand("calibrate", "Empirical noise-scale calibration");
  cal_cmd->add_option("--data", cal_args.data_path, "Dataset CSV")->required();
  cal_cmd->add_option("--loss", cal_args.loss, "logistic | squared")
      ->check(CLI::IsMember({"logistic", "squared"}));
  cal_cmd->add_option("--lambda", cal_args.lambda, "Ridge strength");
  cal_cmd->add_option("--nu", cal_args.nu, "Strong-convexity constant");
  cal_cmd->add_option("-m,--m", cal_args.m, "Removal-set size");
  cal_cmd->add_option("--steps", cal_args.steps, "Newton step count");
  cal_cmd->add_option("--m0", cal_args.m0, "Number of sampled subsets");
  cal_cmd->add_option("--seed", cal_args.seed, "Root seed");
  cal_cmd->add_option("--workers", cal_args.workers, "Calibration threads");

  CertifyArgs cert_args;
  auto* cert_cmd = app.add_subcommand(
      "certify",
      "Density-ratio check between the stored coefficients of two model files. "
      "The norm condition proper applies to the pre-noise estimate; "
      "`unlearn --verify-exact` checks that form in-process.");
  cert_cmd->add_option("--unlearned", cert_args.unlearned_path, "Unlearned model file")
      ->required();
  cert_cmd->add_option("--exact", cert_args.exact_path, "Exact retrain model file")
      ->required();
  cert_cmd->add_option("--scale", cert_args.scale, "Noise scale r (> 0)");
  cert_cmd->add_option("--epsilon", cert_args.epsilon, "Privacy parameter");
  cert_cmd->add_option("--probes", cert_args.probes, "Probe draws");
  cert_cmd->add_option("--seed", cert_args.seed, "Root seed");

  ExperimentArgs exp_args;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a Monte Carlo experiment");
  exp_cmd->add_option("--config", exp_args.config_path, "Config file")->required();
  exp_cmd->add_option("--seed", exp_args.seed, "Override the config seed");
  exp_cmd->add_option("--trials", exp_args.trials, "Override the trial count");
  exp_cmd->add_option("--workers", exp_args.workers, "Override the worker count");
  exp_cmd->add_option("--out", exp_args.out_dir, "Override the output directory");

  try {
    app.parse(argc, argv);
    if (fit_cmd->parsed()) {
      if (fit_args.data_path.empty() && fit_args.synthetic.empty()) {
        throw ConfigError("fit: one of --data or --synthetic is required");
      }
      return cmd_fit(fit_args);
    }
    if (un_cmd->parsed()) return cmd_unlearn(un_args);
    if (cal_cmd->parsed()) return cmd_calibrate(cal_args);
    if (cert_cmd->parsed()) return cmd_certify(cert_args);
    if (exp_cmd->parsed()) return cmd_experiment(exp_args);
    return kExitUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumerical;
  }
}
