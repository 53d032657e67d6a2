#include "unlearn/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "unlearn/errors.hpp"
#include "unlearn/metrics.hpp"
#include "unlearn/noise.hpp"
#include "unlearn/solver.hpp"
#include "unlearn/svg.hpp"
#include "unlearn/unlearn.hpp"

namespace unlearn {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s, std::uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

struct GridPoint {
  int n, p, m;
};

struct PairedRow {
  int trial;
  std::string kind;  // "forgotten" or "heldout"
  int index;         // row index for forgotten points, -1 for heldout
  double loss_exact, loss_t1, loss_t2;
};

struct TrialOutput {
  ExperimentRecord rec;
  std::vector<PairedRow> paired;
};

double plot_floor(double v) { return std::max(v, 1e-16); }

TrialOutput run_trial(const ExperimentConfig& cfg, const GridPoint& gp,
                      std::size_t grid_index, int trial, const RngStream& root) {
  const auto t_start = std::chrono::steady_clock::now();
  RngStream rng = root.substream(grid_index + 1, static_cast<std::uint64_t>(trial) + 1);
  RngStream rng_data = rng.substream(1);
  RngStream rng_removal = rng.substream(2);
  RngStream rng_calib = rng.substream(3);
  RngStream rng_noise1 = rng.substream(4);
  RngStream rng_noise2 = rng.substream(5);
  RngStream rng_ged1 = rng.substream(6);
  RngStream rng_ged2 = rng.substream(7);
  RngStream rng_fresh = rng.substream(8);

  const ModelSpec spec{cfg.loss, Regularizer{RegKind::ridge, cfg.lambda, cfg.nu}};
  const Dataset ds = cfg.loss == LossKind::logistic
                         ? generate_logistic(gp.n, gp.p, rng_data)
                         : generate_linear(gp.n, gp.p, cfg.sigma, rng_data);
  const Objective obj(spec, ds.X, ds.y);

  const FitResult full = fit(obj);
  if (!full.converged) throw NumericalError("experiment: full fit did not converge");

  const RemovalRequest req = RemovalRequest::random(gp.n, gp.m, rng_removal);
  const UnlearnResult steps = unlearn(obj, full.beta, req, 2, 0.0, cfg.epsilon, rng_noise1);
  const Objective wo = obj.without(req.indices);
  const FitResult retrain = fit(wo, steps.iterates[2], default_tol_abs(gp.p));
  if (!retrain.converged) throw NumericalError("experiment: retrain did not converge");
  // Saturated retrain: the two-step errors sit far below the gradient-norm
  // tolerance, so the comparison point has to be polished past it.
  const Eigen::VectorXd exact_beta = newton_polish(wo, retrain.beta);

  double r1 = 0.0, r2 = 0.0;
  switch (cfg.scale.mode) {
    case ScaleMode::fixed:
      r1 = r2 = cfg.scale.fixed_r;
      break;
    case ScaleMode::theoretical: {
      TheoryConstants tc;
      tc.lambda = cfg.lambda;
      tc.gamma0 = static_cast<double>(gp.n) / gp.p;
      tc.n = gp.n;
      tc.p = gp.p;
      tc.m = gp.m;
      tc.nu = cfg.nu;
      tc.t = 1;
      r1 = theoretical_scale(tc);
      tc.t = 2;
      r2 = theoretical_scale(tc);
      break;
    }
    case ScaleMode::empirical: {
      const auto cal =
          calibrate_empirical(obj, full.beta, gp.m, {1, 2}, cfg.scale.m0, rng_calib);
      r1 = cal[0].scale;
      r2 = cal[1].scale;
      break;
    }
  }

  const Eigen::VectorXd b1 =
      sample_isotropic_laplace({gp.p, r1, cfg.epsilon}, rng_noise1);
  const Eigen::VectorXd b2 =
      sample_isotropic_laplace({gp.p, r2, cfg.epsilon}, rng_noise2);
  const Eigen::VectorXd pert1 = steps.iterates[1] + b1;
  const Eigen::VectorXd pert2 = steps.iterates[2] + b2;

  const TestSampler sampler = make_test_sampler(ds, spec, cfg.sigma);
  const GedEstimate ged1 =
      ged_estimate(spec, exact_beta, pert1, sampler, cfg.n_test, rng_ged1);
  const GedEstimate ged2 =
      ged_estimate(spec, exact_beta, pert2, sampler, cfg.n_test, rng_ged2);
  const auto [y0, x0] = sampler(rng_fresh);

  TrialOutput out;
  auto& rec = out.rec;
  rec.n = gp.n;
  rec.p = gp.p;
  rec.m = gp.m;
  rec.lambda = cfg.lambda;
  rec.epsilon = cfg.epsilon;
  rec.trial = trial;
  rec.err_exact = (full.beta - exact_beta).norm();
  rec.err_t1 = (steps.iterates[1] - exact_beta).norm();
  rec.err_t2 = (steps.iterates[2] - exact_beta).norm();
  rec.ged_t1 = ged1.mean;
  rec.ged_t2 = ged2.mean;
  rec.in_sample_t1 = in_sample_error(spec, pert1, exact_beta, ds, req.indices);
  rec.in_sample_t2 = in_sample_error(spec, pert2, exact_beta, ds, req.indices);
  rec.out_sample_t1 = point_loss_gap(spec, pert1, exact_beta, y0, x0);
  rec.out_sample_t2 = point_loss_gap(spec, pert2, exact_beta, y0, x0);
  rec.noise_norm_t1 = b1.norm();
  rec.noise_norm_t2 = b2.norm();

  if (cfg.kind == "noise_comparison") {
    for (int i : req.indices) {
      PairedRow row;
      row.trial = trial;
      row.kind = "forgotten";
      row.index = i;
      const Eigen::VectorXd xi = ds.X.row(i).transpose();
      row.loss_exact = loss_value(spec.loss, ds.y[i], xi.dot(exact_beta));
      row.loss_t1 = loss_value(spec.loss, ds.y[i], xi.dot(pert1));
      row.loss_t2 = loss_value(spec.loss, ds.y[i], xi.dot(pert2));
      out.paired.push_back(row);
    }
    PairedRow row;
    row.trial = trial;
    row.kind = "heldout";
    row.index = -1;
    row.loss_exact = loss_value(spec.loss, y0, x0.dot(exact_beta));
    row.loss_t1 = loss_value(spec.loss, y0, x0.dot(pert1));
    row.loss_t2 = loss_value(spec.loss, y0, x0.dot(pert2));
    out.paired.push_back(row);
  }

  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

}  // namespace

ScaleSpec ScaleSpec::parse(const std::string& text) {
  ScaleSpec s;
  if (text == "theoretical") {
    s.mode = ScaleMode::theoretical;
    return s;
  }
  if (text.rfind("empirical:", 0) == 0) {
    s.mode = ScaleMode::empirical;
    s.m0 = std::stoi(text.substr(10));
    if (s.m0 < 2) throw ConfigError("scale: empirical m0 must be >= 2");
    return s;
  }
  if (text.rfind("fixed:", 0) == 0) {
    s.mode = ScaleMode::fixed;
    s.fixed_r = std::stod(text.substr(6));
    if (s.fixed_r < 0.0) throw ConfigError("scale: fixed r must be >= 0");
    return s;
  }
  throw ConfigError("scale: expected fixed:<r>, theoretical, or empirical:<m0>, got '" +
                    text + "'");
}

std::string ScaleSpec::to_string() const {
  switch (mode) {
    case ScaleMode::fixed:
      return "fixed:" + fmt17(fixed_r);
    case ScaleMode::theoretical:
      return "theoretical";
    case ScaleMode::empirical:
      return "empirical:" + std::to_string(m0);
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (kind != "p_scaling" && kind != "m_scaling" && kind != "noise_comparison") {
    throw ConfigError("run.experiment: unknown kind '" + kind + "'");
  }
  if (trials < 1) throw ConfigError("run.trials: must be >= 1");
  if (n_test < 2) throw ConfigError("run.n_test: must be >= 2");
  if (workers < 0) throw ConfigError("run.workers: must be >= 0");
  if (!(lambda > 0.0)) throw ConfigError("model.lambda: must be > 0");
  if (!(nu > 0.0) || nu > 2.0) throw ConfigError("model.nu: need 0 < nu <= 2");
  if (sigma < 0.0) throw ConfigError("model.sigma: must be >= 0");
  if (!(epsilon > 0.0)) throw ConfigError("noise.epsilon: must be > 0");

  if (kind == "p_scaling") {
    if (p_grid.size() < 3) throw ConfigError("grid.p: need at least 3 values for a slope");
    if (m_grid.size() > 1) throw ConfigError("grid.m: expected a single value for p_scaling");
    if (n != 0) throw ConfigError("grid.n: not used by p_scaling (n = p on the grid)");
    for (int p : p_grid) {
      if (p < 2) throw ConfigError("grid.p: values must be >= 2");
      if (m < 1 || m > p - 1) throw ConfigError("grid.m: need 1 <= m <= n-1 at every point");
    }
  } else if (kind == "m_scaling") {
    if (!p_grid.empty()) throw ConfigError("grid.p: not used by m_scaling (set grid.n)");
    if (n < 2) throw ConfigError("grid.n: must be >= 2");
    if (m_grid.size() < 3) throw ConfigError("grid.m: need at least 3 values for a slope");
    for (int mm : m_grid) {
      if (mm < 1 || mm > n - 1) throw ConfigError("grid.m: need 1 <= m <= n-1 at every point");
    }
  } else {
    if (!p_grid.empty()) throw ConfigError("grid.p: not used by noise_comparison (set grid.n)");
    if (m_grid.size() > 1) throw ConfigError("grid.m: expected a single value for noise_comparison");
    if (n < 2) throw ConfigError("grid.n: must be >= 2");
    if (m < 1 || m > n - 1) throw ConfigError("grid.m: need 1 <= m <= n-1");
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);

  ExperimentConfig cfg;
  std::string line, section;
  int line_no = 0;
  const auto parse_int_list = [](const std::string& text, const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        out.push_back(std::stoi(item));
      } catch (const std::exception&) {
        throw ConfigError(key + ": bad integer '" + item + "'");
      }
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
  };

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": malformed section");
      }
      section = line.substr(1, line.size() - 2);
      if (section != "run" && section != "model" && section != "grid" && section != "noise") {
        throw ConfigError("unknown config section: [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    auto strip = [](std::string s) {
      const auto sb = s.find_first_not_of(" \t");
      const auto se = s.find_last_not_of(" \t");
      return sb == std::string::npos ? std::string() : s.substr(sb, se - sb + 1);
    };
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;

    try {
      if (full == "run.experiment") cfg.kind = value;
      else if (full == "run.seed") cfg.seed = std::stoull(value);
      else if (full == "run.trials") cfg.trials = std::stoi(value);
      else if (full == "run.workers") cfg.workers = std::stoi(value);
      else if (full == "run.output_dir") cfg.output_dir = value;
      else if (full == "run.n_test") cfg.n_test = std::stoi(value);
      else if (full == "model.loss") cfg.loss = loss_from_name(value);
      else if (full == "model.lambda") cfg.lambda = std::stod(value);
      else if (full == "model.nu") cfg.nu = std::stod(value);
      else if (full == "model.sigma") cfg.sigma = std::stod(value);
      else if (full == "grid.p") cfg.p_grid = parse_int_list(value, full);
      else if (full == "grid.n") cfg.n = std::stoi(value);
      else if (full == "grid.m") {
        cfg.m_grid = parse_int_list(value, full);
        cfg.m = cfg.m_grid[0];
      } else if (full == "noise.epsilon") cfg.epsilon = std::stod(value);
      else if (full == "noise.scale") cfg.scale = ScaleSpec::parse(value);
      else throw ConfigError("unknown config key: " + full);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      throw ConfigError(full + ": " + ex.what());
    }
  }
  cfg.validate();
  return cfg;
}

SlopeFit fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("fit_loglog_slope: need >= 3 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> logs;
  logs.reserve(points.size());
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw std::invalid_argument("fit_loglog_slope: values must be positive");
    }
    logs.emplace_back(std::log(x), std::log(y));
    sx += logs.back().first;
    sy += logs.back().second;
  }
  const double k = static_cast<double>(points.size());
  for (const auto& [lx, ly] : logs) {
    sxx += (lx - sx / k) * (lx - sx / k);
    sxy += (lx - sx / k) * (ly - sy / k);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_loglog_slope: x values are all equal");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = sy / k - f.slope * sx / k;
  double ss_res = 0, ss_tot = 0;
  for (const auto& [lx, ly] : logs) {
    const double pred = f.intercept + f.slope * lx;
    ss_res += (ly - pred) * (ly - pred);
    ss_tot += (ly - sy / k) * (ly - sy / k);
  }
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string out_dir = cfg.output_dir.empty() ? "." : cfg.output_dir;
  std::filesystem::create_directories(out_dir);

  std::vector<GridPoint> grid;
  if (cfg.kind == "p_scaling") {
    for (int p : cfg.p_grid) grid.push_back({p, p, cfg.m});
  } else if (cfg.kind == "m_scaling") {
    for (int mm : cfg.m_grid) grid.push_back({cfg.n, cfg.n, mm});
  } else {
    grid.push_back({cfg.n, cfg.n, cfg.m});
  }

  const RngStream root(cfg.seed);
  const std::size_t total = grid.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<TrialOutput> outputs(total);

  int n_workers = cfg.workers;
  if (n_workers == 0) {
    n_workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&]() {
    try {
      for (;;) {
        const std::size_t item = next.fetch_add(1);
        if (item >= total) return;
        const std::size_t gi = item / static_cast<std::size_t>(cfg.trials);
        const int trial = static_cast<int>(item % static_cast<std::size_t>(cfg.trials));
        outputs[item] = run_trial(cfg, grid[gi], gi, trial, root);
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  };
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentSummary summary;
  summary.records.reserve(total);
  for (const auto& o : outputs) summary.records.push_back(o.rec);

  // Main CSV; the digest covers every column except the machine-dependent
  // trailing seconds field.
  summary.csv_path = out_dir + "/" + cfg.kind + ".csv";
  std::ofstream csv(summary.csv_path);
  if (!csv) throw ConfigError("cannot write " + summary.csv_path);
  const std::string header =
      "n,p,m,lambda,epsilon,trial,err_exact,err_t1,err_t2,ged_t1,ged_t2,"
      "in_sample_t1,in_sample_t2,out_sample_t1,out_sample_t2,"
      "noise_norm_t1,noise_norm_t2";
  std::uint64_t digest = fnv1a(header, 1469598103934665603ull);
  csv << header << ",seconds\n";
  for (const auto& r : summary.records) {
    std::ostringstream row;
    row << r.n << ',' << r.p << ',' << r.m << ',' << fmt17(r.lambda) << ','
        << fmt17(r.epsilon) << ',' << r.trial << ',' << fmt17(r.err_exact) << ','
        << fmt17(r.err_t1) << ',' << fmt17(r.err_t2) << ',' << fmt17(r.ged_t1) << ','
        << fmt17(r.ged_t2) << ',' << fmt17(r.in_sample_t1) << ','
        << fmt17(r.in_sample_t2) << ',' << fmt17(r.out_sample_t1) << ','
        << fmt17(r.out_sample_t2) << ',' << fmt17(r.noise_norm_t1) << ','
        << fmt17(r.noise_norm_t2);
    digest = fnv1a(row.str() + "\n", digest);
    char sec[32];
    std::snprintf(sec, sizeof(sec), "%.6f", r.seconds);
    csv << row.str() << ',' << sec << "\n";
  }
  summary.digest = digest;

  // Per-grid-point means and log-log slopes for the scaling experiments.
  if (cfg.kind == "p_scaling" || cfg.kind == "m_scaling") {
    const bool by_p = cfg.kind == "p_scaling";
    std::vector<std::pair<double, double>> mean_t1, mean_t2, mean_exact;
    std::vector<std::vector<std::pair<double, double>>> scatter(3);
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
      const double x = by_p ? grid[gi].p : grid[gi].m;
      double s1 = 0, s2 = 0, se = 0;
      for (int t = 0; t < cfg.trials; ++t) {
        const auto& r = summary.records[gi * static_cast<std::size_t>(cfg.trials) +
                                        static_cast<std::size_t>(t)];
        s1 += r.err_t1;
        s2 += r.err_t2;
        se += r.err_exact;
        scatter[0].emplace_back(x, plot_floor(r.err_t1));
        scatter[1].emplace_back(x, plot_floor(r.err_t2));
        scatter[2].emplace_back(x, plot_floor(r.err_exact));
      }
      mean_t1.emplace_back(x, s1 / cfg.trials);
      mean_t2.emplace_back(x, s2 / cfg.trials);
      mean_exact.emplace_back(x, se / cfg.trials);
    }
    summary.slopes.emplace_back("err_t1", fit_loglog_slope(mean_t1));
    summary.slopes.emplace_back("err_t2", fit_loglog_slope(mean_t2));
    summary.slopes.emplace_back("err_exact", fit_loglog_slope(mean_exact));

    std::ofstream sl(out_dir + "/" + cfg.kind + "_slopes.csv");
    sl << "quantity,slope,intercept,r2\n";
    for (const auto& [name, f] : summary.slopes) {
      sl << name << ',' << fmt17(f.slope) << ',' << fmt17(f.intercept) << ','
         << fmt17(f.r2) << "\n";
    }

    const std::string xlab = by_p ? "p" : "m";
    const char* names[3] = {"err_t1", "err_t2", "err_exact"};
    const std::vector<std::pair<double, double>>* means[3] = {&mean_t1, &mean_t2,
                                                              &mean_exact};
    for (int q = 0; q < 3; ++q) {
      SvgPlotOptions opt;
      opt.title = std::string(names[q]) + " vs " + xlab;
      opt.x_label = xlab;
      opt.y_label = names[q];
      opt.log_x = true;
      opt.log_y = true;
      SvgSeries pts;
      pts.points = scatter[static_cast<std::size_t>(q)];
      pts.color = "#9bbcd8";
      pts.label = "trials";
      SvgSeries mline;
      for (auto [x, y] : *means[q]) mline.points.emplace_back(x, plot_floor(y));
      mline.color = "#c0392b";
      mline.label = "mean";
      mline.connect = true;
      write_svg_plot(out_dir + "/" + cfg.kind + "_" + names[q] + ".svg", opt,
                     {pts, mline});
    }
  }

  if (cfg.kind == "noise_comparison") {
    std::ofstream pl(out_dir + "/noise_comparison_paired_loss.csv");
    pl << "trial,kind,index,loss_exact,loss_t1,loss_t2\n";
    for (const auto& o : outputs) {
      for (const auto& row : o.paired) {
        pl << row.trial << ',' << row.kind << ',' << row.index << ','
           << fmt17(row.loss_exact) << ',' << fmt17(row.loss_t1) << ','
           << fmt17(row.loss_t2) << "\n";
      }
    }
    for (const std::string kind : {"forgotten", "heldout"}) {
      SvgSeries s1, s2;
      s1.color = "#c0392b";
      s1.label = "T=1";
      s2.color = "#1f6fb2";
      s2.label = "T=2";
      for (const auto& o : outputs) {
        for (const auto& row : o.paired) {
          if (row.kind != kind) continue;
          s1.points.emplace_back(plot_floor(row.loss_exact), plot_floor(row.loss_t1));
          s2.points.emplace_back(plot_floor(row.loss_exact), plot_floor(row.loss_t2));
        }
      }
      SvgPlotOptions opt;
      opt.title = "perturbed vs exact loss (" + kind + ")";
      opt.x_label = "exact removal loss";
      opt.y_label = "perturbed loss";
      opt.log_x = true;
      opt.log_y = true;
      opt.diagonal = true;
      write_svg_plot(out_dir + "/noise_comparison_" + kind + ".svg", opt, {s1, s2});
    }
  }

  // Resolved configuration next to the outputs.
  std::ofstream res(out_dir + "/" + cfg.kind + "_resolved.cfg");
  res << "[run]\nexperiment = " << cfg.kind << "\nseed = " << cfg.seed
      << "\ntrials = " << cfg.trials << "\nworkers = " << cfg.workers
      << "\noutput_dir = " << out_dir << "\nn_test = " << cfg.n_test
      << "\n\n[model]\nloss = " << loss_name(cfg.loss) << "\nlambda = " << fmt17(cfg.lambda)
      << "\nnu = " << fmt17(cfg.nu) << "\nsigma = " << fmt17(cfg.sigma) << "\n\n[grid]\n";
  if (cfg.kind == "p_scaling") {
    res << "p = ";
    for (std::size_t i = 0; i < cfg.p_grid.size(); ++i) {
      res << (i ? "," : "") << cfg.p_grid[i];
    }
    res << "\nm = " << cfg.m << "\n";
  } else if (cfg.kind == "m_scaling") {
    res << "n = " << cfg.n << "\nm = ";
    for (std::size_t i = 0; i < cfg.m_grid.size(); ++i) {
      res << (i ? "," : "") << cfg.m_grid[i];
    }
    res << "\n";
  } else {
    res << "n = " << cfg.n << "\nm = " << cfg.m << "\n";
  }
  res << "\n[noise]\nepsilon = " << fmt17(cfg.epsilon)
      << "\nscale = " << cfg.scale.to_string() << "\n";
  res << "\n# digest (correctness columns) = " << std::hex << summary.digest << std::dec
      << "\n";

  return summary;
}

}  // namespace unlearn
