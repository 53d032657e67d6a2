#include "unlearn/data.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "unlearn/errors.hpp"

namespace unlearn {

namespace {

constexpr const char* kModelFormat = "unlearn-model-v1";

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& cell, const std::string& path, int line_no) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(path + ":" + std::to_string(line_no) +
                      ": non-numeric cell '" + cell + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

Dataset generate_logistic(int n, int p, RngStream& rng) {
  if (n < 1 || p < 1) throw std::invalid_argument("generate_logistic: need n,p >= 1");
  Dataset ds;
  ds.meta = {n, p, rng.seed(), "logistic"};
  ds.beta_star = rng.gaussian_vector(p);
  const double row_scale = 1.0 / std::sqrt(static_cast<double>(n));
  ds.X.resize(n, p);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.X.row(i) = row_scale * rng.gaussian_vector(p).transpose();
    const double prob = sigmoid(ds.X.row(i).dot(*ds.beta_star));
    ds.y[i] = rng.uniform() < prob ? 1.0 : 0.0;
  }
  return ds;
}

Dataset generate_linear(int n, int p, double sigma, RngStream& rng) {
  if (n < 1 || p < 1) throw std::invalid_argument("generate_linear: need n,p >= 1");
  if (sigma < 0.0) throw std::invalid_argument("generate_linear: sigma must be >= 0");
  Dataset ds;
  ds.meta = {n, p, rng.seed(), "linear"};
  ds.beta_star = rng.gaussian_vector(p);
  const double row_scale = 1.0 / std::sqrt(static_cast<double>(n));
  ds.X.resize(n, p);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.X.row(i) = row_scale * rng.gaussian_vector(p).transpose();
    ds.y[i] = ds.X.row(i).dot(*ds.beta_star) + sigma * rng.normal();
  }
  return ds;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open dataset file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ":1: empty file, expected header");
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "y") {
    throw ConfigError(path + ":1: header must start with 'y', got '" + line + "'");
  }
  const int p = static_cast<int>(header.size()) - 1;
  if (p < 1) throw ConfigError(path + ":1: header has no feature columns");

  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != p + 1) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(p + 1) + " columns, got " +
                        std::to_string(cells.size()));
    }
    std::vector<double> row(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      row[j] = parse_double(cells[j], path, line_no);
    }
    rows.push_back(std::move(row));
  }

  Dataset ds;
  const int n = static_cast<int>(rows.size());
  ds.meta = {n, p, 0, "csv"};
  ds.X.resize(n, p);
  ds.y.resize(n);
  for (int i = 0; i < n; ++i) {
    ds.y[i] = rows[static_cast<std::size_t>(i)][0];
    for (int j = 0; j < p; ++j) {
      ds.X(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j) + 1];
    }
  }
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write dataset file: " + path);
  out << "y";
  for (int j = 1; j <= ds.meta.p; ++j) out << ",x" << j;
  out << "\n";
  for (int i = 0; i < ds.meta.n; ++i) {
    out << fmt17(ds.y[i]);
    for (int j = 0; j < ds.meta.p; ++j) out << "," << fmt17(ds.X(i, j));
    out << "\n";
  }
  if (!out) throw ConfigError("write failed: " + path);
}

void save_model(const ModelFile& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file: " + path);
  out << "format " << kModelFormat << "\n";
  out << "loss " << loss_name(m.spec.loss) << "\n";
  out << "lambda " << fmt17(m.spec.reg.lambda) << "\n";
  out << "nu " << fmt17(m.spec.reg.nu) << "\n";
  out << "n " << m.n << "\n";
  out << "p " << m.beta.size() << "\n";
  out << "seed " << m.seed << "\n";
  out << "iterations " << m.iterations << "\n";
  out << "grad_norm " << fmt17(m.grad_norm) << "\n";
  out << "converged " << (m.converged ? 1 : 0) << "\n";
  if (m.steps >= 0) {
    out << "steps " << m.steps << "\n";
    out << "epsilon " << fmt17(m.epsilon) << "\n";
    out << "noise_scale " << fmt17(m.noise_scale) << "\n";
  }
  out << "beta";
  for (Eigen::Index i = 0; i < m.beta.size(); ++i) out << " " << fmt17(m.beta[i]);
  out << "\n";
  if (!out) throw ConfigError("write failed: " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);

  std::string line;
  if (!std::getline(in, line) || line != std::string("format ") + kModelFormat) {
    throw ConfigError(path + ": not a " + kModelFormat + " file");
  }

  std::map<std::string, std::string> kv;
  std::vector<double> beta;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "beta") {
      double v;
      while (ss >> v) beta.push_back(v);
      if (ss.fail() && !ss.eof()) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": bad beta value");
      }
    } else {
      std::string rest;
      std::getline(ss, rest);
      if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
      kv[key] = rest;
    }
  }

  const auto need = [&](const std::string& key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw ConfigError(path + ": missing key '" + key + "'");
    return it->second;
  };

  ModelFile m;
  m.spec.loss = loss_from_name(need("loss"));
  m.spec.reg.lambda = parse_double(need("lambda"), path, 0);
  m.spec.reg.nu = parse_double(need("nu"), path, 0);
  m.spec.validate();
  m.n = static_cast<int>(std::stol(need("n")));
  const int p = static_cast<int>(std::stol(need("p")));
  m.seed = std::stoull(need("seed"));
  m.iterations = static_cast<int>(std::stol(need("iterations")));
  m.grad_norm = parse_double(need("grad_norm"), path, 0);
  m.converged = need("converged") == "1";
  if (kv.count("steps")) {
    m.steps = static_cast<int>(std::stol(kv["steps"]));
    m.epsilon = parse_double(need("epsilon"), path, 0);
    m.noise_scale = parse_double(need("noise_scale"), path, 0);
  }
  if (static_cast<int>(beta.size()) != p) {
    throw ConfigError(path + ": beta has " + std::to_string(beta.size()) +
                      " entries, header says p=" + std::to_string(p));
  }
  m.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), p);
  return m;
}

}  // namespace unlearn
