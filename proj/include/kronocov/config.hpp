#pragma once

// JSON configuration for the batch commands. Every error names the JSON
// pointer of the offending value.

#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "kronocov/errors.hpp"
#include "kronocov/experiments.hpp"

namespace kronocov::config {

using json = nlohmann::json;

class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  void require_object(std::initializer_list<const char*> allowed) const {
    if (!j_.is_object()) fail("expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j_.items())
      if (!ok.count(k)) throw ConfigError(child_path(k), "unknown key");
  }
  bool has(const char* key) const { return j_.contains(key); }
  Node at(const char* key) const {
    if (!j_.contains(key)) throw ConfigError(child_path(key), "required key missing");
    return {j_.at(key), child_path(key)};
  }
  Node at(std::size_t i) const { return {j_.at(i), path_ + "/" + std::to_string(i)}; }
  std::size_t size() const { return j_.size(); }

  long long integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    return j_.get<long long>();
  }
  std::uint64_t unsigned_integer() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<long long>() >= 0))
      fail("expected a non-negative integer");
    return j_.get<std::uint64_t>();
  }
  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  void require_array() const {
    if (!j_.is_array()) fail("expected an array");
  }
  std::vector<long long> integer_list() const {
    require_array();
    std::vector<long long> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).integer());
    return out;
  }
  std::vector<double> number_list() const {
    require_array();
    std::vector<double> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).number());
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_.empty() ? "/" : path_, what); }

 private:
  std::string child_path(const std::string& k) const { return path_ + "/" + k; }
  const json& j_;
  std::string path_;
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("/", "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("/", std::string("invalid JSON: ") + e.what());
  }
}

inline LambdaRule parse_lambda(const Node& n) {
  n.require_object({"rule", "C", "t", "eps_prime", "C0"});
  LambdaRule r;
  try {
    r.kind = lambda_kind_from_string(n.at("rule").string());
  } catch (const DomainError& e) {
    throw ConfigError(n.path() + "/rule", e.what());
  }
  if (n.has("C")) r.c = n.at("C").number();
  if (n.has("t")) r.t = n.at("t").number();
  if (n.has("eps_prime")) r.eps_prime = n.at("eps_prime").number();
  if (n.has("C0")) r.c0 = n.at("C0").number();
  try {
    r.validate();
  } catch (const DomainError& e) {
    throw ConfigError(n.path(), e.what());
  }
  return r;
}

/// Appends one spec, or one per C value when "C_scan" is present.
inline void parse_estimator(const Node& n, std::vector<EstimatorSpec>& out) {
  n.require_object({"type", "r", "lambda", "C_scan", "label"});
  const std::string type = n.at("type").string();
  EstimatorSpec spec;
  if (type == "scm") {
    spec.kind = EstimatorKind::scm;
  } else if (type == "pca" || type == "cm") {
    spec.kind = type == "pca" ? EstimatorKind::pca : EstimatorKind::cm;
    spec.rank = n.at("r").integer();
  } else if (type == "svt" || type == "prls") {
    spec.kind = type == "svt" ? EstimatorKind::svt : EstimatorKind::prls;
    spec.lambda = parse_lambda(n.at("lambda"));
  } else {
    throw ConfigError(n.path() + "/type", "unknown estimator '" + type + "'");
  }
  std::string label = n.has("label") ? n.at("label").string() : type;
  if (!n.has("label") && spec.rank > 0) label += "[r=" + std::to_string(spec.rank) + "]";
  if (n.has("C_scan")) {
    if (spec.kind != EstimatorKind::svt && spec.kind != EstimatorKind::prls)
      throw ConfigError(n.path() + "/C_scan", "only valid for svt and prls");
    const auto cs = n.at("C_scan").number_list();
    if (cs.empty()) throw ConfigError(n.path() + "/C_scan", "must be non-empty");
    for (double c : cs) {
      EstimatorSpec s = spec;
      s.lambda.c = c;
      try {
        s.lambda.validate();
      } catch (const DomainError& e) {
        throw ConfigError(n.path() + "/C_scan", e.what());
      }
      s.label = label + "[C=" + csv::format_double(c) + "]";
      out.push_back(std::move(s));
    }
    return;
  }
  spec.label = std::move(label);
  out.push_back(std::move(spec));
}

inline ExperimentConfig parse_experiment(const json& j) {
  const Node root(j, "");
  root.require_object({"p", "q", "generator", "n_grid", "trials", "seed", "estimators",
                      "report_min_eigenvalue", "comment"});
  ExperimentConfig cfg;
  cfg.p = root.at("p").integer();
  cfg.q = root.at("q").integer();
  const Node gen = root.at("generator");
  gen.require_object({"type", "r", "norm"});
  const std::string type = gen.at("type").string();
  if (type == "kp_sum") {
    cfg.generator.kind = GeneratorSpec::Kind::kp_sum;
    cfg.generator.rank = gen.at("r").integer();
  } else if (type == "var1") {
    cfg.generator.kind = GeneratorSpec::Kind::var1;
    cfg.generator.phi_norm = gen.at("norm").number();
  } else {
    throw ConfigError("/generator/type", "unknown generator '" + type + "'");
  }
  for (long long n : root.at("n_grid").integer_list()) cfg.n_grid.push_back(n);
  cfg.trials = root.at("trials").integer();
  cfg.seed = RngSeed{root.at("seed").unsigned_integer(), 0};
  if (root.has("report_min_eigenvalue")) {
    const Node flag = root.at("report_min_eigenvalue");
    if (!flag.raw().is_boolean()) flag.fail("expected a boolean");
    cfg.report_min_eigenvalue = flag.raw().get<bool>();
  }
  const Node ests = root.at("estimators");
  ests.require_array();
  for (std::size_t i = 0; i < ests.size(); ++i) parse_estimator(ests.at(i), cfg.estimators);
  std::set<std::string> labels;
  for (const auto& e : cfg.estimators)
    if (!labels.insert(e.label).second)
      throw ConfigError("/estimators", "duplicate label '" + e.label + "'");
  cfg.validate();
  return cfg;
}

struct OpnormConfig {
  Index q = 0, n = 0, trials = 0;
  std::vector<Index> p_grid;
  RngSeed seed;
};

inline OpnormConfig parse_opnorm(const json& j) {
  const Node root(j, "");
  root.require_object({"q", "n", "p_grid", "trials", "seed", "comment"});
  OpnormConfig c;
  c.q = root.at("q").integer();
  c.n = root.at("n").integer();
  c.trials = root.at("trials").integer();
  for (long long p : root.at("p_grid").integer_list()) c.p_grid.push_back(p);
  c.seed = RngSeed{root.at("seed").unsigned_integer(), 0};
  if (c.q < 1 || c.n < 1 || c.trials < 1) throw ConfigError("/", "q, n and trials must be positive");
  if (c.p_grid.size() < 2) throw ConfigError("/p_grid", "need at least two values");
  for (std::size_t i = 0; i < c.p_grid.size(); ++i)
    if (c.p_grid[i] < 1) throw ConfigError("/p_grid/" + std::to_string(i), "must be >= 1");
  return c;
}

struct SpectrumConfig {
  Index m = 0, horizon = 0;
  double phi_norm = 0.0;  ///< 0 gives Phi = 0
  RngSeed seed;
};

inline SpectrumConfig parse_spectrum(const json& j) {
  const Node root(j, "");
  root.require_object({"m", "N", "norm", "seed", "comment"});
  SpectrumConfig c;
  c.m = root.at("m").integer();
  c.horizon = root.at("N").integer();
  c.phi_norm = root.at("norm").number();
  c.seed = RngSeed{root.at("seed").unsigned_integer(), 0};
  if (c.m < 1) throw ConfigError("/m", "must be >= 1");
  if (c.horizon < 0) throw ConfigError("/N", "must be >= 0");
  if (!(c.phi_norm >= 0.0 && c.phi_norm < 1.0)) throw ConfigError("/norm", "must lie in [0, 1)");
  return c;
}

inline Var1Spec spectrum_instance(const SpectrumConfig& c) {
  const DenseMatrix phi = c.phi_norm == 0.0 ? DenseMatrix::Zero(c.m, c.m)
                                            : random_stable_matrix(c.m, c.phi_norm, c.seed.substream(0));
  return Var1Spec(phi, c.horizon);
}

struct OracleConfig {
  Index p = 0, q = 0, r = 0, trials = 0;
  std::vector<Index> n_list;
  RngSeed seed;
};

inline OracleConfig parse_oracle(const json& j) {
  const Node root(j, "");
  root.require_object({"p", "q", "r", "n_list", "trials", "seed", "comment"});
  OracleConfig c;
  c.p = root.at("p").integer();
  c.q = root.at("q").integer();
  c.r = root.at("r").integer();
  c.trials = root.at("trials").integer();
  for (long long n : root.at("n_list").integer_list()) c.n_list.push_back(n);
  c.seed = RngSeed{root.at("seed").unsigned_integer(), 0};
  if (c.p < 1 || c.q < 1 || c.trials < 1) throw ConfigError("/", "p, q and trials must be positive");
  if (c.r < 1 || c.r > std::min(c.p * c.p, c.q * c.q)) throw ConfigError("/r", "out of range");
  if (c.n_list.empty()) throw ConfigError("/n_list", "must be non-empty");
  for (std::size_t i = 0; i < c.n_list.size(); ++i)
    if (c.n_list[i] < 1) throw ConfigError("/n_list/" + std::to_string(i), "must be >= 1");
  return c;
}

}  // namespace kronocov::config
