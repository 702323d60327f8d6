// kronocov: batch front end for simulations, bound checks and the wind
// prediction pipeline.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kronocov/kronocov.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace kronocov;

namespace {

enum ExitCode { kOk = 0, kRuntime = 1, kUsage = 2 };

/// Input problems that should map to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path prepare_out(const std::string& out) {
  if (out.empty()) throw UsageError("--out is required");
  fs::create_directories(out);
  return fs::path(out);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
  return os;
}

void write_json(const fs::path& path, const json& j) {
  auto os = open_out(path);
  os << j.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const std::string& config_path, const std::string& out) {
  const json raw = config::read_json_file(config_path);
  const ExperimentConfig cfg = config::parse_experiment(raw);
  const fs::path dir = prepare_out(out);
  cli::RunManifest manifest("simulate", raw, dir);
  manifest.set_seed(cfg.seed.seed);

  const DenseMatrix sigma0 = experiment_truth(cfg);
  const MseTable table = mse_vs_n(cfg, sigma0);
  const fs::path csv_path = dir / "mse.csv";
  {
    auto os = open_out(csv_path);
    table.write_csv(os);
  }
  manifest.add_output(csv_path);

  const SpectrumEnergy energy = spectrum_energy_report(sigma0, cfg.p, cfg.q);
  const fs::path energy_path = dir / "truth_spectrum.csv";
  {
    auto os = open_out(energy_path);
    csv::Writer w(os);
    w.row({"k", "kron_energy_pct", "eigen_energy_pct"});
    const std::size_t rows = std::max(energy.kron_pcts.size(), energy.eigen_pcts.size());
    for (std::size_t k = 0; k < rows; ++k)
      w.row({std::to_string(k + 1),
             k < energy.kron_pcts.size() ? csv::format_double(energy.kron_pcts[k]) : "",
             k < energy.eigen_pcts.size() ? csv::format_double(energy.eigen_pcts[k]) : ""});
  }
  manifest.add_output(energy_path);

  Index failures = 0;
  for (const auto& c : table.cells) {
    failures += c.failures;
    std::cout << c.estimator << " n=" << c.n << " mse=" << c.mean_mse
              << " dB=" << c.db << " dB(amplitude)=" << c.db_amplitude << '\n';
  }
  manifest.set("failed_trials", failures);
  manifest.write();
  return kOk;
}

// ---------------------------------------------------------------------------
// bounds

int cmd_bounds_opnorm(const std::string& config_path, const std::string& out) {
  const json raw = config::read_json_file(config_path);
  const auto cfg = config::parse_opnorm(raw);
  const fs::path dir = prepare_out(out);
  cli::RunManifest manifest("bounds opnorm", raw, dir);
  manifest.set_seed(cfg.seed.seed);
  const OpnormGrowth g = opnorm_growth_experiment(cfg.q, cfg.n, cfg.p_grid, cfg.trials, cfg.seed);
  const fs::path path = dir / "opnorm.csv";
  {
    auto os = open_out(path);
    csv::Writer w(os);
    w.row({"p", "mean_sq_opnorm", "stderr", "fit_a", "fit_b", "fit_r2"});
    for (std::size_t i = 0; i < g.p_grid.size(); ++i)
      w.row({std::to_string(g.p_grid[i]), csv::format_double(g.means[i]),
             csv::format_double(g.stderrs[i]), csv::format_double(g.fit.slope),
             csv::format_double(g.fit.intercept), csv::format_double(g.fit.r_squared)});
  }
  manifest.add_output(path);
  manifest.set("fit", {{"a", g.fit.slope}, {"b", g.fit.intercept}, {"r2", g.fit.r_squared},
                       {"spearman", g.spearman}});
  manifest.write();
  std::cout << "quadratic fit: a=" << g.fit.slope << " b=" << g.fit.intercept
            << " R^2=" << g.fit.r_squared << '\n';
  return kOk;
}

int cmd_bounds_spectrum(const std::string& config_path, const std::string& out) {
  const json raw = config::read_json_file(config_path);
  const auto cfg = config::parse_spectrum(raw);
  const fs::path dir = prepare_out(out);
  cli::RunManifest manifest("bounds spectrum", raw, dir);
  manifest.set_seed(cfg.seed.seed);
  const Var1Spec spec = config::spectrum_instance(cfg);
  const SpectrumReport rep = toeplitz_spectrum_bounds(spec, spec.blocks(), spec.dim());
  const fs::path path = dir / "spectrum.csv";
  {
    auto os = open_out(path);
    csv::Writer w(os);
    w.row({"k", "exact", "frob_opt", "frob_gs", "gs_tail"});
    for (std::size_t k = 0; k < rep.exact.size(); ++k)
      w.row({std::to_string(k), csv::format_double(rep.exact[k]), csv::format_double(rep.frob_opt[k]),
             csv::format_double(rep.frob_gs[k]), csv::format_double(rep.gs_tail[k])});
  }
  manifest.add_output(path);
  manifest.set("gs_tail_log_fit", {{"slope", rep.gs_tail_log_fit.slope},
                                   {"intercept", rep.gs_tail_log_fit.intercept},
                                   {"r2", rep.gs_tail_log_fit.r_squared}});
  manifest.set("decay_u", rep.decay_u);
  manifest.write();
  return kOk;
}

int cmd_bounds_oracle(const std::string& config_path, const std::string& out) {
  const json raw = config::read_json_file(config_path);
  const auto cfg = config::parse_oracle(raw);
  const fs::path dir = prepare_out(out);
  cli::RunManifest manifest("bounds oracle", raw, dir);
  manifest.set_seed(cfg.seed.seed);
  const auto rows = oracle_inequality_trials(cfg.p, cfg.q, cfg.r, cfg.n_list, cfg.trials, cfg.seed);
  const fs::path path = dir / "oracle.csv";
  Index held = 0;
  {
    auto os = open_out(path);
    csv::Writer w(os);
    w.row({"n", "trial", "lambda", "lhs", "min_rhs", "best_r", "holds", "hypothesis"});
    for (const auto& r : rows) {
      held += r.check.holds;
      w.row({std::to_string(r.n), std::to_string(r.trial), csv::format_double(r.lambda),
             csv::format_double(r.check.lhs), csv::format_double(r.check.min_rhs),
             std::to_string(r.check.best_r), r.check.holds ? "true" : "false",
             r.check.hypothesis.value_or(false) ? "true" : "false"});
    }
  }
  manifest.add_output(path);
  manifest.set("holds", held);
  manifest.set("trials", rows.size());
  manifest.write();
  std::cout << "oracle inequality held in " << held << " of " << rows.size() << " trials\n";
  return held == Index(rows.size()) ? kOk : kRuntime;
}

// ---------------------------------------------------------------------------
// wind

struct DateRange {
  Date first, last;
  std::string text;
};

/// "YYYY", "YYYY:YYYY" or "YYYY-MM-DD:YYYY-MM-DD".
DateRange parse_range(const std::string& s, const char* flag) {
  auto endpoint = [&](const std::string& part, bool start) {
    if (part.size() == 4) {
      int y = 0;
      for (char c : part) {
        if (c < '0' || c > '9') throw UsageError(std::string(flag) + ": bad year '" + part + "'");
        y = y * 10 + (c - '0');
      }
      return start ? Date{y, 1, 1} : Date{y, 12, 31};
    }
    try {
      return Date::parse(part);
    } catch (const DomainError& e) {
      throw UsageError(std::string(flag) + ": " + e.what());
    }
  };
  const auto colon = s.find(':');
  const std::string a = s.substr(0, colon);
  const std::string b = colon == std::string::npos ? a : s.substr(colon + 1);
  DateRange r{endpoint(a, true), endpoint(b, false), s};
  if (r.last < r.first) throw UsageError(std::string(flag) + ": range is empty");
  return r;
}

struct WindOptions {
  std::string panel, out, model, train_range, test_range, estimator = "prls", lambda_rule, tune_grid;
  std::vector<std::string> estimators{"scm", "prls", "svt"};
  Index p = 8;
  int degree = 14;
  double lambda_c = 0.0;
  double pinv_tol = 1e-10;
};

LambdaRule default_rule(PredictorEstimator est, const WindOptions& o) {
  LambdaRule r;
  if (!o.lambda_rule.empty()) {
    try {
      r.kind = lambda_kind_from_string(o.lambda_rule);
    } catch (const DomainError& e) {
      throw UsageError(std::string("--lambda-rule: ") + e.what());
    }
    if (r.kind == LambdaKind::oracle) throw UsageError("--lambda-rule: oracle needs the true covariance");
  } else {
    r.kind = est == PredictorEstimator::svt ? LambdaKind::svt_lounici : LambdaKind::prls_practical;
    r.c = est == PredictorEstimator::svt ? 1.9 : 0.13;
  }
  if (o.lambda_c > 0.0) r.c = o.lambda_c;
  return r;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v;
    if (!csv::parse_double(item, v) || !(v > 0.0)) throw UsageError("--tune-grid: bad value '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--tune-grid: empty");
  return out;
}

WindPanel load_wind_panel(const std::string& path) {
  if (path.empty()) throw UsageError("--panel is required");
  if (!fs::exists(path)) throw UsageError("panel file '" + path + "' does not exist");
  return load_panel(path);
}

WindPanel slice_or_fail(const WindPanel& panel, const DateRange& r, const char* what) {
  WindPanel s = panel.slice(r.first, r.last);
  if (s.days() == 0) throw UsageError(std::string(what) + " range " + r.text + " selects no rows");
  return s;
}

json options_json(const WindOptions& o) {
  return {{"panel", o.panel},           {"p", o.p},
          {"degree", o.degree},         {"train_range", o.train_range},
          {"test_range", o.test_range}, {"estimator", o.estimator},
          {"estimators", o.estimators}, {"lambda_rule", o.lambda_rule},
          {"lambda_C", o.lambda_c},     {"tune_grid", o.tune_grid},
          {"model", o.model},           {"pinv_tol", o.pinv_tol}};
}

void write_tune_curve(const fs::path& path, const TuneResult& t) {
  auto os = open_out(path);
  csv::Writer w(os);
  w.row({"C", "mean_train_rmse"});
  for (std::size_t i = 0; i < t.grid.size(); ++i)
    w.row({csv::format_double(t.grid[i]), csv::format_double(t.objective[i])});
}

struct TrainedModel {
  PredictorModel model;
  LambdaRule rule;
  std::optional<TuneResult> tuning;
};

TrainedModel train_one(const DenseMatrix& train_velocity, PredictorEstimator est,
                       const WindOptions& o) {
  TrainedModel tm;
  tm.rule = default_rule(est, o);
  if (est != PredictorEstimator::scm && !o.tune_grid.empty()) {
    tm.tuning = tune_lambda(train_velocity, o.p, est, tm.rule, parse_grid(o.tune_grid));
    tm.rule.c = tm.tuning->best_c;
  }
  tm.model = train_predictor(train_velocity, o.p, est, tm.rule, o.pinv_tol);
  return tm;
}

json model_json(const TrainedModel& tm, PredictorEstimator est, const WindPanel& panel,
                const DetrendState& state, const std::string& train_range) {
  json w = json::array();
  for (Index i = 0; i < tm.model.w.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < tm.model.w.cols(); ++j) row.push_back(tm.model.w(i, j));
    w.push_back(row);
  }
  return {{"p", tm.model.p},
          {"q", tm.model.q},
          {"stations", panel.stations},
          {"estimator", to_string(est)},
          {"lambda_rule", to_string(tm.rule.kind)},
          {"lambda_C", tm.rule.c},
          {"lambda_used", tm.model.lambda_used},
          {"pinv_tol", tm.model.pinv_tol},
          {"train_range", train_range},
          {"detrend", state.to_json()},
          {"W", w}};
}

std::pair<PredictorModel, DetrendState> model_from_json(const json& j) {
  try {
    PredictorModel m;
    m.p = j.at("p").get<Index>();
    m.q = j.at("q").get<Index>();
    m.lambda_used = j.at("lambda_used").get<double>();
    m.pinv_tol = j.at("pinv_tol").get<double>();
    const auto& w = j.at("W");
    m.w.resize(m.q, m.q * (m.p - 1));
    if (Index(w.size()) != m.w.rows()) throw ConfigError("/W", "wrong row count");
    for (Index i = 0; i < m.w.rows(); ++i) {
      if (Index(w[i].size()) != m.w.cols()) throw ConfigError("/W/" + std::to_string(i), "wrong length");
      for (Index k = 0; k < m.w.cols(); ++k) m.w(i, k) = w[i][k].get<double>();
    }
    return {m, DetrendState::from_json(j.at("detrend"))};
  } catch (const json::exception& e) {
    throw ConfigError("/", std::string("model file: ") + e.what());
  }
}

void write_predictions(const fs::path& path, const WindPanel& panel, const Prediction& pred) {
  auto os = open_out(path);
  csv::Writer w(os);
  std::vector<std::string> row{"date", "valid"};
  row.insert(row.end(), panel.stations.begin(), panel.stations.end());
  w.row(row);
  for (Index t = 0; t < pred.values.rows(); ++t) {
    row.assign({panel.dates[t].iso(), pred.valid[t] ? "1" : "0"});
    for (Index s = 0; s < pred.values.cols(); ++s) row.push_back(csv::format_double(pred.values(t, s)));
    w.row(row);
  }
}

int cmd_wind_detrend(const WindOptions& o) {
  const WindPanel panel = load_wind_panel(o.panel);
  const fs::path dir = prepare_out(o.out);
  cli::RunManifest manifest("wind detrend", options_json(o), dir);
  const WindPanel train =
      o.train_range.empty() ? panel : slice_or_fail(panel, parse_range(o.train_range, "--train-range"), "training");
  const DetrendState state = detrend(train, o.degree).state;
  const DenseMatrix velocity = apply_detrend(panel, state);
  const fs::path vpath = dir / "velocity.csv", spath = dir / "detrend_state.json";
  {
    auto os = open_out(vpath);
    write_dated_matrix(os, panel.stations, panel.dates, velocity);
  }
  write_json(spath, state.to_json());
  manifest.add_output(vpath);
  manifest.add_output(spath);
  manifest.write();
  return kOk;
}

int cmd_wind_train(const WindOptions& o) {
  if (o.train_range.empty()) throw UsageError("--train-range is required");
  const PredictorEstimator est = predictor_estimator_from_string(o.estimator);
  const WindPanel panel = load_wind_panel(o.panel);
  const WindPanel train = slice_or_fail(panel, parse_range(o.train_range, "--train-range"), "training");
  const fs::path dir = prepare_out(o.out);
  cli::RunManifest manifest("wind train", options_json(o), dir);
  const DetrendResult dt = detrend(train, o.degree);
  const TrainedModel tm = train_one(dt.velocity, est, o);
  const fs::path mpath = dir / "model.json";
  write_json(mpath, model_json(tm, est, panel, dt.state, o.train_range));
  manifest.add_output(mpath);
  if (tm.tuning) {
    const fs::path tpath = dir / "tune.csv";
    write_tune_curve(tpath, *tm.tuning);
    manifest.add_output(tpath);
  }
  manifest.set("lambda_C", tm.rule.c);
  manifest.set("lambda_used", tm.model.lambda_used);
  manifest.write();
  return kOk;
}

int cmd_wind_predict(const WindOptions& o) {
  if (o.model.empty()) throw UsageError("--model is required");
  if (!fs::exists(o.model)) throw UsageError("model file '" + o.model + "' does not exist");
  const auto [model, state] = model_from_json(config::read_json_file(o.model));
  const WindPanel panel = load_wind_panel(o.panel);
  const WindPanel test =
      o.test_range.empty() ? panel : slice_or_fail(panel, parse_range(o.test_range, "--test-range"), "test");
  const fs::path dir = prepare_out(o.out);
  cli::RunManifest manifest("wind predict", options_json(o), dir);
  const DenseMatrix velocity = apply_detrend(test, state);
  const Prediction pred = predict_series(model, velocity);
  const fs::path ppath = dir / "predictions.csv";
  write_predictions(ppath, test, pred);
  manifest.add_output(ppath);
  manifest.set("rmse", rmse_by_station(pred.values, velocity, model.p - 1));
  manifest.write();
  return kOk;
}

int cmd_wind_evaluate(const WindOptions& o) {
  if (o.train_range.empty() || o.test_range.empty())
    throw UsageError("--train-range and --test-range are required");
  std::vector<PredictorEstimator> ests;
  for (const auto& e : o.estimators) ests.push_back(predictor_estimator_from_string(e));
  if (std::find(ests.begin(), ests.end(), PredictorEstimator::scm) == ests.end())
    ests.insert(ests.begin(), PredictorEstimator::scm);
  const WindPanel panel = load_wind_panel(o.panel);
  const WindPanel train = slice_or_fail(panel, parse_range(o.train_range, "--train-range"), "training");
  const WindPanel test = slice_or_fail(panel, parse_range(o.test_range, "--test-range"), "test");
  const fs::path dir = prepare_out(o.out);
  cli::RunManifest manifest("wind evaluate", options_json(o), dir);

  const DetrendResult dt = detrend(train, o.degree);
  const DenseMatrix test_velocity = apply_detrend(test, dt.state);
  std::vector<std::vector<double>> rmse;
  json summary = json::object();
  for (PredictorEstimator est : ests) {
    const TrainedModel tm = train_one(dt.velocity, est, o);
    const Prediction pred = predict_series(tm.model, test_velocity);
    rmse.push_back(rmse_by_station(pred.values, test_velocity, o.p - 1));
    json entry = {{"mean_rmse", mean_of(rmse.back())}, {"lambda_used", tm.model.lambda_used}};
    if (est != PredictorEstimator::scm) entry["lambda_C"] = tm.rule.c;
    if (tm.tuning) {
      const fs::path tpath = dir / ("tune_" + std::string(to_string(est)) + ".csv");
      write_tune_curve(tpath, *tm.tuning);
      manifest.add_output(tpath);
    }
    summary[std::string(to_string(est))] = entry;
  }
  for (std::size_t e = 0; e < ests.size(); ++e)
    if (ests[e] != PredictorEstimator::scm) {
      const double db = mean_db_improvement(rmse[0], rmse[e]);
      summary[std::string(to_string(ests[e]))]["mean_db_vs_scm"] = db;
      std::cout << to_string(ests[e]) << ": mean RMSE reduction vs SCM " << db << " dB\n";
    }

  const fs::path rpath = dir / "rmse.csv";
  {
    auto os = open_out(rpath);
    csv::Writer w(os);
    std::vector<std::string> row{"station"};
    for (PredictorEstimator est : ests) row.push_back("rmse_" + std::string(to_string(est)));
    w.row(row);
    for (std::size_t s = 0; s < panel.stations.size(); ++s) {
      row.assign(1, panel.stations[s]);
      for (const auto& r : rmse) row.push_back(csv::format_double(r[s]));
      w.row(row);
    }
  }
  const fs::path spath = dir / "summary.json";
  write_json(spath, summary);
  manifest.add_output(rpath);
  manifest.add_output(spath);
  manifest.set("estimators", summary);
  manifest.write();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kronecker-structured covariance estimation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (default: KRONOCOV_THREADS or all cores)");

  std::string config_path, out;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo MSE experiment");
  sim->add_option("--config", config_path, "Experiment JSON")->required();
  sim->add_option("--out", out, "Output directory")->required();

  auto* bounds = app.add_subcommand("bounds", "Bound validations");
  bounds->require_subcommand(1);
  std::string bounds_kind;
  const std::pair<const char*, const char*> bound_kinds[] = {
      {"opnorm", "Growth of the permuted SCM error norm with p"},
      {"spectrum", "Kronecker spectrum bounds for a VAR(1) covariance"},
      {"oracle", "Oracle inequality over seeded trials"}};
  for (const auto& [kind, about] : bound_kinds) {
    auto* sub = bounds->add_subcommand(kind, about);
    sub->add_option("--config", config_path, "Bound JSON")->required();
    sub->add_option("--out", out, "Output directory")->required();
    sub->callback([&bounds_kind, name = kind] { bounds_kind = name; });
  }

  WindOptions wo;
  auto* wind = app.add_subcommand("wind", "Wind-speed prediction pipeline");
  wind->require_subcommand(1);
  std::string wind_stage;
  const std::pair<const char*, const char*> wind_stages[] = {
      {"detrend", "Square-root, de-mean and de-season a panel"},
      {"train", "Fit a one-step linear predictor"},
      {"predict", "Apply a trained predictor"},
      {"evaluate", "Train and compare estimators on held-out days"}};
  for (const auto& [stage, about] : wind_stages) {
    auto* sub = wind->add_subcommand(stage, about);
    sub->add_option("--panel", wo.panel, "Panel CSV (date column then one column per station)")->required();
    sub->add_option("--out", wo.out, "Output directory")->required();
    sub->add_option("--degree", wo.degree, "Seasonal polynomial degree")->capture_default_str();
    const std::string s = stage;
    if (s == "detrend") sub->add_option("--train-range", wo.train_range, "Rows used to fit the trend");
    if (s == "train" || s == "evaluate") {
      sub->add_option("--train-range", wo.train_range, "YYYY[:YYYY] or YYYY-MM-DD:YYYY-MM-DD");
      sub->add_option("--p", wo.p, "Window length")->capture_default_str()->check(CLI::Range(2, 1000));
      sub->add_option("--lambda-rule", wo.lambda_rule, "fixed, prls_practical, prls_theory or svt_lounici");
      auto* c = sub->add_option("--lambda-C", wo.lambda_c, "Regularization multiplier C")->check(CLI::PositiveNumber);
      sub->add_option("--tune-grid", wo.tune_grid, "Comma-separated C values tuned on training RMSE")->excludes(c);
      sub->add_option("--pinv-tol", wo.pinv_tol, "Relative pseudo-inverse cutoff")->capture_default_str();
    }
    if (s == "train")
      sub->add_option("--estimator", wo.estimator, "scm, prls or svt")->capture_default_str();
    if (s == "evaluate")
      sub->add_option("--estimators", wo.estimators, "Estimators to compare")->delimiter(',');
    if (s == "predict") {
      sub->add_option("--model", wo.model, "model.json from 'wind train'")->required();
      sub->add_option("--test-range", wo.test_range, "Rows to predict");
    }
    if (s == "evaluate") sub->add_option("--test-range", wo.test_range, "Rows to predict")->required();
    sub->callback([&wind_stage, name = stage] { wind_stage = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (threads > 0) set_worker_count(threads);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out);
    if (bounds->parsed()) {
      if (bounds_kind == "opnorm") return cmd_bounds_opnorm(config_path, out);
      if (bounds_kind == "spectrum") return cmd_bounds_spectrum(config_path, out);
      return cmd_bounds_oracle(config_path, out);
    }
    if (wind_stage == "detrend") return cmd_wind_detrend(wo);
    if (wind_stage == "train") return cmd_wind_train(wo);
    if (wind_stage == "predict") return cmd_wind_predict(wo);
    return cmd_wind_evaluate(wo);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}
