#pragma once

// Wind-speed prediction pipeline: panel I/O, square-root/seasonal detrending,
// windowing into space-time samples, covariance-based linear prediction and
// RMSE scoring.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "kronocov/csv.hpp"
#include "kronocov/errors.hpp"
#include "kronocov/estimators.hpp"
#include "kronocov/matcore.hpp"
#include "kronocov/parallel.hpp"

namespace kronocov {

struct Date {
  int year = 1970;
  unsigned month = 1;
  unsigned day = 1;

  std::chrono::year_month_day ymd() const {
    return std::chrono::year{year} / std::chrono::month{month} / std::chrono::day{day};
  }
  long serial() const { return std::chrono::sys_days(ymd()).time_since_epoch().count(); }
  int day_of_year() const {
    const auto jan1 = std::chrono::year{year} / std::chrono::January / 1;
    return int((std::chrono::sys_days(ymd()) - std::chrono::sys_days(jan1)).count()) + 1;
  }
  std::string iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year, month, day);
    return buf;
  }
  friend auto operator<=>(const Date& a, const Date& b) { return a.serial() <=> b.serial(); }
  friend bool operator==(const Date& a, const Date& b) { return a.serial() == b.serial(); }

  /// Strict YYYY-MM-DD; throws DomainError on anything else.
  static Date parse(std::string_view s) {
    auto digits = [&](std::size_t pos, std::size_t len) {
      int v = 0;
      for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') throw DomainError("invalid date '" + std::string(s) + "'");
        v = v * 10 + (s[i] - '0');
      }
      return v;
    };
    if (s.size() != 10 || s[4] != '-' || s[7] != '-')
      throw DomainError("invalid date '" + std::string(s) + "'");
    Date d{digits(0, 4), unsigned(digits(5, 2)), unsigned(digits(8, 2))};
    if (!d.ymd().ok()) throw DomainError("invalid date '" + std::string(s) + "'");
    return d;
  }
};

/// Daily speeds, one column per station, rows in strictly increasing date order.
struct WindPanel {
  std::vector<std::string> stations;
  std::vector<Date> dates;
  DenseMatrix speeds;  ///< T x q

  Index days() const { return speeds.rows(); }
  Index station_count() const { return speeds.cols(); }

  void validate() const {
    if (static_cast<Index>(stations.size()) != speeds.cols() ||
        static_cast<Index>(dates.size()) != speeds.rows())
      throw DimensionError("WindPanel: header, dates and speeds disagree in size");
    for (std::size_t t = 1; t < dates.size(); ++t)
      if (!(dates[t - 1] < dates[t]))
        throw DomainError("WindPanel: dates not strictly increasing at " + dates[t].iso());
    if (!speeds.allFinite()) throw DomainError("WindPanel: non-finite speed");
    if (speeds.size() && speeds.minCoeff() < 0.0) throw DomainError("WindPanel: negative speed");
  }

  /// Rows with first <= date <= last.
  WindPanel slice(const Date& first, const Date& last) const {
    std::vector<Index> keep;
    for (std::size_t t = 0; t < dates.size(); ++t)
      if (!(dates[t] < first) && !(last < dates[t])) keep.push_back(Index(t));
    WindPanel out;
    out.stations = stations;
    out.speeds.resize(Index(keep.size()), speeds.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      out.dates.push_back(dates[keep[i]]);
      out.speeds.row(Index(i)) = speeds.row(keep[i]);
    }
    return out;
  }
};

/// CSV with header "date,<station>,..." and ISO dates in the first column.
inline WindPanel load_panel(std::istream& in) {
  const csv::Table table = csv::read(in);
  if (table.records.empty()) throw ParseError("empty panel file", 1);
  const auto& header = table.records.front();
  if (header.size() < 2) throw ParseError("header needs a date column and at least one station", 1);
  WindPanel panel;
  panel.stations.assign(header.begin() + 1, header.end());
  const Index q = Index(panel.stations.size());
  std::vector<std::vector<double>> rows;
  for (std::size_t r = 1; r < table.records.size(); ++r) {
    const auto& rec = table.records[r];
    const long line = table.lines[r];
    if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
    if (Index(rec.size()) != q + 1)
      throw ParseError("expected " + std::to_string(q + 1) + " fields, found " +
                           std::to_string(rec.size()), line);
    Date d;
    try {
      d = Date::parse(rec[0]);
    } catch (const DomainError& e) {
      throw ParseError(e.what(), line);
    }
    if (!panel.dates.empty() && !(panel.dates.back() < d))
      throw ParseError("dates must be strictly increasing (" + d.iso() + ")", line);
    std::vector<double> vals(q);
    for (Index s = 0; s < q; ++s) {
      if (!csv::parse_double(rec[s + 1], vals[s]) || !std::isfinite(vals[s]))
        throw ParseError("missing or non-numeric value for station '" + panel.stations[s] + "'", line);
      if (vals[s] < 0.0) throw ParseError("negative speed", line);
    }
    panel.dates.push_back(d);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw ParseError("panel has no data rows", table.lines.front());
  panel.speeds.resize(Index(rows.size()), q);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (Index s = 0; s < q; ++s) panel.speeds(Index(t), s) = rows[t][s];
  return panel;
}

inline WindPanel load_panel(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return load_panel(in);
}

/// Writes a dated T x q matrix (speeds, velocities or predictions).
inline void write_dated_matrix(std::ostream& os, const std::vector<std::string>& stations,
                               const std::vector<Date>& dates, const DenseMatrix& values) {
  csv::Writer w(os);
  std::vector<std::string> row{"date"};
  row.insert(row.end(), stations.begin(), stations.end());
  w.row(row);
  for (Index t = 0; t < values.rows(); ++t) {
    row.assign(1, dates[t].iso());
    for (Index s = 0; s < values.cols(); ++s) row.push_back(csv::format_double(values(t, s)));
    w.row(row);
  }
}

inline void write_panel(std::ostream& os, const WindPanel& panel) {
  write_dated_matrix(os, panel.stations, panel.dates, panel.speeds);
}

// ---------------------------------------------------------------------------
// Detrending

/// Maps day-of-year 1..366 onto [-1, 1].
inline double seasonal_abscissa(int day_of_year) { return (day_of_year - 1) / 182.5 - 1.0; }

struct DetrendState {
  std::vector<double> station_means;   ///< of sqrt speeds
  std::vector<double> seasonal_coeffs; ///< power-basis coefficients in seasonal_abscissa

  int degree() const { return int(seasonal_coeffs.size()) - 1; }

  double seasonal(int day_of_year) const {
    const double x = seasonal_abscissa(day_of_year);
    double acc = 0.0;
    for (auto it = seasonal_coeffs.rbegin(); it != seasonal_coeffs.rend(); ++it) acc = acc * x + *it;
    return acc;
  }

  nlohmann::json to_json() const {
    return {{"degree", degree()}, {"station_means", station_means},
            {"seasonal_coeffs", seasonal_coeffs}, {"abscissa", "(day_of_year - 1) / 182.5 - 1"}};
  }
  static DetrendState from_json(const nlohmann::json& j) {
    DetrendState s;
    try {
      s.station_means = j.at("station_means").get<std::vector<double>>();
      s.seasonal_coeffs = j.at("seasonal_coeffs").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("/", std::string("detrend state: ") + e.what());
    }
    if (s.seasonal_coeffs.empty()) throw ConfigError("/seasonal_coeffs", "must be non-empty");
    if (j.contains("degree") && j["degree"].get<int>() != s.degree())
      throw ConfigError("/degree", "does not match coefficient count");
    return s;
  }
};

/// v[t,s] = sqrt(speed[t,s]) - station_mean[s] - seasonal(day_of_year[t]).
inline DenseMatrix apply_detrend(const WindPanel& panel, const DetrendState& state) {
  if (Index(state.station_means.size()) != panel.station_count())
    throw DimensionError("apply_detrend: station count differs from the fitted state");
  DenseMatrix v = panel.speeds.cwiseSqrt();
  for (Index t = 0; t < v.rows(); ++t) {
    const double season = state.seasonal(panel.dates[t].day_of_year());
    for (Index s = 0; s < v.cols(); ++s) v(t, s) -= state.station_means[s] + season;
  }
  return v;
}

struct DetrendResult {
  DenseMatrix velocity;
  DetrendState state;
};

/// Fits station means of sqrt speeds, then a least-squares polynomial in
/// day-of-year to the cross-station average of the centred sqrt speeds over
/// all rows (hence pooling years).
inline DetrendResult detrend(const WindPanel& panel, int degree = 14) {
  if (degree < 0) throw DomainError("detrend: degree must be >= 0");
  panel.validate();
  const Index T = panel.days(), q = panel.station_count();
  if (T == 0 || q == 0) throw DomainError("detrend: empty panel");
  std::set<int> distinct;
  for (const auto& d : panel.dates) distinct.insert(d.day_of_year());
  if (Index(distinct.size()) < degree + 1)
    throw DomainError("detrend: " + std::to_string(distinct.size()) +
                      " distinct days cannot determine a degree-" + std::to_string(degree) +
                      " seasonal fit");

  const DenseMatrix root = panel.speeds.cwiseSqrt();
  DetrendState state;
  const Vector means = root.colwise().mean().transpose();
  state.station_means.assign(means.data(), means.data() + q);
  const Vector avg = (root.rowwise() - means.transpose()).rowwise().mean();

  DenseMatrix design(T, degree + 1);
  for (Index t = 0; t < T; ++t) {
    const double x = seasonal_abscissa(panel.dates[t].day_of_year());
    double pw = 1.0;
    for (int k = 0; k <= degree; ++k, pw *= x) design(t, k) = pw;
  }
  const Eigen::ColPivHouseholderQR<DenseMatrix> qr(design);
  if (qr.rank() < degree + 1) throw NumericalError("detrend: seasonal design is rank deficient");
  const Vector coeffs = qr.solve(avg);
  state.seasonal_coeffs.assign(coeffs.data(), coeffs.data() + coeffs.size());
  return {apply_detrend(panel, state), state};
}

// ---------------------------------------------------------------------------
// Windowing and prediction

/// floor(T/p) non-overlapping samples; sample i stacks rows i*p .. i*p+p-1,
/// oldest first, so the last q entries are the prediction target.
inline SampleSet windowize(const DenseMatrix& velocity, Index p) {
  if (p < 2) throw DomainError("windowize: p must be >= 2");
  const Index T = velocity.rows(), q = velocity.cols();
  if (T < p) throw DomainError("windowize: series shorter than one window");
  const Index n = T / p;
  DenseMatrix data(n, p * q);
  for (Index i = 0; i < n; ++i)
    for (Index b = 0; b < p; ++b) data.block(i, b * q, 1, q) = velocity.row(i * p + b);
  return SampleSet(std::move(data), p, q);
}

struct PredictorModel {
  Index p = 0, q = 0;
  DenseMatrix w;  ///< q x q(p-1)
  double lambda_used = 0.0;
  double pinv_tol = 1e-10;
};

inline PredictorModel fit_predictor(const DenseMatrix& sigma_hat, Index p, Index q,
                                    double pinv_tol = 1e-10) {
  detail::check_symmetric_pq(sigma_hat, p, q, "fit_predictor");
  if (p < 2) throw DomainError("fit_predictor: p must be >= 2");
  const Index past = q * (p - 1);
  PredictorModel m;
  m.p = p;
  m.q = q;
  m.pinv_tol = pinv_tol;
  m.w = sigma_hat.block(past, 0, q, past) * pseudo_inverse(sigma_hat.topLeftCorner(past, past), pinv_tol);
  if (!m.w.allFinite()) throw NumericalError("fit_predictor: non-finite coefficients");
  return m;
}

struct Prediction {
  DenseMatrix values;       ///< T x q, zero where no full history exists
  std::vector<bool> valid;  ///< false for the first p-1 rows
};

/// One-step predictions: row t uses rows t-p+1 .. t-1 of `velocity`.
inline Prediction predict_series(const PredictorModel& model, const DenseMatrix& velocity) {
  if (velocity.cols() != model.q)
    throw DimensionError("predict_series: series has " + std::to_string(velocity.cols()) +
                         " stations, model expects " + std::to_string(model.q));
  const Index T = velocity.rows(), q = model.q, lags = model.p - 1;
  if (T < model.p) throw DomainError("predict_series: series shorter than one window");
  Prediction out{DenseMatrix::Zero(T, q), std::vector<bool>(T, false)};
  Vector history(q * lags);
  for (Index t = lags; t < T; ++t) {
    for (Index b = 0; b < lags; ++b) history.segment(b * q, q) = velocity.row(t - lags + b).transpose();
    out.values.row(t) = (model.w * history).transpose();
    out.valid[t] = true;
  }
  return out;
}

/// Per-station RMSE over rows >= skip.
inline std::vector<double> rmse_by_station(const DenseMatrix& pred, const DenseMatrix& truth,
                                           Index skip) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw DimensionError("rmse_by_station: shape mismatch");
  if (skip < 0 || skip >= pred.rows()) throw DomainError("rmse_by_station: nothing left after skip");
  const Index rows = pred.rows() - skip;
  std::vector<double> out(pred.cols());
  for (Index s = 0; s < pred.cols(); ++s)
    out[s] = std::sqrt((pred.col(s).tail(rows) - truth.col(s).tail(rows)).squaredNorm() / double(rows));
  return out;
}

/// Mean over stations of 20 log10(reference / estimate).
inline double mean_db_improvement(const std::vector<double>& rmse_reference,
                                  const std::vector<double>& rmse_estimate) {
  if (rmse_reference.size() != rmse_estimate.size() || rmse_reference.empty())
    throw DimensionError("mean_db_improvement: station lists differ");
  double acc = 0.0;
  for (std::size_t s = 0; s < rmse_reference.size(); ++s) {
    if (!(rmse_reference[s] > 0.0) || !(rmse_estimate[s] > 0.0))
      throw DomainError("mean_db_improvement: RMSE must be positive");
    acc += 20.0 * std::log10(rmse_reference[s] / rmse_estimate[s]);
  }
  return acc / double(rmse_reference.size());
}

inline double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return v.empty() ? 0.0 : acc / double(v.size());
}

enum class PredictorEstimator { scm, prls, svt };

inline std::string_view to_string(PredictorEstimator e) {
  switch (e) {
    case PredictorEstimator::scm: return "scm";
    case PredictorEstimator::prls: return "prls";
    case PredictorEstimator::svt: return "svt";
  }
  return "?";
}

inline PredictorEstimator predictor_estimator_from_string(std::string_view s) {
  if (s == "scm") return PredictorEstimator::scm;
  if (s == "prls") return PredictorEstimator::prls;
  if (s == "svt") return PredictorEstimator::svt;
  throw DomainError("unknown estimator '" + std::string(s) + "' (expected scm, prls or svt)");
}

/// Covariance estimate for the windowed samples and the lambda it used.
inline std::pair<DenseMatrix, double> predictor_covariance(const SampleSet& samples,
                                                           PredictorEstimator est,
                                                           const LambdaRule& rule) {
  const DenseMatrix s = scm(samples);
  switch (est) {
    case PredictorEstimator::scm:
      return {s, 0.0};
    case PredictorEstimator::prls: {
      const double lambda = lambda_select(rule, s, samples.p(), samples.q(), samples.n());
      return {prls(s, lambda, samples.p(), samples.q()).covariance, lambda};
    }
    case PredictorEstimator::svt: {
      const double lambda = lambda_select(rule, s, samples.p(), samples.q(), samples.n());
      return {svt_covariance(s, lambda), lambda};
    }
  }
  throw DomainError("predictor_covariance: unknown estimator");
}

/// Windows `velocity`, estimates the covariance and builds the predictor.
inline PredictorModel train_predictor(const DenseMatrix& velocity, Index p, PredictorEstimator est,
                                      const LambdaRule& rule, double pinv_tol = 1e-10) {
  const SampleSet samples = windowize(velocity, p);
  auto [cov, lambda] = predictor_covariance(samples, est, rule);
  PredictorModel m = fit_predictor(cov, p, velocity.cols(), pinv_tol);
  m.lambda_used = lambda;
  return m;
}

struct TuneResult {
  double best_c = 0.0;
  std::vector<double> grid;
  std::vector<double> objective;  ///< mean training RMSE per grid value, NaN on failure
};

/// Picks the C in `grid` minimizing the station-averaged one-step RMSE on the
/// training series; ties go to the smaller C.
inline TuneResult tune_lambda(const DenseMatrix& train_velocity, Index p, PredictorEstimator est,
                              LambdaRule rule, const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("tune_lambda: empty grid");
  TuneResult out;
  out.grid = grid;
  out.objective.assign(grid.size(), std::numeric_limits<double>::quiet_NaN());
  parallel_for(grid.size(), [&](std::size_t i) {
    LambdaRule r = rule;
    r.c = grid[i];
    try {
      const PredictorModel m = train_predictor(train_velocity, p, est, r);
      const Prediction pr = predict_series(m, train_velocity);
      out.objective[i] = mean_of(rmse_by_station(pr.values, train_velocity, p - 1));
    } catch (const std::exception&) {
    }
  });
  bool found = false;
  double best = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double obj = out.objective[i];
    if (!std::isfinite(obj)) continue;
    if (!found || obj < best || (obj == best && grid[i] < out.best_c)) {
      found = true;
      best = obj;
      out.best_c = grid[i];
    }
  }
  if (!found) throw NumericalError("tune_lambda: every grid value failed");
  return out;
}

}  // namespace kronocov
