#pragma once

// Monte Carlo MSE harness for the synthetic studies and spectrum-energy
// summaries.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kronocov/bounds.hpp"
#include "kronocov/csv.hpp"
#include "kronocov/estimators.hpp"
#include "kronocov/parallel.hpp"
#include "kronocov/rng.hpp"
#include "kronocov/stats.hpp"
#include "kronocov/synthgen.hpp"

namespace kronocov {

/// ||Sigma_hat - Sigma0||_F^2 / ||Sigma0||_F^2
inline double normalized_mse(const DenseMatrix& sigma_hat, const DenseMatrix& sigma0) {
  if (sigma_hat.rows() != sigma0.rows() || sigma_hat.cols() != sigma0.cols())
    throw DimensionError("normalized_mse: shape mismatch");
  const double denom = sigma0.squaredNorm();
  if (denom == 0.0) throw DomainError("normalized_mse: zero reference covariance");
  return (sigma_hat - sigma0).squaredNorm() / denom;
}

/// 10 log10(mse_scm / mse_est): power ratio in dB.
inline double db_reduction(double mse_scm, double mse_est) {
  if (!(mse_scm > 0.0) || !(mse_est > 0.0)) throw DomainError("db_reduction: MSEs must be positive");
  return 10.0 * std::log10(mse_scm / mse_est);
}

/// 10 log10 of the ratio of relative Frobenius errors, i.e. half of
/// db_reduction. This is the scale of the published simulation figures.
inline double db_reduction_amplitude(double mse_scm, double mse_est) {
  return 0.5 * db_reduction(mse_scm, mse_est);
}

enum class EstimatorKind { scm, pca, svt, prls, cm };

inline std::string_view to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::scm: return "scm";
    case EstimatorKind::pca: return "pca";
    case EstimatorKind::svt: return "svt";
    case EstimatorKind::prls: return "prls";
    case EstimatorKind::cm: return "cm";
  }
  return "?";
}

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::scm;
  Index rank = 0;     ///< pca / cm
  LambdaRule lambda;  ///< svt / prls
  std::string label;  ///< unique row label in the output table
};

struct GeneratorSpec {
  enum class Kind { kp_sum, var1 } kind = Kind::kp_sum;
  Index rank = 1;           ///< kp_sum separation rank
  double phi_norm = 0.95;   ///< var1 ||Phi||_2; Phi is m x m with m = q, horizon N = p - 1
};

struct ExperimentConfig {
  Index p = 0, q = 0;
  GeneratorSpec generator;
  std::vector<Index> n_grid;
  Index trials = 1;
  std::vector<EstimatorSpec> estimators;
  RngSeed seed;
  bool report_min_eigenvalue = true;

  void validate() const {
    if (p < 1 || q < 1) throw ConfigError("/p", "p and q must be positive");
    if (n_grid.empty()) throw ConfigError("/n_grid", "must be non-empty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
      if (n_grid[i] < 1) throw ConfigError("/n_grid/" + std::to_string(i), "must be >= 1");
      if (i && n_grid[i] <= n_grid[i - 1])
        throw ConfigError("/n_grid/" + std::to_string(i), "must be strictly ascending");
    }
    if (trials < 1) throw ConfigError("/trials", "must be >= 1");
    if (estimators.empty()) throw ConfigError("/estimators", "must be non-empty");
    for (std::size_t i = 0; i < estimators.size(); ++i) {
      const auto& e = estimators[i];
      const std::string path = "/estimators/" + std::to_string(i);
      if (e.kind == EstimatorKind::pca && (e.rank < 1 || e.rank > p * q))
        throw ConfigError(path + "/r", "out of range");
      if (e.kind == EstimatorKind::cm && (e.rank < 1 || e.rank > std::min(p * p, q * q)))
        throw ConfigError(path + "/r", "out of range");
      if (e.kind == EstimatorKind::svt || e.kind == EstimatorKind::prls) {
        try {
          e.lambda.validate();
        } catch (const DomainError& err) {
          throw ConfigError(path + "/lambda", err.what());
        }
      }
    }
    if (generator.kind == GeneratorSpec::Kind::kp_sum &&
        (generator.rank < 1 || generator.rank > std::min(p * p, q * q)))
      throw ConfigError("/generator/r", "out of range");
    if (generator.kind == GeneratorSpec::Kind::var1 &&
        !(generator.phi_norm > 0.0 && generator.phi_norm < 1.0))
      throw ConfigError("/generator/norm", "must lie in (0, 1)");
  }
};

/// Ground truth for an experiment; the draw consumes substream 0.
inline DenseMatrix experiment_truth(const ExperimentConfig& cfg) {
  if (cfg.generator.kind == GeneratorSpec::Kind::kp_sum)
    return random_kp_sum_covariance(cfg.p, cfg.q, cfg.generator.rank, cfg.seed.substream(0)).sigma0;
  const DenseMatrix phi = random_stable_matrix(cfg.q, cfg.generator.phi_norm, cfg.seed.substream(0));
  return var1_block_toeplitz(Var1Spec(phi, cfg.p - 1));
}

struct MseCell {
  std::string estimator;
  Index n = 0;
  double mean_mse = 0.0;
  double stderr_ = 0.0;
  double db = 0.0;            ///< vs SCM, power ratio
  double db_amplitude = 0.0;  ///< vs SCM, Frobenius-error ratio
  double mean_lambda = 0.0;
  double mean_rank = 0.0;     ///< PRLS / CM separation rank, 0 otherwise
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();  ///< smallest over trials
  Index failures = 0;
};

struct MseTable {
  std::vector<MseCell> cells;

  const MseCell* find(std::string_view estimator, Index n) const {
    for (const auto& c : cells)
      if (c.estimator == estimator && c.n == n) return &c;
    return nullptr;
  }

  void write_csv(std::ostream& os) const {
    csv::Writer w(os);
    w.row({"estimator", "n", "trial_mean_mse", "stderr", "db_reduction", "db_reduction_amplitude",
           "mean_lambda", "mean_separation_rank", "min_eigenvalue", "failures"});
    for (const auto& c : cells)
      w.row({c.estimator, std::to_string(c.n), csv::format_double(c.mean_mse),
             csv::format_double(c.stderr_), csv::format_double(c.db),
             csv::format_double(c.db_amplitude), csv::format_double(c.mean_lambda),
             csv::format_double(c.mean_rank), csv::format_double(c.min_eigenvalue),
             std::to_string(c.failures)});
  }
};

namespace detail {

struct EstimateOutcome {
  double mse = std::numeric_limits<double>::quiet_NaN();
  double lambda = 0.0;
  double rank = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
};

inline double min_eigenvalue(const DenseMatrix& m) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");
  return es.eigenvalues()(0);
}

// Evaluates every estimator on one sample covariance. SVD of R(S_hat) is
// shared between PRLS and CM.
inline std::vector<EstimateOutcome> evaluate_estimators(const ExperimentConfig& cfg,
                                                        const DenseMatrix& s_hat,
                                                        const DenseMatrix& sigma0, Index n) {
  std::vector<EstimateOutcome> out(cfg.estimators.size());
  std::optional<SvdResult> permuted;
  auto permuted_svd = [&]() -> const SvdResult& {
    if (!permuted) permuted = svd(permute_r(s_hat, cfg.p, cfg.q));
    return *permuted;
  };
  for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
    const auto& spec = cfg.estimators[e];
    try {
      DenseMatrix estimate;
      switch (spec.kind) {
        case EstimatorKind::scm:
          estimate = s_hat;
          break;
        case EstimatorKind::pca:
          estimate = pca_covariance(s_hat, spec.rank);
          break;
        case EstimatorKind::svt: {
          const double lambda = spec.lambda.kind == LambdaKind::oracle
                                    ? oracle_lambda_svt(s_hat, sigma0, spec.lambda.c)
                                    : lambda_select(spec.lambda, s_hat, cfg.p, cfg.q, n);
          out[e].lambda = lambda;
          estimate = svt_covariance(s_hat, lambda);
          break;
        }
        case EstimatorKind::prls: {
          const double lambda = spec.lambda.kind == LambdaKind::oracle
                                    ? oracle_lambda_prls(s_hat, sigma0, cfg.p, cfg.q, spec.lambda.c)
                                    : lambda_select(spec.lambda, s_hat, cfg.p, cfg.q, n);
          KroneckerFit fit = prls_from_svd(permuted_svd(), lambda, cfg.p, cfg.q);
          out[e].lambda = lambda;
          out[e].rank = double(fit.effective_rank());
          estimate = std::move(fit.covariance);
          break;
        }
        case EstimatorKind::cm: {
          KroneckerFit fit = cm_from_svd(permuted_svd(), spec.rank, cfg.p, cfg.q);
          out[e].rank = double(fit.effective_rank());
          estimate = std::move(fit.covariance);
          break;
        }
      }
      out[e].mse = normalized_mse(estimate, sigma0);
      if (cfg.report_min_eigenvalue) out[e].min_eigenvalue = min_eigenvalue(estimate);
    } catch (const std::exception&) {
      out[e] = EstimateOutcome{};  // recorded as a failed cell
    }
  }
  return out;
}

}  // namespace detail

/// Normalized MSE of every estimator against one fixed truth, per sample size.
/// An "scm" row is added when the estimator list has none.
/// Trial t at n_grid[i] draws from substream 1 + i*trials + t.
inline MseTable mse_vs_n(const ExperimentConfig& cfg, const DenseMatrix& sigma0) {
  cfg.validate();
  const GaussianSampler sampler(sigma0);
  const std::size_t n_est = cfg.estimators.size();
  const std::size_t cells = cfg.n_grid.size() * static_cast<std::size_t>(cfg.trials);
  std::vector<std::vector<detail::EstimateOutcome>> results(cells);
  std::vector<double> scm_mse(cells);
  parallel_for(cells, [&](std::size_t idx) {
    const Index n = cfg.n_grid[idx / cfg.trials];
    const SampleSet z(sampler.draw(n, cfg.seed.substream(1 + idx)), cfg.p, cfg.q);
    const DenseMatrix s = scm(z);
    scm_mse[idx] = normalized_mse(s, sigma0);
    results[idx] = detail::evaluate_estimators(cfg, s, sigma0, n);
  });

  const bool has_scm = std::any_of(cfg.estimators.begin(), cfg.estimators.end(),
                                   [](const EstimatorSpec& e) { return e.kind == EstimatorKind::scm; });
  MseTable table;
  for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
    const std::size_t base = i * cfg.trials;
    const double scm_mean =
        mean_stderr(std::span(scm_mse).subspan(base, cfg.trials)).mean;
    for (std::size_t e = 0; e < n_est; ++e) {
      std::vector<double> mse, lam, rank;
      double cell_min_eig = std::numeric_limits<double>::infinity();
      Index failures = 0;
      for (Index t = 0; t < cfg.trials; ++t) {
        const auto& o = results[base + t][e];
        if (!std::isfinite(o.mse)) {
          ++failures;
          continue;
        }
        mse.push_back(o.mse);
        lam.push_back(o.lambda);
        rank.push_back(o.rank);
        if (!(o.min_eigenvalue >= cell_min_eig)) cell_min_eig = o.min_eigenvalue;
      }
      MseCell cell;
      cell.estimator = cfg.estimators[e].label;
      cell.n = cfg.n_grid[i];
      cell.failures = failures;
      if (cfg.report_min_eigenvalue && !mse.empty()) cell.min_eigenvalue = cell_min_eig;
      if (!mse.empty()) {
        const auto ms = mean_stderr(mse);
        cell.mean_mse = ms.mean;
        cell.stderr_ = ms.stderr_;
        cell.mean_lambda = mean_stderr(lam).mean;
        cell.mean_rank = mean_stderr(rank).mean;
        if (cell.mean_mse > 0.0 && scm_mean > 0.0) {
          cell.db = db_reduction(scm_mean, cell.mean_mse);
          cell.db_amplitude = db_reduction_amplitude(scm_mean, cell.mean_mse);
        } else {
          cell.db = cell.db_amplitude = std::numeric_limits<double>::infinity();
        }
      } else {
        cell.mean_mse = cell.stderr_ = std::numeric_limits<double>::quiet_NaN();
        cell.db = cell.db_amplitude = std::numeric_limits<double>::quiet_NaN();
      }
      table.cells.push_back(std::move(cell));
    }
    if (!has_scm) {
      const auto ms = mean_stderr(std::span(scm_mse).subspan(base, cfg.trials));
      MseCell cell;
      cell.estimator = "scm";
      cell.n = cfg.n_grid[i];
      cell.mean_mse = ms.mean;
      cell.stderr_ = ms.stderr_;
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

inline MseTable mse_vs_n(const ExperimentConfig& cfg) {
  cfg.validate();
  return mse_vs_n(cfg, experiment_truth(cfg));
}

/// Percent of ||S||_F^2 carried by each Kronecker component and by each
/// eigencomponent; the eigen list is truncated to min(p^2, q^2) entries.
struct SpectrumEnergy {
  std::vector<double> kron_pcts;
  std::vector<double> eigen_pcts;
};

inline SpectrumEnergy spectrum_energy_report(const DenseMatrix& s, Index p, Index q) {
  detail::check_symmetric_pq(s, p, q, "spectrum_energy_report");
  const double total = s.squaredNorm();
  if (total == 0.0) throw DomainError("spectrum_energy_report: zero matrix");
  SpectrumEnergy out;
  const Vector ks = kron_spectrum(s, p, q);
  for (Index k = 0; k < ks.size(); ++k) out.kron_pcts.push_back(100.0 * ks(k) * ks(k) / total);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(s, Eigen::EigenvaluesOnly);
  Vector ev = es.eigenvalues().cwiseAbs();
  std::sort(ev.data(), ev.data() + ev.size(), std::greater<>());
  const Index keep = std::min<Index>(ev.size(), std::min(p * p, q * q));
  for (Index k = 0; k < keep; ++k) out.eigen_pcts.push_back(100.0 * ev(k) * ev(k) / total);
  return out;
}

}  // namespace kronocov
