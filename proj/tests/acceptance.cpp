// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed here.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kronocov/kronocov.hpp"

#ifndef KRONOCOV_CONFIG_DIR
#define KRONOCOV_CONFIG_DIR "configs"
#endif

using namespace kronocov;

namespace {

struct Outcome {
  enum class Status { pass, fail, skip } status = Status::fail;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) {
  return {ok ? Outcome::Status::pass : Outcome::Status::fail, std::move(detail)};
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

void info(const std::string& line) { std::printf("  info: %s\n", line.c_str()); }

double min_eig(const DenseMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<DenseMatrix>(m, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

DenseMatrix random_matrix(Index rows, Index cols, RngSeed seed) {
  Philox4x32 engine(seed);
  return standard_normal_matrix(rows, cols, engine);
}

bool within(double value, double target, double tol) { return std::abs(value - target) <= tol; }

// ---------------------------------------------------------------------------

Outcome permutation_correctness() {
  long exact = 0, total = 0;
  double worst_kron = 0.0;
  for (Index p = 1; p <= 8; ++p)
    for (Index q = 1; q <= 8; ++q)
      for (std::uint64_t k = 0; k < 20; ++k) {
        const std::uint64_t stream = std::uint64_t(((p - 1) * 8 + (q - 1)) * 20) + k;
        const DenseMatrix m = random_matrix(p * q, p * q, RngSeed{1001, stream});
        ++total;
        exact += depermute_r(permute_r(m, p, q), p, q) == m;

        const DenseMatrix c = random_matrix(p, p, RngSeed{1002, stream});
        const DenseMatrix a = symmetrize(c);
        const DenseMatrix b = random_matrix(q, q, RngSeed{1003, stream});
        const double e_sym =
            (permute_r(kron(a, b), p, q) - vec(a) * vec(b).transpose()).cwiseAbs().maxCoeff();
        const double e_gen =
            (permute_r(kron(c, b), p, q) - vec(c.transpose()) * vec(b).transpose())
                .cwiseAbs()
                .maxCoeff();
        worst_kron = std::max({worst_kron, e_sym, e_gen});
      }
  return pass_if(exact == total && worst_kron <= 1e-12,
                 fmt("round trip exact %ld/%ld, max |R(A(x)B) - vec vec^T| = %.2e (tol 1e-12)",
                     exact, total, worst_kron));
}

Outcome prls_invariants() {
  const Index p = 5, q = 5, n = 2 * p * q, trials = 50;
  const DenseMatrix sigma0 = random_kp_sum_covariance(p, q, 2, RngSeed{2001, 0}).sigma0;
  double worst_sym = 0.0;
  int pd = 0, checks = 0;
  int small_pd[2] = {0, 0};
  const double small_c[2] = {0.05, 0.13};
  for (Index t = 0; t < trials; ++t) {
    const DenseMatrix s = scm(sample_gaussian(sigma0, n, p, q, RngSeed{2001, std::uint64_t(1 + t)}));
    std::vector<double> lambdas{oracle_lambda_prls(s, sigma0, p, q)};
    LambdaRule rule;
    rule.c = 0.3;
    lambdas.push_back(lambda_select(rule, s, p, q, n));
    for (double lambda : lambdas) {
      const DenseMatrix est = prls(s, lambda, p, q).covariance;
      worst_sym = std::max(worst_sym, (est - est.transpose()).cwiseAbs().maxCoeff());
      pd += min_eig(est) > 0.0;
      ++checks;
    }
    for (int i = 0; i < 2; ++i) {
      rule.c = small_c[i];
      small_pd[i] += min_eig(prls(s, lambda_select(rule, s, p, q, n), p, q).covariance) > 0.0;
    }
  }
  info(fmt("positive definite at practical C = 0.05: %d/%d, C = 0.13: %d/%d", small_pd[0],
           int(trials), small_pd[1], int(trials)));
  return pass_if(worst_sym <= 1e-10 && pd == checks,
                 fmt("symmetry defect %.2e (tol 1e-10), positive definite %d/%d "
                     "(oracle lambda and practical C = 0.3)",
                     worst_sym, pd, checks));
}

Outcome oracle_inequality() {
  const std::vector<Index> n_list{25, 100};
  const auto rows = oracle_inequality_trials(5, 5, 2, n_list, 100, RngSeed{20130401, 0});
  int holds = 0, hyp = 0;
  for (const auto& r : rows) {
    holds += r.check.holds;
    hyp += r.check.hypothesis.value_or(false);
  }
  const int total = int(rows.size());
  return pass_if(holds == total && hyp == total && total == 200,
                 fmt("inequality holds %d/%d, hypothesis met %d/%d", holds, total, hyp, total));
}

Outcome simulation(const char* file, double prls_target, double svt_target) {
  ExperimentConfig cfg =
      config::parse_experiment(config::read_json_file(std::string(KRONOCOV_CONFIG_DIR) + "/" + file));
  cfg.report_min_eigenvalue = false;
  const MseTable table = mse_vs_n(cfg);
  const Index n = cfg.n_grid.front();
  const MseCell* pr = table.find("prls", n);
  const MseCell* sv = table.find("svt", n);
  if (!pr || !sv) return {Outcome::Status::fail, "missing prls or svt row"};
  for (const auto& c : table.cells)
    info(fmt("%-6s n=%ld mse=%.4g amplitude dB=%.3f power dB=%.3f lambda=%.4g rank=%.2f",
             c.estimator.c_str(), long(c.n), c.mean_mse, c.db_amplitude, c.db, c.mean_lambda,
             c.mean_rank));
  const bool ok_p = within(pr->db_amplitude, prls_target, 2.0);
  const bool ok_s = within(sv->db_amplitude, svt_target, 1.0);
  return pass_if(ok_p && ok_s, fmt("PRLS %.2f dB (target %.2f +- 2.0) %s, SVT %.2f dB (target "
                                   "%.2f +- 1.0) %s",
                                   pr->db_amplitude, prls_target, ok_p ? "ok" : "out",
                                   sv->db_amplitude, svt_target, ok_s ? "ok" : "out"));
}

Outcome opnorm_growth() {
  const auto cfg = config::parse_opnorm(
      config::read_json_file(std::string(KRONOCOV_CONFIG_DIR) + "/opnorm.json"));
  const OpnormGrowth g = opnorm_growth_experiment(cfg.q, cfg.n, cfg.p_grid, cfg.trials, cfg.seed);
  return pass_if(g.fit.r_squared >= 0.99, fmt("y = %.4g p^2 + %.4g, R^2 = %.4f (need >= 0.99)",
                                       g.fit.slope, g.fit.intercept, g.fit.r_squared));
}

Outcome spectrum_bounds() {
  const auto cfg = config::parse_spectrum(
      config::read_json_file(std::string(KRONOCOV_CONFIG_DIR) + "/spectrum.json"));
  const Var1Spec spec = config::spectrum_instance(cfg);
  const SpectrumReport rep = toeplitz_spectrum_bounds(spec, spec.blocks(), spec.dim());
  int order_bad = 0;
  double proj_err = 0.0;
  for (std::size_t k = 0; k < rep.exact.size(); ++k) {
    const double tol = 1e-8;
    order_bad += !(rep.exact[k] <= rep.frob_opt[k] + tol && rep.frob_opt[k] <= rep.frob_gs[k] + tol &&
                   rep.frob_gs[k] <= rep.gs_tail[k] + tol);
    proj_err = std::max(proj_err, std::abs(rep.frob_opt[k] - rep.frob_opt_projection[k]));
  }
  return pass_if(order_bad == 0 && proj_err <= 1e-8 && rep.gs_tail_log_fit.r_squared >= 0.98,
                 fmt("ordering violations %d of %zu, |frob_opt - projection| = %.2e (tol 1e-8), "
                     "log tail R^2 = %.4f (need >= 0.98)",
                     order_bad, rep.exact.size(), proj_err, rep.gs_tail_log_fit.r_squared));
}

// Projected gradient on ||S - X||_F^2 + lambda tr(X) over the psd cone.
DenseMatrix svt_projected_gradient(const DenseMatrix& s, double lambda) {
  const Index d = s.rows();
  DenseMatrix x = DenseMatrix::Zero(d, d);
  for (int it = 0; it < 2000; ++it) {
    DenseMatrix y = symmetrize(x - 0.1 * (2.0 * (x - s) + lambda * DenseMatrix::Identity(d, d)));
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(y);
    x = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() * es.eigenvectors().transpose();
  }
  return x;
}

Outcome svt_oracle() {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    const DenseMatrix s = symmetrize(random_matrix(4, 4, RngSeed{8001, k}));
    const double lambda = 0.25 + 0.1 * double(k);
    worst = std::max(worst, (svt_covariance(s, lambda) - svt_projected_gradient(s, lambda)).norm());
  }
  return pass_if(worst <= 1e-6, fmt("max Frobenius gap %.2e over 20 instances (tol 1e-6)", worst));
}

Outcome predictor_sanity() {
  const Index q = 10, p = 8, train_days = 320, test_days = 400;
  const std::vector<double> grid{0.05, 0.1, 0.13, 0.2, 0.3, 0.5, 1.0, 2.0};
  int wins = 0, fixed_wins = 0;
  double gain = 0.0;
  for (std::uint64_t run = 0; run < 20; ++run) {
    const Var1Spec spec(random_stable_matrix(q, 0.95, RngSeed{9001 + run, 0}), 1);
    const DenseMatrix series = simulate_var1_series(spec, train_days + test_days, RngSeed{9001 + run, 1});
    const DenseMatrix train = series.topRows(train_days), test = series.bottomRows(test_days);
    const auto test_rmse = [&](PredictorEstimator e, const LambdaRule& rule) {
      const PredictorModel m = train_predictor(train, p, e, rule);
      return mean_of(rmse_by_station(predict_series(m, test).values, test, p - 1));
    };
    LambdaRule rule;
    const double scm_rmse = test_rmse(PredictorEstimator::scm, rule);
    LambdaRule fixed = rule;
    fixed.c = 0.13;
    const double fixed_rmse = test_rmse(PredictorEstimator::prls, fixed);
    fixed_wins += std::isfinite(fixed_rmse) && fixed_rmse <= scm_rmse;
    rule.c = tune_lambda(train, p, PredictorEstimator::prls, rule, grid).best_c;
    const double prls_rmse = test_rmse(PredictorEstimator::prls, rule);
    wins += prls_rmse <= scm_rmse;
    gain += 20.0 * std::log10(scm_rmse / prls_rmse);
  }
  info(fmt("untuned C = 0.13 wins %d/20", fixed_wins));
  return pass_if(wins >= 18, fmt("tuned PRLS RMSE <= SCM in %d/20 runs (need >= 18), mean gain "
                                 "%.3f dB, n = %ld < d = %ld",
                                 wins, gain / 20.0, long(train_days / p), long(p * q)));
}

Outcome irish_wind() {
  const char* path = std::getenv("KRONOCOV_IRISH_WIND");
  if (!path || !*path) return {Outcome::Status::skip, "set KRONOCOV_IRISH_WIND to a panel CSV"};
  const Index p = 8;
  const WindPanel panel = load_panel(std::string(path));
  const WindPanel train_panel = panel.slice(Date::parse("1969-01-01"), Date::parse("1970-12-31"));
  const WindPanel test_panel = panel.slice(Date::parse("1971-01-01"), Date::parse("1978-12-31"));
  const DetrendResult fitted = detrend(train_panel, 14);
  const DenseMatrix train = fitted.velocity;
  const DenseMatrix test = apply_detrend(test_panel, fitted.state);
  info(fmt("%ld stations, %ld training days (n = %ld), %ld test days", long(panel.station_count()),
           long(train.rows()), long(train.rows() / p), long(test.rows())));

  const auto rmse = [&](PredictorEstimator e, const LambdaRule& rule) {
    const PredictorModel m = train_predictor(train, p, e, rule);
    return rmse_by_station(predict_series(m, test).values, test, p - 1);
  };
  LambdaRule prls_rule;
  prls_rule.c = 0.13;
  LambdaRule svt_rule;
  svt_rule.kind = LambdaKind::svt_lounici;
  svt_rule.c = 1.9;
  const auto base = rmse(PredictorEstimator::scm, prls_rule);
  const double db_p = mean_db_improvement(base, rmse(PredictorEstimator::prls, prls_rule));
  const double db_s = mean_db_improvement(base, rmse(PredictorEstimator::svt, svt_rule));
  const bool ok_p = within(db_p, 3.32, 1.0), ok_s = within(db_s, 2.50, 1.0);
  return pass_if(ok_p && ok_s, fmt("PRLS %.2f dB (target 3.32 +- 1.0) %s, SVT %.2f dB (target "
                                   "2.50 +- 1.0) %s",
                                   db_p, ok_p ? "ok" : "out", db_s, ok_s ? "ok" : "out"));
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"1 permutation correctness", permutation_correctness},
      {"2 PRLS symmetry and positive definiteness", prls_invariants},
      {"3 oracle inequality", oracle_inequality},
      {"4 simulation A", [] { return simulation("sim_a.json", 7.91, 1.80); }},
      {"5 simulation B", [] { return simulation("sim_b.json", 6.88, 0.37); }},
      {"6 operator norm growth", opnorm_growth},
      {"7 Kronecker spectrum bounds", spectrum_bounds},
      {"8 SVT closed form vs solver", svt_oracle},
      {"9 predictor sanity", predictor_sanity},
      {"10 Irish wind", irish_wind},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception& e) {
      out = {Outcome::Status::fail, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const char* tag = out.status == Outcome::Status::pass   ? "PASS"
                      : out.status == Outcome::Status::skip ? "SKIP"
                                                            : "FAIL";
    failed += out.status == Outcome::Status::fail;
    std::printf("%s [%s] %s (%.1f s)\n", tag, name, out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d criterion(s) failed\n", failed);
  return failed ? 1 : 0;
}
