#pragma once

// Empirical checks of the error and approximation bounds: operator norm of
// the permuted SCM error, the oracle inequality, and Kronecker-spectrum
// bounds for block-Toeplitz covariances.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <vector>

#include "kronocov/estimators.hpp"
#include "kronocov/matcore.hpp"
#include "kronocov/parallel.hpp"
#include "kronocov/rng.hpp"
#include "kronocov/stats.hpp"
#include "kronocov/synthgen.hpp"
#include "kronocov/theory.hpp"

namespace kronocov {

struct BoundParams {
  double c0 = 1.0;         ///< ||Sigma0||_2
  double t = 0.0;          ///< tail parameter; 0 selects the admissible minimum
  double eps_prime = 0.25;

  double effective_t() const { return t != 0.0 ? t : theory::min_t(eps_prime); }
};

/// ||R(S_hat - Sigma0)||_2
inline double permuted_error_norm(const DenseMatrix& s_hat, const DenseMatrix& sigma0, Index p,
                                  Index q) {
  if (s_hat.rows() != sigma0.rows() || s_hat.cols() != sigma0.cols())
    throw DimensionError("permuted_error_norm: S_hat and Sigma0 differ in shape");
  return spectral_norm(permute_r(s_hat - sigma0, p, q));
}

inline double thm3_rate(const BoundParams& params, Index p, Index q, Index n) {
  return theory::opnorm_rate(params.c0, params.effective_t(), params.eps_prime, p, q, n);
}

/// Singular values of R(Sigma0), length min(p^2, q^2), trailing zeros kept.
inline Vector kron_spectrum(const DenseMatrix& sigma0, Index p, Index q) {
  return singular_values(permute_r(sigma0, p, q));
}

// ---------------------------------------------------------------------------
// Operator-norm growth (Sigma0 = I)

struct OpnormGrowth {
  std::vector<Index> p_grid;
  std::vector<double> means;  ///< mean ||Delta_n||_2^2 per p
  std::vector<double> stderrs;
  LinearFit fit;              ///< y = a p^2 + b, slope = a, intercept = b
  double spearman = 0.0;      ///< rank correlation of means with p
};

/// Monte Carlo mean of ||R(S_n - I)||_2^2 over `trials` draws for each p.
/// Trial t at grid index g uses stream 1 + g*trials + t.
inline OpnormGrowth opnorm_growth_experiment(Index q, Index n, std::span<const Index> p_grid,
                                             Index trials, RngSeed seed) {
  if (p_grid.empty()) throw DomainError("opnorm_growth_experiment: empty p grid");
  if (trials < 1 || n < 1 || q < 1) throw DomainError("opnorm_growth_experiment: bad sizes");
  const std::size_t cells = p_grid.size() * static_cast<std::size_t>(trials);
  std::vector<double> values(cells);
  parallel_for(cells, [&](std::size_t idx) {
    const std::size_t g = idx / trials;
    const Index p = p_grid[g];
    Philox4x32 engine(seed.substream(1 + idx));
    const SampleSet z(standard_normal_matrix(n, p * q, engine), p, q);
    const DenseMatrix s = scm(z);
    const double e = permuted_error_norm(s, DenseMatrix::Identity(p * q, p * q), p, q);
    values[idx] = e * e;
  });
  OpnormGrowth out;
  out.p_grid.assign(p_grid.begin(), p_grid.end());
  std::vector<double> x;
  for (std::size_t g = 0; g < p_grid.size(); ++g) {
    const auto ms = mean_stderr(std::span(values).subspan(g * trials, trials));
    out.means.push_back(ms.mean);
    out.stderrs.push_back(ms.stderr_);
    x.push_back(double(p_grid[g]) * double(p_grid[g]));
  }
  if (p_grid.size() >= 2) {
    out.fit = fit_line(x, out.means);
    std::vector<double> pg(p_grid.begin(), p_grid.end());
    out.spearman = spearman(pg, out.means);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracle inequality

struct OracleCheck {
  double lhs = 0.0;               ///< ||R(Sigma_hat - Sigma0)||_F^2
  std::vector<double> rhs_per_r;  ///< r = 0..min(p^2,q^2)
  double min_rhs = 0.0;
  Index best_r = 0;
  bool holds = false;
  std::optional<bool> hypothesis;  ///< lambda >= 2 ||R(S_hat - Sigma0)||_2, when S_hat given
  double hypothesis_margin = 0.0;  ///< lambda - 2 ||Delta_n||_2
};

/// The penalty constant (1 + sqrt 2)^2 / 4.
inline double oracle_penalty_constant() {
  return (1.0 + std::numbers::sqrt2) * (1.0 + std::numbers::sqrt2) / 4.0;
}

inline OracleCheck oracle_inequality_check(const DenseMatrix& sigma_hat, const DenseMatrix& sigma0,
                                           double lambda, Index p, Index q,
                                           const DenseMatrix* s_hat = nullptr) {
  if (sigma_hat.rows() != sigma0.rows() || sigma_hat.cols() != sigma0.cols())
    throw DimensionError("oracle_inequality_check: shape mismatch");
  OracleCheck out;
  out.lhs = permute_r(sigma_hat - sigma0, p, q).squaredNorm();
  const Vector sv = kron_spectrum(sigma0, p, q);
  const Index r0 = sv.size();
  // tail[r] = sum_{k > r} sigma_k^2
  std::vector<double> tail(r0 + 1, 0.0);
  for (Index r = r0 - 1; r >= 0; --r) tail[r] = tail[r + 1] + sv(r) * sv(r);
  const double c = oracle_penalty_constant();
  out.rhs_per_r.resize(r0 + 1);
  for (Index r = 0; r <= r0; ++r) out.rhs_per_r[r] = tail[r] + c * lambda * lambda * double(r);
  const auto it = std::min_element(out.rhs_per_r.begin(), out.rhs_per_r.end());
  out.min_rhs = *it;
  out.best_r = it - out.rhs_per_r.begin();
  // Relative slack for rounding in the reconstruction of sigma_hat.
  out.holds = out.lhs <= out.min_rhs + 1e-12 * std::max(1.0, sigma0.squaredNorm());
  if (s_hat) {
    const double e = permuted_error_norm(*s_hat, sigma0, p, q);
    out.hypothesis_margin = lambda - 2.0 * e;
    out.hypothesis = out.hypothesis_margin >= -1e-12 * std::max(1.0, lambda);
  }
  return out;
}

struct OracleTrial {
  Index n = 0;
  Index trial = 0;
  double lambda = 0.0;
  OracleCheck check;
};

/// Draws a separation-rank-r truth (stream 0), then for every n and trial
/// fits PRLS at lambda = 2 ||Delta_n||_2 and checks the oracle inequality.
/// Trial t of n_list[i] uses stream 1 + i*trials + t.
inline std::vector<OracleTrial> oracle_inequality_trials(Index p, Index q, Index r,
                                                         std::span<const Index> n_list,
                                                         Index trials, RngSeed seed) {
  if (trials < 1 || n_list.empty()) throw DomainError("oracle_inequality_trials: nothing to run");
  const KpSumTruth truth = random_kp_sum_covariance(p, q, r, seed.substream(0));
  const GaussianSampler sampler(truth.sigma0);
  const std::size_t cells = n_list.size() * static_cast<std::size_t>(trials);
  std::vector<OracleTrial> rows(cells);
  parallel_for(cells, [&](std::size_t idx) {
    const Index n = n_list[idx / trials];
    const SampleSet z(sampler.draw(n, seed.substream(1 + idx)), p, q);
    const DenseMatrix s = scm(z);
    const double lambda = oracle_lambda_prls(s, truth.sigma0, p, q);
    const KroneckerFit fit = prls(s, lambda, p, q);
    rows[idx] = {n, static_cast<Index>(idx % trials), lambda,
                 oracle_inequality_check(fit.covariance, truth.sigma0, lambda, p, q, &s)};
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Operator-norm bound coverage

struct CoverageResult {
  Index trials = 0;
  Index covered = 0;
  double bound = 0.0;
  double nominal = 0.0;
  double observed() const { return trials ? double(covered) / double(trials) : 0.0; }
};

/// Fraction of trials with ||Delta_n||_2 <= thm3_rate, against the nominal
/// probability 1 - 2 M^{-t/(4C)}. params.c0 is overwritten by ||Sigma0||_2.
inline CoverageResult thm3_coverage(const DenseMatrix& sigma0, Index p, Index q, Index n,
                                    Index trials, BoundParams params, RngSeed seed) {
  params.c0 = spectral_norm_symmetric(sigma0);
  CoverageResult out;
  out.trials = trials;
  out.bound = thm3_rate(params, p, q, n);
  out.nominal = theory::opnorm_coverage(params.effective_t(), p, q, n);
  const GaussianSampler sampler(sigma0);
  std::vector<char> hit(trials, 0);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
    const DenseMatrix s = scm(SampleSet(sampler.draw(n, seed.substream(1 + t)), p, q));
    hit[t] = permuted_error_norm(s, sigma0, p, q) <= out.bound;
  });
  out.covered = std::count(hit.begin(), hit.end(), 1);
  return out;
}

// ---------------------------------------------------------------------------
// Kronecker spectrum bounds

/// ||(I - P) R^T||_2^2 for an orthogonal projector P on R^{q^2}; an upper
/// bound on sigma_{k+1}^2(R) when rank(P) = k, tight at P = V_k V_k^T.
inline double variational_bound(const DenseMatrix& r0, const DenseMatrix& projector) {
  require_square(projector, "variational_bound");
  if (projector.rows() != r0.cols())
    throw DimensionError("variational_bound: projector must act on the column space of R");
  const double scale = std::max(1.0, projector.cwiseAbs().maxCoeff());
  if ((projector - projector.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale ||
      (projector * projector - projector).cwiseAbs().maxCoeff() > 1e-8 * scale)
    throw DomainError("variational_bound: argument is not an orthogonal projector");
  const DenseMatrix resid =
      (DenseMatrix::Identity(r0.cols(), r0.cols()) - projector) * r0.transpose();
  const double s = spectral_norm(resid);
  return s * s;
}

/// Orthonormal vectors produced from vec(Sigma(0)), vec(Sigma(1)),
/// vec(Sigma(-1)), vec(Sigma(2)), ... in that order.
struct GsBasis {
  DenseMatrix vectors;      ///< one column per accepted vector
  std::vector<long> lags;   ///< source lag of each column
};

/// `forward[tau]` = Sigma(tau) for tau = 0..N, `backward[tau-1]` = Sigma(-tau).
/// Vectors whose residual after projection is below 1e-10 of their norm are
/// treated as dependent and skipped.
inline GsBasis gs_toeplitz_basis(std::span<const DenseMatrix> forward,
                                 std::span<const DenseMatrix> backward) {
  if (forward.empty()) return {};
  const Index m = forward.front().rows();
  for (const auto& b : forward)
    if (b.rows() != m || b.cols() != m) throw DimensionError("gs_toeplitz_basis: blocks differ in size");
  for (const auto& b : backward)
    if (b.rows() != m || b.cols() != m) throw DimensionError("gs_toeplitz_basis: blocks differ in size");

  std::vector<std::pair<long, const DenseMatrix*>> order{{0, &forward[0]}};
  const std::size_t horizon = std::max(forward.size() - 1, backward.size());
  for (std::size_t l = 1; l <= horizon; ++l) {
    if (l < forward.size()) order.emplace_back(long(l), &forward[l]);
    if (l <= backward.size()) order.emplace_back(-long(l), &backward[l - 1]);
  }

  std::vector<Vector> accepted;
  GsBasis out;
  for (const auto& [lag, block] : order) {
    Vector v = vec(*block);
    const double norm0 = v.norm();
    if (norm0 == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass)  // re-orthogonalize once
      for (const auto& b : accepted) v -= b.dot(v) * b;
    const double resid = v.norm();
    if (resid < 1e-10 * norm0) continue;
    accepted.push_back(v / resid);
    out.lags.push_back(lag);
  }
  out.vectors.resize(m * m, static_cast<Index>(accepted.size()));
  for (std::size_t c = 0; c < accepted.size(); ++c) out.vectors.col(Index(c)) = accepted[c];
  return out;
}

/// Bound curves indexed by k = 0..r0-1, each bounding exact[k] = sigma_{k+1}^2(R0).
struct SpectrumReport {
  Vector sigma;                      ///< Kronecker spectrum sigma_1 >= sigma_2 >= ...
  std::vector<double> exact;         ///< sigma_{k+1}^2
  std::vector<double> frob_opt;      ///< ||R0 (I - V_k V_k^T)||_F^2 as the spectral tail sum
  std::vector<double> frob_opt_projection;  ///< same quantity via an explicit projector
  std::vector<double> frob_gs;       ///< ||R0 (I - P_k)||_F^2 with the Gram-Schmidt basis
  std::vector<double> gs_tail;       ///< row-subtraction bound p * sum of unspanned ||Sigma(l)||_F^2
  LinearFit gs_tail_log_fit;         ///< log(gs_tail[k]) against k over the positive entries
  double decay_u = 0.0;              ///< ||Phi||_2
  double fitted_c_prime = 0.0;       ///< max_tau ||Sigma(tau)||_F^2 / (u^{2|tau|} q)
};

/// Kronecker spectrum of a VAR(1) block-Toeplitz covariance and its bounds.
/// Requires p = N + 1 (temporal factor) and q = m (spatial factor).
inline SpectrumReport toeplitz_spectrum_bounds(const Var1Spec& spec, Index p, Index q) {
  if (p != spec.blocks() || q != spec.dim()) {
    std::ostringstream os;
    os << "toeplitz_spectrum_bounds: need p = N+1 = " << spec.blocks() << " and q = m = "
       << spec.dim() << ", got p = " << p << ", q = " << q;
    throw DimensionError(os.str());
  }
  const std::vector<DenseMatrix> lags = var1_lag_covariances(spec);
  const DenseMatrix sigma0 = block_toeplitz(lags);
  const DenseMatrix r0 = permute_r(sigma0, p, q);
  const SvdResult f = svd(r0);
  const Index r_count = f.sigma.size();

  SpectrumReport rep;
  rep.sigma = f.sigma;
  rep.decay_u = spectral_norm(spec.phi);

  std::vector<DenseMatrix> backward;
  for (std::size_t l = 1; l < lags.size(); ++l) backward.push_back(lags[l].transpose());
  const GsBasis gs = gs_toeplitz_basis(lags, backward);

  // energy[l] = ||Sigma(l)||_F^2 + ||Sigma(-l)||_F^2 for l >= 1, ||Sigma(0)||_F^2 at 0
  const Index horizon = spec.horizon;
  std::vector<double> energy(horizon + 1);
  energy[0] = lags[0].squaredNorm();
  for (Index l = 1; l <= horizon; ++l) energy[l] = 2.0 * lags[l].squaredNorm();
  std::vector<double> tail_from(horizon + 2, 0.0);  // sum_{l >= a} energy[l]
  for (Index a = horizon; a >= 0; --a) tail_from[a] = tail_from[a + 1] + energy[a];

  auto odd_tail = [&](Index k) {  // k = 2k'+1
    const Index kp = (k - 1) / 2;
    return kp + 1 <= horizon ? double(p) * tail_from[kp + 1] : 0.0;
  };

  double spectral_tail = f.sigma.squaredNorm();
  for (Index k = 0; k < r_count; ++k) {
    const double sk = f.sigma(k) * f.sigma(k);
    rep.exact.push_back(sk);
    rep.frob_opt.push_back(std::max(0.0, spectral_tail));
    spectral_tail -= sk;

    const DenseMatrix vk = f.v.leftCols(k);
    rep.frob_opt_projection.push_back((r0 - (r0 * vk) * vk.transpose()).squaredNorm());
    const DenseMatrix gk = gs.vectors.leftCols(std::min<Index>(k, gs.vectors.cols()));
    rep.frob_gs.push_back((r0 - (r0 * gk) * gk.transpose()).squaredNorm());

    double bound;
    if (k == 0)
      bound = double(p) * tail_from[0];
    else if (k % 2 == 1)
      bound = odd_tail(k);
    else
      bound = 0.5 * (odd_tail(k - 1) + odd_tail(k + 1));
    rep.gs_tail.push_back(bound);
  }

  std::vector<double> ks, logs;
  for (Index k = 0; k < r_count; ++k)
    if (rep.gs_tail[k] > 0.0) {
      ks.push_back(double(k));
      logs.push_back(std::log(rep.gs_tail[k]));
    }
  if (ks.size() >= 2) rep.gs_tail_log_fit = fit_line(ks, logs);

  const double u = rep.decay_u;
  for (Index l = 0; l <= horizon; ++l) {
    const double denom = std::pow(u, 2.0 * double(l)) * double(q);
    if (denom > 0.0) rep.fitted_c_prime = std::max(rep.fitted_c_prime, lags[l].squaredNorm() / denom);
  }
  return rep;
}

/// ceil(log(pq/eps) / log(1/u)).
inline Index min_separation_rank(Index p, Index q, double u, double eps) {
  if (p < 1 || q < 1) throw DomainError("min_separation_rank: p and q must be positive");
  if (!(u > 0.0 && u < 1.0)) throw DomainError("min_separation_rank: u must lie in (0, 1)");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("min_separation_rank: eps must lie in (0, 1)");
  const double r = std::log(double(p) * double(q) / eps) / std::log(1.0 / u);
  return std::max<Index>(1, static_cast<Index>(std::ceil(r)));
}

}  // namespace kronocov
