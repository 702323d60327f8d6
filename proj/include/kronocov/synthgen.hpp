#pragma once

// Synthetic ground-truth covariances (sums of Kronecker products, VAR(1)
// block-Toeplitz) and Gaussian sampling.

#include <cmath>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>

#include "kronocov/estimators.hpp"
#include "kronocov/matcore.hpp"
#include "kronocov/rng.hpp"

namespace kronocov {

inline DenseMatrix standard_normal_matrix(Index rows, Index cols, Philox4x32& engine) {
  DenseMatrix g(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) g(i, j) = engine.normal();
  return g;
}

struct KpSumTruth {
  DenseMatrix sigma0;
  KroneckerExpansion expansion;  ///< orthogonal (SVD) expansion of sigma0
  std::vector<std::pair<DenseMatrix, DenseMatrix>> factors;  ///< raw (A_g, B_g)
};

/// Sigma0 = sum_{g=1}^r A_g (x) B_g with A_g = C C^T, C p x p standard normal,
/// and B_g likewise q x q. Factors are drawn in the order A_1, B_1, A_2, ...
inline KpSumTruth random_kp_sum_covariance(Index p, Index q, Index r, RngSeed seed) {
  if (p < 1 || q < 1) throw DimensionError("random_kp_sum_covariance: p and q must be positive");
  const Index r_max = std::min(p * p, q * q);
  if (r < 1 || r > r_max) {
    std::ostringstream os;
    os << "random_kp_sum_covariance: r = " << r << " outside [1, " << r_max << "]";
    throw DomainError(os.str());
  }
  Philox4x32 engine(seed);
  KpSumTruth out;
  out.sigma0 = DenseMatrix::Zero(p * q, p * q);
  for (Index g = 0; g < r; ++g) {
    const DenseMatrix ca = standard_normal_matrix(p, p, engine);
    const DenseMatrix cb = standard_normal_matrix(q, q, engine);
    DenseMatrix a = ca * ca.transpose();
    DenseMatrix b = cb * cb.transpose();
    out.sigma0 += kron(a, b);
    out.factors.emplace_back(std::move(a), std::move(b));
  }
  out.sigma0 = symmetrize(out.sigma0);
  out.expansion = cm_covariance(out.sigma0, r, p, q).expansion;
  return out;
}

/// Standard normal m x m matrix rescaled to spectral norm `target_norm`.
inline DenseMatrix random_stable_matrix(Index m, double target_norm, RngSeed seed) {
  if (m < 1) throw DimensionError("random_stable_matrix: m must be positive");
  if (!(target_norm > 0.0 && target_norm < 1.0))
    throw DomainError("random_stable_matrix: target norm must lie in (0, 1)");
  Philox4x32 engine(seed);
  DenseMatrix phi = standard_normal_matrix(m, m, engine);
  phi *= target_norm / spectral_norm(phi);
  return phi;
}

/// First-order vector autoregression Z_t = Phi Z_{t-1} + E_t observed over
/// N+1 consecutive times.
struct Var1Spec {
  DenseMatrix phi;
  DenseMatrix sigma_eps;
  Index horizon = 0;  ///< N; the covariance spans N+1 blocks

  Var1Spec(DenseMatrix phi_, DenseMatrix sigma_eps_, Index horizon_)
      : phi(std::move(phi_)), sigma_eps(std::move(sigma_eps_)), horizon(horizon_) {
    require_square(phi, "Var1Spec");
    require_finite(phi, "Var1Spec");
    if (sigma_eps.rows() != phi.rows() || sigma_eps.cols() != phi.cols())
      throw DimensionError("Var1Spec: innovation covariance must match Phi");
    if (horizon < 0) throw DomainError("Var1Spec: horizon must be >= 0");
    if (!(spectral_norm(phi) < 1.0)) throw DomainError("Var1Spec: ||Phi||_2 must be < 1");
    detail::require_symmetric(sigma_eps, "Var1Spec");
    if (detail::eigen_descending(symmetrize(sigma_eps)).values.minCoeff() < -1e-12)
      throw DomainError("Var1Spec: innovation covariance must be psd");
  }

  /// Identity innovation covariance.
  Var1Spec(DenseMatrix phi_, Index horizon_)
      : Var1Spec(phi_, DenseMatrix::Identity(phi_.rows(), phi_.cols()), horizon_) {}

  Index dim() const { return phi.rows(); }
  Index blocks() const { return horizon + 1; }
};

/// Lag covariances Sigma(tau) = E[y(0) y(tau)^T] for tau = 0..N. Sigma(0)
/// solves the discrete Lyapunov equation and, since
/// y(tau) = Phi^tau y(0) + (innovations after time 0), Sigma(tau) = Sigma(0) (Phi^T)^tau.
/// Negative lags follow from Sigma(-tau) = Sigma(tau)^T.
inline std::vector<DenseMatrix> var1_lag_covariances(const Var1Spec& spec) {
  std::vector<DenseMatrix> lags;
  lags.reserve(spec.blocks());
  lags.push_back(solve_discrete_lyapunov(spec.phi, spec.sigma_eps));
  const DenseMatrix phi_t = spec.phi.transpose();
  for (Index tau = 1; tau <= spec.horizon; ++tau) lags.push_back(lags.back() * phi_t);
  return lags;
}

/// (N+1)m x (N+1)m block-Toeplitz covariance with block (i,j) = Sigma(j-i).
inline DenseMatrix block_toeplitz(const std::vector<DenseMatrix>& lags) {
  if (lags.empty()) throw DimensionError("block_toeplitz: no lag blocks");
  const Index m = lags.front().rows();
  const Index nb = static_cast<Index>(lags.size());
  DenseMatrix out(nb * m, nb * m);
  for (Index i = 0; i < nb; ++i)
    for (Index j = 0; j < nb; ++j) {
      if (j >= i)
        out.block(i * m, j * m, m, m) = lags[j - i];
      else
        out.block(i * m, j * m, m, m) = lags[i - j].transpose();
    }
  return out;
}

inline DenseMatrix var1_block_toeplitz(const Var1Spec& spec) {
  return block_toeplitz(var1_lag_covariances(spec));
}

/// Draws zero-mean Gaussian vectors with a fixed covariance. The factor L
/// (L L^T = Sigma0) is Cholesky when Sigma0 is positive definite and the
/// symmetric square root otherwise.
class GaussianSampler {
 public:
  explicit GaussianSampler(const DenseMatrix& sigma0) {
    require_square(sigma0, "GaussianSampler");
    require_finite(sigma0, "GaussianSampler");
    detail::require_symmetric(sigma0, "GaussianSampler");
    Eigen::LLT<DenseMatrix> llt(sigma0);
    if (llt.info() == Eigen::Success) {
      factor_ = llt.matrixL();
      return;
    }
    const auto e = detail::eigen_descending(symmetrize(sigma0));
    const double scale = e.values.size() ? std::abs(e.values(0)) : 0.0;
    if (e.values.size() && e.values.minCoeff() < -1e-10 * std::max(1.0, scale)) {
      std::ostringstream os;
      os << "GaussianSampler: covariance is indefinite (min eigenvalue " << e.values.minCoeff()
         << ")";
      throw NumericalError(os.str());
    }
    const Vector roots = e.values.cwiseMax(0.0).cwiseSqrt();
    factor_ = e.vectors * roots.asDiagonal() * e.vectors.transpose();
  }

  Index dim() const { return factor_.rows(); }

  /// n x d draws; row i is L g_i with g_i filled row by row from the stream.
  DenseMatrix draw(Index n, RngSeed seed) const {
    Philox4x32 engine(seed);
    const DenseMatrix g = standard_normal_matrix(n, dim(), engine);
    return g * factor_.transpose();
  }

 private:
  DenseMatrix factor_;
};

/// T x m realisation of a stationary VAR(1) series; row t is Z_t. Z_0 is
/// drawn from the stationary law, so no burn-in is needed. Z_0 uses
/// `seed.stream` and the innovations use `seed.stream + 2^40`.
inline DenseMatrix simulate_var1_series(const Var1Spec& spec, Index length, RngSeed seed) {
  if (length < 1) throw DomainError("simulate_var1_series: length must be >= 1");
  const Index m = spec.dim();
  const GaussianSampler stationary(solve_discrete_lyapunov(spec.phi, spec.sigma_eps));
  const GaussianSampler innovation(spec.sigma_eps);
  const DenseMatrix z0 = stationary.draw(1, seed);
  const DenseMatrix e = innovation.draw(length - 1, {seed.seed, seed.stream + (std::uint64_t{1} << 40)});
  DenseMatrix out(length, m);
  out.row(0) = z0.row(0);
  for (Index t = 1; t < length; ++t)
    out.row(t) = (spec.phi * out.row(t - 1).transpose()).transpose() + e.row(t - 1);
  return out;
}

inline SampleSet sample_gaussian(const DenseMatrix& sigma0, Index n, Index p, Index q,
                                 RngSeed seed) {
  if (sigma0.rows() != p * q) throw DimensionError("sample_gaussian: covariance is not pq x pq");
  return SampleSet(GaussianSampler(sigma0).draw(n, seed), p, q);
}

}  // namespace kronocov
