#pragma once

// Covariance estimators: sample covariance, PCA, trace-penalized SVT,
// permuted rank-penalized least squares (PRLS) and covariance matching (CM),
// plus regularization-parameter rules.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Eigenvalues>

#include "kronocov/matcore.hpp"
#include "kronocov/theory.hpp"

namespace kronocov {

/// n x pq matrix of zero-mean observations, one per row.
class SampleSet {
 public:
  SampleSet(DenseMatrix data, Index p, Index q) : data_(std::move(data)), p_(p), q_(q) {
    if (p < 1 || q < 1) throw DimensionError("SampleSet: p and q must be positive");
    if (data_.cols() != p * q) {
      std::ostringstream os;
      os << "SampleSet: " << data_.cols() << " columns, expected p*q = " << p * q;
      throw DimensionError(os.str());
    }
    require_finite(data_, "SampleSet");
  }

  Index n() const { return data_.rows(); }
  Index p() const { return p_; }
  Index q() const { return q_; }
  Index dim() const { return p_ * q_; }
  const DenseMatrix& data() const { return data_; }

 private:
  DenseMatrix data_;
  Index p_, q_;
};

struct KroneckerTerm {
  double weight = 0.0;
  DenseMatrix left;   ///< p x p, unit Frobenius norm
  DenseMatrix right;  ///< q x q, unit Frobenius norm
};

/// sum_k weight_k * left_k (x) right_k, weights non-increasing.
struct KroneckerExpansion {
  Index p = 0;
  Index q = 0;
  std::vector<KroneckerTerm> terms;

  std::size_t separation_rank() const { return terms.size(); }

  DenseMatrix dense() const {
    DenseMatrix out = DenseMatrix::Zero(p * q, p * q);
    for (const auto& t : terms) out += t.weight * kron(t.left, t.right);
    return out;
  }
};

struct KroneckerFit {
  KroneckerExpansion expansion;
  DenseMatrix covariance;
  Vector kron_spectrum;            ///< singular values of the permuted input
  double factor_asymmetry = 0.0;   ///< worst factor asymmetry before symmetrization

  Index effective_rank() const { return static_cast<Index>(expansion.terms.size()); }
};

namespace detail {

// Reshape singular vector pairs into Kronecker factors. Row i*p+j of R holds
// A(i,j), column l*q+k holds B(k,l). For symmetric input the pairs split into
// symmetric (x) symmetric and antisymmetric (x) antisymmetric terms; only the
// first kind is cleaned up with symmetrize().
inline KroneckerTerm reshape_term(const Vector& u, const Vector& v, double weight, Index p,
                                  Index q, double& worst_asymmetry) {
  DenseMatrix left = unvec(u, p, p).transpose();
  DenseMatrix right = unvec(v, q, q);
  const double a = std::max(asymmetry(left), asymmetry(right));
  worst_asymmetry = std::max(worst_asymmetry, a);
  if (a <= 1e-6) {
    left = symmetrize(left);
    right = symmetrize(right);
  }
  const double ln = left.norm(), rn = right.norm();
  if (ln > 0.0) left /= ln;
  if (rn > 0.0) right /= rn;
  weight *= ln * rn;
  if (left.trace() < 0.0) {
    left = -left;
    right = -right;
  }
  return {weight, std::move(left), std::move(right)};
}

inline void check_symmetric_pq(const DenseMatrix& s, Index p, Index q, const char* what) {
  if (p < 1 || q < 1) throw DimensionError(std::string(what) + ": p and q must be positive");
  if (s.rows() != p * q || s.cols() != p * q) {
    std::ostringstream os;
    os << what << ": expected a " << p * q << "x" << p * q << " matrix, got " << s.rows() << "x"
       << s.cols();
    throw DimensionError(os.str());
  }
  require_finite(s, what);
}

inline void require_symmetric(const DenseMatrix& s, const char* what, double tol = 1e-8) {
  require_square(s, what);
  const double scale = std::max(1.0, s.size() ? s.cwiseAbs().maxCoeff() : 0.0);
  if (asymmetry(s) > tol * scale) {
    std::ostringstream os;
    os << what << ": input is not symmetric (defect " << asymmetry(s) << ")";
    throw DomainError(os.str());
  }
}

// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
struct SymmetricEigen {
  Vector values;
  DenseMatrix vectors;
};

inline SymmetricEigen eigen_descending(const DenseMatrix& s) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(s);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");
  return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

}  // namespace detail

/// Sample covariance (1/n) sum_t z_t z_t^T.
inline DenseMatrix scm(const SampleSet& samples) {
  if (samples.n() < 1) throw DomainError("scm: empty sample set");
  const auto& z = samples.data();
  DenseMatrix s = DenseMatrix::Zero(z.cols(), z.cols());
  s.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), 1.0 / double(samples.n()));
  return s.selfadjointView<Eigen::Lower>();
}

/// Top-r principal components of a symmetric psd matrix.
inline DenseMatrix pca_covariance(const DenseMatrix& s_hat, Index r) {
  require_square(s_hat, "pca_covariance");
  if (r < 1 || r > s_hat.rows()) {
    std::ostringstream os;
    os << "pca_covariance: r = " << r << " outside [1, " << s_hat.rows() << "]";
    throw DomainError(os.str());
  }
  const auto e = detail::eigen_descending(s_hat);
  const auto v = e.vectors.leftCols(r);
  return v * e.values.head(r).asDiagonal() * v.transpose();
}

/// Minimizer of ||S_hat - S||_F^2 + lambda tr(S) over the psd cone:
/// eigenvalues shrunk by lambda/2 and clipped at zero.
inline DenseMatrix svt_covariance(const DenseMatrix& s_hat, double lambda) {
  detail::require_symmetric(s_hat, "svt_covariance");
  if (!(lambda >= 0.0)) throw DomainError("svt_covariance: lambda must be >= 0");
  const auto e = detail::eigen_descending(s_hat);
  const Vector shrunk = (e.values.array() - lambda / 2.0).max(0.0).matrix();
  return symmetrize(e.vectors * shrunk.asDiagonal() * e.vectors.transpose());
}

/// PRLS from a precomputed SVD of R(S_hat).
inline KroneckerFit prls_from_svd(const SvdResult& f, double lambda, Index p, Index q) {
  if (!(lambda >= 0.0)) throw DomainError("prls: lambda must be >= 0");
  if (f.u.rows() != p * p || f.v.rows() != q * q) throw DimensionError("prls: SVD shape mismatch");
  KroneckerFit fit;
  fit.kron_spectrum = f.sigma;
  fit.expansion.p = p;
  fit.expansion.q = q;
  for (Index j = 0; j < f.sigma.size(); ++j) {
    const double w = f.sigma(j) - lambda / 2.0;
    if (w <= 0.0) break;
    fit.expansion.terms.push_back(
        detail::reshape_term(f.u.col(j), f.v.col(j), w, p, q, fit.factor_asymmetry));
  }
  fit.covariance = symmetrize(depermute_r(soft_threshold_svd(f, lambda), p, q));
  return fit;
}

/// Permuted rank-penalized least squares: soft-threshold the singular values
/// of R(S_hat) at lambda/2 and map back.
inline KroneckerFit prls(const DenseMatrix& s_hat, double lambda, Index p, Index q) {
  detail::check_symmetric_pq(s_hat, p, q, "prls");
  if (!(lambda >= 0.0)) throw DomainError("prls: lambda must be >= 0");
  return prls_from_svd(svd(permute_r(s_hat, p, q)), lambda, p, q);
}

/// Covariance matching from a precomputed SVD of R(S_hat).
inline KroneckerFit cm_from_svd(const SvdResult& f, Index r, Index p, Index q) {
  const Index r_max = std::min(p * p, q * q);
  if (r < 1 || r > r_max) {
    std::ostringstream os;
    os << "cm_covariance: r = " << r << " outside [1, " << r_max << "]";
    throw DomainError(os.str());
  }
  if (f.u.rows() != p * p || f.v.rows() != q * q) throw DimensionError("cm: SVD shape mismatch");
  KroneckerFit fit;
  fit.kron_spectrum = f.sigma;
  fit.expansion.p = p;
  fit.expansion.q = q;
  DenseMatrix truncated = DenseMatrix::Zero(p * p, q * q);
  for (Index j = 0; j < r; ++j) {
    truncated.noalias() += f.sigma(j) * f.u.col(j) * f.v.col(j).transpose();
    if (f.sigma(j) > 0.0)
      fit.expansion.terms.push_back(
          detail::reshape_term(f.u.col(j), f.v.col(j), f.sigma(j), p, q, fit.factor_asymmetry));
  }
  fit.covariance = symmetrize(depermute_r(truncated, p, q));
  return fit;
}

/// Best separation-rank-r Frobenius approximation (truncated SVD of R(S_hat)).
inline KroneckerFit cm_covariance(const DenseMatrix& s_hat, Index r, Index p, Index q) {
  detail::check_symmetric_pq(s_hat, p, q, "cm_covariance");
  const Index r_max = std::min(p * p, q * q);
  if (r < 1 || r > r_max) {
    std::ostringstream os;
    os << "cm_covariance: r = " << r << " outside [1, " << r_max << "]";
    throw DomainError(os.str());
  }
  return cm_from_svd(svd(permute_r(s_hat, p, q)), r, p, q);
}

enum class LambdaKind { fixed, prls_practical, prls_theory, svt_lounici, oracle };

inline std::string_view to_string(LambdaKind k) {
  switch (k) {
    case LambdaKind::fixed: return "fixed";
    case LambdaKind::prls_practical: return "prls_practical";
    case LambdaKind::prls_theory: return "prls_theory";
    case LambdaKind::svt_lounici: return "svt_lounici";
    case LambdaKind::oracle: return "oracle";
  }
  return "?";
}

inline LambdaKind lambda_kind_from_string(std::string_view s) {
  for (auto k : {LambdaKind::fixed, LambdaKind::prls_practical, LambdaKind::prls_theory,
                 LambdaKind::svt_lounici, LambdaKind::oracle})
    if (to_string(k) == s) return k;
  throw DomainError("unknown lambda rule '" + std::string(s) + "'");
}

/// Regularization rule. `c` multiplies every rule. For prls_theory, t = 0
/// selects the smallest admissible t for eps_prime and c0 (when unset) is
/// replaced by ||S_hat||_2. The oracle rule needs the true covariance and is
/// only usable from the simulation harness (see oracle_lambda_*).
struct LambdaRule {
  LambdaKind kind = LambdaKind::prls_practical;
  double c = 1.0;
  double t = 0.0;
  double eps_prime = 0.25;
  std::optional<double> c0;

  void validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("lambda rule: C must be positive");
    if (kind == LambdaKind::prls_theory) {
      const double tmin = theory::min_t(eps_prime);
      if (t != 0.0 && t < tmin) {
        std::ostringstream os;
        os << "lambda rule: t = " << t << " below the admissible minimum " << tmin;
        throw DomainError(os.str());
      }
      if (c0 && !(*c0 > 0.0)) throw DomainError("lambda rule: C0 must be positive");
    }
  }

  double effective_t() const { return t != 0.0 ? t : theory::min_t(eps_prime); }
};

inline double spectral_norm_symmetric(const DenseMatrix& s) {
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");
  const auto& ev = es.eigenvalues();
  return ev.size() ? std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1))) : 0.0;
}

inline double lambda_select(const LambdaRule& rule, const DenseMatrix& s_hat, Index p, Index q,
                            Index n) {
  rule.validate();
  if (n < 1) throw DomainError("lambda_select: n must be >= 1");
  switch (rule.kind) {
    case LambdaKind::fixed:
      return rule.c;
    case LambdaKind::prls_practical:
      return rule.c * spectral_norm_symmetric(s_hat) *
             std::sqrt(theory::complexity_ratio(p, q, n));
    case LambdaKind::prls_theory: {
      const double c0 = rule.c0 ? *rule.c0 : spectral_norm_symmetric(s_hat);
      return rule.c * 2.0 * theory::opnorm_rate(c0, rule.effective_t(), rule.eps_prime, p, q, n);
    }
    case LambdaKind::svt_lounici:
      return rule.c * std::sqrt(std::max(0.0, trace(s_hat)) * spectral_norm_symmetric(s_hat)) *
             std::sqrt(std::log(2.0 * double(p) * double(q)) / double(n));
    case LambdaKind::oracle:
      throw DomainError("lambda_select: the oracle rule needs the true covariance");
  }
  throw DomainError("lambda_select: unknown rule");
}

/// c * 2 ||R(S_hat - Sigma0)||_2, the smallest lambda meeting the oracle
/// inequality hypothesis when c = 1.
inline double oracle_lambda_prls(const DenseMatrix& s_hat, const DenseMatrix& sigma0, Index p,
                                 Index q, double c = 1.0) {
  return c * 2.0 * spectral_norm(permute_r(s_hat - sigma0, p, q));
}

/// c * 2 ||S_hat - Sigma0||_2, the trace-penalized analogue.
inline double oracle_lambda_svt(const DenseMatrix& s_hat, const DenseMatrix& sigma0,
                                double c = 1.0) {
  return c * 2.0 * spectral_norm_symmetric(s_hat - sigma0);
}

/// tr(Sigma) / ||Sigma||_2.
inline double effective_rank(const DenseMatrix& sigma) {
  require_square(sigma, "effective_rank");
  const double norm = spectral_norm_symmetric(sigma);
  if (norm == 0.0) throw DomainError("effective_rank: zero matrix");
  return sigma.trace() / norm;
}

}  // namespace kronocov
