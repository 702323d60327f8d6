#pragma once

// Dense linear-algebra kernel: Kronecker products, the block rearrangement
// operator R and its inverse, SVD with a fixed sign convention, singular
// value soft-thresholding, norms and a discrete Lyapunov solver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "kronocov/errors.hpp"

namespace kronocov {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Upper bound on the entry count of a kron() result (about 2 GiB of doubles).
inline constexpr std::int64_t kMaxKronEntries = std::int64_t{1} << 28;

inline bool all_finite(const DenseMatrix& m) { return m.allFinite(); }

inline void require_finite(const DenseMatrix& m, const char* what) {
  if (!m.allFinite()) throw DomainError(std::string(what) + ": matrix has non-finite entries");
}

inline void require_square(const DenseMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b,
                        std::int64_t max_entries = kMaxKronEntries) {
  const std::int64_t rows = std::int64_t{a.rows()} * b.rows();
  const std::int64_t cols = std::int64_t{a.cols()} * b.cols();
  if (rows > 0 && cols > max_entries / rows) {
    std::ostringstream os;
    os << "kron: result " << rows << "x" << cols << " exceeds the entry cap " << max_entries;
    throw DimensionError(os.str());
  }
  DenseMatrix out(rows, cols);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Column-stacking vectorization.
inline Vector vec(const DenseMatrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

/// Inverse of vec() for a rows x cols matrix.
inline DenseMatrix unvec(const Vector& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw DimensionError("unvec: length does not match shape");
  return Eigen::Map<const DenseMatrix>(v.data(), rows, cols);
}

namespace detail {

// The only place where the 1-based block notation is mapped to 0-based
// storage. Block (i, j) of a pq x pq matrix is its q x q submatrix at rows
// iq.., cols jq..; it becomes row i*p + j of R(M), stored column-stacked so
// that element (k, l) of the block lands in column l*q + k.
struct RearrangeMap {
  Index p, q;
  Index row(Index i, Index j) const { return i * p + j; }
  Index col(Index k, Index l) const { return l * q + k; }
};

inline void check_pq(Index p, Index q, const char* what) {
  if (p < 1 || q < 1) throw DimensionError(std::string(what) + ": p and q must be positive");
}

}  // namespace detail

/// R(M): pq x pq -> p^2 x q^2, row (i-1)p+j = vec(M(i,j))^T.
inline DenseMatrix permute_r(const DenseMatrix& m, Index p, Index q) {
  detail::check_pq(p, q, "permute_r");
  if (m.rows() != p * q || m.cols() != p * q) {
    std::ostringstream os;
    os << "permute_r: expected " << p * q << "x" << p * q << ", got " << m.rows() << "x"
       << m.cols();
    throw DimensionError(os.str());
  }
  const detail::RearrangeMap map{p, q};
  DenseMatrix out(p * p, q * q);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      for (Index l = 0; l < q; ++l)
        for (Index k = 0; k < q; ++k) out(map.row(i, j), map.col(k, l)) = m(i * q + k, j * q + l);
  return out;
}

/// R^{-1}: p^2 x q^2 -> pq x pq. Pure index relocation.
inline DenseMatrix depermute_r(const DenseMatrix& r, Index p, Index q) {
  detail::check_pq(p, q, "depermute_r");
  if (r.rows() != p * p || r.cols() != q * q) {
    std::ostringstream os;
    os << "depermute_r: expected " << p * p << "x" << q * q << ", got " << r.rows() << "x"
       << r.cols();
    throw DimensionError(os.str());
  }
  const detail::RearrangeMap map{p, q};
  DenseMatrix out(p * q, p * q);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j)
      for (Index l = 0; l < q; ++l)
        for (Index k = 0; k < q; ++k) out(i * q + k, j * q + l) = r(map.row(i, j), map.col(k, l));
  return out;
}

struct SvdResult {
  DenseMatrix u;  ///< rows x k, orthonormal columns
  Vector sigma;   ///< k values, non-increasing
  DenseMatrix v;  ///< cols x k, orthonormal columns

  DenseMatrix reconstruct() const { return u * sigma.asDiagonal() * v.transpose(); }
};

/// Thin SVD, k = min(rows, cols). Each left vector is flipped (jointly with
/// its right vector) so that its first entry of non-negligible magnitude is
/// non-negative; this makes the output a deterministic function of the input.
inline SvdResult svd(const DenseMatrix& m) {
  require_finite(m, "svd");
  SvdResult out;
  if (m.size() == 0) return out;
  Eigen::BDCSVD<DenseMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    std::ostringstream os;
    os << "svd: decomposition of " << m.rows() << "x" << m.cols()
       << " matrix did not converge (Eigen info=" << static_cast<int>(solver.info()) << ")";
    throw NumericalError(os.str());
  }
  out.u = solver.matrixU();
  out.sigma = solver.singularValues();
  out.v = solver.matrixV();
  for (Index c = 0; c < out.u.cols(); ++c) {
    auto col = out.u.col(c);
    const double scale = col.cwiseAbs().maxCoeff();
    for (Index r = 0; r < col.size(); ++r) {
      if (std::abs(col(r)) > 1e-12 * scale) {
        if (col(r) < 0) {
          col = -col;
          out.v.col(c) = -out.v.col(c);
        }
        break;
      }
    }
  }
  return out;
}

inline Vector singular_values(const DenseMatrix& m) {
  require_finite(m, "singular_values");
  if (m.size() == 0) return Vector{};
  Eigen::BDCSVD<DenseMatrix> solver(m);
  if (solver.info() != Eigen::Success) throw NumericalError("singular_values: no convergence");
  return solver.singularValues();
}

inline double spectral_norm(const DenseMatrix& m) {
  const Vector s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

/// Proximal map of the nuclear norm: the minimizer of
/// ||m - X||_F^2 + lambda ||X||_*, i.e. sum_j (sigma_j - lambda/2)_+ u_j v_j^T.
inline DenseMatrix soft_threshold_svd(const SvdResult& f, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("soft_threshold_svd: lambda must be >= 0");
  DenseMatrix out = DenseMatrix::Zero(f.u.rows(), f.v.rows());
  for (Index j = 0; j < f.sigma.size(); ++j) {
    const double w = f.sigma(j) - lambda / 2.0;
    if (w <= 0.0) break;
    out.noalias() += w * f.u.col(j) * f.v.col(j).transpose();
  }
  return out;
}

inline DenseMatrix soft_threshold_svd(const DenseMatrix& m, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("soft_threshold_svd: lambda must be >= 0");
  return soft_threshold_svd(svd(m), lambda);
}

inline double trace(const DenseMatrix& m) {
  require_square(m, "trace");
  return m.trace();
}

struct MatrixNorms {
  double frobenius = 0.0;
  double spectral = 0.0;
  double nuclear = 0.0;
  std::optional<double> trace;  ///< set only for square input
};

inline MatrixNorms matrix_norms(const DenseMatrix& m) {
  const Vector s = singular_values(m);
  MatrixNorms n;
  n.frobenius = m.norm();
  n.spectral = s.size() ? s(0) : 0.0;
  n.nuclear = s.sum();
  if (m.rows() == m.cols()) n.trace = m.trace();
  return n;
}

inline DenseMatrix symmetrize(const DenseMatrix& m) {
  require_square(m, "symmetrize");
  return 0.5 * (m + m.transpose());
}

/// Max-abs entry of M - M^T.
inline double asymmetry(const DenseMatrix& m) {
  require_square(m, "asymmetry");
  return m.size() ? (m - m.transpose()).cwiseAbs().maxCoeff() : 0.0;
}

/// Moore-Penrose pseudo-inverse. Singular values at or below rel_tol * sigma_1
/// are treated as zero.
inline DenseMatrix pseudo_inverse(const DenseMatrix& m, double rel_tol = 1e-10) {
  if (!(rel_tol > 0.0)) throw DomainError("pseudo_inverse: tolerance must be > 0");
  const SvdResult f = svd(m);
  DenseMatrix out = DenseMatrix::Zero(m.cols(), m.rows());
  if (f.sigma.size() == 0 || f.sigma(0) == 0.0) return out;
  const double cut = rel_tol * f.sigma(0);
  for (Index j = 0; j < f.sigma.size() && f.sigma(j) > cut; ++j)
    out.noalias() += (1.0 / f.sigma(j)) * f.v.col(j) * f.u.col(j).transpose();
  return out;
}

/// Symmetric X with X = Phi X Phi^T + Q, by the fixed-point iteration
/// X <- Phi X Phi^T + Q started from Q. Requires ||Phi||_2 < 1.
inline DenseMatrix solve_discrete_lyapunov(const DenseMatrix& phi, const DenseMatrix& q,
                                           int max_iterations = 200000) {
  require_square(phi, "solve_discrete_lyapunov");
  require_square(q, "solve_discrete_lyapunov");
  if (phi.rows() != q.rows()) throw DimensionError("solve_discrete_lyapunov: Phi and Q differ in size");
  require_finite(phi, "solve_discrete_lyapunov");
  require_finite(q, "solve_discrete_lyapunov");
  const double norm = spectral_norm(phi);
  if (!(norm < 1.0)) {
    std::ostringstream os;
    os << "solve_discrete_lyapunov: ||Phi||_2 = " << norm << " is not < 1";
    throw DomainError(os.str());
  }
  DenseMatrix x = symmetrize(q);
  double last_step = 0.0;
  for (int it = 0; it < max_iterations; ++it) {
    DenseMatrix next = phi * x * phi.transpose() + q;
    next = symmetrize(next);
    last_step = (next - x).norm();
    const double scale = x.norm();
    x = std::move(next);
    if (last_step <= 1e-12 * scale || last_step == 0.0) return x;
  }
  std::ostringstream os;
  os << "solve_discrete_lyapunov: no convergence after " << max_iterations
     << " iterations (last step " << last_step << ")";
  throw NumericalError(os.str());
}

}  // namespace kronocov
