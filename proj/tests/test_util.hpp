#pragma once

#include <Eigen/Dense>

#include "kronocov/matcore.hpp"
#include "kronocov/rng.hpp"
#include "kronocov/synthgen.hpp"

namespace kronocov::testing {

inline DenseMatrix random_matrix(Index rows, Index cols, std::uint64_t seed, std::uint64_t stream = 0) {
  Philox4x32 engine(RngSeed{seed, stream});
  return standard_normal_matrix(rows, cols, engine);
}

inline DenseMatrix random_spd(Index d, std::uint64_t seed, std::uint64_t stream = 0) {
  const DenseMatrix c = random_matrix(d, d, seed, stream);
  return c * c.transpose() + 0.1 * DenseMatrix::Identity(d, d);
}

inline DenseMatrix random_symmetric(Index d, std::uint64_t seed, std::uint64_t stream = 0) {
  return symmetrize(random_matrix(d, d, seed, stream));
}

inline double max_abs(const DenseMatrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace kronocov::testing
