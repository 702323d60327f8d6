#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "kronocov/bounds.hpp"
#include "test_util.hpp"

using namespace kronocov;
using kronocov::testing::max_abs;
using kronocov::testing::random_matrix;
using kronocov::testing::random_spd;
using kronocov::testing::random_symmetric;

namespace {

// Random rank-k orthogonal projector on R^d.
DenseMatrix random_projector(Index d, Index k, std::uint64_t seed) {
  if (k == 0) return DenseMatrix::Zero(d, d);
  const DenseMatrix g = random_matrix(d, k, seed);
  const Eigen::HouseholderQR<DenseMatrix> qr(g);
  const DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(d, k);
  return q * q.transpose();
}

}  // namespace

TEST(PermutedErrorNorm, ZeroWhenEqual) {
  const DenseMatrix s = random_spd(6, 1);
  EXPECT_EQ(permuted_error_norm(s, s, 2, 3), 0.0);
}

TEST(PermutedErrorNorm, KroneckerDifferenceIsProductOfFrobeniusNorms) {
  const DenseMatrix a = random_symmetric(3, 2), b = random_symmetric(2, 3);
  const DenseMatrix zero = DenseMatrix::Zero(6, 6);
  EXPECT_NEAR(permuted_error_norm(kron(a, b), zero, 3, 2), a.norm() * b.norm(), 1e-12 * a.norm() * b.norm());
}

TEST(PermutedErrorNorm, MatchesExplicitPermutation) {
  const DenseMatrix d = random_matrix(4, 4, 4);
  DenseMatrix r(4, 4);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      for (Index k = 0; k < 2; ++k)
        for (Index l = 0; l < 2; ++l) r(i * 2 + j, l * 2 + k) = d(i * 2 + k, j * 2 + l);
  const double expected = Eigen::JacobiSVD<DenseMatrix>(r).singularValues()(0);
  EXPECT_NEAR(permuted_error_norm(d, DenseMatrix::Zero(4, 4), 2, 2), expected, 1e-12 * expected);
  EXPECT_THROW(permuted_error_norm(d, DenseMatrix::Zero(3, 3), 2, 2), DimensionError);
}

TEST(Theory, AbsoluteConstantsToFourDecimals) {
  EXPECT_NEAR(theory::kC1, 2.5044, 5e-5);
  EXPECT_NEAR(theory::kC2, 3.8442, 5e-5);
  EXPECT_EQ(theory::kC, theory::kC2);
}

TEST(Thm3Rate, BranchesAgreeAtUnitRatio) {
  EXPECT_EQ(theory::rate_shape(1.0), 1.0);
  EXPECT_NEAR(theory::rate_shape(1.0 + 1e-9), 1.0, 1e-8);
  EXPECT_NEAR(theory::rate_shape(1.0 - 1e-9), 1.0, 1e-8);
  EXPECT_EQ(theory::rate_shape(0.25), 0.5);
  EXPECT_EQ(theory::rate_shape(4.0), 4.0);
}

TEST(Thm3Rate, VanishesAsSampleSizeGrows) {
  const BoundParams bp;
  double prev = thm3_rate(bp, 3, 3, 10);
  for (Index n : {100, 1000, 100000, 10000000}) {
    const double r = thm3_rate(bp, 3, 3, n);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_LT(prev, 1e-2 * thm3_rate(bp, 3, 3, 10));
}

TEST(Thm3Rate, RejectsInadmissibleParameters) {
  BoundParams bp;
  bp.t = 1.0;
  EXPECT_THROW(thm3_rate(bp, 2, 2, 10), DomainError);
  bp.t = 0.0;
  bp.eps_prime = 0.5;
  EXPECT_THROW(thm3_rate(bp, 2, 2, 10), DomainError);
}

TEST(Thm3Coverage, ObservedAtLeastNominal) {
  const DenseMatrix sigma0 = random_spd(6, 5);
  const CoverageResult c = thm3_coverage(sigma0, 2, 3, 40, 500, BoundParams{}, RngSeed{5, 0});
  EXPECT_EQ(c.trials, 500);
  EXPECT_GE(c.observed(), c.nominal);
}

TEST(OpnormGrowth, LargeSampleGivesNearZeroError) {
  const std::vector<Index> grid{2, 3};
  const OpnormGrowth g = opnorm_growth_experiment(2, 1000000, grid, 2, RngSeed{6, 0});
  for (double m : g.means) EXPECT_LT(m, 1e-3);
}

TEST(OpnormGrowth, MeansIncreaseWithTemporalDimension) {
  std::vector<Index> grid;
  for (Index p = 5; p <= 50; p += 5) grid.push_back(p);
  const OpnormGrowth g = opnorm_growth_experiment(5, 10, grid, 20, RngSeed{7, 0});
  ASSERT_EQ(g.means.size(), grid.size());
  EXPECT_GE(g.spearman, 0.95);
  EXPECT_GT(g.fit.slope, 0.0);
  EXPECT_THROW(opnorm_growth_experiment(5, 10, std::vector<Index>{}, 1, RngSeed{}), DomainError);
}

TEST(OracleInequality, ExactEstimateHolds) {
  const KpSumTruth t = random_kp_sum_covariance(3, 3, 2, RngSeed{8, 0});
  const OracleCheck c = oracle_inequality_check(t.sigma0, t.sigma0, 0.7, 3, 3);
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_TRUE(c.holds);
  EXPECT_FALSE(c.hypothesis.has_value());
  EXPECT_EQ(c.rhs_per_r.size(), 10u);
}

TEST(OracleInequality, RightHandSideFormula) {
  const KpSumTruth t = random_kp_sum_covariance(2, 2, 2, RngSeed{9, 0});
  const Vector sv = kron_spectrum(t.sigma0, 2, 2);
  const double lambda = 0.3;
  const OracleCheck c = oracle_inequality_check(t.sigma0, t.sigma0, lambda, 2, 2);
  const double k = (1 + std::sqrt(2.0)) * (1 + std::sqrt(2.0)) / 4;
  for (Index r = 0; r <= 4; ++r) {
    double tail = 0;
    for (Index j = r; j < 4; ++j) tail += sv(j) * sv(j);
    EXPECT_NEAR(c.rhs_per_r[r], tail + k * lambda * lambda * double(r), 1e-12 * (1 + tail));
  }
}

TEST(OracleInequality, HypothesisBoundaryAccepted) {
  const KpSumTruth t = random_kp_sum_covariance(3, 2, 1, RngSeed{10, 0});
  const SampleSet z = sample_gaussian(t.sigma0, 30, 3, 2, RngSeed{10, 1});
  const DenseMatrix s = scm(z);
  const double lambda = 2.0 * permuted_error_norm(s, t.sigma0, 3, 2);
  const OracleCheck c = oracle_inequality_check(prls(s, lambda, 3, 2).covariance, t.sigma0, lambda, 3, 2, &s);
  ASSERT_TRUE(c.hypothesis.has_value());
  EXPECT_TRUE(*c.hypothesis);
  const OracleCheck below =
      oracle_inequality_check(prls(s, 0.9 * lambda, 3, 2).covariance, t.sigma0, 0.9 * lambda, 3, 2, &s);
  EXPECT_FALSE(*below.hypothesis);
}

TEST(OracleInequality, HoldsInEveryMonteCarloTrial) {
  const std::vector<Index> n_list{25, 100};
  const auto rows = oracle_inequality_trials(5, 5, 2, n_list, 100, RngSeed{11, 0});
  ASSERT_EQ(rows.size(), 200u);
  for (const auto& row : rows) {
    EXPECT_TRUE(row.check.holds) << "n=" << row.n << " trial=" << row.trial;
    EXPECT_TRUE(row.check.hypothesis.value_or(false));
  }
}

TEST(KronSpectrum, KroneckerProductHasOneNonzero) {
  const DenseMatrix a = random_spd(3, 12), b = random_spd(4, 13);
  const Vector sv = kron_spectrum(kron(a, b), 3, 4);
  ASSERT_EQ(sv.size(), 9);
  EXPECT_NEAR(sv(0), a.norm() * b.norm(), 1e-10 * sv(0));
  EXPECT_LE(sv.tail(8).maxCoeff(), 1e-10 * sv(0));
}

TEST(KronSpectrum, KpSumRankAndEnergy) {
  const KpSumTruth t = random_kp_sum_covariance(4, 3, 3, RngSeed{14, 0});
  const Vector sv = kron_spectrum(t.sigma0, 4, 3);
  ASSERT_EQ(sv.size(), 9);
  EXPECT_GT(sv(2), 1e-8 * sv(0));
  EXPECT_LE(sv(3), 1e-10 * sv(0));
  EXPECT_NEAR(sv.squaredNorm(), t.sigma0.squaredNorm(), 1e-10 * t.sigma0.squaredNorm());
  for (Index k = 1; k < sv.size(); ++k) EXPECT_LE(sv(k), sv(k - 1));
}

TEST(VariationalBound, EqualityAtSingularBasis) {
  const DenseMatrix r0 = random_matrix(9, 16, 15);
  const SvdResult f = svd(r0);
  const double s1 = f.sigma(0) * f.sigma(0);
  for (Index k = 0; k < 9; ++k) {
    const DenseMatrix vk = f.v.leftCols(k);
    const double b = variational_bound(r0, vk * vk.transpose());
    const double expected = k < f.sigma.size() ? f.sigma(k) * f.sigma(k) : 0.0;
    EXPECT_NEAR(b, expected, 1e-8 * s1) << "k=" << k;
  }
}

TEST(VariationalBound, ZeroProjectorGivesLeadingValue) {
  const DenseMatrix r0 = random_matrix(4, 9, 16);
  const double s1 = spectral_norm(r0);
  EXPECT_NEAR(variational_bound(r0, DenseMatrix::Zero(9, 9)), s1 * s1, 1e-10 * s1 * s1);
}

TEST(VariationalBound, RandomProjectorsUpperBound) {
  const DenseMatrix r0 = random_matrix(4, 9, 17);
  const Vector sv = singular_values(r0);
  for (int trial = 0; trial < 100; ++trial) {
    const Index k = trial % 4;
    const double b = variational_bound(r0, random_projector(9, k, 1000 + trial));
    EXPECT_GE(b, sv(k) * sv(k) - 1e-10);
  }
}

TEST(VariationalBound, RejectsNonProjector) {
  const DenseMatrix r0 = random_matrix(4, 4, 18);
  EXPECT_THROW(variational_bound(r0, 2.0 * DenseMatrix::Identity(4, 4)), DomainError);
  EXPECT_THROW(variational_bound(r0, DenseMatrix::Identity(3, 3)), DimensionError);
}

TEST(GsToeplitzBasis, EqualBlocksGiveOneVector) {
  const DenseMatrix b = random_spd(3, 19);
  const std::vector<DenseMatrix> fwd{b, b, b}, bwd{b, b};
  const GsBasis gs = gs_toeplitz_basis(fwd, bwd);
  EXPECT_EQ(gs.vectors.cols(), 1);
  EXPECT_NEAR(gs.vectors.col(0).norm(), 1.0, 1e-14);
}

TEST(GsToeplitzBasis, HandWorkedTwoByTwo) {
  DenseMatrix s1(2, 2);
  s1 << 0, 1, 0, 0;
  const std::vector<DenseMatrix> fwd{DenseMatrix::Identity(2, 2), s1};
  const std::vector<DenseMatrix> bwd{s1.transpose()};
  const GsBasis gs = gs_toeplitz_basis(fwd, bwd);
  ASSERT_EQ(gs.vectors.cols(), 3);
  EXPECT_EQ(gs.lags, (std::vector<long>{0, 1, -1}));
  const DenseMatrix gram = gs.vectors.transpose() * gs.vectors;
  EXPECT_LE(max_abs(gram - DenseMatrix::Identity(3, 3)), 1e-10);
  // vec is column-major: I -> (1,0,0,1)/sqrt2, [[0,1],[0,0]] -> e_3, its transpose -> e_2.
  Vector v0(4), v1 = Vector::Zero(4), v2 = Vector::Zero(4);
  v0 << 1 / std::sqrt(2.0), 0, 0, 1 / std::sqrt(2.0);
  v1(2) = 1;
  v2(1) = 1;
  EXPECT_LE((gs.vectors.col(0) - v0).norm(), 1e-14);
  EXPECT_LE((gs.vectors.col(1) - v1).norm(), 1e-14);
  EXPECT_LE((gs.vectors.col(2) - v2).norm(), 1e-14);
}

TEST(GsToeplitzBasis, SpansEveryBlock) {
  const Var1Spec spec(random_stable_matrix(3, 0.8, RngSeed{20, 0}), 4);
  const auto lags = var1_lag_covariances(spec);
  std::vector<DenseMatrix> bwd;
  for (std::size_t l = 1; l < lags.size(); ++l) bwd.push_back(lags[l].transpose());
  const GsBasis gs = gs_toeplitz_basis(lags, bwd);
  const DenseMatrix p = gs.vectors * gs.vectors.transpose();
  for (const auto& b : lags) EXPECT_LE((p * vec(b) - vec(b)).norm(), 1e-8 * (1 + b.norm()));
  for (const auto& b : bwd) EXPECT_LE((p * vec(b) - vec(b)).norm(), 1e-8 * (1 + b.norm()));
}

TEST(ToeplitzSpectrum, WhiteProcessIsSingleTerm) {
  const Var1Spec spec(DenseMatrix::Zero(4, 4), 3);
  const SpectrumReport rep = toeplitz_spectrum_bounds(spec, 4, 4);
  EXPECT_LE(rep.sigma(1), 1e-12 * rep.sigma(0));
  for (std::size_t k = 1; k < rep.exact.size(); ++k) {
    EXPECT_EQ(rep.gs_tail[k], 0.0);
    EXPECT_LE(rep.frob_opt[k], 1e-10);
    EXPECT_LE(rep.frob_gs[k], 1e-10);
  }
}

TEST(ToeplitzSpectrum, BoundCurvesAreOrdered) {
  const Var1Spec spec(random_stable_matrix(5, 0.9, RngSeed{21, 0}), 5);
  const SpectrumReport rep = toeplitz_spectrum_bounds(spec, 6, 5);
  const double tol = 1e-8 * rep.frob_opt[0];
  for (std::size_t k = 0; k < rep.exact.size(); ++k) {
    EXPECT_LE(rep.exact[k], rep.frob_opt[k] + tol) << k;
    EXPECT_LE(rep.frob_opt[k], rep.frob_gs[k] + tol) << k;
    EXPECT_LE(rep.frob_gs[k], rep.gs_tail[k] + tol) << k;
    EXPECT_NEAR(rep.frob_opt[k], rep.frob_opt_projection[k], tol) << k;
  }
}

TEST(ToeplitzSpectrum, RowSubtractionTailIsLogLinear) {
  const Var1Spec spec(random_stable_matrix(20, 0.95, RngSeed{22, 0}), 9);
  const SpectrumReport rep = toeplitz_spectrum_bounds(spec, 10, 20);
  EXPECT_GE(rep.gs_tail_log_fit.r_squared, 0.98);
  EXPECT_LT(rep.gs_tail_log_fit.slope, 0.0);
  EXPECT_NEAR(rep.decay_u, 0.95, 1e-10);
}

TEST(ToeplitzSpectrum, RejectsMismatchedShape) {
  const Var1Spec spec(DenseMatrix::Zero(3, 3), 2);
  EXPECT_THROW(toeplitz_spectrum_bounds(spec, 2, 3), DimensionError);
}

TEST(MinSeparationRank, Examples) {
  EXPECT_EQ(min_separation_rank(1, 1, 0.01, 0.1), 1);
  EXPECT_EQ(min_separation_rank(25, 25, 0.95, 0.1), 171);
  EXPECT_THROW(min_separation_rank(2, 2, 1.0, 0.1), DomainError);
  EXPECT_THROW(min_separation_rank(2, 2, 0.5, 0.0), DomainError);
}

TEST(MinSeparationRank, MonotoneInSizeAndDecay) {
  Index prev = 0;
  for (Index p = 1; p <= 40; ++p) {
    const Index r = min_separation_rank(p, 10, 0.9, 0.01);
    EXPECT_GE(r, prev);
    prev = r;
  }
  prev = 0;
  for (double u = 0.05; u < 1.0; u += 0.05) {
    const Index r = min_separation_rank(10, 10, u, 0.01);
    EXPECT_GE(r, prev);
    prev = r;
  }
}
