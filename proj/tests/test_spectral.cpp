#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "support.hpp"

using namespace diffwave;

namespace {

struct Small {
    TriangleMesh mesh = dwtest::unit_sphere(2);
    LaplacianPair lap = build_laplacian(mesh);
    Spectrum full = generalized_eigs(lap);
};

const Small& small() {
    static const Small s;
    return s;
}

}  // namespace

TEST(Eigs, MatchesEigenGeneralizedSolver) {
    const auto& s = small();
    const Eigen::MatrixXd W(s.lap.stiffness);
    const Eigen::MatrixXd A = s.lap.mass.asDiagonal();
    const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> oracle(W, A);
    ASSERT_EQ(s.full.count(), s.lap.size());
    EXPECT_LT((s.full.eigenvalues - oracle.eigenvalues()).cwiseAbs().maxCoeff(), 1e-8 * oracle.eigenvalues().maxCoeff());
}

TEST(Eigs, AOrthonormalResidualsAndSigns) {
    const auto& s = small();
    const Eigen::MatrixXd& phi = s.full.eigenvectors;
    const Eigen::MatrixXd gram = phi.transpose() * s.lap.mass.asDiagonal() * phi;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-10);
    const Eigen::MatrixXd residual =
        s.lap.stiffness * phi - s.lap.mass.asDiagonal() * phi * s.full.eigenvalues.asDiagonal();
    EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-9 * s.full.eigenvalues.maxCoeff());
    for (Index k = 0; k < s.full.count(); ++k) {
        Index first = 0;
        while (std::abs(phi(first, k)) <= 1e-8) ++first;
        EXPECT_GT(phi(first, k), 0.0);
    }
    // Unit area: the constant mode is 1 everywhere.
    EXPECT_NEAR(s.full.eigenvalues[0], 0.0, 1e-9);
    EXPECT_LT((phi.col(0).array() - 1.0).abs().maxCoeff(), 1e-9);
}

TEST(Eigs, PartialEqualsPrefixOfFull) {
    const auto& s = small();
    const Spectrum part = generalized_eigs(s.lap, {20, 5000});
    EXPECT_EQ(part.count(), 20);
    EXPECT_LT((part.eigenvalues - s.full.eigenvalues.head(20)).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_THROW(generalized_eigs(s.lap, {0, 5000}), UsageError);
    EXPECT_THROW(generalized_eigs(s.lap, {s.lap.size() + 1, 5000}), UsageError);
    EXPECT_THROW(generalized_eigs(s.lap, {10, 100}), UsageError);
}

TEST(Spectral, HeatKernelAtZeroIsScaledIndicator) {
    const auto& s = small();
    const Eigen::VectorXd k = spectral_heat_kernel(s.full, 0.0, 12);
    Eigen::VectorXd expect = Eigen::VectorXd::Zero(s.lap.size());
    expect[12] = 1.0 / s.lap.mass[12];
    EXPECT_LT((k - expect).cwiseAbs().maxCoeff(), 1e-8 * expect[12]);
}

TEST(Spectral, HeatKernelIsSymmetricAndConservesMass) {
    const auto& s = small();
    const double t = 0.01;
    const Eigen::VectorXd a = spectral_heat_kernel(s.full, t, 3);
    const Eigen::VectorXd b = spectral_heat_kernel(s.full, t, 40);
    EXPECT_NEAR(a[40], b[3], 1e-10 * std::abs(a[40]) + 1e-14);
    EXPECT_NEAR(s.lap.mass.dot(a), 1.0, 1e-10);
}

TEST(Spectral, MexicanHatIsTimeDerivativeOfHeatKernel) {
    const auto& s = small();
    const double t = 0.02, h = 1e-6;
    const Index K = s.full.count();
    const Eigen::VectorXd fd = -(spectral_heat_kernel(s.full, t + h, 7) - spectral_heat_kernel(s.full, t - h, 7)) / (2 * h);
    const Eigen::VectorXd hat = spectral_mexican_hat(s.full, t, 7, K);
    EXPECT_LT((fd - hat).norm() / hat.norm(), 1e-6);
}

TEST(Spectral, MotherWaveletIsZeroTimeMexicanHat) {
    // The unit indicator carries mass A_ss, so the comparison divides by it.
    const auto& s = small();
    const SampleSet samples = SampleSet::given({9, 120});
    const Eigen::MatrixXd psi = mother_wavelets(s.lap, samples);
    for (Index j = 0; j < 2; ++j) {
        const Index v = samples.indices[j];
        const Eigen::VectorXd spectral =
            s.full.eigenvectors * (s.full.eigenvalues.array() * s.full.eigenvectors.row(v).transpose().array()).matrix();
        const Eigen::VectorXd ours = psi.col(j) / s.lap.mass[v];
        EXPECT_LT((ours - spectral).norm(), 1e-6 * spectral.norm());
    }
}

TEST(Spectral, TruncationDefaultsAndBounds) {
    const auto& s = small();
    EXPECT_EQ(spectral_mexican_hat(s.full, 0.1, 0).size(), s.lap.size());
    EXPECT_THROW(spectral_mexican_hat(s.full, 0.1, 0, s.full.count() + 1), UsageError);
    EXPECT_THROW(spectral_mexican_hat(s.full, 0.0, 0), UsageError);
    EXPECT_THROW(spectral_heat_kernel(s.full, 0.1, s.lap.size()), DataError);
}

TEST(Spectral, ReferenceTimes) {
    const auto lin = reference_times(0.04, 25, ReferenceTimes::linear_nt);
    EXPECT_NEAR(lin[0], 0.04, 1e-15);
    EXPECT_NEAR(lin[24], 1.0, 1e-12);
    const auto lg = reference_times(0.5, 4, ReferenceTimes::log_nt);
    EXPECT_NEAR(lg[0], std::log(0.5), 1e-15);
    EXPECT_NEAR(lg[3], std::log(2.0), 1e-15);
}

TEST(Spectral, LogReferenceExcludesNonPositiveTimes) {
    const auto& s = small();
    dwtest::WarningCapture warnings;
    const SampleSet samples = SampleSet::given({1, 2});
    const auto ref = ground_truth_wavelets(s.full, s.lap.mass, 0.5, 4, samples, ReferenceTimes::log_nt);
    // n t = 0.5, 1.0, 1.5, 2.0 -> only scales 3 and 4 have log(n t) > 0.
    EXPECT_EQ(ref.valid_scales(), 2);
    EXPECT_FALSE(ref.valid[0]);
    EXPECT_FALSE(ref.valid[1]);
    ASSERT_EQ(warnings.messages.size(), 1u);
    EXPECT_NE(warnings.messages[0].find("1,2"), std::string::npos);
    EXPECT_TRUE(ref.columns.leftCols(4).isZero());

    const auto err = dictionary_error(ref.columns, ref, s.lap.mass);
    EXPECT_TRUE(std::isnan(err.l2_per_scale[0]));
    EXPECT_EQ(err.l2_per_scale[2], 0.0);
    EXPECT_EQ(err.l2_average, 0.0);
}

TEST(Spectral, DictionaryErrorByHand) {
    ReferenceDictionary ref;
    ref.n_samples = 1;
    ref.n_scales = 2;
    ref.times = {1.0, 2.0};
    ref.valid = {true, true};
    ref.columns = Eigen::MatrixXd::Zero(3, 2);
    Eigen::MatrixXd cand = Eigen::MatrixXd::Zero(3, 2);
    cand(0, 0) = 2.0;
    cand(2, 1) = -1.0;
    const Eigen::Vector3d mass(0.25, 0.5, 0.25);
    const auto err = dictionary_error(cand, ref, mass);
    EXPECT_DOUBLE_EQ(err.l2_per_scale[0], std::sqrt(0.25 * 4.0));
    EXPECT_DOUBLE_EQ(err.l2_per_scale[1], std::sqrt(0.25));
    EXPECT_DOUBLE_EQ(err.linf_per_scale[0], 2.0);
    EXPECT_DOUBLE_EQ(err.linf_per_scale[1], 1.0);
    EXPECT_DOUBLE_EQ(err.l2_average, 0.75);
    EXPECT_DOUBLE_EQ(err.linf_average, 1.5);
    EXPECT_THROW(dictionary_error(cand.leftCols(1), ref, mass), DataError);
}

TEST(Spectral, EulerDictionaryApproachesReference) {
    const auto& s = small();
    const SampleSet samples = SampleSet::given({0, 50, 100});
    const auto dict = build_dictionary(s.lap, samples, 25, 1.0);
    const auto ref = ground_truth_wavelets(s.full, s.lap.mass, dict.t_step, 25, samples, ReferenceTimes::linear_nt);
    const auto err = dictionary_error(dict.columns, ref, s.lap.mass);
    // Backward Euler lags the exact flow most at the first scales.
    EXPECT_LT(err.l2_per_scale[24], err.l2_per_scale[0]);
    EXPECT_LT(err.l2_average, 0.1);
}

TEST(FunctionalMap, IdentityOnSameShape) {
    const auto& s = small();
    const PointMap id = PointMap::identity(s.lap.size());
    const FunctionalMap c = gt_functional_map(s.full, s.full, s.lap.mass, id, 30);
    EXPECT_LT((c.matrix - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(fmap_to_pointmap(c, s.full, s.full).targets, id.targets);
    EXPECT_THROW(gt_functional_map(s.full, s.full, s.lap.mass, id, s.full.count() + 1), UsageError);
}

TEST(FunctionalMap, PermutedCopyRecoversPermutation) {
    // Relabel the vertices of the mesh; C^gt should map each vertex to its relabelled copy.
    const auto& s = small();
    const Index n = s.lap.size();
    std::vector<Index> perm(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(3);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixX3d V(n, 3);
    for (Index i = 0; i < n; ++i) V.row(perm[i]) = s.mesh.vertices().row(i);
    Eigen::MatrixX3i F = s.mesh.faces();
    for (Index f = 0; f < F.rows(); ++f)
        for (int c = 0; c < 3; ++c) F(f, c) = static_cast<int>(perm[F(f, c)]);
    const TriangleMesh other(V, F);
    const auto lap_n = build_laplacian(other);
    const Spectrum spec_n = generalized_eigs(lap_n);
    const PointMap gt{perm, n};
    const FunctionalMap c = gt_functional_map(s.full, spec_n, lap_n.mass, gt, 40);
    EXPECT_EQ(fmap_to_pointmap(c, s.full, spec_n).targets, perm);
}

TEST(SpectralDeltaMap, FullBasisIsIdentity) {
    const auto& s = small();
    const PointMap map = spectral_delta_map(s.full, s.lap.mass, s.full.count());
    EXPECT_EQ(map.targets, PointMap::identity(s.lap.size()).targets);
    EXPECT_THROW(spectral_delta_map(s.full, s.lap.mass, 0), UsageError);
}

TEST(ExponentialSums, BruteForce) {
    const std::vector<double> a{1.0, -2.0}, ra{0.5, 3.0};
    const std::vector<double> b{1.0, -2.0}, rb{0.5, 3.5};
    EXPECT_DOUBLE_EQ(exponential_sum(a, ra, 0.0), -1.0);
    EXPECT_DOUBLE_EQ(exponential_sum(a, ra, 2.0), std::exp(-1.0) - 2.0 * std::exp(-6.0));
    const std::vector<double> grid{0.0, 0.5, 1.0};
    double expect = 0.0;
    for (double t : grid) expect = std::max(expect, std::abs(2.0 * std::exp(-3.5 * t) - 2.0 * std::exp(-3.0 * t)));
    EXPECT_DOUBLE_EQ(max_exponential_sum_gap(a, ra, b, rb, grid), expect);
    EXPECT_EQ(max_exponential_sum_gap(a, ra, a, ra, grid), 0.0);
    const std::vector<double> shorter{1.0};
    EXPECT_THROW(exponential_sum(shorter, ra, 1.0), UsageError);
}
