#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "support.hpp"

using namespace diffwave;

namespace {

struct Fixture {
    LaplacianPair lap = build_laplacian(dwtest::unit_sphere(2));
    Eigen::MatrixXd dense_system(double t) const {
        Eigen::MatrixXd m = t * Eigen::MatrixXd(lap.stiffness);
        m.diagonal() += lap.mass;
        return m;
    }
};

}  // namespace

TEST(SparseSolve, DirectMatchesDenseCholesky) {
    const Fixture f;
    const double t = 0.01;
    const SpdSystem system = factorize(f.lap.mass, f.lap.stiffness, t, SolverKind::direct);
    const Eigen::MatrixXd rhs = dwtest::random_matrix(f.lap.size(), 5, 1);
    const Eigen::MatrixXd x = solve(system, rhs);
    const Eigen::MatrixXd expect = f.dense_system(t).llt().solve(rhs);
    EXPECT_LT((x - expect).norm() / expect.norm(), 1e-12);
}

TEST(SparseSolve, IterativeAgreesWithDirect) {
    const Fixture f;
    const double t = 0.004;
    const Eigen::MatrixXd rhs = dwtest::random_matrix(f.lap.size(), 3, 2);
    const Eigen::MatrixXd a = SpdSystem(f.lap.mass, f.lap.stiffness, t, SolverKind::direct).solve(rhs);
    const Eigen::MatrixXd b = SpdSystem(f.lap.mass, f.lap.stiffness, t, SolverKind::iterative).solve(rhs);
    EXPECT_LT((a - b).norm() / a.norm(), 1e-8);
}

TEST(SparseSolve, ResidualWithinTolerance) {
    const Fixture f;
    const double t = 1.0;
    const SpdSystem system(f.lap.mass, f.lap.stiffness, t);
    const Eigen::MatrixXd rhs = dwtest::random_matrix(f.lap.size(), 4, 3);
    const Eigen::MatrixXd x = system.solve(rhs);
    const Eigen::MatrixXd residual = f.dense_system(t) * x - rhs;
    for (Index j = 0; j < rhs.cols(); ++j)
        EXPECT_LE(residual.col(j).norm(), SpdSystem::kRelativeTolerance * rhs.col(j).norm());
}

TEST(SparseSolve, RejectsBadInput) {
    const Fixture f;
    EXPECT_THROW(SpdSystem(f.lap.mass, f.lap.stiffness, 0.0), UsageError);
    EXPECT_THROW(SpdSystem(f.lap.mass, f.lap.stiffness, -1.0), UsageError);
    EXPECT_THROW(SpdSystem(f.lap.mass.head(10), f.lap.stiffness, 0.1), DataError);
    Eigen::VectorXd bad = f.lap.mass;
    bad[3] = 0.0;
    EXPECT_THROW(SpdSystem(bad, f.lap.stiffness, 0.1), DataError);
    const SpdSystem system(f.lap.mass, f.lap.stiffness, 0.1);
    EXPECT_THROW(system.solve(Eigen::MatrixXd::Ones(5, 1)), DataError);
}

TEST(SparseSolve, IndefiniteSystemReportsPivot) {
    const Fixture f;
    const SparseMatrix negated = -f.lap.stiffness;
    try {
        SpdSystem(f.lap.mass, negated, 10.0);
        FAIL() << "expected NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("pivot"), std::string::npos);
    }
}

TEST(SparseSolve, CopiesShareFactorization) {
    const Fixture f;
    const SpdSystem a(f.lap.mass, f.lap.stiffness, 0.05);
    const SpdSystem b = a;
    const Eigen::MatrixXd rhs = dwtest::random_matrix(f.lap.size(), 1, 4);
    EXPECT_EQ(a.solve(rhs), b.solve(rhs));
    EXPECT_EQ(b.step(), 0.05);
    EXPECT_EQ(b.size(), f.lap.size());
}
