#pragma once

#include <memory>
#include <string>

#include <Eigen/Core>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "diffwave/error.hpp"
#include "diffwave/laplacian.hpp"

namespace diffwave {

enum class SolverKind {
    /// Sparse LDL^T with fill-reducing ordering; factor once, solve many.
    direct,
    /// Jacobi-preconditioned conjugate gradient.
    iterative,
};

/// The SPD operator A + tW of one backward-Euler step, ready for repeated
/// solves. Immutable after construction and cheap to copy; `solve` is safe to
/// call concurrently.
class SpdSystem {
public:
    static constexpr double kRelativeTolerance = 1e-10;

    SpdSystem(const Eigen::VectorXd& mass, const SparseMatrix& stiffness, double t,
              SolverKind kind = SolverKind::direct)
        : state_(std::make_shared<State>()) {
        if (!(t > 0.0)) throw UsageError("diffusion step must be positive");
        if (mass.size() != stiffness.rows() || stiffness.rows() != stiffness.cols())
            throw DataError("mass and stiffness dimensions disagree");
        if ((mass.array() <= 0.0).any()) throw DataError("mass matrix must be strictly positive");

        State& s = *state_;
        s.kind = kind;
        s.step = t;
        s.matrix = t * stiffness;
        for (Index i = 0; i < mass.size(); ++i) s.matrix.coeffRef(i, i) += mass[i];
        s.matrix.makeCompressed();

        if (kind == SolverKind::direct) {
            s.ldlt.compute(s.matrix);
            if (s.ldlt.info() != Eigen::Success)
                throw NumericalError("sparse factorization of A + tW failed");
            // A breakdown shows up as a non-positive pivot; report it in original numbering.
            const Eigen::VectorXd& d = s.ldlt.vectorD();
            for (Index k = 0; k < d.size(); ++k)
                if (!(d[k] > 0.0)) {
                    const Index original = s.ldlt.permutationPinv().indices()[k];
                    throw NumericalError("factorization breakdown at pivot " + std::to_string(original) +
                                         " (A + tW not positive definite; stiffness is not PSD)");
                }
        }
    }

    Index size() const noexcept { return state_->matrix.rows(); }
    double step() const noexcept { return state_->step; }
    SolverKind kind() const noexcept { return state_->kind; }
    const SparseMatrix& matrix() const noexcept { return state_->matrix; }

    /// Solves (A + tW) X = B column by column. Each column satisfies
    /// ||(A + tW) x - b|| <= 1e-10 ||b||.
    Eigen::MatrixXd solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
        const State& s = *state_;
        if (rhs.rows() != size())
            throw DataError("right-hand side has " + std::to_string(rhs.rows()) + " rows, expected " +
                            std::to_string(size()));
        if (s.kind == SolverKind::direct) return solve_direct(rhs);
        return solve_iterative(rhs);
    }

private:
    struct State {
        SolverKind kind = SolverKind::direct;
        double step = 0.0;
        SparseMatrix matrix;
        Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt;
    };

    Eigen::MatrixXd solve_direct(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
        const State& s = *state_;
        Eigen::MatrixXd x = s.ldlt.solve(rhs);
        for (Index j = 0; j < rhs.cols(); ++j) {
            const double target = kRelativeTolerance * rhs.col(j).norm();
            Eigen::VectorXd r = rhs.col(j) - s.matrix * x.col(j);
            // Iterative refinement on the rare badly scaled column.
            for (int pass = 0; pass < 3 && r.norm() > target; ++pass) {
                x.col(j) += s.ldlt.solve(r);
                r = rhs.col(j) - s.matrix * x.col(j);
            }
            if (r.norm() > target)
                throw NumericalError("direct solve residual " + std::to_string(r.norm()) + " above tolerance");
        }
        return x;
    }

    Eigen::MatrixXd solve_iterative(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const {
        const State& s = *state_;
        // A solver per call keeps concurrent solves independent.
        Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
        cg.setTolerance(kRelativeTolerance);
        cg.setMaxIterations(10 * size());
        cg.compute(s.matrix);
        Eigen::MatrixXd x(rhs.rows(), rhs.cols());
        for (Index j = 0; j < rhs.cols(); ++j) {
            x.col(j) = cg.solve(rhs.col(j));
            if (cg.info() != Eigen::Success)
                throw NumericalError("conjugate gradient did not reach tolerance within " +
                                     std::to_string(10 * size()) + " iterations (column " + std::to_string(j) +
                                     ", relative residual " + std::to_string(cg.error()) + ")");
        }
        return x;
    }

    std::shared_ptr<State> state_;
};

/// Prepares repeated solves against A + tW.
inline SpdSystem factorize(const Eigen::VectorXd& mass, const SparseMatrix& stiffness, double t,
                           SolverKind kind = SolverKind::direct) {
    return SpdSystem(mass, stiffness, t, kind);
}

inline Eigen::MatrixXd solve(const SpdSystem& system, const Eigen::Ref<const Eigen::MatrixXd>& rhs) {
    return system.solve(rhs);
}

}  // namespace diffwave
