#include "hyperstab/operators.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace hyperstab {

InnerProduct InnerProduct::unweighted(int dim)
{
    InnerProduct ip;
    ip.weights = Eigen::VectorXd::Ones(dim);
    ip.meshWeight = 1.0;
    return ip;
}

double InnerProduct::dot(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const
{
    return meshWeight * (weights.array() * x.array() * y.array()).sum();
}

double InnerProduct::squaredNorm(const Eigen::VectorXd& x) const
{
    return meshWeight * (weights.array() * x.array().square()).sum();
}

double InnerProduct::norm(const Eigen::VectorXd& x) const
{
    return std::sqrt(std::max(0.0, squaredNorm(x)));
}

DiscreteOperator DiscreteOperator::identity(int dim, const std::string& label)
{
    DiscreteOperator op;
    op.matrix = Eigen::MatrixXd::Identity(dim, dim);
    op.innerProduct = InnerProduct::unweighted(dim);
    op.label = label;
    op.monotoneCertified = true;
    return op;
}

void HeatMemoryGeometry::validate() const
{
    if (N < 2) throw std::invalid_argument("HeatMemoryGeometry: N must be >= 2");
    if (beta < 0.0) throw std::invalid_argument("HeatMemoryGeometry: beta must be >= 0");
    if (etaMem <= 0.0) throw std::invalid_argument("HeatMemoryGeometry: etaMem must be > 0");
    if (epsilon <= 0.0) throw std::invalid_argument("HeatMemoryGeometry: epsilon must be > 0");
}

InnerProduct HeatMemoryGeometry::innerProduct() const
{
    InnerProduct ip;
    ip.weights = Eigen::VectorXd::Ones(2 * N);
    ip.weights.head(N).setConstant(etaMem);
    ip.meshWeight = h();
    return ip;
}

DiscreteOperator build_dirichlet_laplacian(int N)
{
    if (N < 2) throw std::invalid_argument("build_dirichlet_laplacian: N must be >= 2");
    const double h = 1.0 / (N + 1);
    const double c = 1.0 / (h * h);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i) {
        L(i, i) = 2.0 * c;
        if (i > 0) L(i, i - 1) = -c;
        if (i + 1 < N) L(i, i + 1) = -c;
    }
    DiscreteOperator op;
    op.matrix = std::move(L);
    op.innerProduct = InnerProduct::unweighted(N);
    op.innerProduct.meshWeight = h;
    op.label = "dirichlet-laplacian";
    op.monotoneCertified = check_monotone(op, default_monotone_tol(op)).pass;
    return op;
}

DiscreteOperator build_memory_operator(const HeatMemoryGeometry& geom)
{
    geom.validate();
    const int N = geom.N;
    const DiscreteOperator lap = build_dirichlet_laplacian(N);

    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    A.topLeftCorner(N, N) = lap.matrix;
    A.topRightCorner(N, N) = Eigen::MatrixXd::Identity(N, N);
    A.bottomLeftCorner(N, N) = -geom.etaMem * Eigen::MatrixXd::Identity(N, N);
    A.bottomRightCorner(N, N) = geom.beta * Eigen::MatrixXd::Identity(N, N);

    DiscreteOperator op;
    op.matrix = std::move(A);
    op.innerProduct = geom.innerProduct();
    op.label = "heat-memory-A";
    op.monotoneCertified = check_monotone(op, default_monotone_tol(op)).pass;
    return op;
}

DiscreteOperator build_b_epsilon(const HeatMemoryGeometry& geom)
{
    geom.validate();
    const int N = geom.N;
    Eigen::VectorXd diag = Eigen::VectorXd::Ones(2 * N);
    diag.tail(N).setConstant(geom.epsilon);

    DiscreteOperator op;
    op.matrix = diag.asDiagonal();
    op.innerProduct = geom.innerProduct();
    op.label = "B-epsilon";
    op.monotoneCertified = true;
    return op;
}

namespace {

// Symmetric part of W^{1/2} M W^{-1/2}; the mesh weight cancels.
Eigen::MatrixXd weighted_symmetric_part(const DiscreteOperator& op)
{
    const Eigen::ArrayXd sqrtW = op.innerProduct.weights.array().sqrt();
    Eigen::MatrixXd S = op.matrix;
    for (int i = 0; i < S.rows(); ++i)
        for (int j = 0; j < S.cols(); ++j)
            S(i, j) *= sqrtW(i) / sqrtW(j);
    return 0.5 * (S + S.transpose());
}

} // namespace

MonotoneReport check_monotone(const DiscreteOperator& op, double tol)
{
    if (op.matrix.rows() != op.matrix.cols())
        throw std::invalid_argument("check_monotone: operator must be square");
    if (op.innerProduct.dim() != op.dim())
        throw std::invalid_argument("check_monotone: inner product dimension mismatch");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(weighted_symmetric_part(op));
    MonotoneReport report;
    report.lambdaMin = es.eigenvalues()(0);
    report.pass = report.lambdaMin >= -tol;
    if (!report.pass) {
        // Map the offending eigenvector back to original coordinates so that
        // <Mz, z>_w / <z, z>_w equals lambdaMin on the witness.
        report.witness =
            (es.eigenvectors().col(0).array() / op.innerProduct.weights.array().sqrt())
                .matrix();
    }
    return report;
}

double default_monotone_tol(const DiscreteOperator& op)
{
    return 1e-10 * std::max(1.0, op.matrix.norm());
}

double coercivity_constant(const DiscreteOperator& op)
{
    if (op.matrix.rows() != op.matrix.cols())
        throw std::invalid_argument("coercivity_constant: operator must be square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.compute(weighted_symmetric_part(op), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

void write_triplets(const DiscreteOperator& op, std::ostream& out)
{
    const auto& M = op.matrix;
    int nnz = 0;
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j)
            if (M(i, j) != 0.0) ++nnz;
    out << M.rows() << ' ' << M.cols() << ' ' << nnz << '\n';
    char buf[64];
    for (int i = 0; i < M.rows(); ++i) {
        for (int j = 0; j < M.cols(); ++j) {
            if (M(i, j) == 0.0) continue;
            std::snprintf(buf, sizeof(buf), "%.17g", M(i, j));
            out << (i + 1) << ' ' << (j + 1) << ' ' << buf << '\n';
        }
    }
}

} // namespace hyperstab
