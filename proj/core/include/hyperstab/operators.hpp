#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace hyperstab {

/// Diagonal weighted inner product <z, q> = h * sum_j w_j z_j q_j.
struct InnerProduct {
    Eigen::VectorXd weights;  // strictly positive, one per state component
    double meshWeight = 1.0;  // spatial quadrature weight h

    static InnerProduct unweighted(int dim);

    int dim() const { return static_cast<int>(weights.size()); }
    double dot(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    double squaredNorm(const Eigen::VectorXd& x) const;
    double norm(const Eigen::VectorXd& x) const;
};

/// A finite-dimensional stand-in for an unbounded operator, tagged with the
/// inner product its monotonicity/coercivity is measured against.
struct DiscreteOperator {
    Eigen::MatrixXd matrix;
    InnerProduct innerProduct;
    std::string label;
    bool monotoneCertified = false;

    static DiscreteOperator identity(int dim, const std::string& label = "I");

    int dim() const { return static_cast<int>(matrix.rows()); }
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const { return matrix * x; }
};

/// Geometry and physical parameters of the heat-with-memory discretization on
/// (0, 1) with N interior grid points, h = 1/(N+1).
struct HeatMemoryGeometry {
    int N = 63;
    double beta = 1.0;     // memory decay rate (>= 0)
    double etaMem = 1.0;   // memory coupling (> 0), also the v-block norm weight
    double epsilon = 1.0;  // coercivity parameter of the w-block of B (> 0)

    double h() const { return 1.0 / (N + 1); }
    void validate() const;
    InnerProduct innerProduct() const;  // weights (etaMem,...,etaMem, 1,...,1), mesh h
};

/// N x N second-order finite-difference Dirichlet Laplacian (1/h^2) tridiag(-1, 2, -1).
DiscreteOperator build_dirichlet_laplacian(int N);

/// 2N x 2N block operator [[L, I]; [-etaMem I, beta I]] acting on stacked
/// states [v; w], monotone in the weighted inner product of the geometry.
DiscreteOperator build_memory_operator(const HeatMemoryGeometry& geom);

/// 2N x 2N block-diagonal [[I, 0]; [0, epsilon I]], coercive with constant
/// min(1, epsilon) in the weighted product.
DiscreteOperator build_b_epsilon(const HeatMemoryGeometry& geom);

struct MonotoneReport {
    bool pass = false;
    double lambdaMin = 0.0;       // smallest eigenvalue of the weighted symmetric part
    Eigen::VectorXd witness;      // offending direction on failure (weighted coords mapped back)
};

/// Monotonicity check: smallest eigenvalue of the symmetric part of
/// W^{1/2} M W^{-1/2}. Passes iff lambda_min >= -tol.
MonotoneReport check_monotone(const DiscreteOperator& op, double tol);

/// Default tolerance 1e-10 scaled by the matrix norm (eigen-solver roundoff scale).
double default_monotone_tol(const DiscreteOperator& op);

/// Largest c with <Mz, z>_w >= c <z, z>_w, i.e. the smallest eigenvalue of the
/// weighted symmetric part. Negative for non-monotone operators.
double coercivity_constant(const DiscreteOperator& op);

/// Plain-text triplet dump: header "rows cols nnz", then "row col value" lines
/// (1-based indices).
void write_triplets(const DiscreteOperator& op, std::ostream& out);

} // namespace hyperstab
