#include "hyperstab/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace hyperstab {

double DisturbanceSpec::supNorm() const
{
    switch (kind) {
        case DisturbanceKind::Zero:          return 0.0;
        case DisturbanceKind::Constant:      return std::abs(constant);
        case DisturbanceKind::Sinusoid:      return std::abs(amplitude);
        case DisturbanceKind::BoundedRandom: return std::abs(amplitude);
    }
    throw std::logic_error("DisturbanceSpec::supNorm: unknown kind");
}

double DisturbanceSpec::valueAt(double t) const
{
    switch (kind) {
        case DisturbanceKind::Zero:     return 0.0;
        case DisturbanceKind::Constant: return constant;
        case DisturbanceKind::Sinusoid: return amplitude * std::sin(angularFrequency * t + phase);
        case DisturbanceKind::BoundedRandom:
            throw std::logic_error(
                "DisturbanceSpec::valueAt: BoundedRandom is sampled per step by the integrator");
    }
    throw std::logic_error("DisturbanceSpec::valueAt: unknown kind");
}

Eigen::VectorXd EvolutionProblem::resolvedDisturbanceProfile() const
{
    if (disturbanceProfile.size() > 0) return disturbanceProfile;
    if (disturbance.pattern == DisturbancePattern::FirstComponentOnly) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim());
        e(0) = 1.0;
        return e;
    }
    return Eigen::VectorXd::Ones(dim());
}

void EvolutionProblem::validate() const
{
    const int m = dim();
    if (m == 0) throw std::invalid_argument("EvolutionProblem: empty initial state");
    if (A.matrix.rows() != m || A.matrix.cols() != m)
        throw std::invalid_argument("EvolutionProblem: A dimension mismatch");
    if (B.matrix.rows() != m || B.matrix.cols() != m)
        throw std::invalid_argument("EvolutionProblem: B dimension mismatch");
    if (disturbanceProfile.size() > 0 && disturbanceProfile.size() != m)
        throw std::invalid_argument("EvolutionProblem: disturbance profile dimension mismatch");
    if (K < 0.0) throw std::invalid_argument("EvolutionProblem: K must be nonnegative");
}

GainCondition gain_condition(const EvolutionProblem& problem)
{
    GainCondition gc;
    gc.beta = coercivity_constant(problem.B);
    gc.eta = 2.0 * problem.K * gc.beta - 1.0;
    gc.satisfied = problem.K * gc.beta > 0.5;
    return gc;
}

namespace {

// Per-run disturbance source. BoundedRandom draws once per accepted step.
class DisturbanceSampler {
public:
    explicit DisturbanceSampler(const DisturbanceSpec& spec)
        : spec_(spec), rng_(spec.seed), uniform_(-1.0, 1.0) {}

    double sampleStep(double tEnd)
    {
        if (spec_.kind == DisturbanceKind::BoundedRandom)
            return spec_.amplitude * uniform_(rng_);
        return spec_.valueAt(tEnd);
    }

    double sampleAt(double t) const { return spec_.valueAt(t); }

private:
    DisturbanceSpec spec_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> uniform_;
};

using SpMat = Eigen::SparseMatrix<double>;

SpMat sparse_identity(int m)
{
    SpMat I(m, m);
    I.setIdentity();
    return I;
}

} // namespace

Eigen::VectorXd step_backward_euler(const EvolutionProblem& problem,
                                    const Eigen::VectorXd& state, double t, double dt)
{
    if (dt <= 0.0) throw std::invalid_argument("step_backward_euler: dt must be positive");
    problem.validate();

    const int m = problem.dim();
    const double c = problem.K * problem.schedule.gain(t + dt);
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(m, m) + dt * problem.A.matrix
                      + (dt * c) * problem.B.matrix;
    Eigen::VectorXd rhs = state;
    if (problem.disturbance.kind != DisturbanceKind::Zero &&
        problem.disturbance.isDeterministic()) {
        rhs += dt * problem.disturbance.valueAt(t + dt) * problem.resolvedDisturbanceProfile();
    } else if (!problem.disturbance.isDeterministic()) {
        throw std::logic_error(
            "step_backward_euler: BoundedRandom disturbances are handled by simulate()");
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::VectorXd next = lu.solve(rhs);
    const double residual = (M * next - rhs).norm();
    if (!(residual <= 1e-8 * std::max(1.0, rhs.norm())))
        throw std::runtime_error("step_backward_euler: singular implicit system");
    return next;
}

Trajectory simulate(const EvolutionProblem& problem, const SimOptions& options)
{
    problem.validate();
    if (problem.horizon <= 0.0)
        throw std::invalid_argument("simulate: horizon must be positive");

    const GainCondition gc = gain_condition(problem);
    if (!gc.satisfied && !options.allowUncertified)
        throw std::invalid_argument(
            "simulate: gain condition K*beta > 1/2 not satisfied; "
            "set allowUncertified to run anyway (trajectory will be tagged)");

    const int m = problem.dim();
    const double T = problem.horizon;
    const double dtMax = options.dtMax > 0.0 ? options.dtMax : 1e-3 * std::max(1.0, T);

    const SpMat sA = problem.A.matrix.sparseView();
    const SpMat sB = problem.B.matrix.sparseView();
    const SpMat sI = sparse_identity(m);
    const Eigen::VectorXd profile = problem.resolvedDisturbanceProfile();
    DisturbanceSampler sampler(problem.disturbance);

    const bool cn = options.scheme == Scheme::CrankNicolson;

    Trajectory traj;
    traj.schemeName = cn ? "crank-nicolson" : "backward-euler";
    traj.certified = gc.satisfied;

    Eigen::VectorXd X = problem.initialState;
    double t = 0.0;

    auto record = [&](double time, const Eigen::VectorXd& state) {
        traj.times.push_back(time);
        traj.states.push_back(state);
        traj.lyapunov.push_back(problem.A.innerProduct.squaredNorm(state));
        const double g = problem.K * problem.schedule.gain(time);
        traj.controlMagnitudes.push_back(
            problem.A.innerProduct.norm(g * (problem.B.matrix * state)));
    };
    record(0.0, X);

    Eigen::SparseLU<SpMat> lu;
    while (t < T - 1e-12 * std::max(1.0, T)) {
        double dt = std::min(dtMax, options.stepGainConstant / problem.schedule.gain(t));
        dt = std::min(dt, T - t);

        const double tNext = t + dt;
        const double dVal = sampler.sampleStep(tNext);
        const double cNext = problem.K * problem.schedule.gain(tNext);

        Eigen::VectorXd rhs;
        SpMat M;
        if (cn) {
            const double cHere = problem.K * problem.schedule.gain(t);
            M = sI + (0.5 * dt) * sA + (0.5 * dt * cNext) * sB;
            SpMat Mexp = sI - (0.5 * dt) * sA - (0.5 * dt * cHere) * sB;
            rhs = Mexp * X + dt * dVal * profile;
        } else {
            M = sI + dt * sA + (dt * cNext) * sB;
            rhs = X + dt * dVal * profile;
        }
        M.makeCompressed();
        lu.compute(M);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("simulate: implicit system factorization failed");
        X = lu.solve(rhs);

        t = tNext;
        ++traj.stepCount;
        record(t, X);
    }
    return traj;
}

namespace {
thread_local double g_picardLastRatio = 0.0;
}

double picard_last_contraction_ratio() { return g_picardLastRatio; }

Eigen::VectorXd picard_mild_solution(const EvolutionProblem& problem, double t,
                                     int iterations, int gridPoints)
{
    problem.validate();
    if (problem.dim() > 64)
        throw std::invalid_argument("picard_mild_solution: oracle limited to dimension <= 64");
    if (!problem.disturbance.isDeterministic())
        throw std::invalid_argument("picard_mild_solution: requires a deterministic disturbance");
    if (t < 0.0) throw std::domain_error("picard_mild_solution: t < 0");
    if (gridPoints < 8) throw std::invalid_argument("picard_mild_solution: gridPoints too small");
    if (t == 0.0) return problem.initialState;

    const int m = problem.dim();
    const Eigen::MatrixXd& A = problem.A.matrix;
    const Eigen::MatrixXd& B = problem.B.matrix;
    const Eigen::VectorXd profile = problem.resolvedDisturbanceProfile();

    // Sub-interval length chosen so that length * sup||f|| <= 1/2, with
    // sup||f|| over [0, t] bounded by K psi(t)^n ||B||_F (psi increasing).
    const double fBound = problem.K * problem.schedule.gain(t) * B.norm();
    int numSub = 1;
    if (fBound > 0.0) numSub = std::max(1, static_cast<int>(std::ceil(t * fBound / 0.5)));
    const double subLen = t / numSub;
    const int G = gridPoints;
    const double delta = subLen / G;

    const Eigen::MatrixXd E = (-delta * A).exp();

    std::vector<Eigen::VectorXd> v(G + 1), Fv(G + 1), g(G + 1);
    Eigen::VectorXd xLoc = problem.initialState;
    g_picardLastRatio = 0.0;

    for (int sub = 0; sub < numSub; ++sub) {
        const double t0 = sub * subLen;

        // Initial guess: the homogeneous flow from the sub-interval start.
        v[0] = xLoc;
        for (int i = 1; i <= G; ++i) v[i] = E * v[i - 1];

        auto loadAt = [&](int i, const Eigen::VectorXd& state) {
            const double s = t0 + i * delta;
            return (-problem.K * problem.schedule.gain(s)) * (B * state)
                 + problem.disturbance.valueAt(s) * profile;
        };

        double prevDiff = -1.0;
        bool converged = false;
        for (int it = 0; it < iterations; ++it) {
            for (int i = 0; i <= G; ++i) g[i] = loadAt(i, v[i]);

            // (Fv)_i = E^i x0 + I_i with the trapezoid running integral
            // I_i = E I_{i-1} + (delta/2)(E g_{i-1} + g_i).
            Eigen::VectorXd hom = xLoc;
            Eigen::VectorXd acc = Eigen::VectorXd::Zero(m);
            Fv[0] = xLoc;
            for (int i = 1; i <= G; ++i) {
                hom = E * hom;
                acc = E * acc + (0.5 * delta) * (E * g[i - 1] + g[i]);
                Fv[i] = hom + acc;
            }

            double diff = 0.0;
            for (int i = 0; i <= G; ++i)
                diff = std::max(diff, (Fv[i] - v[i]).lpNorm<Eigen::Infinity>());
            v.swap(Fv);

            if (prevDiff > 0.0 && diff > 0.0)
                g_picardLastRatio = std::max(g_picardLastRatio, diff / prevDiff);
            prevDiff = diff;
            if (diff <= 1e-8) {
                converged = true;
                break;
            }
        }
        if (!converged) {
            char msg[160];
            std::snprintf(msg, sizeof(msg),
                          "picard_mild_solution: no convergence within budget "
                          "(last contraction ratio %.3g)", g_picardLastRatio);
            throw std::runtime_error(msg);
        }
        xLoc = v[G];
    }
    return xLoc;
}

void write_trajectory_csv(const Trajectory& traj, const InnerProduct& ip,
                          const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    out << "t,normX,V,controlMag\n";
    char buf[160];
    for (std::size_t k = 0; k < traj.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", traj.times[k],
                      ip.norm(traj.states[k]), traj.lyapunov[k], traj.controlMagnitudes[k]);
        out << buf;
    }
}

} // namespace hyperstab
