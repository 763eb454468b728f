#pragma once

#include "hyperstab/operators.hpp"
#include "hyperstab/timescale.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace hyperstab {

enum class DisturbanceKind { Zero, Constant, Sinusoid, BoundedRandom };
enum class DisturbancePattern { UniformAcrossDomain, FirstComponentOnly };

/// Scalar disturbance signal d(t) with a spatial injection pattern. The
/// BoundedRandom kind is piecewise constant per integrator step, drawn from a
/// seeded generator and clipped to the amplitude (L-infinity by construction).
struct DisturbanceSpec {
    DisturbanceKind kind = DisturbanceKind::Zero;
    double amplitude = 0.0;         // Sinusoid / BoundedRandom
    double angularFrequency = 1.0;  // Sinusoid
    double phase = 0.0;             // Sinusoid
    double constant = 0.0;          // Constant
    std::uint64_t seed = 0;         // BoundedRandom
    DisturbancePattern pattern = DisturbancePattern::UniformAcrossDomain;

    double supNorm() const;
    bool isDeterministic() const { return kind != DisturbanceKind::BoundedRandom; }

    /// d(t) for deterministic kinds; throws std::logic_error for BoundedRandom
    /// (sampled per step by the integrator instead).
    double valueAt(double t) const;
};

/// Closed-loop specification: dX/dt + A X + K psi(t)^n B X = d(t) * profile.
struct EvolutionProblem {
    DiscreteOperator A;
    DiscreteOperator B;  // identity allowed (B = I case)
    double K = 1.0;
    PsiSchedule schedule;
    DisturbanceSpec disturbance;
    Eigen::VectorXd initialState;
    double horizon = 1.0;

    /// Spatial direction the scalar disturbance multiplies. Empty means
    /// "derive from the disturbance pattern" (all-ones or e_0).
    Eigen::VectorXd disturbanceProfile;

    int dim() const { return static_cast<int>(initialState.size()); }
    Eigen::VectorXd resolvedDisturbanceProfile() const;
    void validate() const;
};

struct GainCondition {
    bool satisfied = false;
    double eta = 0.0;   // 2 K beta - 1
    double beta = 0.0;  // coercivity constant of B in its weighted product
};

/// Gain hypothesis K * coercivity(B) > 1/2 and the decay margin eta.
GainCondition gain_condition(const EvolutionProblem& problem);

enum class Scheme { BackwardEuler, CrankNicolson };

struct SimOptions {
    Scheme scheme = Scheme::BackwardEuler;
    double dtMax = -1.0;           // < 0 means the default 1e-3 * max(1, T)
    double stepGainConstant = 0.1; // dt_k = min(dtMax, c / psi(t_k)^n)
    bool allowUncertified = false; // proceed when K*beta <= 1/2 (run is tagged)
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<double> lyapunov;           // V(t_k) = <X_k, X_k>_w
    std::vector<double> controlMagnitudes;  // ||K psi(t_k)^n B X_k||_w
    std::string schemeName;
    std::size_t stepCount = 0;
    std::size_t rejectedSteps = 0;
    bool certified = false;  // gain condition held for this run

    std::size_t size() const { return times.size(); }
};

/// One backward-Euler step: solves
///   (I + dt (A + K psi(t+dt)^n B)) X+ = X + dt d(t+dt) * profile.
/// Contraction for monotone A, B with d = 0: ||X+||_w <= ||X||_w.
Eigen::VectorXd step_backward_euler(const EvolutionProblem& problem,
                                    const Eigen::VectorXd& state, double t, double dt);

/// Integrates the closed loop to the horizon with the gain-adaptive step
/// policy. Deterministic given the problem (including the disturbance seed).
Trajectory simulate(const EvolutionProblem& problem, const SimOptions& options = {});

/// Mild-solution oracle: fixed point of the Duhamel map
///   (Fv)(t) = S(t) X0 + int_0^t S(t-s) (-K psi(s)^n B v(s) + d(s) profile) ds
/// with S(t) = exp(-t A), iterated on successive sub-intervals short enough
/// that the map is a contraction. Oracle scale: dimension <= 64.
Eigen::VectorXd picard_mild_solution(const EvolutionProblem& problem, double t,
                                     int iterations = 60, int gridPoints = 512);

/// Largest contraction ratio observed across sub-intervals in the last
/// picard_mild_solution call on this thread (diagnostic).
double picard_last_contraction_ratio();

/// CSV export with header "t,normX,V,controlMag".
void write_trajectory_csv(const Trajectory& traj, const InnerProduct& ip,
                          const std::string& path);

} // namespace hyperstab
