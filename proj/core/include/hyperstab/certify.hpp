#pragma once

#include "hyperstab/solver.hpp"
#include "hyperstab/timescale.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace hyperstab {

enum class CertificateKind { DecayOnly, ISS };

/// Evaluated stability bound against a computed trajectory.
struct Certificate {
    CertificateKind kind = CertificateKind::DecayOnly;
    double eta = 0.0;        // 2 K beta - 1 of the generating problem
    double dSupNorm = 0.0;
    double constantC = 0.0;  // disturbance constant in the bound C ||d||^2 / psi(t)^2
    std::string constantSource;  // "gain-constant" (eta < 2) or "sup-constant"
    double tolBound = 1e-2;
    std::vector<double> residuals;  // bound(t_k) - V(t_k)
    bool pass = false;
    double worstMargin = 0.0;  // min over samples of residual / bound
};

/// Least-squares fit log||X(t_k)||_w ~ -(a t^2 + b t) + c over a window.
struct RateFit {
    double quadCoeff = 0.0;  // a > 0 is the hyperexponential signature
    double linCoeff = 0.0;   // b
    double offset = 0.0;     // c
    double tStart = 0.0;
    double tEnd = 0.0;
    double residualRMS = 0.0;
    int samplesUsed = 0;
};

/// Right side of the decay/ISS bound at time t for the affine schedule:
///   exp(-eta t (t+2)/2) V0 + C dSup^2 / (1+t)^2.
double decay_bound(const TimeMap& map, double V0, double t, double dSup, double C);

/// Disturbance constant (4/eta) r_{2/eta, 1} from the gain-only analysis.
/// Valid only for eta < 2 (the integral-inequality precondition (2/eta) > 1);
/// throws std::domain_error at or beyond that boundary.
double theorem2_constant(double eta);

struct SupConstantResult {
    double value = 0.0;   // sup estimate times the 1.05 safety factor
    double rawSup = 0.0;
    bool stabilized = false;
    double tauMax = 0.0;
};

/// Numerical upper estimate of
///   C(eta) = sup_tau (2 tau/eta + 1) int_0^tau e^{-(tau-s)} (2 s/eta + 1)^{-1} ds
/// over a log-spaced tau grid up to tauMax, with a 1.05 safety factor.
SupConstantResult theorem3_constant_detailed(double eta, double tauMax = 1e3);

/// Convenience wrapper; throws std::runtime_error if the running max has not
/// stabilized at tauMax.
double theorem3_constant(double eta, double tauMax = 1e3);

/// Evaluates the bound against every trajectory sample. Refuses (throws
/// std::invalid_argument) when the generating problem is uncertified.
Certificate audit_trajectory(const Trajectory& traj, const EvolutionProblem& problem,
                             double tolBound = 1e-2);

/// OLS of log||X||_w on {t^2, t, 1} over [tStart, tEnd]. Samples below the
/// 1e-14 norm floor are excluded; fewer than 10 usable samples is an error.
RateFit fit_rate(const Trajectory& traj, double tStart, double tEnd);

/// Default window [0.1 T, T] where T is the last trajectory time.
RateFit fit_rate(const Trajectory& traj);

nlohmann::json certificate_to_json(const Certificate& cert);
nlohmann::json rate_fit_to_json(const RateFit& fit);

} // namespace hyperstab
