#include "hyperstab/certify.hpp"

#include "hyperstab/quadrature.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hyperstab {

double decay_bound(const TimeMap& map, double V0, double t, double dSup, double C)
{
    if (map.eta <= 0.0) throw std::domain_error("decay_bound: eta must be positive");
    if (t < 0.0) throw std::domain_error("decay_bound: t < 0");
    const double psi = 1.0 + t;
    return std::exp(-map.eta * t * (t + 2.0) * 0.5) * V0 + C * dSup * dSup / (psi * psi);
}

double theorem2_constant(double eta)
{
    if (eta <= 0.0) throw std::domain_error("theorem2_constant: eta must be positive");
    if (eta >= 2.0)
        throw std::domain_error(
            "theorem2_constant: requires eta < 2 (a*alpha > 1 with a = 2/eta); "
            "use theorem3_constant instead");
    return (4.0 / eta) * lemma1_constant(2.0 / eta, 1.0);
}

SupConstantResult theorem3_constant_detailed(double eta, double tauMax)
{
    if (eta <= 0.0) throw std::domain_error("theorem3_constant: eta must be positive");
    if (tauMax <= 0.0) throw std::domain_error("theorem3_constant: tauMax must be positive");

    auto objective = [&](double tau) {
        if (tau == 0.0) return 0.0;
        const double cutoff = std::min(tau, 45.0);
        const double integral = integrate_adaptive(
            [&](double u) { return std::exp(-u) / (2.0 * (tau - u) / eta + 1.0); },
            0.0, cutoff, 1e-9);
        return (2.0 * tau / eta + 1.0) * integral;
    };

    // Log-spaced grid; the last two decades must leave the running max alone.
    const int pointsPerDecade = 40;
    const double lo = 1e-3;
    const int decades = static_cast<int>(std::ceil(std::log10(tauMax / lo)));
    const int count = decades * pointsPerDecade + 1;

    SupConstantResult result;
    result.tauMax = tauMax;
    double runningMax = 0.0;
    double maxBeforeTail = 0.0;
    const double tailStart = tauMax / 100.0;  // last two decades
    for (int i = 0; i < count; ++i) {
        const double tau = lo * std::pow(tauMax / lo, static_cast<double>(i) / (count - 1));
        runningMax = std::max(runningMax, objective(tau));
        if (tau <= tailStart) maxBeforeTail = runningMax;
    }
    result.rawSup = runningMax;
    result.value = 1.05 * runningMax;
    result.stabilized = runningMax <= maxBeforeTail * 1.01;
    return result;
}

double theorem3_constant(double eta, double tauMax)
{
    const SupConstantResult result = theorem3_constant_detailed(eta, tauMax);
    if (!result.stabilized)
        throw std::runtime_error(
            "theorem3_constant: running max still growing at tauMax; increase tauMax");
    return result.value;
}

Certificate audit_trajectory(const Trajectory& traj, const EvolutionProblem& problem,
                             double tolBound)
{
    if (traj.size() == 0) throw std::invalid_argument("audit_trajectory: empty trajectory");
    if (problem.schedule.kind != PsiKind::Affine)
        throw std::invalid_argument(
            "audit_trajectory: the quantitative bound is stated for the affine schedule");

    const GainCondition gc = gain_condition(problem);
    if (!gc.satisfied)
        throw std::invalid_argument(
            "audit_trajectory: refusing to certify an uncertified run (K*beta <= 1/2)");

    Certificate cert;
    cert.eta = gc.eta;
    cert.dSupNorm = problem.disturbance.supNorm();
    cert.kind = cert.dSupNorm > 0.0 ? CertificateKind::ISS : CertificateKind::DecayOnly;
    cert.tolBound = tolBound;
    if (gc.eta < 2.0) {
        cert.constantC = theorem2_constant(gc.eta);
        cert.constantSource = "gain-constant";
    } else {
        // The sup-based constant enters the bound as C(eta)/eta.
        cert.constantC = theorem3_constant(gc.eta) / gc.eta;
        cert.constantSource = "sup-constant";
    }

    const TimeMap map{gc.eta, PsiSchedule::affine()};
    const double V0 = traj.lyapunov.front();

    cert.pass = true;
    cert.worstMargin = std::numeric_limits<double>::infinity();
    cert.residuals.reserve(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double bound = decay_bound(map, V0, traj.times[k], cert.dSupNorm, cert.constantC);
        const double residual = bound - traj.lyapunov[k];
        cert.residuals.push_back(residual);
        if (residual < -tolBound * bound) cert.pass = false;
        if (bound > 0.0) cert.worstMargin = std::min(cert.worstMargin, residual / bound);
    }
    return cert;
}

RateFit fit_rate(const Trajectory& traj, double tStart, double tEnd)
{
    constexpr double kNormFloor = 1e-14;
    if (!(tEnd > tStart)) throw std::invalid_argument("fit_rate: window must satisfy tStart < tEnd");

    std::vector<double> ts, ys;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        if (t < tStart || t > tEnd) continue;
        const double norm = std::sqrt(std::max(0.0, traj.lyapunov[k]));
        if (norm <= kNormFloor) continue;
        ts.push_back(t);
        ys.push_back(std::log(norm));
    }
    if (ts.size() < 10)
        throw std::runtime_error("fit_rate: fewer than 10 usable samples in the window");

    const int nSamples = static_cast<int>(ts.size());
    Eigen::MatrixXd design(nSamples, 3);
    Eigen::VectorXd y(nSamples);
    for (int i = 0; i < nSamples; ++i) {
        design(i, 0) = ts[i] * ts[i];
        design(i, 1) = ts[i];
        design(i, 2) = 1.0;
        y(i) = ys[i];
    }
    const Eigen::VectorXd coeffs = design.colPivHouseholderQr().solve(y);

    RateFit fit;
    fit.quadCoeff = -coeffs(0);
    fit.linCoeff = -coeffs(1);
    fit.offset = coeffs(2);
    fit.tStart = tStart;
    fit.tEnd = tEnd;
    fit.samplesUsed = nSamples;
    fit.residualRMS = std::sqrt((design * coeffs - y).squaredNorm() / nSamples);
    return fit;
}

RateFit fit_rate(const Trajectory& traj)
{
    const double T = traj.times.empty() ? 0.0 : traj.times.back();
    return fit_rate(traj, 0.1 * T, T);
}

nlohmann::json certificate_to_json(const Certificate& cert)
{
    return nlohmann::json{
        {"kind", cert.kind == CertificateKind::ISS ? "iss" : "decay_only"},
        {"eta", cert.eta},
        {"d_sup_norm", cert.dSupNorm},
        {"constant_c", cert.constantC},
        {"constant_source", cert.constantSource},
        {"tol_bound", cert.tolBound},
        {"pass", cert.pass},
        {"worst_margin", cert.worstMargin},
        {"residuals", cert.residuals},
    };
}

nlohmann::json rate_fit_to_json(const RateFit& fit)
{
    return nlohmann::json{
        {"quad_coeff", fit.quadCoeff},
        {"lin_coeff", fit.linCoeff},
        {"offset", fit.offset},
        {"window", {fit.tStart, fit.tEnd}},
        {"residual_rms", fit.residualRMS},
        {"samples_used", fit.samplesUsed},
    };
}

} // namespace hyperstab
