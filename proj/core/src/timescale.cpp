#include "hyperstab/timescale.hpp"

#include "hyperstab/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hyperstab {

namespace {

double power_tower(double b, double t)
{
    if (t <= 0.0) return b;  // t^t -> 1 as t -> 0+
    return b * std::exp(t * std::log(t));
}

} // namespace

PsiSchedule PsiSchedule::affine(int n)
{
    PsiSchedule s;
    s.kind = PsiKind::Affine;
    s.n = n;
    return s;
}

PsiSchedule PsiSchedule::exponential(double a, double alpha, int n)
{
    if (a <= 0.0 || alpha <= 0.0)
        throw std::domain_error("PsiSchedule::exponential: a and alpha must be positive");
    PsiSchedule s;
    s.kind = PsiKind::Exponential;
    s.a = a;
    s.alpha = alpha;
    s.n = n;
    return s;
}

PsiSchedule PsiSchedule::powerTower(double b, int n)
{
    if (b <= 0.0)
        throw std::domain_error("PsiSchedule::powerTower: b must be positive");
    PsiSchedule s;
    s.kind = PsiKind::PowerTower;
    s.b = b;
    s.n = n;
    return s;
}

double PsiSchedule::value(double t) const
{
    if (t < 0.0) throw std::domain_error("PsiSchedule::value: t < 0");
    switch (kind) {
        case PsiKind::Affine:      return 1.0 + t;
        case PsiKind::Exponential: return a * std::exp(alpha * t);
        case PsiKind::PowerTower:  return power_tower(b, t);
    }
    throw std::logic_error("PsiSchedule::value: unknown kind");
}

double PsiSchedule::gain(double t) const
{
    const double p = value(t);
    double g = 1.0;
    for (int i = 0; i < n; ++i) g *= p;
    return g;
}

double PsiSchedule::primitive(double t) const
{
    if (t < 0.0) throw std::domain_error("PsiSchedule::primitive: t < 0");
    if (t == 0.0) return 0.0;
    if (kind == PsiKind::Affine) return t + 0.5 * t * t;
    if (kind == PsiKind::Exponential) return a * std::expm1(alpha * t) / alpha;
    return integrate_adaptive([this](double s) { return value(s); }, 0.0, t, 1e-10);
}

std::string PsiSchedule::kindName() const
{
    switch (kind) {
        case PsiKind::Affine:      return "affine";
        case PsiKind::Exponential: return "exponential";
        case PsiKind::PowerTower:  return "power-tower";
    }
    return "unknown";
}

double TimeMap::phi(double t) const
{
    if (t < 0.0) throw std::domain_error("TimeMap::phi: t < 0");
    if (schedule.kind == PsiKind::Affine) return eta * t * (t + 2.0) * 0.5;
    return eta * schedule.primitive(t);
}

double TimeMap::phiInverse(double tau) const
{
    if (tau < 0.0) throw std::domain_error("TimeMap::phiInverse: tau < 0");
    if (tau == 0.0) return 0.0;
    if (schedule.kind == PsiKind::Affine)
        return std::sqrt(2.0 * tau / eta + 1.0) - 1.0;

    // phi is strictly increasing; bracket then bisect.
    double hi = 1.0;
    while (phi(hi) < tau) {
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("TimeMap::phiInverse: bracket overflow");
    }
    double lo = 0.0;
    const double tol = 1e-10 * std::max(1.0, tau);
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double v = phi(mid);
        if (std::abs(v - tau) <= tol) return mid;
        (v < tau ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double lemma1_constant(double a, double alpha)
{
    if (a <= 0.0 || alpha <= 0.0)
        throw std::domain_error("lemma1_constant: a and alpha must be positive");
    if (a * alpha <= 1.0)
        throw std::domain_error("lemma1_constant: requires a*alpha > 1");

    const double up = (a * alpha - 1.0) / a;
    const double integral = integrate_adaptive(
        [&](double s) { return std::exp(s - up) * std::pow(a * s + 1.0, -alpha); },
        0.0, up, 1e-10);
    const double term1 = std::pow(a * alpha, alpha) * integral;
    const double term2 = a * alpha + 1.0;
    const double term3 =
        std::pow((a * alpha + 1.0) / (a * alpha), alpha) * (1.0 - std::exp(-1.0 / a));
    return term1 + term2 + term3;
}

double lemma1_lhs(double a, double alpha, double tau)
{
    if (tau < 0.0) throw std::domain_error("lemma1_lhs: tau < 0");
    if (tau == 0.0) return 0.0;
    // Substituting u = tau - s concentrates the mass near u = 0 and lets the
    // quadrature truncate the exponentially negligible tail.
    const double cutoff = std::min(tau, 45.0);
    return integrate_adaptive(
        [&](double u) { return std::exp(-u) * std::pow(a * (tau - u) + 1.0, -alpha); },
        0.0, cutoff, 1e-10);
}

Lemma1Report lemma1_check(double a, double alpha, const std::vector<double>& tauGrid)
{
    Lemma1Report report;
    report.a = a;
    report.alpha = alpha;
    report.constant = lemma1_constant(a, alpha);  // enforces the precondition

    report.allPass = true;
    report.samples.reserve(tauGrid.size());
    for (double tau : tauGrid) {
        if (tau < 0.0) throw std::domain_error("lemma1_check: tau < 0 in grid");
        Lemma1Sample sample;
        sample.tau = tau;
        sample.lhs = lemma1_lhs(a, alpha, tau);
        sample.rhs = report.constant * std::pow(a * tau + 1.0, -alpha);
        sample.margin = sample.rhs * (1.0 + report.slack) - sample.lhs;
        sample.pass = sample.margin >= 0.0;
        report.allPass = report.allPass && sample.pass;
        report.samples.push_back(sample);
    }
    return report;
}

} // namespace hyperstab
