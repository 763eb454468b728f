#pragma once

#include <string>
#include <vector>

namespace hyperstab {

/// The gain-schedule family psi. All kinds are strictly increasing with
/// positive values and an unbounded primitive on [0, inf).
enum class PsiKind { Affine, Exponential, PowerTower };

struct PsiSchedule {
    PsiKind kind = PsiKind::Affine;
    double a = 1.0;      // Exponential: psi(t) = a * exp(alpha t)
    double alpha = 1.0;
    double b = 1.0;      // PowerTower: psi(t) = b * t^t, psi(0) := b (t^t -> 1)
    int n = 1;           // feedback exponent, psi(t)^n

    static PsiSchedule affine(int n = 1);
    static PsiSchedule exponential(double a, double alpha, int n = 1);
    static PsiSchedule powerTower(double b, int n = 1);

    /// psi(t). Throws std::domain_error for t < 0.
    double value(double t) const;

    /// psi(t)^n, the gain profile applied in the feedback.
    double gain(double t) const;

    /// Primitive P(t) = integral of psi over [0, t]. Closed form for Affine,
    /// adaptive quadrature (relative error <= 1e-10) otherwise.
    double primitive(double t) const;

    std::string kindName() const;
};

/// Time reparametrization tau = phi(t) = eta * integral_0^t psi(s) ds and its
/// inverse. Closed forms for the Affine kind, numeric for the others.
struct TimeMap {
    double eta = 1.0;
    PsiSchedule schedule;

    double phi(double t) const;
    double phiInverse(double tau) const;
};

/// The constant r_{a,alpha} of the integral inequality
///   int_0^tau e^{s - tau} (a s + 1)^{-alpha} ds <= r_{a,alpha} (a tau + 1)^{-alpha}.
/// Requires a, alpha > 0 and a*alpha > 1; throws std::domain_error otherwise.
double lemma1_constant(double a, double alpha);

/// Left side of the inequality above, via adaptive quadrature.
double lemma1_lhs(double a, double alpha, double tau);

struct Lemma1Sample {
    double tau = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  // rhs * (1 + slack) - lhs
    bool pass = false;
};

struct Lemma1Report {
    double a = 0.0;
    double alpha = 0.0;
    double constant = 0.0;  // r_{a,alpha}
    double slack = 1e-6;    // multiplicative slack covering quadrature error
    std::vector<Lemma1Sample> samples;
    bool allPass = false;
};

/// Checks the inequality on a grid of tau values. Violations are reported in
/// the samples, never thrown.
Lemma1Report lemma1_check(double a, double alpha, const std::vector<double>& tauGrid);

} // namespace hyperstab
