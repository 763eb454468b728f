// End-to-end acceptance suite. Each case prints a single pass/fail line so the
// verdicts are readable straight from the ctest log.

#include "hyperstab/certify.hpp"
#include "hyperstab/heatmem.hpp"
#include "hyperstab/operators.hpp"
#include "hyperstab/solver.hpp"
#include "hyperstab/timescale.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace hyperstab;
namespace fs = std::filesystem;

namespace {

void report(const char* label, bool pass)
{
    std::printf("[acceptance] %-44s %s\n", label, pass ? "PASS" : "FAIL");
    std::fflush(stdout);
    CHECK_MESSAGE(pass, label);
}

std::vector<double> log_grid(double lo, double hi, int count)
{
    std::vector<double> grid;
    for (int i = 0; i < count; ++i)
        grid.push_back(lo * std::pow(hi / lo, double(i) / (count - 1)));
    return grid;
}

EvolutionProblem scalar_problem(double horizon)
{
    EvolutionProblem problem;
    problem.A.matrix = Eigen::MatrixXd::Zero(1, 1);
    problem.A.innerProduct = InnerProduct::unweighted(1);
    problem.A.label = "zero";
    problem.A.monotoneCertified = true;
    problem.B = DiscreteOperator::identity(1);
    problem.K = 1.0;
    problem.schedule = PsiSchedule::affine();
    problem.initialState = Eigen::VectorXd::Constant(1, 1.0);
    problem.horizon = horizon;
    return problem;
}

std::size_t nearest_index(const std::vector<double>& times, double t)
{
    std::size_t best = 0;
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - t) < std::abs(times[best] - t)) best = k;
    return best;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST_CASE("1: integral inequality holds across the parameter suite")
{
    const auto grid = log_grid(1e-2, 1e3, 40);
    bool pass = true;
    for (const auto& [a, alpha] :
         std::vector<std::pair<double, double>>{{1.5, 1.0}, {2.0, 1.0}, {2.0, 2.0}, {5.0, 1.0}}) {
        const auto rep = lemma1_check(a, alpha, grid);
        pass = pass && rep.allPass && rep.samples.size() == grid.size();
    }
    bool rejected = false;
    try {
        lemma1_constant(10.0, 0.05);
    } catch (const std::domain_error&) {
        rejected = true;
    }
    report("integral inequality suite", pass && rejected);
}

TEST_CASE("2: scalar closed form and rate fit")
{
    auto problem = scalar_problem(2.0);
    SimOptions options;
    options.dtMax = 1e-4;
    const auto traj = simulate(problem, options);

    bool pass = true;
    for (double t : {0.5, 1.0, 2.0}) {
        const std::size_t k = nearest_index(traj.times, t);
        const double exact = std::exp(-traj.times[k] * (traj.times[k] + 2.0) / 2.0);
        pass = pass && std::abs(traj.states[k](0) - exact) <= 1e-3 * exact;
    }
    const auto fit = fit_rate(traj, 0.2, 2.0);
    pass = pass && std::abs(fit.quadCoeff - 0.5) <= 0.02 && std::abs(fit.linCoeff - 1.0) <= 0.05;
    report("scalar closed form + rate fit", pass);
}

TEST_CASE("3: integrator agrees with the mild-solution oracle")
{
    HeatMemoryExperiment exp;
    exp.geometry.N = 8;
    exp.horizon = 1.0;
    const auto problem = assemble(exp);
    const auto& ip = problem.A.innerProduct;
    const Eigen::VectorXd oracle = picard_mild_solution(problem, 1.0, 80, 2048);

    auto endError = [&](double dtMax) {
        SimOptions options;
        options.dtMax = dtMax;
        const auto traj = simulate(problem, options);
        return ip.norm(traj.states.back() - oracle) / ip.norm(oracle);
    };
    const double errCoarse = endError(1e-5);
    const double errFine = endError(5e-6);
    const double ratio = errCoarse / errFine;
    const bool pass = errCoarse <= 1e-4 && ratio >= 1.7 && ratio <= 2.3;
    std::printf("[acceptance]   oracle rel err %.3g, halving ratio %.3f\n", errCoarse, ratio);
    report("oracle agreement + first-order convergence", pass);
}

TEST_CASE("4: operator monotonicity and coercivity grids")
{
    bool pass = true;
    for (double beta : {0.0, 0.5, 1.0, 2.0})
        for (double etaMem : {0.5, 1.0, 2.0}) {
            HeatMemoryGeometry geom;
            geom.N = 16;
            geom.beta = beta;
            geom.etaMem = etaMem;
            const auto op = build_memory_operator(geom);
            pass = pass && check_monotone(op, default_monotone_tol(op)).pass;
        }
    for (double eps : {0.1, 0.5, 1.0, 2.0, 10.0}) {
        HeatMemoryGeometry geom;
        geom.N = 16;
        geom.epsilon = eps;
        const auto B = build_b_epsilon(geom);
        pass = pass && std::abs(coercivity_constant(B) - std::min(1.0, eps)) <= 1e-10;
    }
    report("monotonicity + coercivity grids", pass);
}

TEST_CASE("5: default run satisfies the decay certificate")
{
    HeatMemoryExperiment exp;  // N = 63, K = 2, epsilon = 1, T = 3
    const auto problem = assemble(exp);
    const auto traj = simulate(problem);
    const auto cert = audit_trajectory(traj, problem);

    bool monotoneV = true;
    for (std::size_t k = 1; k < traj.size(); ++k)
        monotoneV = monotoneV && traj.lyapunov[k] <= traj.lyapunov[k - 1] * (1.0 + 1e-12);
    const bool pass = cert.pass && cert.eta == doctest::Approx(3.0).epsilon(1e-9) &&
                      cert.constantSource == "sup-constant" && monotoneV;
    std::printf("[acceptance]   eta=%.3f worst margin %.3g\n", cert.eta, cert.worstMargin);
    report("undisturbed decay certificate", pass);
}

TEST_CASE("6: disturbed run stays inside the ISS tail")
{
    HeatMemoryExperiment exp;
    exp.disturbance.kind = DisturbanceKind::Sinusoid;
    exp.disturbance.amplitude = 0.1;
    exp.disturbance.angularFrequency = 1.0;
    const auto problem = assemble(exp);
    const auto traj = simulate(problem);
    const auto cert = audit_trajectory(traj, problem);

    const double dSup2 = 0.1 * 0.1;
    double worstRatio = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        if (t < exp.horizon / 2.0) continue;
        const double psi = 1.0 + t;
        worstRatio = std::max(worstRatio, traj.lyapunov[k] * psi * psi / dSup2);
    }
    const bool pass = cert.pass && worstRatio < 2.0 * cert.constantC;
    std::printf("[acceptance]   tail ratio %.3g vs 2C = %.3g\n", worstRatio,
                2.0 * cert.constantC);
    report("ISS bound under a sinusoidal disturbance", pass);
}

TEST_CASE("7: decay speeds up monotonically with the gain exponent")
{
    HeatMemoryExperiment exp;
    exp.horizon = 3.0;
    SimOptions options;
    const auto rep = run_n_sweep(exp, {1, 2, 3, 4, 5}, options);
    const bool pass = rep.ordered && rep.orderingViolations == 0 &&
                      rep.comparisonTimes.front() >= 0.5;
    report("gain-exponent sweep ordering", pass);
}

TEST_CASE("8: memory reformulation is consistent and converges")
{
    HeatMemoryExperiment exp;
    exp.geometry.N = 31;
    exp.horizon = 2.05;
    const auto problem = assemble_control_v_only(exp);

    auto maxDiscrepancy = [&](double dtMax) {
        SimOptions options;
        options.dtMax = dtMax;
        options.allowUncertified = true;
        const auto traj = simulate(problem, options);
        return verify_memory_reformulation(exp, traj, {0.5, 1.0, 2.0});
    };
    const auto coarse = maxDiscrepancy(1e-3);
    const auto fine = maxDiscrepancy(5e-4);
    const double improvement = coarse.maxDiscrepancy / fine.maxDiscrepancy;
    const bool pass = coarse.pass && fine.pass && improvement >= 1.7;
    std::printf("[acceptance]   max discrepancy %.3g, refinement gain %.2fx\n",
                coarse.maxDiscrepancy, improvement);
    report("memory reformulation consistency", pass);
}

TEST_CASE("9: command line runs are reproducible byte for byte")
{
    fs::remove_all("acc_det_a");
    fs::remove_all("acc_det_b");
    const std::string base =
        std::string(HYPERSTAB_CLI_PATH) +
        " heat-memory --set T=0.5 --set N=16 --set disturbance.kind=bounded_random"
        " --set disturbance.amplitude=0.1 --seed 7 --dt-max 1e-3 --out ";
    const int rcA = std::system((base + "acc_det_a > /dev/null 2>&1").c_str());
    const int rcB = std::system((base + "acc_det_b > /dev/null 2>&1").c_str());
    bool pass = WIFEXITED(rcA) && WEXITSTATUS(rcA) == 0 && WIFEXITED(rcB) &&
                WEXITSTATUS(rcB) == 0;
    for (const char* name : {"trajectory.csv", "fig1_state.csv", "fig3_objective.csv"}) {
        const std::string a = slurp(fs::path("acc_det_a") / name);
        const std::string b = slurp(fs::path("acc_det_b") / name);
        pass = pass && !a.empty() && a == b;
    }
    report("reproducible command-line runs", pass);
}
