#include "hyperstab/solver.hpp"

#include "hyperstab/heatmem.hpp"

#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <fstream>
#include <random>
#include <string>

using namespace hyperstab;

namespace {

// A = 0, B = 1 in one dimension: dx/dt = -K psi(t)^n x + d(t).
EvolutionProblem scalar_problem(double K, int n, double x0, double horizon)
{
    EvolutionProblem problem;
    problem.A.matrix = Eigen::MatrixXd::Zero(1, 1);
    problem.A.innerProduct = InnerProduct::unweighted(1);
    problem.A.label = "zero";
    problem.A.monotoneCertified = true;
    problem.B = DiscreteOperator::identity(1);
    problem.K = K;
    problem.schedule = PsiSchedule::affine(n);
    problem.initialState = Eigen::VectorXd::Constant(1, x0);
    problem.horizon = horizon;
    return problem;
}

EvolutionProblem heat_problem(int N, double K, double horizon)
{
    HeatMemoryExperiment exp;
    exp.geometry.N = N;
    exp.K = K;
    exp.horizon = horizon;
    return assemble(exp);
}

std::size_t nearest_index(const std::vector<double>& times, double t)
{
    std::size_t best = 0;
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - t) < std::abs(times[best] - t)) best = k;
    return best;
}

} // namespace

TEST_CASE("disturbance spec sup norms and values")
{
    DisturbanceSpec d;
    CHECK(d.supNorm() == 0.0);
    CHECK(d.valueAt(3.0) == 0.0);

    d.kind = DisturbanceKind::Constant;
    d.constant = -0.3;
    CHECK(d.supNorm() == doctest::Approx(0.3));

    d.kind = DisturbanceKind::Sinusoid;
    d.amplitude = 0.1;
    d.angularFrequency = 1.0;
    d.phase = 0.0;
    CHECK(d.supNorm() == doctest::Approx(0.1));
    CHECK(d.valueAt(0.5) == doctest::Approx(0.1 * std::sin(0.5)));

    d.kind = DisturbanceKind::BoundedRandom;
    CHECK(d.supNorm() == doctest::Approx(0.1));
    CHECK_THROWS_AS(d.valueAt(1.0), std::logic_error);
}

TEST_CASE("backward Euler step basics")
{
    auto problem = scalar_problem(1.0, 1, 1.0, 1.0);

    SUBCASE("zero state stays zero")
    {
        const Eigen::VectorXd next =
            step_backward_euler(problem, Eigen::VectorXd::Zero(1), 0.0, 0.1);
        CHECK(next.norm() == 0.0);
    }
    SUBCASE("scalar resolvent closed form")
    {
        const Eigen::VectorXd next =
            step_backward_euler(problem, Eigen::VectorXd::Constant(1, 1.0), 0.0, 0.1);
        CHECK(next(0) == doctest::Approx(1.0 / 1.11).epsilon(1e-12));
    }
    SUBCASE("dt must be positive")
    {
        CHECK_THROWS_AS(step_backward_euler(problem, problem.initialState, 0.0, 0.0),
                        std::invalid_argument);
    }
}

TEST_CASE("backward Euler step is a weighted contraction for monotone setups")
{
    const auto problem = heat_problem(6, 2.0, 1.0);
    const auto& ip = problem.A.innerProduct;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> tDist(0.0, 5.0);
    std::uniform_real_distribution<double> dtDist(1e-4, 0.3);
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd X(12);
        for (int i = 0; i < 12; ++i) X(i) = gauss(rng);
        const Eigen::VectorXd next = step_backward_euler(problem, X, tDist(rng), dtDist(rng));
        CHECK(ip.norm(next) <= ip.norm(X) * (1.0 + 1e-12));
    }
}

TEST_CASE("simulate: zero initial state stays zero")
{
    auto problem = scalar_problem(1.0, 1, 0.0, 1.0);
    const auto traj = simulate(problem);
    for (const auto& state : traj.states) CHECK(state.norm() == 0.0);
    CHECK(traj.certified);
}

TEST_CASE("simulate matches the scalar closed form")
{
    auto problem = scalar_problem(1.0, 1, 1.0, 2.0);
    SimOptions options;
    options.dtMax = 1e-4;
    const auto traj = simulate(problem, options);
    for (double t : {0.5, 1.0, 2.0}) {
        const std::size_t k = nearest_index(traj.times, t);
        const double exact = std::exp(-traj.times[k] * (traj.times[k] + 2.0) / 2.0);
        CHECK(traj.states[k](0) == doctest::Approx(exact).epsilon(1e-3));
    }
    // Lyapunov samples are the recomputable weighted square norms.
    for (std::size_t k = 0; k < traj.size(); k += 500)
        CHECK(traj.lyapunov[k] ==
              doctest::Approx(problem.A.innerProduct.squaredNorm(traj.states[k])));
}

TEST_CASE("simulate: heat-memory norm is nonincreasing without disturbance")
{
    const auto problem = heat_problem(12, 2.0, 1.0);
    const auto traj = simulate(problem);
    for (std::size_t k = 1; k < traj.size(); ++k)
        CHECK(traj.lyapunov[k] <= traj.lyapunov[k - 1] * (1.0 + 1e-12));
}

TEST_CASE("simulate rejects and tags uncertified gains")
{
    auto problem = scalar_problem(0.4, 1, 1.0, 0.5);
    CHECK_THROWS_AS(simulate(problem), std::invalid_argument);
    SimOptions options;
    options.allowUncertified = true;
    const auto traj = simulate(problem, options);
    CHECK_FALSE(traj.certified);
}

TEST_CASE("simulate dt policy shrinks with the gain")
{
    auto problem = scalar_problem(1.0, 3, 1.0, 2.0);
    SimOptions options;
    options.dtMax = 1e-2;
    const auto traj = simulate(problem, options);
    // Near t = 2 the policy is 0.1 / psi^3 = 0.1 / 27 < dtMax.
    const std::size_t last = traj.size() - 1;
    const double dtLate = traj.times[last] - traj.times[last - 1];
    CHECK(dtLate <= 0.1 / 26.0);
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("gain condition")
{
    SUBCASE("B = I, K = 1")
    {
        const auto gc = gain_condition(scalar_problem(1.0, 1, 1.0, 1.0));
        CHECK(gc.satisfied);
        CHECK(gc.eta == doctest::Approx(1.0));
    }
    SUBCASE("boundary K = 1/2 is not satisfied")
    {
        const auto gc = gain_condition(scalar_problem(0.5, 1, 1.0, 1.0));
        CHECK_FALSE(gc.satisfied);
        CHECK(gc.eta == doctest::Approx(0.0));
    }
    SUBCASE("coercive B_eps with eps = 0.25, K = 3")
    {
        HeatMemoryExperiment exp;
        exp.geometry.N = 8;
        exp.geometry.epsilon = 0.25;
        exp.K = 3.0;
        const auto gc = gain_condition(assemble(exp));
        CHECK(gc.beta == doctest::Approx(0.25).epsilon(1e-10));
        CHECK(gc.eta == doctest::Approx(0.5).epsilon(1e-9));
        CHECK(gc.satisfied);
    }
}

TEST_CASE("picard oracle: open loop reduces to the semigroup")
{
    HeatMemoryExperiment exp;
    exp.geometry.N = 3;
    exp.K = 1.0;
    auto problem = assemble(exp);
    problem.K = 0.0;
    const double t = 0.7;
    const Eigen::VectorXd expected = (-t * problem.A.matrix).exp() * problem.initialState;
    const Eigen::VectorXd got = picard_mild_solution(problem, t, 20, 256);
    CHECK((got - expected).norm() <= 1e-7 * expected.norm());
}

TEST_CASE("picard oracle: scalar closed form")
{
    auto problem = scalar_problem(1.0, 1, 1.0, 2.0);
    const Eigen::VectorXd got = picard_mild_solution(problem, 1.0, 60, 512);
    CHECK(got(0) == doctest::Approx(std::exp(-1.5)).epsilon(1e-6));
    CHECK(picard_last_contraction_ratio() < 1.0);
}

TEST_CASE("picard oracle cross-checks the integrator")
{
    const auto problem = heat_problem(3, 2.0, 0.5);
    const Eigen::VectorXd oracle = picard_mild_solution(problem, 0.5, 60, 512);
    SimOptions options;
    options.dtMax = 1e-4;
    const auto traj = simulate(problem, options);
    const auto& ip = problem.A.innerProduct;
    CHECK(ip.norm(traj.states.back() - oracle) <= 2e-3 * ip.norm(oracle));
}

TEST_CASE("picard oracle rejects unusable inputs")
{
    auto problem = scalar_problem(1.0, 1, 1.0, 1.0);
    problem.disturbance.kind = DisturbanceKind::BoundedRandom;
    problem.disturbance.amplitude = 0.1;
    CHECK_THROWS_AS(picard_mild_solution(problem, 1.0), std::invalid_argument);

    EvolutionProblem big;
    big.A.matrix = Eigen::MatrixXd::Zero(65, 65);
    big.A.innerProduct = InnerProduct::unweighted(65);
    big.B = DiscreteOperator::identity(65);
    big.initialState = Eigen::VectorXd::Ones(65);
    big.schedule = PsiSchedule::affine();
    CHECK_THROWS_AS(picard_mild_solution(big, 1.0), std::invalid_argument);
}

TEST_CASE("simulation is deterministic including the random disturbance")
{
    auto problem = heat_problem(8, 2.0, 0.5);
    problem.disturbance.kind = DisturbanceKind::BoundedRandom;
    problem.disturbance.amplitude = 0.2;
    problem.disturbance.seed = 1234;
    SimOptions options;
    options.dtMax = 1e-3;
    const auto a = simulate(problem, options);
    const auto b = simulate(problem, options);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.times[k] == b.times[k]);
        CHECK((a.states[k].array() == b.states[k].array()).all());
    }
}

TEST_CASE("crank-nicolson runs and is second-order accurate on the scalar problem")
{
    auto problem = scalar_problem(1.0, 1, 1.0, 1.0);
    SimOptions options;
    options.scheme = Scheme::CrankNicolson;
    options.dtMax = 1e-3;
    const auto traj = simulate(problem, options);
    CHECK(traj.schemeName == "crank-nicolson");
    const double exact = std::exp(-1.0 * 3.0 / 2.0);
    CHECK(traj.states.back()(0) == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("trajectory CSV export")
{
    auto problem = scalar_problem(1.0, 1, 1.0, 0.1);
    SimOptions options;
    options.dtMax = 1e-2;
    const auto traj = simulate(problem, options);
    const std::string path = "test_trajectory_out.csv";
    write_trajectory_csv(traj, problem.A.innerProduct, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,normX,V,controlMag");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == traj.size());
}
