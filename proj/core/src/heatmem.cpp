#include "hyperstab/heatmem.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <stdexcept>

namespace hyperstab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLogFloor = -14.0;
} // namespace

Eigen::VectorXd HeatMemoryExperiment::resolvedV0() const
{
    if (v0.size() > 0) {
        if (v0.size() != geometry.N)
            throw std::invalid_argument("HeatMemoryExperiment: v0 length must equal N");
        return v0;
    }
    Eigen::VectorXd v(geometry.N);
    const double h = geometry.h();
    for (int j = 0; j < geometry.N; ++j) v(j) = std::sin(kPi * (j + 1) * h);
    return v;
}

Eigen::VectorXd HeatMemoryExperiment::resolvedW0() const
{
    if (w0.size() > 0) {
        if (w0.size() != geometry.N)
            throw std::invalid_argument("HeatMemoryExperiment: w0 length must equal N");
        return w0;
    }
    return Eigen::VectorXd::Zero(geometry.N);
}

bool HeatMemoryExperiment::certified() const
{
    return K * std::min(1.0, geometry.epsilon) > 0.5;
}

EvolutionProblem assemble(const HeatMemoryExperiment& exp)
{
    exp.geometry.validate();
    const int N = exp.geometry.N;

    EvolutionProblem problem;
    problem.A = build_memory_operator(exp.geometry);
    problem.B = build_b_epsilon(exp.geometry);
    problem.K = exp.K;
    problem.schedule = PsiSchedule::affine(exp.n);
    problem.disturbance = exp.disturbance;
    problem.horizon = exp.horizon;

    problem.initialState.resize(2 * N);
    problem.initialState.head(N) = exp.resolvedV0();
    problem.initialState.tail(N) = exp.resolvedW0();

    // d(t) enters the v-equation only.
    problem.disturbanceProfile = Eigen::VectorXd::Zero(2 * N);
    problem.disturbanceProfile.head(N).setOnes();
    return problem;
}

EvolutionProblem assemble_control_v_only(const HeatMemoryExperiment& exp)
{
    EvolutionProblem problem = assemble(exp);
    const int N = exp.geometry.N;
    problem.B.matrix.bottomRightCorner(N, N).setZero();
    problem.B.label = "B-v-only";
    problem.B.monotoneCertified = true;  // diag(1, 0) blocks, still monotone
    return problem;
}

ReformulationReport verify_memory_reformulation(const HeatMemoryExperiment& exp,
                                                const Trajectory& traj,
                                                const std::vector<double>& checkTimes)
{
    if (traj.size() < 2)
        throw std::invalid_argument("verify_memory_reformulation: trajectory too short");
    const int N = exp.geometry.N;
    if (traj.states.front().size() != 2 * N)
        throw std::invalid_argument("verify_memory_reformulation: state dimension mismatch");

    double maxDt = 0.0;
    for (std::size_t k = 1; k < traj.size(); ++k)
        maxDt = std::max(maxDt, traj.times[k] - traj.times[k - 1]);
    if (maxDt > 1.0 / 50.0)
        throw std::invalid_argument(
            "verify_memory_reformulation: insufficient snapshot density "
            "(need >= 50 snapshots per unit time)");

    const double beta = exp.geometry.beta;
    const double etaMem = exp.geometry.etaMem;
    const Eigen::VectorXd w0 = exp.resolvedW0();

    ReformulationReport report;
    report.pass = true;
    for (double tCheck : checkTimes) {
        // Nearest snapshot at or before the requested time.
        auto it = std::upper_bound(traj.times.begin(), traj.times.end(), tCheck);
        std::size_t k = it == traj.times.begin()
                            ? 0
                            : static_cast<std::size_t>(it - traj.times.begin()) - 1;
        const double tk = traj.times[k];

        // Exponential-kernel integral over the stored v-history (trapezoid,
        // nonuniform grid).
        Eigen::VectorXd kernelIntegral = Eigen::VectorXd::Zero(N);
        for (std::size_t j = 1; j <= k; ++j) {
            const double dt = traj.times[j] - traj.times[j - 1];
            const Eigen::VectorXd f0 =
                std::exp(-beta * (tk - traj.times[j - 1])) * traj.states[j - 1].head(N);
            const Eigen::VectorXd f1 =
                std::exp(-beta * (tk - traj.times[j])) * traj.states[j].head(N);
            kernelIntegral += 0.5 * dt * (f0 + f1);
        }
        const Eigen::VectorXd wRec = std::exp(-beta * tk) * w0 + etaMem * kernelIntegral;
        const Eigen::VectorXd wInt = traj.states[k].tail(N);

        ReformulationSample sample;
        sample.requestedTime = tCheck;
        sample.snapshotTime = tk;
        const double scale = std::max(wInt.norm(), 1e-12);
        sample.discrepancy = (wRec - wInt).norm() / scale;
        report.maxDiscrepancy = std::max(report.maxDiscrepancy, sample.discrepancy);
        if (sample.discrepancy > 1e-2) report.pass = false;
        report.samples.push_back(sample);
    }
    return report;
}

double v_block_norm(const Trajectory& traj, std::size_t k, int N, double h)
{
    return std::sqrt(h * traj.states[k].head(N).squaredNorm());
}

double v_block_log_norm_at(const Trajectory& traj, double t, int N, double h)
{
    auto logNorm = [&](std::size_t k) {
        const double norm = v_block_norm(traj, k, N, h);
        return std::max(kLogFloor, std::log10(std::max(norm, 1e-300)));
    };
    if (t <= traj.times.front()) return logNorm(0);
    if (t >= traj.times.back()) return logNorm(traj.size() - 1);
    auto it = std::upper_bound(traj.times.begin(), traj.times.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - traj.times.begin());
    const std::size_t lo = hi - 1;
    const double span = traj.times[hi] - traj.times[lo];
    const double weight = span > 0.0 ? (t - traj.times[lo]) / span : 0.0;
    return (1.0 - weight) * logNorm(lo) + weight * logNorm(hi);
}

SweepReport run_n_sweep(const HeatMemoryExperiment& base, const std::vector<int>& nValues,
                        const SimOptions& options, const std::vector<double>& comparisonTimes)
{
    if (nValues.empty()) throw std::invalid_argument("run_n_sweep: nValues must be nonempty");
    for (int n : nValues)
        if (n < 1) throw std::invalid_argument("run_n_sweep: every n must be >= 1");

    SweepReport report;
    report.nValues = nValues;
    if (comparisonTimes.empty()) {
        // Default grid on [0.5, T], where the gain separation is established.
        const int count = 26;
        for (int i = 0; i < count; ++i)
            report.comparisonTimes.push_back(0.5 + (base.horizon - 0.5) * i / (count - 1));
    } else {
        report.comparisonTimes = comparisonTimes;
    }

    // Member simulations are independent; run them concurrently.
    std::vector<std::future<Trajectory>> runs;
    runs.reserve(nValues.size());
    for (int n : nValues) {
        runs.push_back(std::async(std::launch::async, [&, n]() {
            HeatMemoryExperiment exp = base;
            exp.n = n;
            return simulate(assemble(exp), options);
        }));
    }

    const int N = base.geometry.N;
    const double h = base.geometry.h();
    for (auto& run : runs) {
        const Trajectory traj = run.get();
        std::vector<double> curve;
        curve.reserve(report.comparisonTimes.size());
        for (double t : report.comparisonTimes)
            curve.push_back(v_block_log_norm_at(traj, t, N, h));
        report.logNorms.push_back(std::move(curve));
    }

    report.orderingViolations = 0;
    for (std::size_t k = 0; k < report.comparisonTimes.size(); ++k)
        for (std::size_t i = 0; i + 1 < nValues.size(); ++i)
            if (report.logNorms[i + 1][k] > report.logNorms[i][k] + 1e-9)
                ++report.orderingViolations;
    report.ordered = report.orderingViolations == 0;
    return report;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file " + path.string());
    return out;
}

} // namespace

void emit_figures_data(const HeatMemoryExperiment& exp, const Trajectory& traj,
                       const std::string& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const int N = exp.geometry.N;
    const double h = exp.geometry.h();
    const PsiSchedule schedule = PsiSchedule::affine(exp.n);

    // Time slices for the surface data, capped to keep files plottable.
    const std::size_t maxSlices = 201;
    const std::size_t stride = std::max<std::size_t>(1, (traj.size() + maxSlices - 1) / maxSlices);

    char buf[128];
    {
        auto fig1 = open_output(fs::path(dir) / "fig1_state.csv");
        auto fig2 = open_output(fs::path(dir) / "fig2_control.csv");
        fig1 << "t,x,v\n";
        fig2 << "t,x,u\n";
        for (std::size_t k = 0; k < traj.size(); k += stride) {
            const double t = traj.times[k];
            const double gain = exp.K * schedule.gain(t);
            for (int j = 0; j < N; ++j) {
                const double x = (j + 1) * h;
                const double v = traj.states[k](j);
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", t, x, v);
                fig1 << buf;
                std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", t, x, -gain * v);
                fig2 << buf;
            }
        }
    }
    {
        auto fig3 = open_output(fs::path(dir) / "fig3_objective.csv");
        fig3 << "t,log10_v_norm\n";
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const double norm = v_block_norm(traj, k, N, h);
            const double logNorm =
                std::max(kLogFloor, std::log10(std::max(norm, 1e-300)));
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", traj.times[k], logNorm);
            fig3 << buf;
        }
    }
    {
        auto gp = open_output(fs::path(dir) / "plots.gp");
        gp << "# gnuplot script for the heat-with-memory run\n"
              "set datafile separator ','\n"
              "set terminal pngcairo size 900,600\n"
              "\n"
              "set output 'fig1_state.png'\n"
              "set xlabel 't'; set ylabel 'x'; set title 'Distributed state v(t,x)'\n"
              "set view map\n"
              "splot 'fig1_state.csv' every ::1 using 1:2:3 with points pt 5 ps 0.4 "
              "palette notitle\n"
              "\n"
              "set output 'fig2_control.png'\n"
              "set title 'Control u(t,x)'\n"
              "splot 'fig2_control.csv' every ::1 using 1:2:3 with points pt 5 ps 0.4 "
              "palette notitle\n"
              "\n"
              "unset view\n"
              "set output 'fig3_objective.png'\n"
              "set xlabel 't'; set ylabel 'log10 ||v(t,.)||_2'\n"
              "set title 'Objective'\n"
              "plot 'fig3_objective.csv' every ::1 using 1:2 with lines notitle\n";
    }
}

void write_state_snapshots(const HeatMemoryExperiment& exp, const Trajectory& traj,
                           const std::string& dir, std::size_t stride)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    if (stride == 0) stride = 1;
    const int N = exp.geometry.N;
    const double h = exp.geometry.h();
    char buf[128];
    for (std::size_t k = 0; k < traj.size(); k += stride) {
        std::snprintf(buf, sizeof(buf), "state_%06zu.csv", k);
        auto out = open_output(fs::path(dir) / buf);
        out << "x,v,w\n";
        for (int j = 0; j < N; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", (j + 1) * h,
                          traj.states[k](j), traj.states[k](N + j));
            out << buf;
        }
    }
}

namespace {

DisturbanceSpec disturbance_from_json(const nlohmann::json& j)
{
    static const std::vector<std::string> validKeys = {
        "kind", "amplitude", "angular_frequency", "phase", "constant", "seed", "pattern"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find(validKeys.begin(), validKeys.end(), it.key()) == validKeys.end())
            throw std::invalid_argument("unknown disturbance key '" + it.key() +
                                        "'; valid keys: kind, amplitude, angular_frequency, "
                                        "phase, constant, seed, pattern");
    }
    DisturbanceSpec spec;
    const std::string kind = j.value("kind", "zero");
    if (kind == "zero") spec.kind = DisturbanceKind::Zero;
    else if (kind == "constant") spec.kind = DisturbanceKind::Constant;
    else if (kind == "sinusoid") spec.kind = DisturbanceKind::Sinusoid;
    else if (kind == "bounded_random") spec.kind = DisturbanceKind::BoundedRandom;
    else throw std::invalid_argument("unknown disturbance kind '" + kind +
                                     "'; valid: zero, constant, sinusoid, bounded_random");
    spec.amplitude = j.value("amplitude", 0.0);
    spec.angularFrequency = j.value("angular_frequency", 1.0);
    spec.phase = j.value("phase", 0.0);
    spec.constant = j.value("constant", 0.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    const std::string pattern = j.value("pattern", "uniform");
    if (pattern == "uniform") spec.pattern = DisturbancePattern::UniformAcrossDomain;
    else if (pattern == "first_component") spec.pattern = DisturbancePattern::FirstComponentOnly;
    else throw std::invalid_argument("unknown disturbance pattern '" + pattern +
                                     "'; valid: uniform, first_component");
    return spec;
}

nlohmann::json disturbance_to_json(const DisturbanceSpec& spec)
{
    std::string kind;
    switch (spec.kind) {
        case DisturbanceKind::Zero:          kind = "zero"; break;
        case DisturbanceKind::Constant:      kind = "constant"; break;
        case DisturbanceKind::Sinusoid:      kind = "sinusoid"; break;
        case DisturbanceKind::BoundedRandom: kind = "bounded_random"; break;
    }
    return nlohmann::json{
        {"kind", kind},
        {"amplitude", spec.amplitude},
        {"angular_frequency", spec.angularFrequency},
        {"phase", spec.phase},
        {"constant", spec.constant},
        {"seed", spec.seed},
        {"pattern", spec.pattern == DisturbancePattern::UniformAcrossDomain
                        ? "uniform" : "first_component"},
    };
}

} // namespace

HeatMemoryExperiment experiment_from_json(const nlohmann::json& config)
{
    static const std::vector<std::string> validKeys = {
        "N", "beta", "eta_mem", "epsilon", "K", "n", "T", "disturbance", "v0", "w0"};
    for (auto it = config.begin(); it != config.end(); ++it) {
        if (std::find(validKeys.begin(), validKeys.end(), it.key()) == validKeys.end())
            throw std::invalid_argument("unknown config key '" + it.key() +
                                        "'; valid keys: N, beta, eta_mem, epsilon, K, n, T, "
                                        "disturbance, v0, w0");
    }
    HeatMemoryExperiment exp;
    exp.geometry.N = config.value("N", 63);
    exp.geometry.beta = config.value("beta", 1.0);
    exp.geometry.etaMem = config.value("eta_mem", 1.0);
    exp.geometry.epsilon = config.value("epsilon", 1.0);
    exp.K = config.value("K", 2.0);
    exp.n = config.value("n", 1);
    exp.horizon = config.value("T", 3.0);
    if (config.contains("disturbance"))
        exp.disturbance = disturbance_from_json(config.at("disturbance"));
    if (config.contains("v0")) {
        const auto& arr = config.at("v0");
        exp.v0.resize(static_cast<Eigen::Index>(arr.size()));
        for (std::size_t i = 0; i < arr.size(); ++i) exp.v0(i) = arr[i].get<double>();
    }
    if (config.contains("w0")) {
        const auto& arr = config.at("w0");
        exp.w0.resize(static_cast<Eigen::Index>(arr.size()));
        for (std::size_t i = 0; i < arr.size(); ++i) exp.w0(i) = arr[i].get<double>();
    }
    exp.geometry.validate();
    if (exp.n < 1) throw std::invalid_argument("config: n must be >= 1");
    if (exp.K <= 0.0) throw std::invalid_argument("config: K must be positive");
    if (exp.horizon <= 0.0) throw std::invalid_argument("config: T must be positive");
    return exp;
}

nlohmann::json experiment_to_json(const HeatMemoryExperiment& exp)
{
    nlohmann::json j{
        {"N", exp.geometry.N},
        {"beta", exp.geometry.beta},
        {"eta_mem", exp.geometry.etaMem},
        {"epsilon", exp.geometry.epsilon},
        {"K", exp.K},
        {"n", exp.n},
        {"T", exp.horizon},
        {"disturbance", disturbance_to_json(exp.disturbance)},
    };
    if (exp.v0.size() > 0)
        j["v0"] = std::vector<double>(exp.v0.data(), exp.v0.data() + exp.v0.size());
    if (exp.w0.size() > 0)
        j["w0"] = std::vector<double>(exp.w0.data(), exp.w0.data() + exp.w0.size());
    return j;
}

} // namespace hyperstab
