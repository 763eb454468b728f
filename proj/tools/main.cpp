#include "hyperstab/certify.hpp"
#include "hyperstab/heatmem.hpp"
#include "hyperstab/solver.hpp"
#include "hyperstab/timescale.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAuditFailure = 1;
constexpr int kExitUsageError = 2;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CommonOptions {
    std::string configPath;
    std::string outDir = "out";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<double> dtMax;
    std::string scheme = "be";
};

void add_common_options(CLI::App* cmd, CommonOptions& opts)
{
    cmd->add_option("--config", opts.configPath, "JSON config file");
    cmd->add_option("--out", opts.outDir, "output directory")->capture_default_str();
    cmd->add_option("--set", opts.overrides, "config override key=value (repeatable)");
    cmd->add_option("--seed", opts.seed, "disturbance seed override");
    cmd->add_option("--dt-max", opts.dtMax, "maximum integrator step");
    cmd->add_option("--scheme", opts.scheme, "integration scheme: be | cn")
        ->check(CLI::IsMember({"be", "cn"}));
}

json load_config(const std::string& path)
{
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    json config;
    try {
        in >> config;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!config.is_object()) throw ConfigError("config file " + path + " must hold a JSON object");
    return config;
}

json parse_override_value(const std::string& raw)
{
    if (raw == "true") return true;
    if (raw == "false") return false;
    try {
        std::size_t pos = 0;
        const long long asInt = std::stoll(raw, &pos);
        if (pos == raw.size()) return asInt;
    } catch (...) {}
    try {
        std::size_t pos = 0;
        const double asDouble = std::stod(raw, &pos);
        if (pos == raw.size()) return asDouble;
    } catch (...) {}
    return raw;
}

// Applies flat dotted-key overrides ("disturbance.amplitude=0.1") on top of
// the config object. Key validity is enforced by the config parser.
void apply_overrides(json& config, const std::vector<std::string>& overrides)
{
    for (const std::string& entry : overrides) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("override '" + entry + "' is not of the form key=value");
        std::string key = entry.substr(0, eq);
        const json value = parse_override_value(entry.substr(eq + 1));

        json* node = &config;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot - start);
            if (part.empty()) throw ConfigError("override '" + entry + "' has an empty key part");
            if (dot == std::string::npos) {
                (*node)[part] = value;
                break;
            }
            node = &(*node)[part];
            if (!node->is_object() && !node->is_null())
                throw ConfigError("override '" + entry + "' descends into a non-object value");
            start = dot + 1;
        }
    }
}

std::uint64_t fnv1a64(const std::string& data)
{
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

hyperstab::SimOptions sim_options(const CommonOptions& opts, double defaultDtMax = -1.0)
{
    hyperstab::SimOptions so;
    so.scheme = opts.scheme == "cn" ? hyperstab::Scheme::CrankNicolson
                                    : hyperstab::Scheme::BackwardEuler;
    so.dtMax = opts.dtMax.value_or(defaultDtMax);
    so.allowUncertified = true;  // uncertified runs proceed but are tagged
    return so;
}

void write_manifest(const CommonOptions& opts, const std::string& command,
                    const json& resolvedConfig, json extra = json::object())
{
    json manifest{
        {"command", command},
        {"config", resolvedConfig},
        {"scheme", opts.scheme},
        {"out", opts.outDir},
    };
    if (opts.dtMax) manifest["dt_max"] = *opts.dtMax;
    if (opts.seed) manifest["seed"] = *opts.seed;
    for (auto it = extra.begin(); it != extra.end(); ++it) manifest[it.key()] = it.value();
    char hashBuf[32];
    std::snprintf(hashBuf, sizeof(hashBuf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(resolvedConfig.dump())));
    manifest["config_hash"] = hashBuf;

    std::ofstream out(fs::path(opts.outDir) / "manifest.json");
    if (!out) throw std::runtime_error("cannot write manifest in " + opts.outDir);
    out << manifest.dump(2) << '\n';
}

hyperstab::HeatMemoryExperiment resolve_experiment(const CommonOptions& opts, json& configOut)
{
    json config = load_config(opts.configPath);
    apply_overrides(config, opts.overrides);
    hyperstab::HeatMemoryExperiment exp;
    try {
        exp = hyperstab::experiment_from_json(config);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (opts.seed) exp.disturbance.seed = *opts.seed;
    configOut = hyperstab::experiment_to_json(exp);
    return exp;
}

// --- subcommand bodies ------------------------------------------------------

int run_lemma_check(const CommonOptions& opts)
{
    json config = load_config(opts.configPath);
    apply_overrides(config, opts.overrides);
    for (auto it = config.begin(); it != config.end(); ++it) {
        const std::string& key = it.key();
        if (key != "pairs" && key != "tau_min" && key != "tau_max" && key != "tau_count")
            throw ConfigError("unknown lemma-check config key '" + key +
                              "'; valid keys: pairs, tau_min, tau_max, tau_count");
    }

    std::vector<std::pair<double, double>> pairs = {{1.5, 1.0}, {2.0, 1.0}, {2.0, 2.0}, {5.0, 1.0}};
    if (config.contains("pairs")) {
        pairs.clear();
        for (const auto& p : config.at("pairs")) pairs.emplace_back(p.at(0), p.at(1));
    }
    const double tauMin = config.value("tau_min", 1e-2);
    const double tauMax = config.value("tau_max", 1e3);
    const int tauCount = config.value("tau_count", 40);

    std::vector<double> grid;
    for (int i = 0; i < tauCount; ++i)
        grid.push_back(tauMin * std::pow(tauMax / tauMin, double(i) / (tauCount - 1)));

    fs::create_directories(opts.outDir);
    std::ofstream csv(fs::path(opts.outDir) / "margins.csv");
    csv << "a,alpha,tau,lhs,rhs,margin,pass\n";
    bool allPass = true;
    char buf[192];
    for (const auto& [a, alpha] : pairs) {
        hyperstab::Lemma1Report report;
        try {
            report = hyperstab::lemma1_check(a, alpha, grid);
        } catch (const std::domain_error& e) {
            throw ConfigError(std::string("timescale.lemma1_check: ") + e.what());
        }
        allPass = allPass && report.allPass;
        for (const auto& s : report.samples) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", a,
                          alpha, s.tau, s.lhs, s.rhs, s.margin, s.pass ? 1 : 0);
            csv << buf;
        }
        std::printf("lemma-check (a=%g, alpha=%g): r=%.6f %s\n", a, alpha, report.constant,
                    report.allPass ? "pass" : "FAIL");
    }
    write_manifest(opts, "lemma-check",
                   json{{"pairs", pairs}, {"tau_min", tauMin}, {"tau_max", tauMax},
                        {"tau_count", tauCount}});
    return allPass ? kExitOk : kExitAuditFailure;
}

int run_simulate(const CommonOptions& opts)
{
    json resolved;
    const auto exp = resolve_experiment(opts, resolved);
    const auto problem = hyperstab::assemble(exp);
    const auto traj = hyperstab::simulate(problem, sim_options(opts));

    fs::create_directories(opts.outDir);
    hyperstab::write_trajectory_csv(traj, problem.A.innerProduct,
                                    (fs::path(opts.outDir) / "trajectory.csv").string());
    write_manifest(opts, "simulate", resolved,
                   json{{"certified", traj.certified}, {"steps", traj.stepCount}});
    std::printf("simulate: %zu steps, certified=%s\n", traj.stepCount,
                traj.certified ? "yes" : "no");
    return kExitOk;
}

int run_heat_memory(const CommonOptions& opts)
{
    json resolved;
    const auto exp = resolve_experiment(opts, resolved);
    const auto problem = hyperstab::assemble(exp);
    const auto traj = hyperstab::simulate(problem, sim_options(opts));

    fs::create_directories(opts.outDir);
    hyperstab::write_trajectory_csv(traj, problem.A.innerProduct,
                                    (fs::path(opts.outDir) / "trajectory.csv").string());
    hyperstab::emit_figures_data(exp, traj, opts.outDir);

    json summary;
    bool auditPass = true;
    if (traj.certified) {
        const auto cert = hyperstab::audit_trajectory(traj, problem);
        summary["certificate"] = hyperstab::certificate_to_json(cert);
        auditPass = cert.pass;
    } else {
        summary["certificate"] = nullptr;
    }
    try {
        summary["rate_fit"] = hyperstab::rate_fit_to_json(hyperstab::fit_rate(traj));
    } catch (const std::runtime_error&) {
        summary["rate_fit"] = nullptr;  // e.g. zero trajectory at the norm floor
    }
    summary["certified"] = traj.certified;
    summary["steps"] = traj.stepCount;

    std::ofstream out(fs::path(opts.outDir) / "summary.json");
    out << summary.dump(2) << '\n';
    write_manifest(opts, "heat-memory", resolved, json{{"certified", traj.certified}});
    std::printf("heat-memory: %zu steps, certified=%s, audit=%s\n", traj.stepCount,
                traj.certified ? "yes" : "no",
                !traj.certified ? "skipped" : (auditPass ? "pass" : "FAIL"));
    return auditPass ? kExitOk : kExitAuditFailure;
}

int run_sweep_n(const CommonOptions& opts, const std::string& nValuesRaw)
{
    json resolved;
    const auto exp = resolve_experiment(opts, resolved);

    std::vector<int> nValues;
    std::size_t start = 0;
    while (start <= nValuesRaw.size()) {
        const auto comma = nValuesRaw.find(',', start);
        const std::string tok = nValuesRaw.substr(start, comma - start);
        if (!tok.empty()) {
            try {
                nValues.push_back(std::stoi(tok));
            } catch (...) {
                throw ConfigError("invalid n value '" + tok + "' in --n-values");
            }
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (nValues.empty()) throw ConfigError("--n-values produced an empty list");

    hyperstab::SweepReport report;
    try {
        report = hyperstab::run_n_sweep(exp, nValues, sim_options(opts));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("heatmem.run_n_sweep: ") + e.what());
    }

    fs::create_directories(opts.outDir);
    std::ofstream csv(fs::path(opts.outDir) / "sweep.csv");
    csv << "n,t,log10_v_norm\n";
    char buf[128];
    for (std::size_t i = 0; i < report.nValues.size(); ++i)
        for (std::size_t k = 0; k < report.comparisonTimes.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", report.nValues[i],
                          report.comparisonTimes[k], report.logNorms[i][k]);
            csv << buf;
        }

    std::ofstream out(fs::path(opts.outDir) / "summary.json");
    out << json{{"n_values", report.nValues},
                {"ordering_violations", report.orderingViolations},
                {"ordered", report.ordered}}
               .dump(2)
        << '\n';
    write_manifest(opts, "sweep-n", resolved, json{{"n_values", report.nValues}});
    std::printf("sweep-n: %zu runs, ordering violations=%d\n", report.nValues.size(),
                report.orderingViolations);
    return report.ordered ? kExitOk : kExitAuditFailure;
}

int run_rate_fit(const CommonOptions& opts)
{
    json resolved;
    const auto exp = resolve_experiment(opts, resolved);
    const auto problem = hyperstab::assemble(exp);
    const auto traj = hyperstab::simulate(problem, sim_options(opts));
    const auto fit = hyperstab::fit_rate(traj);

    fs::create_directories(opts.outDir);
    std::ofstream out(fs::path(opts.outDir) / "rate_fit.json");
    out << hyperstab::rate_fit_to_json(fit).dump(2) << '\n';
    write_manifest(opts, "rate-fit", resolved);
    std::printf("rate-fit: a=%.4f b=%.4f rms=%.3g\n", fit.quadCoeff, fit.linCoeff,
                fit.residualRMS);
    return kExitOk;
}

int run_certify(const CommonOptions& opts)
{
    json resolved;
    const auto exp = resolve_experiment(opts, resolved);
    if (!exp.certified())
        throw ConfigError("certify: gain condition K*min(1,epsilon) > 1/2 not satisfied; "
                          "refusing to issue a certificate");

    const auto problem = hyperstab::assemble(exp);
    const auto traj = hyperstab::simulate(problem, sim_options(opts));
    const auto cert = hyperstab::audit_trajectory(traj, problem);

    fs::create_directories(opts.outDir);
    std::ofstream out(fs::path(opts.outDir) / "certificate.json");
    out << hyperstab::certificate_to_json(cert).dump(2) << '\n';
    write_manifest(opts, "certify", resolved, json{{"certified", true}});
    std::printf("certify: eta=%.4f C=%.4f (%s) verdict=%s worst margin=%.3g\n", cert.eta,
                cert.constantC, cert.constantSource.c_str(), cert.pass ? "pass" : "FAIL",
                cert.worstMargin);
    return cert.pass ? kExitOk : kExitAuditFailure;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hyperstab: simulation and certification of hyperexponentially "
                 "stabilized evolution equations"};
    app.require_subcommand(1);

    CommonOptions lemmaOpts, simOpts, heatOpts, sweepOpts, fitOpts, certOpts;
    std::string nValuesRaw = "1,2,3,4,5";

    auto* lemma = app.add_subcommand("lemma-check", "verify the integral inequality on a tau grid");
    add_common_options(lemma, lemmaOpts);
    auto* sim = app.add_subcommand("simulate", "integrate the closed loop, export the trajectory");
    add_common_options(sim, simOpts);
    auto* heat = app.add_subcommand("heat-memory", "full heat-with-memory case study");
    add_common_options(heat, heatOpts);
    auto* sweep = app.add_subcommand("sweep-n", "gain-exponent sweep, ordering report");
    add_common_options(sweep, sweepOpts);
    sweep->add_option("--n-values", nValuesRaw, "comma-separated exponents")
        ->capture_default_str();
    auto* fit = app.add_subcommand("rate-fit", "fit the quadratic decay exponent");
    add_common_options(fit, fitOpts);
    auto* cert = app.add_subcommand("certify", "audit the trajectory against the stability bound");
    add_common_options(cert, certOpts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsageError;
    }

    try {
        if (lemma->parsed()) return run_lemma_check(lemmaOpts);
        if (sim->parsed()) return run_simulate(simOpts);
        if (heat->parsed()) return run_heat_memory(heatOpts);
        if (sweep->parsed()) return run_sweep_n(sweepOpts, nValuesRaw);
        if (fit->parsed()) return run_rate_fit(fitOpts);
        if (cert->parsed()) return run_certify(certOpts);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsageError;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsageError;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAuditFailure;
    }
    return kExitUsageError;
}
