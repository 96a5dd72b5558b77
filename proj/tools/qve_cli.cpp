// Command-line front end: check | solve | density | classify | validate-mc.
// Emits plot-ready CSV/JSON files; all writes go through a temp-file rename
// so failures never leave partial outputs.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qve/analysis.hpp"
#include "qve/ensembles.hpp"
#include "qve/model_io.hpp"
#include "qve/montecarlo.hpp"

namespace {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    const char* env = std::getenv("QVE_LOG");
    if (!env) return LogLevel::Error;
    const std::string value(env);
    if (value == "debug") return LogLevel::Debug;
    if (value == "info") return LogLevel::Info;
    return LogLevel::Error;
}

void log(LogLevel level, const std::string& message) {
    if (level <= log_level()) std::cerr << "qve: " << message << "\n";
}

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string model_source;  // file path or inline JSON
    std::string out_dir = ".";
    double tau_min = 0.0, tau_max = 0.0;  // 0,0 = auto [-kappa-pad, kappa+pad]
    int tau_count = 201;
    std::vector<double> eta_ladder;
    double eta_real = 1e-6;
    double tol = 1e-11;
    int max_iter = 20000;
    double support_threshold = 0.0;
    double cusp_tol = 0.05;
    int workers = int(std::thread::hardware_concurrency());
    int n_mat = 2000;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
};

qve::QveModel load_model(const RunConfig& config) {
    if (config.model_source.empty())
        throw UsageError("missing --model (file path or inline JSON)");
    try {
        if (config.model_source.front() == '{')
            return qve::model_from_json(config.model_source);
        return qve::load_model_file(config.model_source);
    } catch (const qve::Error& e) {
        // A bad model description is a config problem, not a numeric one.
        throw UsageError(e.what());
    }
}

void validate_config(const RunConfig& config) {
    if (config.tau_count < 2) throw UsageError("--tau-count must be at least 2");
    if (config.tau_min > config.tau_max)
        throw UsageError("--tau-min must not exceed --tau-max");
    std::vector<double> etas = config.eta_ladder.empty()
                                   ? qve::default_eta_ladder()
                                   : config.eta_ladder;
    for (std::size_t i = 0; i < etas.size(); ++i) {
        if (etas[i] <= 0.0) throw UsageError("eta ladder must be positive");
        if (i > 0 && etas[i] >= etas[i - 1])
            throw UsageError("eta ladder must be strictly descending");
    }
    if (config.tol <= 0.0) throw UsageError("--tol must be positive");
    if (config.workers < 1) throw UsageError("--workers must be at least 1");
}

std::filesystem::path out_path(const RunConfig& config, const std::string& name) {
    std::filesystem::create_directories(config.out_dir);
    return std::filesystem::path(config.out_dir) / name;
}

// Run `writer` against a temporary file, then atomically move into place.
template <class Writer>
void atomic_write(const std::filesystem::path& path, Writer&& writer) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    writer(tmp.string());
    std::filesystem::rename(tmp, path);
    log(LogLevel::Info, "wrote " + path.string());
}

qve::AnalysisOptions analysis_options(const RunConfig& config) {
    qve::AnalysisOptions opts;
    opts.tau_count = config.tau_count;
    opts.eta_ladder = config.eta_ladder;
    opts.eta_real = config.eta_real;
    opts.cusp_tol = config.cusp_tol;
    opts.support_threshold = config.support_threshold;
    opts.solve.tol = config.tol;
    opts.solve.max_iter = config.max_iter;
    opts.workers = config.workers;
    return opts;
}

std::vector<double> tau_grid(const RunConfig& config, const qve::QveModel& model) {
    double lo = config.tau_min, hi = config.tau_max;
    if (lo == 0.0 && hi == 0.0) {
        hi = model.kappa + 0.25;
        lo = -hi;
    }
    return qve::linspace(lo, hi, config.tau_count);
}

std::vector<double> eta_ladder(const RunConfig& config) {
    return config.eta_ladder.empty() ? qve::default_eta_ladder()
                                     : config.eta_ladder;
}

int cmd_check(const RunConfig& config) {
    const qve::QveModel model = load_model(config);
    const qve::AssumptionReport report = qve::check_assumptions(model);
    nlohmann::json j;
    j["n"] = model.n;
    j["op_norm"] = model.op_norm;
    j["kappa"] = model.kappa;
    if (report.primitivity_k) j["primitivity_k"] = *report.primitivity_k;
    else j["primitivity_k"] = nullptr;
    if (report.diagonal_strip)
        j["diagonal_strip"] = {report.diagonal_strip->first,
                               report.diagonal_strip->second};
    else j["diagonal_strip"] = nullptr;
    j["regularity_value"] = report.regularity_value;
    std::cout << j.dump(2) << "\n";
    atomic_write(out_path(config, "assumptions.json"),
                 [&](const std::string& p) {
                     std::ofstream out(p);
                     out << j.dump(2) << "\n";
                 });
    return 0;
}

int cmd_solve(const RunConfig& config) {
    const qve::QveModel model = load_model(config);
    qve::SolveOptions solve{config.tol, config.max_iter, true};
    qve::SolutionGrid grid = qve::solve_grid(model, tau_grid(config, model),
                                             eta_ladder(config), solve,
                                             config.workers);
    atomic_write(out_path(config, "grid.csv"),
                 [&](const std::string& p) { grid.write_csv(p); });
    return 0;
}

int cmd_density(const RunConfig& config) {
    const qve::QveModel model = load_model(config);
    qve::SolveOptions solve{config.tol, config.max_iter, true};
    qve::SolutionGrid grid = qve::solve_grid(model, tau_grid(config, model),
                                             eta_ladder(config), solve,
                                             config.workers);
    qve::DensityProfile profile = qve::extract_density(grid);
    std::vector<qve::Interval> support =
        qve::detect_support(profile, config.support_threshold);
    qve::Moments mom = qve::moments(profile);
    log(LogLevel::Info,
        "moment check: max |mu1 + a| = " +
            std::to_string((mom.mu1 + model.a).cwiseAbs().maxCoeff()));
    atomic_write(out_path(config, "density.csv"),
                 [&](const std::string& p) { profile.write_csv(p); });
    atomic_write(out_path(config, "support.json"), [&](const std::string& p) {
        qve::write_support_json(support, p);
    });
    return 0;
}

int cmd_classify(const RunConfig& config) {
    const qve::QveModel model = load_model(config);
    qve::AnalysisOptions opts = analysis_options(config);
    qve::SupportAnalysis analysis = qve::classify_support(model, opts);
    atomic_write(out_path(config, "density.csv"), [&](const std::string& p) {
        analysis.profile.write_csv(p);
    });
    atomic_write(out_path(config, "support.json"), [&](const std::string& p) {
        qve::write_support_json(analysis.support, p);
    });
    atomic_write(out_path(config, "singularities.json"),
                 [&](const std::string& p) {
                     qve::write_singularity_json(analysis.reports, p);
                 });
    return 0;
}

int cmd_validate_mc(const RunConfig& config) {
    if (config.seeds.empty()) throw UsageError("--seeds must not be empty");
    if (config.n_mat < 2) throw UsageError("--n-mat must be at least 2");
    const qve::QveModel model = load_model(config);
    if (config.n_mat < model.n)
        throw UsageError("--n-mat must be at least the model size");
    qve::SolveOptions solve{config.tol, config.max_iter, true};
    qve::SolutionGrid grid = qve::solve_grid(model, tau_grid(config, model),
                                             eta_ladder(config), solve,
                                             config.workers);
    qve::DensityProfile profile = qve::extract_density(grid);

    std::vector<qve::SpectrumSample> samples;
    for (std::uint64_t seed : config.seeds) {
        log(LogLevel::Debug, "sampling seed " + std::to_string(seed));
        samples.push_back(qve::sample_spectrum(model, config.n_mat, seed));
    }
    qve::EmpiricalDistance dist = qve::empirical_distance(samples, profile);
    nlohmann::json j;
    j["ks"] = dist.ks;
    j["l1"] = dist.l1;
    j["n_mat"] = config.n_mat;
    j["seeds"] = config.seeds;
    std::cout << j.dump(2) << "\n";
    atomic_write(out_path(config, "mc_report.json"), [&](const std::string& p) {
        std::ofstream out(p);
        out << j.dump(2) << "\n";
    });
    atomic_write(out_path(config, "eigenvalues.csv"), [&](const std::string& p) {
        qve::write_eigenvalue_csv(samples, p);
    });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vector self-consistent equation laboratory: solve "
                 "-1/m = z + a + Sm, extract densities, classify edges and "
                 "cusps, validate against sampled matrices"};
    app.require_subcommand(1);

    RunConfig config;
    std::string config_file;
    app.add_option("--config", config_file,
                   "JSON config file; explicit flags take precedence");

    // Shared options registered on every subcommand.
    std::vector<CLI::App*> subs;
    CLI::App* check = app.add_subcommand("check", "Report structural assumptions");
    CLI::App* solve = app.add_subcommand("solve", "Solve on a tau/eta grid");
    CLI::App* density =
        app.add_subcommand("density", "Extract density and support");
    CLI::App* classify =
        app.add_subcommand("classify", "Locate and classify singular points");
    CLI::App* validate =
        app.add_subcommand("validate-mc", "Compare to sampled matrix spectra");
    for (CLI::App* sub : {check, solve, density, classify, validate}) {
        sub->add_option("--model", config.model_source,
                        "Model JSON file path, or inline JSON");
        sub->add_option("--out", config.out_dir, "Output directory");
        sub->add_option("--tau-min", config.tau_min, "Grid lower end");
        sub->add_option("--tau-max", config.tau_max, "Grid upper end");
        sub->add_option("--tau-count", config.tau_count, "Grid point count");
        sub->add_option("--eta", config.eta_ladder,
                        "Descending eta ladder (space separated)");
        sub->add_option("--eta-real", config.eta_real,
                        "Eta standing in for the real axis");
        sub->add_option("--tol", config.tol, "Solver residual tolerance");
        sub->add_option("--max-iter", config.max_iter, "Iteration budget");
        sub->add_option("--threshold", config.support_threshold,
                        "Support detection threshold (<=0: auto)");
        sub->add_option("--cusp-tol", config.cusp_tol,
                        "|sigma| band classified as a cusp");
        sub->add_option("--workers", config.workers, "Parallel solver threads");
        subs.push_back(sub);
    }
    validate->add_option("--n-mat", config.n_mat, "Sampled matrix dimension");
    validate->add_option("--seeds", config.seeds, "Sampling seeds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (!config_file.empty()) {
            // Fill in values the command line left untouched.
            std::ifstream in(config_file);
            if (!in) throw UsageError("cannot open config file " + config_file);
            nlohmann::json j = nlohmann::json::parse(in);
            CLI::App* sub = app.get_subcommands().front();
            auto absent = [&](const std::string& flag) {
                return sub->count(flag) == 0;
            };
            if (j.contains("model") && absent("--model"))
                config.model_source = j["model"].get<std::string>();
            if (j.contains("out") && absent("--out"))
                config.out_dir = j["out"].get<std::string>();
            if (j.contains("tau_min") && absent("--tau-min"))
                config.tau_min = j["tau_min"].get<double>();
            if (j.contains("tau_max") && absent("--tau-max"))
                config.tau_max = j["tau_max"].get<double>();
            if (j.contains("tau_count") && absent("--tau-count"))
                config.tau_count = j["tau_count"].get<int>();
            if (j.contains("eta") && absent("--eta"))
                config.eta_ladder = j["eta"].get<std::vector<double>>();
            if (j.contains("eta_real") && absent("--eta-real"))
                config.eta_real = j["eta_real"].get<double>();
            if (j.contains("tol") && absent("--tol"))
                config.tol = j["tol"].get<double>();
            if (j.contains("max_iter") && absent("--max-iter"))
                config.max_iter = j["max_iter"].get<int>();
            if (j.contains("threshold") && absent("--threshold"))
                config.support_threshold = j["threshold"].get<double>();
            if (j.contains("cusp_tol") && absent("--cusp-tol"))
                config.cusp_tol = j["cusp_tol"].get<double>();
            if (j.contains("workers") && absent("--workers"))
                config.workers = j["workers"].get<int>();
            if (j.contains("n_mat") && absent("--n-mat"))
                config.n_mat = j["n_mat"].get<int>();
            if (j.contains("seeds") && absent("--seeds"))
                config.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        }
        validate_config(config);

        if (*check) return cmd_check(config);
        if (*solve) return cmd_solve(config);
        if (*density) return cmd_density(config);
        if (*classify) return cmd_classify(config);
        if (*validate) return cmd_validate_mc(config);
        throw UsageError("no subcommand");
    } catch (const UsageError& e) {
        std::cerr << "qve: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "qve: " << e.what() << "\n";
        return 2;
    } catch (const qve::Error& e) {
        std::cerr << "qve: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "qve: " << e.what() << "\n";
        return 3;
    }
}
