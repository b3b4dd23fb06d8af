#include "msred/experiment.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>

#include <json.hpp>

namespace msred {

namespace {

using nlohmann::json;

// Seed for the internal |A| power iteration; fixed so runs are pure
// functions of the config file.
constexpr std::uint64_t kNormSeed = 24601;

std::string fmt(double v) {
    std::array<char, 40> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::string join(const std::string& path, const char* key) {
    return path.empty() ? std::string(key) : path + "." + key;
}

const json& member(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(join(path, key), "missing required field");
    return *it;
}

double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
}

std::uint64_t as_count(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    throw ConfigError(path, "expected a nonnegative integer");
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path, "expected a boolean");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

PhantomSpec parse_phantom(const json& j, const std::string& path) {
    PhantomSpec spec;
    spec.seed = as_count(member(j, "seed", path), join(path, "seed"));
    const json& dims = member(j, "dims", path);
    if (!dims.is_array() || dims.size() != 3) {
        throw ConfigError(join(path, "dims"), "expected an array [H, W, B]");
    }
    const std::string dims_path = join(path, "dims");
    spec.dims.height = as_count(dims[0], dims_path);
    spec.dims.width = as_count(dims[1], dims_path);
    spec.dims.bands = as_count(dims[2], dims_path);
    if (spec.dims.voxels() == 0) throw ConfigError(dims_path, "dimensions must be positive");
    spec.n_blobs = as_count(member(j, "n_blobs", path), join(path, "n_blobs"));
    if (spec.n_blobs == 0) throw ConfigError(join(path, "n_blobs"), "must be >= 1");
    spec.background = as_number(member(j, "background", path), join(path, "background"));
    if (spec.background < 0.0 || spec.background > 1.0) {
        throw ConfigError(join(path, "background"), "must lie in [0, 1]");
    }
    return spec;
}

KernelConfig parse_kernel(const json& j, const std::string& path) {
    KernelConfig k;
    const std::string type = as_string(member(j, "type", path), join(path, "type"));
    if (type == "gaussian") {
        k.type = KernelConfig::Type::Gaussian;
        k.size = as_count(member(j, "size", path), join(path, "size"));
        k.sigma = as_number(member(j, "sigma", path), join(path, "sigma"));
        if (!(k.sigma > 0.0)) throw ConfigError(join(path, "sigma"), "must be positive");
    } else if (type == "motion") {
        k.type = KernelConfig::Type::Motion;
        k.size = as_count(member(j, "size", path), join(path, "size"));
        k.length = as_count(member(j, "length", path), join(path, "length"));
        k.angle_deg = as_number(member(j, "angle_deg", path), join(path, "angle_deg"));
        if (k.length == 0) throw ConfigError(join(path, "length"), "must be >= 1");
        if (k.length > k.size) throw ConfigError(join(path, "length"), "must not exceed size");
    } else {
        throw ConfigError(join(path, "type"), "unknown kernel type '" + type +
                                                  "' (expected gaussian or motion)");
    }
    if (k.size == 0 || k.size % 2 == 0) {
        throw ConfigError(join(path, "size"), "kernel size must be odd");
    }
    return k;
}

DenoiserSpec parse_denoiser(const json& j, const std::string& path) {
    DenoiserSpec spec;
    const std::string type = as_string(member(j, "type", path), join(path, "type"));
    if (type == "identity") {
        spec.variant = IdentityDenoiser{};
    } else if (type == "scale") {
        spec.variant = ScaleDenoiser{as_number(member(j, "alpha", path), join(path, "alpha"))};
    } else if (type == "gaussian_smooth") {
        GaussianSmoothDenoiser g;
        g.sigma_spatial = as_number(member(j, "sigma_spatial", path), join(path, "sigma_spatial"));
        g.sigma_spectral =
            as_number(member(j, "sigma_spectral", path), join(path, "sigma_spectral"));
        if (g.sigma_spatial < 0.0) throw ConfigError(join(path, "sigma_spatial"), "must be >= 0");
        if (g.sigma_spectral < 0.0) throw ConfigError(join(path, "sigma_spectral"), "must be >= 0");
        spec.variant = g;
    } else if (type == "tv3d") {
        Tv3dDenoiser t;
        t.lambda = as_number(member(j, "lambda", path), join(path, "lambda"));
        t.inner_iters = as_count(member(j, "inner_iters", path), join(path, "inner_iters"));
        if (t.lambda < 0.0) throw ConfigError(join(path, "lambda"), "must be >= 0");
        if (t.inner_iters == 0) throw ConfigError(join(path, "inner_iters"), "must be >= 1");
        spec.variant = t;
    } else {
        throw ConfigError(join(path, "type"),
                          "unknown denoiser type '" + type +
                              "' (expected identity, scale, gaussian_smooth or tv3d)");
    }
    return spec;
}

SolverConfig parse_solver(const json& j, const std::string& path, bool* step_auto) {
    SolverConfig cfg;
    const std::string mode = as_string(member(j, "mode", path), join(path, "mode"));
    if (mode == "GM") {
        cfg.mode = SolverMode::GM;
    } else if (mode == "AGM") {
        cfg.mode = SolverMode::AGM;
    } else {
        throw ConfigError(join(path, "mode"), "expected GM or AGM, got '" + mode + "'");
    }
    cfg.tau = as_number(member(j, "tau", path), join(path, "tau"));
    if (cfg.tau < 0.0) throw ConfigError(join(path, "tau"), "must be >= 0");
    cfg.max_iters = as_count(member(j, "max_iters", path), join(path, "max_iters"));
    if (cfg.max_iters == 0) throw ConfigError(join(path, "max_iters"), "must be >= 1");
    if (j.contains("residual_tol")) {
        cfg.residual_tol = as_number(j["residual_tol"], join(path, "residual_tol"));
        if (cfg.residual_tol < 0.0) throw ConfigError(join(path, "residual_tol"), "must be >= 0");
    }
    cfg.log_snr = j.contains("log_snr") ? as_bool(j["log_snr"], join(path, "log_snr")) : true;
    if (j.contains("force_unit_momentum")) {
        cfg.force_unit_momentum =
            as_bool(j["force_unit_momentum"], join(path, "force_unit_momentum"));
    }
    *step_auto = true;
    if (j.contains("step_size") && !j["step_size"].is_null()) {
        cfg.step_size = as_number(j["step_size"], join(path, "step_size"));
        if (!(cfg.step_size > 0.0)) throw ConfigError(join(path, "step_size"), "must be positive");
        *step_auto = false;
    }
    return cfg;
}

json phantom_to_json(const PhantomSpec& spec) {
    return json{{"seed", spec.seed},
                {"dims", {spec.dims.height, spec.dims.width, spec.dims.bands}},
                {"n_blobs", spec.n_blobs},
                {"background", spec.background}};
}

json kernel_to_json(const KernelConfig& k) {
    if (k.type == KernelConfig::Type::Gaussian) {
        return json{{"type", "gaussian"}, {"size", k.size}, {"sigma", k.sigma}};
    }
    return json{{"type", "motion"}, {"size", k.size}, {"length", k.length},
                {"angle_deg", k.angle_deg}};
}

json denoiser_to_json(const DenoiserSpec& spec) {
    return std::visit(
        [](const auto& d) -> json {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, IdentityDenoiser>) {
                return json{{"type", "identity"}};
            } else if constexpr (std::is_same_v<T, ScaleDenoiser>) {
                return json{{"type", "scale"}, {"alpha", d.alpha}};
            } else if constexpr (std::is_same_v<T, GaussianSmoothDenoiser>) {
                return json{{"type", "gaussian_smooth"},
                            {"sigma_spatial", d.sigma_spatial},
                            {"sigma_spectral", d.sigma_spectral}};
            } else {
                return json{{"type", "tv3d"}, {"lambda", d.lambda}, {"inner_iters", d.inner_iters}};
            }
        },
        spec.variant);
}

json solver_to_json(const SolverConfig& cfg, double resolved_step_size) {
    return json{{"mode", cfg.mode == SolverMode::GM ? "GM" : "AGM"},
                {"step_size", resolved_step_size},
                {"tau", cfg.tau},
                {"max_iters", cfg.max_iters},
                {"residual_tol", cfg.residual_tol},
                {"log_snr", cfg.log_snr},
                {"force_unit_momentum", cfg.force_unit_momentum}};
}

ExperimentConfig parse_config_json(const json& j) {
    ExperimentConfig config;
    const bool has_phantom = j.is_object() && j.contains("phantom");
    const bool has_input = j.is_object() && j.contains("input_msd");
    if (has_phantom == has_input) {
        throw ConfigError("phantom", "exactly one of 'phantom' and 'input_msd' is required");
    }
    if (has_phantom) {
        config.phantom = parse_phantom(j["phantom"], "phantom");
    } else {
        config.input_msd = as_string(j["input_msd"], "input_msd");
    }
    config.kernel = parse_kernel(member(j, "kernel", ""), "kernel");
    config.scale = as_count(member(j, "scale", ""), "scale");
    if (config.scale == 0) throw ConfigError("scale", "must be >= 1");
    config.input_snr_db = as_number(member(j, "input_snr_db", ""), "input_snr_db");
    config.noise_seed = as_count(member(j, "noise_seed", ""), "noise_seed");
    config.denoiser = parse_denoiser(member(j, "denoiser", ""), "denoiser");
    config.solver = parse_solver(member(j, "solver", ""), "solver", &config.step_size_auto);
    config.output_dir = as_string(member(j, "output_dir", ""), "output_dir");
    if (config.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");

    if (config.phantom) {
        const CubeDims d = config.phantom->dims;
        if (d.height % config.scale != 0 || d.width % config.scale != 0) {
            throw ConfigError("scale", "phantom dimensions must be divisible by the scale factor");
        }
    }
    return config;
}

void write_csv_row(std::ostream& out, const IterationRecord& rec) {
    out << rec.k << ',' << fmt(rec.residual_norm) << ',' << fmt(rec.data_fidelity) << ',';
    if (rec.red_penalty) out << fmt(*rec.red_penalty);
    out << ',';
    if (rec.snr_db) out << fmt(*rec.snr_db);
    out << ',' << fmt(rec.q) << ',';
    // elapsed_ms stays empty: artifacts must be pure functions of the config
    out << '\n';
}

json convergence_to_json(const ConvergenceReport& report) {
    json margins = json::array();
    for (const BoundMargin& m : report.bound_margins) {
        margins.push_back(json{{"t", m.t},
                               {"bound_value", m.bound_value},
                               {"observed_value", m.observed_value},
                               {"pass", m.pass}});
    }
    return json{{"R0", report.r0},
                {"monotone_ok", report.monotone_ok},
                {"descent_ok", report.descent_ok},
                {"averaged_ok", report.averaged_ok},
                {"gamma_within_bound", report.gamma_within_bound},
                {"worst_violation", report.worst_violation},
                {"warnings", report.warnings},
                {"bound_margins", margins}};
}

}  // namespace

Kernel2D build_kernel(const KernelConfig& config) {
    if (config.type == KernelConfig::Type::Gaussian) {
        return make_gaussian_kernel(config.size, config.sigma);
    }
    return make_motion_kernel(config.length, config.angle_deg, config.size);
}

ExperimentConfig parse_experiment_config_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
    }
    return parse_config_json(j);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open config file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_experiment_config_text(buffer.str());
}

DenoiserSpec parse_denoiser_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError("denoiser", std::string("invalid JSON: ") + e.what());
    }
    return parse_denoiser(j, "denoiser");
}

std::string experiment_config_to_json(const ExperimentConfig& config,
                                      double resolved_step_size) {
    json j;
    if (config.phantom) {
        j["phantom"] = phantom_to_json(*config.phantom);
    } else {
        j["input_msd"] = config.input_msd->string();
    }
    j["kernel"] = kernel_to_json(config.kernel);
    j["scale"] = config.scale;
    j["input_snr_db"] = config.input_snr_db;
    j["noise_seed"] = config.noise_seed;
    j["denoiser"] = denoiser_to_json(config.denoiser);
    j["solver"] = solver_to_json(config.solver, resolved_step_size);
    j["output_dir"] = config.output_dir.string();
    return j.dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    const DataCube truth =
        config.phantom ? generate_phantom(*config.phantom) : read_msd_file(*config.input_msd);
    if (truth.dims.height % config.scale != 0 || truth.dims.width % config.scale != 0) {
        throw ConfigError("scale", "ground-truth dimensions must be divisible by the scale factor");
    }

    FidelityProblem problem;
    double noise_sigma = 0.0;
    {
        MeasurementModel model = make_model(build_kernel(config.kernel), config.scale, truth.dims);
        auto [y, sigma] = add_awgn(apply(model, truth), config.input_snr_db, config.noise_seed);
        noise_sigma = sigma;
        problem = make_fidelity_problem(std::move(model), std::move(y), kNormSeed);
    }

    SolverConfig solver_cfg = config.solver;
    if (config.step_size_auto) {
        solver_cfg.step_size = 1.0 / (problem.lipschitz + 2.0 * solver_cfg.tau);
    }

    // adjoint-upsampled warm start, also the comparison baseline
    DataCube x0 = adjoint(problem.model, problem.y);
    const double s2 = static_cast<double>(config.scale) * static_cast<double>(config.scale);
    for (double& v : x0.values) v *= s2;

    std::filesystem::create_directories(config.output_dir);
    ExperimentResult result;
    result.output_dir = config.output_dir;
    result.truth_path = config.output_dir / "truth.msd";
    result.baseline_path = config.output_dir / "baseline.msd";
    result.recon_path = config.output_dir / "recon.msd";
    result.metrics_path = config.output_dir / "metrics.csv";
    result.report_path = config.output_dir / "report.json";
    result.config_echo_path = config.output_dir / "config.json";
    result.lipschitz_g = problem.lipschitz;
    result.gamma = solver_cfg.step_size;
    result.tau = solver_cfg.tau;
    result.noise_sigma = noise_sigma;

    write_msd_file(truth, result.truth_path);
    write_msd_file(x0, result.baseline_path);
    {
        std::ofstream echo(result.config_echo_path, std::ios::binary);
        if (!echo) throw IoError("cannot write " + result.config_echo_path.string());
        echo << experiment_config_to_json(config, solver_cfg.step_size);
    }

    const bool run_diagnostics = solver_cfg.mode == SolverMode::GM;
    std::vector<DataCube> iterates;
    if (run_diagnostics) iterates.push_back(x0);

    std::ofstream csv(result.metrics_path, std::ios::binary);
    if (!csv) throw IoError("cannot write " + result.metrics_path.string());
    csv << "iter,residual_norm,data_fidelity,red_penalty,snr_db,q,elapsed_ms\n";

    SolveResult solved;
    try {
        solved = solve(solver_cfg, problem, config.denoiser, x0, &truth,
                       [&](const IterationRecord& rec, const DataCube& x) {
                           write_csv_row(csv, rec);
                           if (run_diagnostics) iterates.push_back(x);
                       });
    } catch (const DivergenceError&) {
        csv.flush();  // partial trace is an artifact too
        throw;
    }
    csv.close();

    write_msd_file(solved.x, result.recon_path);
    result.iterations = solved.trace.size();
    result.baseline_snr_db = snr_db(truth, x0);
    result.recon_snr_db = snr_db(truth, solved.x);
    result.warnings = solved.warnings;

    if (run_diagnostics) {
        try {
            const R0Estimate r0 = estimate_r0(problem, config.denoiser, solver_cfg.tau, x0);
            result.convergence = check_residual_bound(solved.trace, problem.lipschitz,
                                                      solver_cfg.tau, solver_cfg.step_size, r0.r0);
            std::vector<double> residual_norms;
            residual_norms.reserve(solved.trace.size());
            for (const IterationRecord& rec : solved.trace) {
                residual_norms.push_back(rec.residual_norm);
            }
            merge_descent(result.convergence,
                          check_descent(iterates, r0.x_star, solver_cfg.step_size,
                                        problem.lipschitz, solver_cfg.tau, residual_norms));
            result.diagnostics_run = true;
        } catch (const EstimationError& e) {
            result.warnings.push_back(std::string("diagnostics skipped: ") + e.what());
        }
    }

    json report;
    report["summary"] = json{{"baseline_snr_db", result.baseline_snr_db},
                             {"recon_snr_db", result.recon_snr_db},
                             {"iterations", result.iterations},
                             {"lipschitz_g", result.lipschitz_g},
                             {"gamma", result.gamma},
                             {"tau", result.tau},
                             {"noise_sigma", result.noise_sigma},
                             {"red_penalty_surrogate", !config.denoiser.is_linear_symmetric()},
                             {"warnings", result.warnings}};
    report["convergence"] =
        result.diagnostics_run ? convergence_to_json(result.convergence) : json(nullptr);
    {
        std::ofstream out(result.report_path, std::ios::binary);
        if (!out) throw IoError("cannot write " + result.report_path.string());
        out << report.dump(2) << "\n";
    }
    return result;
}

}  // namespace msred
