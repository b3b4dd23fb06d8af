#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "msred/diagnostics.hpp"
#include "msred/phantom.hpp"

namespace msred {

struct KernelConfig {
    enum class Type { Gaussian, Motion };
    Type type = Type::Gaussian;
    std::size_t size = 7;
    double sigma = 1.6;       // gaussian only
    std::size_t length = 19;  // motion only
    double angle_deg = 0.0;   // motion only
};

Kernel2D build_kernel(const KernelConfig& config);

struct ExperimentConfig {
    // exactly one of phantom / input_msd
    std::optional<PhantomSpec> phantom;
    std::optional<std::filesystem::path> input_msd;
    KernelConfig kernel;
    std::size_t scale = 1;
    double input_snr_db = 40.0;
    std::uint64_t noise_seed = 0;
    DenoiserSpec denoiser;
    SolverConfig solver;
    bool step_size_auto = true;  // when true, gamma resolves to 1/(L_g + 2 tau)
    std::filesystem::path output_dir;
};

// JSON config handling. Parse failures throw ConfigError carrying the path of
// the offending field.
ExperimentConfig parse_experiment_config_text(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
DenoiserSpec parse_denoiser_json(const std::string& json_text);

// Serialized form of a fully resolved config (numeric step size). Parsing the
// result reproduces the same resolved configuration.
std::string experiment_config_to_json(const ExperimentConfig& config, double resolved_step_size);

struct ExperimentResult {
    std::filesystem::path output_dir;
    std::filesystem::path truth_path;
    std::filesystem::path baseline_path;
    std::filesystem::path recon_path;
    std::filesystem::path metrics_path;
    std::filesystem::path report_path;
    std::filesystem::path config_echo_path;
    double baseline_snr_db = 0.0;
    double recon_snr_db = 0.0;
    std::size_t iterations = 0;
    double lipschitz_g = 0.0;
    double gamma = 0.0;
    double tau = 0.0;
    double noise_sigma = 0.0;
    bool diagnostics_run = false;
    ConvergenceReport convergence;
    std::vector<std::string> warnings;
};

// Full pipeline: ground truth -> degrade -> reconstruct -> (GM only)
// convergence diagnostics -> artifacts. Writes truth.msd, baseline.msd,
// recon.msd, metrics.csv, report.json and config.json into output_dir.
// metrics.csv rows are streamed as iterations complete, so a divergence
// error leaves the partial trace behind before it propagates.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace msred
