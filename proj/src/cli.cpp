#include "msred/cli.hpp"

#include <array>
#include <charconv>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msred/experiment.hpp"

namespace msred {

namespace {

std::string fmt(double v) {
    std::array<char, 40> buf;
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

CubeDims parse_dims_arg(const std::string& text) {
    CubeDims dims;
    std::size_t* fields[3] = {&dims.height, &dims.width, &dims.bands};
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        const std::size_t next = text.find('x', pos);
        const std::string part =
            i < 2 ? text.substr(pos, next - pos) : text.substr(pos);
        if ((i < 2 && next == std::string::npos) || part.empty()) {
            throw ConfigError("--dims", "expected HxWxB, got '" + text + "'");
        }
        const auto res = std::from_chars(part.data(), part.data() + part.size(), *fields[i]);
        if (res.ec != std::errc{} || res.ptr != part.data() + part.size()) {
            throw ConfigError("--dims", "expected HxWxB, got '" + text + "'");
        }
        pos = next + 1;
    }
    if (dims.voxels() == 0) throw ConfigError("--dims", "dimensions must be positive");
    return dims;
}

void print_experiment_summary(const ExperimentResult& result) {
    std::cout << "wrote " << result.output_dir.string() << "\n"
              << "  iterations      " << result.iterations << "\n"
              << "  lipschitz_g     " << fmt(result.lipschitz_g) << "\n"
              << "  gamma           " << fmt(result.gamma) << "\n"
              << "  baseline snr    " << fmt(result.baseline_snr_db) << " dB\n"
              << "  recon snr       " << fmt(result.recon_snr_db) << " dB\n";
    if (result.diagnostics_run) {
        std::size_t violations = 0;
        for (const BoundMargin& m : result.convergence.bound_margins) {
            if (!m.pass) ++violations;
        }
        std::cout << "  bound checks    " << result.convergence.bound_margins.size()
                  << " (" << violations << " violations)\n"
                  << "  monotone        " << (result.convergence.monotone_ok ? "ok" : "VIOLATED")
                  << "\n"
                  << "  descent         " << (result.convergence.descent_ok ? "ok" : "VIOLATED")
                  << "\n";
    }
    for (const std::string& w : result.warnings) std::cout << "  warning: " << w << "\n";
}

int run_command(const std::vector<std::string>& config_paths, bool force_gm) {
    for (const std::string& path : config_paths) {
        ExperimentConfig config = load_experiment_config(path);
        if (force_gm) config.solver.mode = SolverMode::GM;
        const ExperimentResult result = run_experiment(config);
        print_experiment_summary(result);
    }
    return 0;
}

int norm_command(const std::string& config_path) {
    const ExperimentConfig config = load_experiment_config(config_path);
    const DataCube truth =
        config.phantom ? generate_phantom(*config.phantom) : read_msd_file(*config.input_msd);
    const MeasurementModel model =
        make_model(build_kernel(config.kernel), config.scale, truth.dims);
    const NormEstimate est = operator_norm(model, 20000, 1e-14, 24601);
    std::cout << "operator_norm " << fmt(est.value) << "\n"
              << "lipschitz_g   " << fmt(est.value * est.value) << "\n"
              << "converged     " << (est.converged ? "true" : "false") << " ("
              << est.iterations << " iterations)\n";
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"msred: RED reconstruction of multispectral cubes from blurred, "
                 "decimated, noisy measurements"};
    app.require_subcommand(1);

    std::vector<std::string> run_configs;
    CLI::App* cmd_run = app.add_subcommand("run", "Run experiments from JSON config files");
    cmd_run->add_option("--config", run_configs, "Path to an experiment config")
        ->required()
        ->expected(-1);

    std::string check_config;
    CLI::App* cmd_check =
        app.add_subcommand("check", "Run with mode GM and full convergence diagnostics");
    cmd_check->add_option("--config", check_config, "Path to an experiment config")->required();

    std::uint64_t phantom_seed = 0;
    std::string phantom_dims;
    std::string phantom_out;
    std::size_t phantom_blobs = 4;
    double phantom_background = 0.15;
    CLI::App* cmd_phantom = app.add_subcommand("phantom", "Generate a synthetic cube");
    cmd_phantom->add_option("--seed", phantom_seed, "Generator seed");
    cmd_phantom->add_option("--dims", phantom_dims, "Cube dimensions HxWxB")->required();
    cmd_phantom->add_option("--out", phantom_out, "Output MSD path")->required();
    cmd_phantom->add_option("--blobs", phantom_blobs, "Number of blobs");
    cmd_phantom->add_option("--background", phantom_background, "Background level in [0,1]");

    std::string denoise_in, denoise_out, denoise_spec;
    CLI::App* cmd_denoise = app.add_subcommand("denoise", "Apply a denoiser to an MSD cube");
    cmd_denoise->add_option("--in", denoise_in, "Input MSD path")->required();
    cmd_denoise->add_option("--out", denoise_out, "Output MSD path")->required();
    cmd_denoise->add_option("--denoiser", denoise_spec, "Denoiser spec as JSON")->required();

    std::string norm_config;
    CLI::App* cmd_norm =
        app.add_subcommand("norm", "Estimate the measurement operator norm and L_g");
    cmd_norm->add_option("--config", norm_config, "Path to an experiment config")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (app.got_subcommand(cmd_run)) return run_command(run_configs, false);
        if (app.got_subcommand(cmd_check)) return run_command({check_config}, true);
        if (app.got_subcommand(cmd_phantom)) {
            PhantomSpec spec;
            spec.seed = phantom_seed;
            spec.dims = parse_dims_arg(phantom_dims);
            spec.n_blobs = phantom_blobs;
            spec.background = phantom_background;
            write_msd_file(generate_phantom(spec), phantom_out);
            std::cout << "wrote " << phantom_out << "\n";
            return 0;
        }
        if (app.got_subcommand(cmd_denoise)) {
            const DenoiserSpec spec = parse_denoiser_json(denoise_spec);
            const DataCube cube = read_msd_file(denoise_in);
            write_msd_file(denoise(spec, cube), denoise_out);
            std::cout << "wrote " << denoise_out << "\n";
            return 0;
        }
        if (app.got_subcommand(cmd_norm)) return norm_command(norm_config);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace msred
