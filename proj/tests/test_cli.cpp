#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "msred/cli.hpp"
#include "msred/datacube.hpp"
#include "msred/denoisers.hpp"

using namespace msred;
namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("msred");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "msred_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("phantom subcommand writes a reproducible msd file") {
    const fs::path dir = fresh_dir("phantom");
    const fs::path out_a = dir / "a.msd";
    const fs::path out_b = dir / "b.msd";
    CHECK(run_cli({"phantom", "--seed", "7", "--dims", "32x32x4", "--out", out_a.string()}) == 0);
    CHECK(run_cli({"phantom", "--seed", "7", "--dims", "32x32x4", "--out", out_b.string()}) == 0);
    const DataCube cube = read_msd_file(out_a);
    CHECK(cube.dims == CubeDims{32, 32, 4});
    CHECK(slurp(out_a) == slurp(out_b));
}

TEST_CASE("run with a missing config exits 1") {
    CHECK(run_cli({"run", "--config", "does_not_exist.json"}) == 1);
}

TEST_CASE("unknown subcommands and missing flags exit 1") {
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"phantom", "--dims", "4x4x1"}) == 1);  // --out missing
    CHECK(run_cli({"phantom", "--dims", "4by4", "--out", "x.msd"}) == 1);
}

TEST_CASE("denoise subcommand applies the requested denoiser") {
    const fs::path dir = fresh_dir("denoise");
    const fs::path in = dir / "in.msd";
    const fs::path out = dir / "out.msd";
    CHECK(run_cli({"phantom", "--seed", "3", "--dims", "8x8x2", "--out", in.string()}) == 0);
    CHECK(run_cli({"denoise", "--in", in.string(), "--out", out.string(), "--denoiser",
                   R"({"type":"scale","alpha":0.5})"}) == 0);
    const DataCube before = read_msd_file(in);
    const DataCube after = read_msd_file(out);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(after.values[i] == 0.5 * before.values[i]);
    }
    CHECK(run_cli({"denoise", "--in", in.string(), "--out", out.string(), "--denoiser",
                   R"({"type":"nope"})"}) == 1);
}

TEST_CASE("run and check execute an experiment end to end") {
    const fs::path dir = fresh_dir("run");
    const fs::path config_path = dir / "config.json";
    {
        std::ofstream cfg(config_path);
        cfg << R"({
  "phantom": {"seed": 5, "dims": [12, 12, 2], "n_blobs": 3, "background": 0.2},
  "kernel": {"type": "gaussian", "size": 5, "sigma": 1.2},
  "scale": 2,
  "input_snr_db": 40.0,
  "noise_seed": 3,
  "denoiser": {"type": "tv3d", "lambda": 0.03, "inner_iters": 20},
  "solver": {"mode": "AGM", "tau": 0.1, "max_iters": 15},
  "output_dir": ")" << (dir / "out").string() << R"("
})";
    }
    CHECK(run_cli({"run", "--config", config_path.string()}) == 0);
    CHECK(fs::exists(dir / "out" / "recon.msd"));
    CHECK(fs::exists(dir / "out" / "metrics.csv"));
    CHECK(fs::exists(dir / "out" / "report.json"));

    // check forces GM and writes a convergence section
    CHECK(run_cli({"check", "--config", config_path.string()}) == 0);
    const std::string report = slurp(dir / "out" / "report.json");
    CHECK(report.find("\"R0\"") != std::string::npos);
}

TEST_CASE("runtime failures exit 2") {
    const fs::path dir = fresh_dir("diverge");
    const fs::path config_path = dir / "config.json";
    {
        std::ofstream cfg(config_path);
        cfg << R"({
  "phantom": {"seed": 2, "dims": [8, 8, 1], "n_blobs": 2, "background": 0.3},
  "kernel": {"type": "gaussian", "size": 3, "sigma": 1.0},
  "scale": 1,
  "input_snr_db": 40.0,
  "noise_seed": 1,
  "denoiser": {"type": "scale", "alpha": 3.0},
  "solver": {"mode": "GM", "tau": 1.0, "step_size": 50.0, "max_iters": 5000, "log_snr": false},
  "output_dir": ")" << (dir / "out").string() << R"("
})";
    }
    CHECK(run_cli({"run", "--config", config_path.string()}) == 2);
}

TEST_CASE("norm subcommand prints estimates") {
    const fs::path dir = fresh_dir("norm");
    const fs::path config_path = dir / "config.json";
    {
        std::ofstream cfg(config_path);
        cfg << R"({
  "phantom": {"seed": 5, "dims": [8, 8, 1], "n_blobs": 2, "background": 0.2},
  "kernel": {"type": "gaussian", "size": 3, "sigma": 1.0},
  "scale": 1,
  "input_snr_db": 40.0,
  "noise_seed": 3,
  "denoiser": {"type": "identity"},
  "solver": {"mode": "GM", "tau": 0.0, "max_iters": 5},
  "output_dir": ")" << (dir / "out").string() << R"("
})";
    }
    CHECK(run_cli({"norm", "--config", config_path.string()}) == 0);
}

TEST_CASE("help exits 0") {
    CHECK(run_cli({"--help"}) == 0);
}

}  // TEST_SUITE
