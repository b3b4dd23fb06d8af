#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "msred/denoisers.hpp"
#include "msred/fidelity.hpp"

namespace msred {

enum class SolverMode { GM, AGM };

struct SolverConfig {
    SolverMode mode = SolverMode::GM;
    double step_size = 0.0;   // gamma > 0; 1/(L_g + 2*tau) is the safe default
    double tau = 0.0;
    std::size_t max_iters = 100;
    double residual_tol = 0.0;  // stop when |G| drops below tol * first |G|
    bool log_snr = false;
    // Runs the AGM code path with q_k pinned to 1; iterates must then be
    // bit-identical to GM.
    bool force_unit_momentum = false;
};

struct IterationRecord {
    std::size_t k = 0;           // 1-based
    double residual_norm = 0.0;  // |G| at the extrapolated point the step used
    double data_fidelity = 0.0;  // g(x^k)
    std::optional<double> red_penalty;
    std::optional<double> snr_db;
    double q = 1.0;  // momentum value q_k
    double elapsed_ms = 0.0;
};

struct SolveResult {
    DataCube x;
    std::vector<IterationRecord> trace;
    bool reached_tolerance = false;
    std::vector<std::string> warnings;
};

// q_{k} from q_{k-1}: 1 for GM, (1 + sqrt(1 + 4 q_prev^2))/2 for AGM.
double next_momentum(SolverMode mode, double q_prev);

// G(x) = grad g(x) + tau * (x - D(x))
DataCube red_gradient(const FidelityProblem& p, const DenoiserSpec& spec, double tau,
                      const DataCube& x);

using IterationCallback = std::function<void(const IterationRecord&, const DataCube& x)>;

// Fixed-point iteration x^k = s^{k-1} - gamma G(s^{k-1}),
// s^k = x^k + ((q_{k-1}-1)/q_k)(x^k - x^{k-1}), with s^0 = x^0 and q_0 = 1.
// The callback (if any) sees each record together with the iterate x^k, so
// partial progress survives a DivergenceError.
SolveResult solve(const SolverConfig& config, const FidelityProblem& p,
                  const DenoiserSpec& spec, const DataCube& x0,
                  const DataCube* truth = nullptr, const IterationCallback& on_iteration = {});

}  // namespace msred
