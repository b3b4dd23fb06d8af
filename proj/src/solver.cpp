#include "msred/solver.hpp"

#include <chrono>
#include <cmath>

namespace msred {

double next_momentum(SolverMode mode, double q_prev) {
    if (q_prev < 1.0) {
        throw ParameterError("momentum requires q_prev >= 1, got " + std::to_string(q_prev));
    }
    if (mode == SolverMode::GM) return 1.0;
    return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * q_prev * q_prev));
}

DataCube red_gradient(const FidelityProblem& p, const DenoiserSpec& spec, double tau,
                      const DataCube& x) {
    if (!(x.dims == p.model.input_dims)) {
        throw ShapeError("red_gradient: cube dimensions do not match the problem");
    }
    DataCube g = grad_g(p, x);
    const DataCube d = denoise(spec, x);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g.values[i] += tau * (x.values[i] - d.values[i]);
    }
    return g;
}

SolveResult solve(const SolverConfig& config, const FidelityProblem& p,
                  const DenoiserSpec& spec, const DataCube& x0, const DataCube* truth,
                  const IterationCallback& on_iteration) {
    if (!(config.step_size > 0.0)) throw ParameterError("solve: step size must be positive");
    if (config.tau < 0.0) throw ParameterError("solve: tau must be nonnegative");
    if (config.residual_tol < 0.0) throw ParameterError("solve: residual_tol must be nonnegative");
    if (!(x0.dims == p.model.input_dims)) {
        throw ShapeError("solve: x0 dimensions do not match the problem");
    }
    if (truth != nullptr && !(truth->dims == x0.dims)) {
        throw ShapeError("solve: truth dimensions do not match x0");
    }
    validate_denoiser(spec);

    SolveResult result;
    const double gamma = config.step_size;
    const double safe_step = 1.0 / (p.lipschitz + 2.0 * config.tau);
    if (gamma > safe_step * (1.0 + 1e-12)) {
        result.warnings.push_back("step size " + std::to_string(gamma) +
                                  " exceeds 1/(L_g + 2 tau) = " + std::to_string(safe_step) +
                                  "; convergence guarantees no longer apply");
    }

    const std::size_t n = x0.size();
    DataCube x = x0;
    DataCube x_prev = x0;
    DataCube s = x0;  // s^0 = x^0
    double q_prev = 1.0;
    double first_residual = 0.0;
    const SolverMode effective_mode =
        config.force_unit_momentum ? SolverMode::GM : config.mode;

    using clock = std::chrono::steady_clock;
    for (std::size_t k = 1; k <= config.max_iters; ++k) {
        const auto t_start = clock::now();

        const DataCube denoised = denoise(spec, s);
        DataCube g = grad_g(p, s);
        for (std::size_t i = 0; i < n; ++i) {
            g.values[i] += config.tau * (s.values[i] - denoised.values[i]);
        }
        const double residual = norm2(g);
        if (!std::isfinite(residual)) {
            throw DivergenceError(k, "solve: non-finite gradient at iteration " + std::to_string(k));
        }
        if (k == 1) first_residual = residual;

        std::swap(x_prev, x);
        for (std::size_t i = 0; i < n; ++i) {
            x.values[i] = s.values[i] - gamma * g.values[i];
        }
        if (!all_finite(x)) {
            throw DivergenceError(k, "solve: non-finite iterate at iteration " + std::to_string(k));
        }

        const double q = next_momentum(effective_mode, q_prev);
        const double coef = (q_prev - 1.0) / q;
        if (coef == 0.0) {
            s = x;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                s.values[i] = x.values[i] + coef * (x.values[i] - x_prev.values[i]);
            }
        }
        q_prev = q;

        IterationRecord rec;
        rec.k = k;
        rec.residual_norm = residual;
        rec.data_fidelity = eval_g(p, x);
        rec.red_penalty = red_penalty(spec, x, config.tau);
        if (config.log_snr && truth != nullptr) rec.snr_db = snr_db(*truth, x);
        rec.q = q;
        rec.elapsed_ms =
            std::chrono::duration<double, std::milli>(clock::now() - t_start).count();
        result.trace.push_back(rec);
        if (on_iteration) on_iteration(rec, x);

        if (residual <= config.residual_tol * first_residual) {
            result.reached_tolerance = true;
            break;
        }
    }

    result.x = std::move(x);
    return result;
}

}  // namespace msred
