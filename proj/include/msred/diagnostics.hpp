#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msred/solver.hpp"

namespace msred {

// estimate_r0 ran out of iterations; carries the best iterate reached.
class EstimationError : public Error {
public:
    EstimationError(const std::string& message, DataCube best_iterate, double relative_residual)
        : Error(message),
          best_iterate_(std::move(best_iterate)),
          relative_residual_(relative_residual) {}

    const DataCube& best_iterate() const { return best_iterate_; }
    double relative_residual() const { return relative_residual_; }

private:
    DataCube best_iterate_;
    double relative_residual_;
};

// Worst-case bound on |G|^2 after t iterations of the q=1 iteration with
// step gamma: (L_g + 2 tau) * r0^2 / (gamma * t).
double residual_bound(double lipschitz_g, double tau, double gamma, double r0, std::size_t t);

struct R0Estimate {
    DataCube x_star;
    double r0 = 0.0;
    std::size_t iterations = 0;
};

// Runs plain (q=1) iterations with gamma = 1/(L_g + 2 tau) until the residual
// drops below rel_tol times the first residual, and reports the limit point
// together with |x0 - x_star|. Throws EstimationError when the cap is hit.
R0Estimate estimate_r0(const FidelityProblem& p, const DenoiserSpec& spec, double tau,
                       const DataCube& x0, double rel_tol = 1e-10,
                       std::size_t max_iters = 100000);

struct BoundMargin {
    std::size_t t = 0;
    double bound_value = 0.0;
    double observed_value = 0.0;  // residual_norm^2 at iteration t
    bool pass = false;
};

// worst_violation is the largest signed relative violation over the bound
// margins, the monotonicity check and (once merged) the descent check;
// anything <= 0 means every one of those passed. averaged_ok tracks the
// averaged form of the bound separately.
struct ConvergenceReport {
    double r0 = 0.0;
    std::vector<BoundMargin> bound_margins;
    bool monotone_ok = true;
    bool descent_ok = true;
    bool averaged_ok = true;
    bool gamma_within_bound = true;
    double worst_violation = 0.0;
    std::vector<std::string> warnings;
};

// Checks every logged iteration of a q=1 trace against residual_bound, plus
// residual monotonicity (relative slack 1e-12) and the averaged form of the
// bound. Throws ParameterError on an empty or non-q=1 trace. descent_ok is
// left true; merge_descent folds in the iterate-level check.
ConvergenceReport check_residual_bound(const std::vector<IterationRecord>& trace,
                                       double lipschitz_g, double tau, double gamma, double r0);

struct DescentCheck {
    bool ok = true;
    double worst_violation = 0.0;
};

// Per-step contraction toward x_star:
//   |x^k - x*|^2 <= |x^{k-1} - x*|^2 - (gamma/(L_g+2 tau)) |G(x^{k-1})|^2
// with slack 1e-10 * |x^{k-1} - x*|^2. iterates = [x^0 ... x^T], residual
// norms are |G(x^0)| ... |G(x^{T-1})|.
DescentCheck check_descent(const std::vector<DataCube>& iterates, const DataCube& x_star,
                           double gamma, double lipschitz_g, double tau,
                           const std::vector<double>& residual_norms);

void merge_descent(ConvergenceReport& report, const DescentCheck& descent);

// |x - D(x)| <= tol * max(1, |x|)
bool is_fixed_point(const DenoiserSpec& spec, const DataCube& x, double tol);

// |grad g(x)| <= tol * max(1, |grad g(0)|)
bool is_critical_point(const FidelityProblem& p, const DataCube& x, double tol);

}  // namespace msred
