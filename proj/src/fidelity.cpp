#include "msred/fidelity.hpp"

#include <utility>

namespace msred {

namespace {

constexpr std::size_t kNormIters = 20000;
constexpr double kNormTol = 1e-14;

}  // namespace

double lipschitz_g(FidelityProblem& p, std::uint64_t seed) {
    const NormEstimate est = operator_norm(p.model, kNormIters, kNormTol, seed);
    p.lipschitz = est.value * est.value;
    return p.lipschitz;
}

FidelityProblem make_fidelity_problem(MeasurementModel model, MeasurementVector y,
                                      std::uint64_t norm_seed) {
    if (y.size() != model.output_size()) {
        throw ShapeError("fidelity problem: measurement length does not match the model");
    }
    FidelityProblem p{std::move(model), std::move(y), 0.0};
    lipschitz_g(p, norm_seed);
    return p;
}

double eval_g(const FidelityProblem& p, const DataCube& x) {
    const MeasurementVector ax = apply(p.model, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < ax.size(); ++i) {
        const double r = p.y.values[i] - ax.values[i];
        acc += r * r;
    }
    return 0.5 * acc;
}

DataCube grad_g(const FidelityProblem& p, const DataCube& x) {
    MeasurementVector residual = apply(p.model, x);
    for (std::size_t i = 0; i < residual.size(); ++i) residual.values[i] -= p.y.values[i];
    return adjoint(p.model, residual);
}

}  // namespace msred
