#pragma once

#include <cstdint>

#include "msred/operators.hpp"

namespace msred {

// Least-squares data term g(x) = 0.5*|y - Ax|^2 and its gradient A^T(Ax - y).
// lipschitz is |A|^2, the Lipschitz constant of grad g; 0 means "not yet
// estimated". After make_fidelity_problem the struct is treated as immutable.
struct FidelityProblem {
    MeasurementModel model;
    MeasurementVector y;
    double lipschitz = 0.0;
};

// Estimates |A|^2 by power iteration and stores it in p.lipschitz.
double lipschitz_g(FidelityProblem& p, std::uint64_t seed);

FidelityProblem make_fidelity_problem(MeasurementModel model, MeasurementVector y,
                                      std::uint64_t norm_seed);

double eval_g(const FidelityProblem& p, const DataCube& x);
DataCube grad_g(const FidelityProblem& p, const DataCube& x);

}  // namespace msred
