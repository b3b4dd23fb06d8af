#pragma once

#include <cstdint>
#include <variant>

#include "msred/datacube.hpp"

namespace msred {

struct IdentityDenoiser {};

// D(x) = alpha * x. Not a real denoiser; alpha > 1 gives a controlled way to
// break the nonexpansiveness assumption in tests.
struct ScaleDenoiser {
    double alpha = 1.0;
};

// Separable circular Gaussian smoothing: sigma_spatial along rows and
// columns, sigma_spectral along the band axis. Taps truncated at radius
// ceil(4*sigma) and renormalized; sigma 0 disables that axis. Linear with a
// symmetric matrix, so the explicit penalty in red_penalty is exact.
struct GaussianSmoothDenoiser {
    double sigma_spatial = 1.0;
    double sigma_spectral = 0.0;
};

// Approximate proximal map of anisotropic 3D total variation, computed by a
// fixed number of dual projected-gradient iterations (step 1/12).
struct Tv3dDenoiser {
    double lambda = 0.1;
    std::size_t inner_iters = 50;
};

struct DenoiserSpec {
    std::variant<IdentityDenoiser, ScaleDenoiser, GaussianSmoothDenoiser, Tv3dDenoiser> variant;

    // True when D is linear with a symmetric matrix; only then is the
    // explicit penalty (tau/2) x^T (x - D(x)) an exact antiderivative of
    // tau (x - D(x)).
    bool is_linear_symmetric() const {
        return !std::holds_alternative<Tv3dDenoiser>(variant);
    }
};

void validate_denoiser(const DenoiserSpec& spec);

DataCube denoise(const DenoiserSpec& spec, const DataCube& x);

// Anisotropic sum of absolute forward differences along all three axes,
// replicate boundaries.
double tv3(const DataCube& x);

DataCube tv3d_prox(const DataCube& x, double lambda, std::size_t inner_iters);

// (tau/2) <x, x - D(x)>. A surrogate objective when the denoiser is not
// linear-symmetric; callers flag that via spec.is_linear_symmetric().
double red_penalty(const DenoiserSpec& spec, const DataCube& x, double tau);

// Empirical Lipschitz audit: max of |D(u)-D(v)| / |u-v| over seeded random
// pairs at unit and 1e-3 separations, a constant-direction probe, and a
// finite-difference power-iteration refinement that drives the pair toward
// the worst direction (required to actually attain the operator norm of
// linear denoisers).
double estimate_denoiser_lipschitz(const DenoiserSpec& spec, CubeDims dims,
                                   std::size_t trials, std::uint64_t seed);

}  // namespace msred
