#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "msred/datacube.hpp"

namespace msred {

// Odd-sized normalized 2D tap grid, row-major, center at (size/2, size/2).
struct Kernel2D {
    std::size_t size = 1;
    std::vector<double> weights = {1.0};

    double at(std::size_t row, std::size_t col) const { return weights[row * size + col]; }
};

// Throws ParameterError unless size is odd, weights are nonnegative and the
// weight sum is 1 within 1e-12.
void validate_kernel(const Kernel2D& kernel);

Kernel2D make_gaussian_kernel(std::size_t size, double sigma);

// Straight line of `length` samples through the grid center at `angle_deg`,
// rasterized nearest-neighbor with uniform weights.
Kernel2D make_motion_kernel(std::size_t length, double angle_deg, std::size_t size);

// y = A x with A = (decimate by s) o (circular spatial convolution), applied
// band by band. H and W must be divisible by s.
struct MeasurementModel {
    Kernel2D kernel;
    std::size_t scale = 1;
    CubeDims input_dims;

    CubeDims output_dims() const {
        return {input_dims.height / scale, input_dims.width / scale, input_dims.bands};
    }
    std::size_t output_size() const { return output_dims().voxels(); }
};

MeasurementModel make_model(Kernel2D kernel, std::size_t scale, CubeDims input_dims);

MeasurementVector apply(const MeasurementModel& model, const DataCube& x);

// Exact adjoint of apply: zero-fill upsampling then circular correlation.
DataCube adjoint(const MeasurementModel& model, const MeasurementVector& y);

struct NormEstimate {
    double value = 0.0;  // estimate of sigma_max(A)
    bool converged = false;
    std::size_t iterations = 0;
};

// Power iteration on A^T A from a seeded random start.
NormEstimate operator_norm(const MeasurementModel& model, std::size_t max_iters,
                           double tol, std::uint64_t seed);

// Adds i.i.d. zero-mean Gaussian noise with
//   sigma = |y|_2 / (sqrt(m) * 10^(snr_db/20)),
// so the expected measurement SNR equals input_snr_db. Returns the noisy
// vector and sigma.
std::pair<MeasurementVector, double> add_awgn(const MeasurementVector& y_clean,
                                              double input_snr_db, std::uint64_t seed);

}  // namespace msred
