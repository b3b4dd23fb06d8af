#include "msred/operators.hpp"

#include <cmath>
#include <string>

#include "msred/random.hpp"

namespace msred {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
    const auto sn = static_cast<std::ptrdiff_t>(n);
    std::ptrdiff_t r = i % sn;
    if (r < 0) r += sn;
    return static_cast<std::size_t>(r);
}

void require_odd(std::size_t size) {
    if (size == 0 || size % 2 == 0) {
        throw ParameterError("kernel size must be odd and positive, got " + std::to_string(size));
    }
}

void normalize(std::vector<double>& w) {
    double sum = 0.0;
    for (double v : w) sum += v;
    for (double& v : w) v /= sum;
}

}  // namespace

void validate_kernel(const Kernel2D& kernel) {
    require_odd(kernel.size);
    if (kernel.weights.size() != kernel.size * kernel.size) {
        throw ParameterError("kernel weight count does not match size");
    }
    double sum = 0.0;
    for (double v : kernel.weights) {
        if (v < 0.0) throw ParameterError("kernel weights must be nonnegative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw ParameterError("kernel weights must sum to 1, got " + std::to_string(sum));
    }
}

Kernel2D make_gaussian_kernel(std::size_t size, double sigma) {
    require_odd(size);
    if (!(sigma > 0.0)) throw ParameterError("gaussian kernel sigma must be positive");
    const auto half = static_cast<std::ptrdiff_t>(size / 2);
    Kernel2D k;
    k.size = size;
    k.weights.assign(size * size, 0.0);
    for (std::ptrdiff_t dy = -half; dy <= half; ++dy) {
        for (std::ptrdiff_t dx = -half; dx <= half; ++dx) {
            const double d2 = static_cast<double>(dy * dy + dx * dx);
            k.weights[(dy + half) * size + (dx + half)] = std::exp(-d2 / (2.0 * sigma * sigma));
        }
    }
    normalize(k.weights);
    return k;
}

Kernel2D make_motion_kernel(std::size_t length, double angle_deg, std::size_t size) {
    require_odd(size);
    if (length == 0) throw ParameterError("motion kernel length must be positive");
    if (length > size) {
        throw ParameterError("motion kernel length " + std::to_string(length) +
                             " exceeds kernel size " + std::to_string(size));
    }
    const auto half = static_cast<std::ptrdiff_t>(size / 2);
    const double theta = angle_deg * kPi / 180.0;
    Kernel2D k;
    k.size = size;
    k.weights.assign(size * size, 0.0);
    // length samples centered on 0, one per unit of arc length
    const double t0 = -0.5 * static_cast<double>(length - 1);
    for (std::size_t i = 0; i < length; ++i) {
        const double t = t0 + static_cast<double>(i);
        const auto dx = static_cast<std::ptrdiff_t>(std::lround(t * std::cos(theta)));
        const auto dy = static_cast<std::ptrdiff_t>(std::lround(t * std::sin(theta)));
        k.weights[(dy + half) * size + (dx + half)] += 1.0;
    }
    normalize(k.weights);
    return k;
}

MeasurementModel make_model(Kernel2D kernel, std::size_t scale, CubeDims input_dims) {
    validate_kernel(kernel);
    if (scale == 0) throw ParameterError("decimation factor must be positive");
    if (input_dims.voxels() == 0) throw ShapeError("model input dimensions must be positive");
    if (input_dims.height % scale != 0 || input_dims.width % scale != 0) {
        throw ParameterError("input height and width must be divisible by the decimation factor");
    }
    return MeasurementModel{std::move(kernel), scale, input_dims};
}

MeasurementVector apply(const MeasurementModel& model, const DataCube& x) {
    if (!(x.dims == model.input_dims)) {
        throw ShapeError("apply: cube dimensions do not match the model");
    }
    const std::size_t H = model.input_dims.height;
    const std::size_t W = model.input_dims.width;
    const std::size_t B = model.input_dims.bands;
    const std::size_t s = model.scale;
    const std::size_t Ho = H / s, Wo = W / s;
    const auto half = static_cast<std::ptrdiff_t>(model.kernel.size / 2);
    const std::size_t ks = model.kernel.size;

    MeasurementVector y(Ho * Wo * B);
    for (std::size_t b = 0; b < B; ++b) {
        const double* plane = x.values.data() + b * H * W;
        double* out = y.values.data() + b * Ho * Wo;
        for (std::size_t ro = 0; ro < Ho; ++ro) {
            for (std::size_t co = 0; co < Wo; ++co) {
                // convolution evaluated only on the kept lattice
                const auto r = static_cast<std::ptrdiff_t>(ro * s);
                const auto c = static_cast<std::ptrdiff_t>(co * s);
                double acc = 0.0;
                for (std::ptrdiff_t dy = -half; dy <= half; ++dy) {
                    const std::size_t rr = wrap(r - dy, H);
                    const double* wrow = model.kernel.weights.data() + (dy + half) * ks;
                    const double* xrow = plane + rr * W;
                    for (std::ptrdiff_t dx = -half; dx <= half; ++dx) {
                        acc += wrow[dx + half] * xrow[wrap(c - dx, W)];
                    }
                }
                out[ro * Wo + co] = acc;
            }
        }
    }
    return y;
}

DataCube adjoint(const MeasurementModel& model, const MeasurementVector& y) {
    if (y.size() != model.output_size()) {
        throw ShapeError("adjoint: measurement length does not match the model");
    }
    const std::size_t H = model.input_dims.height;
    const std::size_t W = model.input_dims.width;
    const std::size_t B = model.input_dims.bands;
    const std::size_t s = model.scale;
    const std::size_t Ho = H / s, Wo = W / s;
    const auto half = static_cast<std::ptrdiff_t>(model.kernel.size / 2);
    const std::size_t ks = model.kernel.size;

    DataCube x(model.input_dims);
    for (std::size_t b = 0; b < B; ++b) {
        const double* in = y.values.data() + b * Ho * Wo;
        double* plane = x.values.data() + b * H * W;
        for (std::size_t ro = 0; ro < Ho; ++ro) {
            for (std::size_t co = 0; co < Wo; ++co) {
                const double v = in[ro * Wo + co];
                if (v == 0.0) continue;
                const auto r = static_cast<std::ptrdiff_t>(ro * s);
                const auto c = static_cast<std::ptrdiff_t>(co * s);
                // scatter the measurement back through the flipped kernel
                for (std::ptrdiff_t dy = -half; dy <= half; ++dy) {
                    const std::size_t rr = wrap(r - dy, H);
                    const double* wrow = model.kernel.weights.data() + (dy + half) * ks;
                    double* xrow = plane + rr * W;
                    for (std::ptrdiff_t dx = -half; dx <= half; ++dx) {
                        xrow[wrap(c - dx, W)] += wrow[dx + half] * v;
                    }
                }
            }
        }
    }
    return x;
}

NormEstimate operator_norm(const MeasurementModel& model, std::size_t max_iters,
                           double tol, std::uint64_t seed) {
    if (max_iters == 0) throw ParameterError("operator_norm: max_iters must be >= 1");
    Rng rng(seed);
    DataCube v = random_cube(model.input_dims, rng);
    double vn = norm2(v);
    if (vn == 0.0) {
        v.values[0] = 1.0;
        vn = 1.0;
    }
    for (double& e : v.values) e /= vn;

    NormEstimate est;
    double rayleigh_prev = 0.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
        DataCube w = adjoint(model, apply(model, v));
        const double rayleigh = dot(v, w);  // v is unit norm
        const double wn = norm2(w);
        est.iterations = it + 1;
        est.value = std::sqrt(std::max(rayleigh, 0.0));
        if (wn == 0.0) {
            // v is in the null space of A; the estimate is an exact zero
            est.value = 0.0;
            est.converged = true;
            return est;
        }
        if (it > 0 && std::abs(rayleigh - rayleigh_prev) <= tol * std::max(rayleigh, 1e-300)) {
            est.converged = true;
            return est;
        }
        rayleigh_prev = rayleigh;
        for (std::size_t i = 0; i < v.size(); ++i) v.values[i] = w.values[i] / wn;
    }
    return est;
}

std::pair<MeasurementVector, double> add_awgn(const MeasurementVector& y_clean,
                                              double input_snr_db, std::uint64_t seed) {
    const double clean_norm = norm2(y_clean);
    if (clean_norm == 0.0) {
        throw DegenerateInputError("add_awgn: clean measurement has zero norm");
    }
    const auto m = static_cast<double>(y_clean.size());
    const double sigma = clean_norm / (std::sqrt(m) * std::pow(10.0, input_snr_db / 20.0));
    Rng rng(seed);
    MeasurementVector noisy = y_clean;
    for (double& v : noisy.values) v += sigma * rng.gaussian();
    return {std::move(noisy), sigma};
}

}  // namespace msred
