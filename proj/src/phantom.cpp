#include "msred/phantom.hpp"

#include <algorithm>
#include <cmath>

#include "msred/random.hpp"

namespace msred {

namespace {

double clip01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

DataCube generate_phantom(const PhantomSpec& spec) {
    if (spec.n_blobs == 0) throw ParameterError("phantom: n_blobs must be >= 1");
    if (spec.background < 0.0 || spec.background > 1.0) {
        throw ParameterError("phantom: background must lie in [0, 1]");
    }
    const std::size_t H = spec.dims.height, W = spec.dims.width, B = spec.dims.bands;
    DataCube cube(spec.dims);
    std::fill(cube.values.begin(), cube.values.end(), spec.background);

    Rng rng(spec.seed);
    for (std::size_t blob = 0; blob < spec.n_blobs; ++blob) {
        const bool rectangular = rng.uniform() < 0.5;
        const auto cr = static_cast<std::ptrdiff_t>(rng.uniform() * static_cast<double>(H));
        const auto cc = static_cast<std::ptrdiff_t>(rng.uniform() * static_cast<double>(W));
        const double amplitude = 0.3 + 0.7 * rng.uniform();
        // spectral signature: kept above zero at band 0 and gently varying
        const double c0 = 0.3 + 0.7 * rng.uniform();
        const double c1 = 0.2 * rng.uniform() - 0.1;
        const double c2 = 0.2 * rng.uniform() - 0.1;
        const double c3 = 0.2 * rng.uniform() - 0.1;
        auto signature = [&](std::size_t b) {
            const double t = B > 1 ? static_cast<double>(b) / static_cast<double>(B - 1) : 0.0;
            return clip01(c0 + c1 * t + c2 * t * t + c3 * t * t * t);
        };

        if (rectangular) {
            const auto max_half_h = std::max<std::size_t>(H / 4, 1);
            const auto max_half_w = std::max<std::size_t>(W / 4, 1);
            const auto half_h =
                1 + static_cast<std::ptrdiff_t>(rng.uniform() * static_cast<double>(max_half_h));
            const auto half_w =
                1 + static_cast<std::ptrdiff_t>(rng.uniform() * static_cast<double>(max_half_w));
            const std::size_t r0 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(cr - half_h, 0));
            const std::size_t r1 = std::min<std::size_t>(static_cast<std::size_t>(cr + half_h), H - 1);
            const std::size_t c0i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(cc - half_w, 0));
            const std::size_t c1i = std::min<std::size_t>(static_cast<std::size_t>(cc + half_w), W - 1);
            for (std::size_t b = 0; b < B; ++b) {
                const double v = amplitude * signature(b);
                for (std::size_t r = r0; r <= r1; ++r) {
                    for (std::size_t c = c0i; c <= c1i; ++c) {
                        cube.at(b, r, c) += v;
                    }
                }
            }
        } else {
            const double rho =
                1.0 + rng.uniform() * std::max(static_cast<double>(std::min(H, W)) / 6.0, 1.0);
            const double radius = 3.0 * rho;  // truncated: compact, connected support
            const auto lo_r = static_cast<std::ptrdiff_t>(std::floor(static_cast<double>(cr) - radius));
            const auto hi_r = static_cast<std::ptrdiff_t>(std::ceil(static_cast<double>(cr) + radius));
            const auto lo_c = static_cast<std::ptrdiff_t>(std::floor(static_cast<double>(cc) - radius));
            const auto hi_c = static_cast<std::ptrdiff_t>(std::ceil(static_cast<double>(cc) + radius));
            for (std::ptrdiff_t r = std::max<std::ptrdiff_t>(lo_r, 0);
                 r <= std::min<std::ptrdiff_t>(hi_r, static_cast<std::ptrdiff_t>(H) - 1); ++r) {
                for (std::ptrdiff_t c = std::max<std::ptrdiff_t>(lo_c, 0);
                     c <= std::min<std::ptrdiff_t>(hi_c, static_cast<std::ptrdiff_t>(W) - 1); ++c) {
                    const double d2 = static_cast<double>((r - cr) * (r - cr) + (c - cc) * (c - cc));
                    if (d2 > radius * radius) continue;
                    const double profile = std::exp(-d2 / (2.0 * rho * rho));
                    for (std::size_t b = 0; b < B; ++b) {
                        cube.at(b, static_cast<std::size_t>(r), static_cast<std::size_t>(c)) +=
                            amplitude * profile * signature(b);
                    }
                }
            }
        }
    }

    for (double& v : cube.values) v = clip01(v);
    return cube;
}

}  // namespace msred
