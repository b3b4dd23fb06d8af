#include "msred/denoisers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "msred/random.hpp"

namespace msred {

namespace {

// Circular 1D convolution with symmetric taps along one cube axis.
// Lines are addressed as start + i*stride, i in [0, len).
void convolve_axis(std::vector<double>& data, std::vector<double>& scratch,
                   const std::vector<double>& taps, std::size_t len, std::size_t stride,
                   std::size_t n_lines, const std::vector<std::size_t>& line_starts) {
    const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
    const auto slen = static_cast<std::ptrdiff_t>(len);
    for (std::size_t li = 0; li < n_lines; ++li) {
        const std::size_t start = line_starts[li];
        for (std::ptrdiff_t i = 0; i < slen; ++i) {
            double acc = 0.0;
            for (std::ptrdiff_t t = -radius; t <= radius; ++t) {
                std::ptrdiff_t j = (i - t) % slen;
                if (j < 0) j += slen;
                acc += taps[t + radius] * data[start + static_cast<std::size_t>(j) * stride];
            }
            scratch[static_cast<std::size_t>(i)] = acc;
        }
        for (std::ptrdiff_t i = 0; i < slen; ++i) {
            data[start + static_cast<std::size_t>(i) * stride] = scratch[static_cast<std::size_t>(i)];
        }
    }
}

std::vector<double> gaussian_taps(double sigma) {
    const auto radius = static_cast<std::size_t>(std::ceil(4.0 * sigma));
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const double t = static_cast<double>(i) - static_cast<double>(radius);
        taps[i] = std::exp(-t * t / (2.0 * sigma * sigma));
        sum += taps[i];
    }
    for (double& v : taps) v /= sum;
    return taps;
}

DataCube gaussian_smooth(const GaussianSmoothDenoiser& g, const DataCube& x) {
    DataCube out = x;
    const std::size_t H = x.dims.height, W = x.dims.width, B = x.dims.bands;
    std::vector<double> scratch(std::max({H, W, B}));
    if (g.sigma_spatial > 0.0) {
        const std::vector<double> taps = gaussian_taps(g.sigma_spatial);
        // columns: one line per (band, row)
        std::vector<std::size_t> starts;
        starts.reserve(B * H);
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t r = 0; r < H; ++r) starts.push_back((b * H + r) * W);
        convolve_axis(out.values, scratch, taps, W, 1, starts.size(), starts);
        // rows: one line per (band, column)
        starts.clear();
        for (std::size_t b = 0; b < B; ++b)
            for (std::size_t c = 0; c < W; ++c) starts.push_back(b * H * W + c);
        convolve_axis(out.values, scratch, taps, H, W, starts.size(), starts);
    }
    if (g.sigma_spectral > 0.0) {
        const std::vector<double> taps = gaussian_taps(g.sigma_spectral);
        std::vector<std::size_t> starts;
        starts.reserve(H * W);
        for (std::size_t i = 0; i < H * W; ++i) starts.push_back(i);
        convolve_axis(out.values, scratch, taps, B, H * W, starts.size(), starts);
    }
    return out;
}

}  // namespace

void validate_denoiser(const DenoiserSpec& spec) {
    if (const auto* g = std::get_if<GaussianSmoothDenoiser>(&spec.variant)) {
        if (g->sigma_spatial < 0.0 || g->sigma_spectral < 0.0) {
            throw ParameterError("gaussian_smooth sigmas must be nonnegative");
        }
    } else if (const auto* t = std::get_if<Tv3dDenoiser>(&spec.variant)) {
        if (t->lambda < 0.0) throw ParameterError("tv3d lambda must be nonnegative");
        if (t->inner_iters == 0) throw ParameterError("tv3d inner_iters must be >= 1");
    }
}

double tv3(const DataCube& x) {
    const std::size_t H = x.dims.height, W = x.dims.width, B = x.dims.bands;
    double acc = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t r = 0; r < H; ++r) {
            for (std::size_t c = 0; c < W; ++c) {
                const double v = x.at(b, r, c);
                if (c + 1 < W) acc += std::abs(x.at(b, r, c + 1) - v);
                if (r + 1 < H) acc += std::abs(x.at(b, r + 1, c) - v);
                if (b + 1 < B) acc += std::abs(x.at(b + 1, r, c) - v);
            }
        }
    }
    return acc;
}

DataCube tv3d_prox(const DataCube& x, double lambda, std::size_t inner_iters) {
    if (lambda < 0.0) throw ParameterError("tv3d_prox: lambda must be nonnegative");
    const std::size_t H = x.dims.height, W = x.dims.width, B = x.dims.bands;
    const std::size_t n = x.size();
    const std::size_t plane = H * W;

    // one dual field per axis; only entries whose axis index is below the
    // last position are used (replicate boundary)
    std::vector<double> pc(n, 0.0), pr(n, 0.0), pb(n, 0.0);
    std::vector<double> z(n);
    const double step = 1.0 / 12.0;  // 1 / upper bound on |grad|^2 in 3D

    // z = x + p - (p shifted forward), accumulated over the three axes
    auto primal = [&](std::vector<double>& out) {
        for (std::size_t i = 0; i < n; ++i) out[i] = x.values[i];
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t r = 0; r < H; ++r) {
                const std::size_t row = (b * H + r) * W;
                for (std::size_t c = 0; c + 1 < W; ++c) {
                    const double v = pc[row + c];
                    out[row + c] += v;
                    out[row + c + 1] -= v;
                }
            }
            for (std::size_t r = 0; r + 1 < H; ++r) {
                const std::size_t row = (b * H + r) * W;
                for (std::size_t c = 0; c < W; ++c) {
                    const double v = pr[row + c];
                    out[row + c] += v;
                    out[row + c + W] -= v;
                }
            }
        }
        for (std::size_t b = 0; b + 1 < B; ++b) {
            const std::size_t base = b * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                const double v = pb[base + i];
                out[base + i] += v;
                out[base + i + plane] -= v;
            }
        }
    };

    for (std::size_t it = 0; it < inner_iters; ++it) {
        primal(z);
        // dual ascent on each axis, clamped to [-lambda, lambda]
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t r = 0; r < H; ++r) {
                const std::size_t row = (b * H + r) * W;
                for (std::size_t c = 0; c + 1 < W; ++c) {
                    pc[row + c] = std::clamp(pc[row + c] + step * (z[row + c + 1] - z[row + c]),
                                             -lambda, lambda);
                }
            }
            for (std::size_t r = 0; r + 1 < H; ++r) {
                const std::size_t row = (b * H + r) * W;
                for (std::size_t c = 0; c < W; ++c) {
                    pr[row + c] = std::clamp(pr[row + c] + step * (z[row + c + W] - z[row + c]),
                                             -lambda, lambda);
                }
            }
        }
        for (std::size_t b = 0; b + 1 < B; ++b) {
            const std::size_t base = b * plane;
            for (std::size_t i = 0; i < plane; ++i) {
                pb[base + i] = std::clamp(pb[base + i] + step * (z[base + i + plane] - z[base + i]),
                                          -lambda, lambda);
            }
        }
    }

    DataCube out(x.dims);
    primal(out.values);
    return out;
}

DataCube denoise(const DenoiserSpec& spec, const DataCube& x) {
    validate_denoiser(spec);
    return std::visit(
        [&](const auto& d) -> DataCube {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, IdentityDenoiser>) {
                return x;
            } else if constexpr (std::is_same_v<T, ScaleDenoiser>) {
                DataCube out = x;
                for (double& v : out.values) v *= d.alpha;
                return out;
            } else if constexpr (std::is_same_v<T, GaussianSmoothDenoiser>) {
                return gaussian_smooth(d, x);
            } else {
                return tv3d_prox(x, d.lambda, d.inner_iters);
            }
        },
        spec.variant);
}

double red_penalty(const DenoiserSpec& spec, const DataCube& x, double tau) {
    if (tau < 0.0) throw ParameterError("red_penalty: tau must be nonnegative");
    const DataCube dx = denoise(spec, x);
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        acc += x.values[i] * (x.values[i] - dx.values[i]);
    }
    return 0.5 * tau * acc;
}

double estimate_denoiser_lipschitz(const DenoiserSpec& spec, CubeDims dims,
                                   std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw ParameterError("estimate_denoiser_lipschitz: trials must be >= 1");
    validate_denoiser(spec);
    Rng rng(seed);
    const std::size_t n = dims.voxels();

    auto pair_ratio = [&](const DataCube& u, const DataCube& du, const DataCube& v,
                          const DataCube& dv) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dn = du.values[i] - dv.values[i];
            const double dd = u.values[i] - v.values[i];
            num += dn * dn;
            den += dd * dd;
        }
        return den == 0.0 ? 0.0 : std::sqrt(num / den);
    };
    auto ratio = [&](const DataCube& u, const DataCube& du, const DataCube& v) {
        return pair_ratio(u, du, v, denoise(spec, v));
    };

    double best = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        DataCube u = random_cube(dims, rng);
        const DataCube du = denoise(spec, u);
        DataCube dir = random_cube(dims, rng);
        const double dn = norm2(dir);
        for (double& v : dir.values) v /= dn;
        for (double eps : {1.0, 1e-3}) {
            DataCube v = u;
            for (std::size_t i = 0; i < n; ++i) v.values[i] += eps * dir.values[i];
            best = std::max(best, ratio(u, du, v));
        }
    }

    // Constant shifts are the worst direction for every smoothing-type
    // denoiser; probe them explicitly.
    {
        DataCube u = random_cube(dims, rng);
        const DataCube du = denoise(spec, u);
        DataCube v = u;
        const double shift = 1.0 / std::sqrt(static_cast<double>(n));
        for (double& e : v.values) e += shift;
        best = std::max(best, ratio(u, du, v));
    }

    // Power-iteration refinement of the local difference map around a random
    // base point; for a linear denoiser this converges to the operator norm.
    {
        const DataCube base = random_cube(dims, rng);
        const DataCube dbase = denoise(spec, base);
        DataCube w = random_cube(dims, rng);
        double wn = norm2(w);
        for (double& e : w.values) e /= wn;
        const double eps = 1e-3;
        for (int it = 0; it < 120; ++it) {
            DataCube v = base;
            for (std::size_t i = 0; i < n; ++i) v.values[i] += eps * w.values[i];
            const DataCube dv = denoise(spec, v);
            best = std::max(best, pair_ratio(base, dbase, v, dv));
            DataCube delta(dims);
            for (std::size_t i = 0; i < n; ++i) {
                delta.values[i] = dv.values[i] - dbase.values[i];
            }
            const double dn = norm2(delta);
            if (dn == 0.0) break;
            for (std::size_t i = 0; i < n; ++i) w.values[i] = delta.values[i] / dn;
        }
    }
    return best;
}

}  // namespace msred
