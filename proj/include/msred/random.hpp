#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "msred/datacube.hpp"

namespace msred {

// Seeded generator used everywhere randomness is needed. mt19937_64 output is
// fixed by the standard and the Box-Muller transform below avoids the
// implementation-defined std::normal_distribution, so one seed gives one
// byte-exact stream on every platform this builds on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // uniform in [0, 1), 53-bit resolution
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller, second deviate cached
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

inline DataCube random_cube(CubeDims dims, Rng& rng) {
    DataCube cube(dims);
    for (double& v : cube.values) v = rng.gaussian();
    return cube;
}

}  // namespace msred
