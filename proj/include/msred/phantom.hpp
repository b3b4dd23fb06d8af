#pragma once

#include <cstdint>

#include "msred/datacube.hpp"

namespace msred {

struct PhantomSpec {
    std::uint64_t seed = 0;
    CubeDims dims;
    std::size_t n_blobs = 4;
    double background = 0.15;  // in [0, 1]
};

// Deterministic synthetic ground truth: a background plus n_blobs rectangles
// and truncated Gaussian bumps at seeded positions. Each blob carries a
// smooth spectral signature, a cubic polynomial in the normalized band index
// with c0 in [0.3, 1] and |c1|,|c2|,|c3| <= 0.1, so bands are strongly
// correlated. All values are clipped to [0, 1].
DataCube generate_phantom(const PhantomSpec& spec);

}  // namespace msred
