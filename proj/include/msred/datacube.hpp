#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "msred/errors.hpp"

namespace msred {

struct CubeDims {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t bands = 0;

    std::size_t voxels() const { return height * width * bands; }
    bool operator==(const CubeDims&) const = default;
};

// Multispectral cube stored flat, band-major: index = band*H*W + row*W + col.
// Values are always binary64; every other module builds on this layout.
struct DataCube {
    CubeDims dims;
    std::vector<double> values;

    DataCube() = default;
    explicit DataCube(CubeDims d);
    DataCube(CubeDims d, std::vector<double> v);

    std::size_t size() const { return values.size(); }

    std::size_t index(std::size_t band, std::size_t row, std::size_t col) const {
        return (band * dims.height + row) * dims.width + col;
    }
    double& at(std::size_t band, std::size_t row, std::size_t col) {
        return values[index(band, row, col)];
    }
    double at(std::size_t band, std::size_t row, std::size_t col) const {
        return values[index(band, row, col)];
    }
};

struct MeasurementVector {
    std::vector<double> values;

    MeasurementVector() = default;
    explicit MeasurementVector(std::vector<double> v) : values(std::move(v)) {}
    explicit MeasurementVector(std::size_t n) : values(n, 0.0) {}

    std::size_t size() const { return values.size(); }
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

inline double dot(const DataCube& a, const DataCube& b) { return dot(std::span<const double>(a.values), std::span<const double>(b.values)); }
inline double norm2(const DataCube& a) { return norm2(std::span<const double>(a.values)); }
inline double norm2(const MeasurementVector& a) { return norm2(std::span<const double>(a.values)); }

bool all_finite(std::span<const double> a);
inline bool all_finite(const DataCube& a) { return all_finite(std::span<const double>(a.values)); }

// 20*log10(|reference| / |reference - estimate|); +infinity when the error
// norm is exactly zero. Throws ShapeError on dimension mismatch and
// DegenerateInputError when the reference norm is zero.
double snr_db(const DataCube& reference, const DataCube& estimate);

// MSD container: "MSD1", three uint32 LE (H, W, B), then H*W*B float64 LE,
// band-major. No padding, no trailer. Returns the number of bytes written,
// always 16 + 8*H*W*B.
std::size_t write_msd(const DataCube& cube, std::ostream& sink);
DataCube read_msd(std::istream& source);

std::size_t write_msd_file(const DataCube& cube, const std::filesystem::path& path);
// Rejects trailing bytes after the payload: a file holds exactly one cube.
DataCube read_msd_file(const std::filesystem::path& path);

}  // namespace msred
