#include "msred/datacube.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

namespace msred {

namespace {

void require_positive_dims(const CubeDims& d) {
    if (d.height == 0 || d.width == 0 || d.bands == 0) {
        throw ShapeError("cube dimensions must be positive, got " +
                         std::to_string(d.height) + "x" + std::to_string(d.width) +
                         "x" + std::to_string(d.bands));
    }
}

void put_u32_le(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> b = {
        static_cast<char>(v & 0xff),
        static_cast<char>((v >> 8) & 0xff),
        static_cast<char>((v >> 16) & 0xff),
        static_cast<char>((v >> 24) & 0xff),
    };
    out.write(b.data(), b.size());
}

void put_f64_le(std::ostream& out, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    std::array<char, 8> b;
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b.data(), b.size());
}

std::uint32_t get_u32_le(std::istream& in) {
    std::array<unsigned char, 4> b;
    if (!in.read(reinterpret_cast<char*>(b.data()), b.size())) {
        throw FormatError("MSD stream truncated inside header");
    }
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

DataCube::DataCube(CubeDims d) : dims(d), values(d.voxels(), 0.0) {
    require_positive_dims(d);
}

DataCube::DataCube(CubeDims d, std::vector<double> v) : dims(d), values(std::move(v)) {
    require_positive_dims(d);
    if (values.size() != d.voxels()) {
        throw ShapeError("cube value count " + std::to_string(values.size()) +
                         " does not match dimensions (" + std::to_string(d.voxels()) +
                         " expected)");
    }
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

bool all_finite(std::span<const double> a) {
    for (double v : a) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double snr_db(const DataCube& reference, const DataCube& estimate) {
    if (!(reference.dims == estimate.dims)) {
        throw ShapeError("snr_db: reference and estimate dimensions differ");
    }
    const double ref_norm = norm2(reference);
    if (ref_norm == 0.0) {
        throw DegenerateInputError("snr_db: reference has zero norm");
    }
    double err_sq = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        const double d = reference.values[i] - estimate.values[i];
        err_sq += d * d;
    }
    if (err_sq == 0.0) return std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(ref_norm / std::sqrt(err_sq));
}

std::size_t write_msd(const DataCube& cube, std::ostream& sink) {
    require_positive_dims(cube.dims);
    if (cube.values.size() != cube.dims.voxels()) {
        throw ShapeError("write_msd: cube violates its size invariant");
    }
    if (!all_finite(cube)) {
        throw ShapeError("write_msd: cube contains non-finite values");
    }
    sink.write("MSD1", 4);
    put_u32_le(sink, static_cast<std::uint32_t>(cube.dims.height));
    put_u32_le(sink, static_cast<std::uint32_t>(cube.dims.width));
    put_u32_le(sink, static_cast<std::uint32_t>(cube.dims.bands));
    for (double v : cube.values) put_f64_le(sink, v);
    if (!sink) throw IoError("write_msd: sink write failure");
    return 16 + 8 * cube.size();
}

DataCube read_msd(std::istream& source) {
    std::array<char, 4> magic;
    if (!source.read(magic.data(), magic.size())) {
        throw FormatError("MSD stream too short for magic");
    }
    if (std::memcmp(magic.data(), "MSD1", 4) != 0) {
        throw FormatError("not an MSD1 stream (bad magic)");
    }
    const std::uint32_t h = get_u32_le(source);
    const std::uint32_t w = get_u32_le(source);
    const std::uint32_t b = get_u32_le(source);
    if (h == 0 || w == 0 || b == 0) {
        throw FormatError("MSD header declares a zero dimension");
    }
    const std::size_t count =
        static_cast<std::size_t>(h) * static_cast<std::size_t>(w) * static_cast<std::size_t>(b);
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::array<unsigned char, 8> raw;
        if (!source.read(reinterpret_cast<char*>(raw.data()), raw.size())) {
            throw FormatError("MSD payload truncated at value " + std::to_string(i) +
                              " of " + std::to_string(count));
        }
        std::uint64_t bits = 0;
        for (int j = 0; j < 8; ++j) bits |= static_cast<std::uint64_t>(raw[j]) << (8 * j);
        values[i] = std::bit_cast<double>(bits);
    }
    if (!all_finite(values)) {
        throw FormatError("MSD payload contains non-finite values");
    }
    return DataCube({h, w, b}, std::move(values));
}

std::size_t write_msd_file(const DataCube& cube, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    const std::size_t n = write_msd(cube, out);
    out.flush();
    if (!out) throw IoError("write failure: " + path.string());
    return n;
}

DataCube read_msd_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    DataCube cube = read_msd(in);
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError("trailing bytes after MSD payload: " + path.string());
    }
    return cube;
}

}  // namespace msred
