#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace faceforge {

// 8-bit RGB raster, row-major, origin at the top-left pixel.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // width * height * 3

    Image() = default;
    Image(int w, int h) : width(w), height(h), rgb(std::size_t(w) * h * 3, 0) {}

    std::uint8_t& at(int x, int y, int c) {
        return rgb[(std::size_t(y) * width + x) * 3 + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return rgb[(std::size_t(y) * width + x) * 3 + c];
    }

    bool operator==(const Image&) const = default;
};

// Float RGB raster in [0,1] (not clamped), same layout as Image.
struct ImageF {
    int width = 0;
    int height = 0;
    std::vector<double> rgb;

    ImageF() = default;
    ImageF(int w, int h) : width(w), height(h), rgb(std::size_t(w) * h * 3, 0.0) {}

    double& at(int x, int y, int c) {
        return rgb[(std::size_t(y) * width + x) * 3 + c];
    }
    double at(int x, int y, int c) const {
        return rgb[(std::size_t(y) * width + x) * 3 + c];
    }
};

// Clamp to [0,1] and quantize with round-half-up.
Image quantize(const ImageF& img);

// Minimal PNG codec over zlib: 8-bit RGB, non-interlaced output; the reader
// additionally accepts 8-bit grayscale and RGBA and all five scanline
// filters. Encoding is byte-deterministic for a given image.
std::vector<std::uint8_t> png_encode(const Image& img);
Image png_decode(const std::vector<std::uint8_t>& bytes);

void png_write(const std::string& path, const Image& img);
Image png_read(const std::string& path);

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);

} // namespace faceforge
