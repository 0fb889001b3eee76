#include "faceforge/image.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <zlib.h>

#include "faceforge/common.hpp"

namespace faceforge {

Image quantize(const ImageF& img) {
    Image out(img.width, img.height);
    for (std::size_t i = 0; i < img.rgb.size(); ++i) {
        double v = img.rgb[i];
        v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
        out.rgb[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    return out;
}

namespace {

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v >> 24));
    out.push_back(std::uint8_t(v >> 16));
    out.push_back(std::uint8_t(v >> 8));
    out.push_back(std::uint8_t(v));
}

std::uint32_t get_u32_be(const std::uint8_t* p) {
    return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
           (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& data) {
    put_u32_be(out, std::uint32_t(data.size()));
    std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    std::uint32_t crc = std::uint32_t(
        ::crc32(0, out.data() + crc_start, uInt(out.size() - crc_start)));
    put_u32_be(out, crc);
}

constexpr std::uint8_t kPngSignature[8] = {137, 80, 78, 71, 13, 10, 26, 10};

int paeth(int a, int b, int c) {
    int p = a + b - c;
    int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

} // namespace

std::vector<std::uint8_t> png_encode(const Image& img) {
    require(img.width > 0 && img.height > 0, ErrorKind::Shape, "png_encode: empty image");

    std::vector<std::uint8_t> out(kPngSignature, kPngSignature + 8);

    std::vector<std::uint8_t> ihdr;
    put_u32_be(ihdr, std::uint32_t(img.width));
    put_u32_be(ihdr, std::uint32_t(img.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type: truecolor RGB
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter method
    ihdr.push_back(0);  // interlace
    append_chunk(out, "IHDR", ihdr);

    // Filter type 0 on every scanline; determinism matters more than size.
    std::size_t stride = std::size_t(img.width) * 3;
    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * img.height);
    for (int y = 0; y < img.height; ++y) {
        raw.push_back(0);
        const std::uint8_t* row = img.rgb.data() + std::size_t(y) * stride;
        raw.insert(raw.end(), row, row + stride);
    }

    uLongf bound = ::compressBound(uLong(raw.size()));
    std::vector<std::uint8_t> compressed(bound);
    int rc = ::compress2(compressed.data(), &bound, raw.data(), uLong(raw.size()), 6);
    require(rc == Z_OK, ErrorKind::Io, "png_encode: zlib compress failed");
    compressed.resize(bound);
    append_chunk(out, "IDAT", compressed);

    append_chunk(out, "IEND", {});
    return out;
}

Image png_decode(const std::vector<std::uint8_t>& bytes) {
    require(bytes.size() > 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0,
            ErrorKind::Io, "png_decode: not a PNG stream");

    std::size_t pos = 8;
    std::uint32_t width = 0, height = 0;
    int color_type = -1;
    std::vector<std::uint8_t> idat;
    bool seen_end = false;

    while (pos + 12 <= bytes.size() && !seen_end) {
        std::uint32_t len = get_u32_be(bytes.data() + pos);
        require(pos + 12 + len <= bytes.size(), ErrorKind::Io, "png_decode: truncated chunk");
        std::string type(bytes.begin() + pos + 4, bytes.begin() + pos + 8);
        const std::uint8_t* data = bytes.data() + pos + 8;
        if (type == "IHDR") {
            require(len == 13, ErrorKind::Io, "png_decode: bad IHDR");
            width = get_u32_be(data);
            height = get_u32_be(data + 4);
            int bit_depth = data[8];
            color_type = data[9];
            require(bit_depth == 8, ErrorKind::Unsupported, "png_decode: only 8-bit supported");
            require(color_type == 0 || color_type == 2 || color_type == 6,
                    ErrorKind::Unsupported, "png_decode: unsupported color type");
            require(data[12] == 0, ErrorKind::Unsupported, "png_decode: interlacing unsupported");
        } else if (type == "IDAT") {
            idat.insert(idat.end(), data, data + len);
        } else if (type == "IEND") {
            seen_end = true;
        }
        pos += 12 + len;
    }
    require(width > 0 && height > 0 && !idat.empty(), ErrorKind::Io, "png_decode: missing data");

    int channels = color_type == 0 ? 1 : (color_type == 2 ? 3 : 4);
    std::size_t stride = std::size_t(width) * channels;
    std::vector<std::uint8_t> raw((stride + 1) * height);
    uLongf raw_len = uLongf(raw.size());
    int rc = ::uncompress(raw.data(), &raw_len, idat.data(), uLong(idat.size()));
    require(rc == Z_OK && raw_len == raw.size(), ErrorKind::Io, "png_decode: inflate failed");

    // Undo per-scanline filters in place.
    std::vector<std::uint8_t> prev(stride, 0);
    Image img{int(width), int(height)};
    for (std::uint32_t y = 0; y < height; ++y) {
        std::uint8_t* line = raw.data() + std::size_t(y) * (stride + 1);
        int filter = line[0];
        std::uint8_t* cur = line + 1;
        for (std::size_t i = 0; i < stride; ++i) {
            int a = i >= std::size_t(channels) ? cur[i - channels] : 0;
            int b = prev[i];
            int c = i >= std::size_t(channels) ? prev[i - channels] : 0;
            int x = cur[i];
            switch (filter) {
            case 0: break;
            case 1: x += a; break;
            case 2: x += b; break;
            case 3: x += (a + b) / 2; break;
            case 4: x += paeth(a, b, c); break;
            default:
                throw Error(ErrorKind::Io, "png_decode: bad filter type");
            }
            cur[i] = std::uint8_t(x);
        }
        std::memcpy(prev.data(), cur, stride);
        for (std::uint32_t x = 0; x < width; ++x) {
            std::uint8_t r, g, bch;
            if (channels == 1) {
                r = g = bch = cur[x];
            } else {
                r = cur[x * channels];
                g = cur[x * channels + 1];
                bch = cur[x * channels + 2];
            }
            img.at(int(x), int(y), 0) = r;
            img.at(int(x), int(y), 1) = g;
            img.at(int(x), int(y), 2) = bch;
        }
    }
    return img;
}

void png_write(const std::string& path, const Image& img) {
    write_file_bytes(path, png_encode(img));
}

Image png_read(const std::string& path) {
    return png_decode(read_file_bytes(path));
}

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorKind::Io, "cannot open for read: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorKind::Io, "cannot open for write: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              std::streamsize(bytes.size()));
    require(out.good(), ErrorKind::Io, "write failed: " + path);
}

} // namespace faceforge
