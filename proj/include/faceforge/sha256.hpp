#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace faceforge {

// Incremental SHA-256 (FIPS 180-4). Used for content digests in the render
// manifest and for latent digests.
class Sha256 {
public:
    Sha256();

    void update(const void* data, std::size_t len);
    std::array<std::uint8_t, 32> finish();

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_;
    std::array<std::uint8_t, 64> buffer_;
    std::size_t buffered_ = 0;
    std::uint64_t total_bits_ = 0;
};

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);
std::string sha256_file_hex(const std::string& path);

} // namespace faceforge
