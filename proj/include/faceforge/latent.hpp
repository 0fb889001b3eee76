#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace faceforge {

inline constexpr int kLatentDim = 512;
inline constexpr int kLatentRows = 18;

// Raw 512-dim standard-normal latent, together with the seed that produced
// it. Same seed, same vector, bit for bit.
struct LatentZ {
    std::vector<double> values; // length 512
    std::uint64_t seed = 0;
};

enum class LatentSource { MappedFromZ, InvertedFromImage, Edited };

const char* latent_source_name(LatentSource s);
LatentSource latent_source_from_name(const std::string& name);

// Intermediate (18, 512) latent; the unit of all editing. Stored flat,
// row-major.
struct LatentW {
    std::vector<double> rows; // 18 * 512
    LatentSource source = LatentSource::MappedFromZ;

    LatentW() : rows(std::size_t(kLatentRows) * kLatentDim, 0.0) {}

    double* row(int r) { return rows.data() + std::size_t(r) * kLatentDim; }
    const double* row(int r) const { return rows.data() + std::size_t(r) * kLatentDim; }

    bool operator==(const LatentW&) const = default;
};

// Half-open row interval [lo, hi) within the 18 latent rows.
struct LayerRange {
    int lo = 0;
    int hi = kLatentRows;

    LayerRange() = default;
    LayerRange(int lo_, int hi_);

    bool contains(int row) const { return row >= lo && row < hi; }
    bool operator==(const LayerRange&) const = default;
};

// Unit vector in latent space naming one attribute. The vector is either
// 512 entries (broadcast to every row inside layers) or 18*512 entries
// (applied row-wise). Unit Euclidean norm is enforced at construction.
struct SemanticDirection {
    std::string name;
    std::vector<double> vec; // 512 or 18*512
    LayerRange layers;
    double classifier_accuracy = 0.0;

    SemanticDirection() = default;
    SemanticDirection(std::string name, std::vector<double> vec, LayerRange layers,
                      double classifier_accuracy = 0.0);

    bool per_row() const { return vec.size() == std::size_t(kLatentRows) * kLatentDim; }
};

struct EditSpec {
    SemanticDirection direction;
    double coeff_start = 0.0;
    double coeff_end = 1.0;
    int frames = 1;
};

// 512 standard-normal draws from the project PRNG (see rng.hpp).
LatentZ sample_z(std::uint64_t seed);

// w_avg + psi * (w - w_avg), elementwise.
LatentW truncate(const LatentW& w, const LatentW& w_avg, double psi);

// w + coeff * direction on rows inside direction.layers; other rows are
// copied untouched. coeff == 0 returns the input bitwise (source flips to
// Edited either way).
LatentW apply_direction(const LatentW& w, const SemanticDirection& direction, double coeff);

// Rows inside layer_range come from donor, the rest from source.
LatentW mix_styles(const LatentW& source, const LatentW& donor, LayerRange layer_range);

// frames latents at coefficients linearly spaced over
// [coeff_start, coeff_end], inclusive; a single frame sits at coeff_end.
std::vector<LatentW> edit_sequence(const LatentW& w, const EditSpec& spec);

std::vector<double> edit_coefficients(const EditSpec& spec);

// SHA-256 over the latent rows (little-endian doubles) plus the source tag.
std::string latent_digest(const LatentW& w);

// Latent store: one directory per subject holding latent.bin/latent.json
// with float32 arrays "z" (512, optional) and "w" (18x512).
void save_latents(const std::string& subject_dir, const std::optional<LatentZ>& z,
                  const LatentW& w);
struct StoredLatents {
    std::optional<LatentZ> z;
    LatentW w;
};
StoredLatents load_latents(const std::string& subject_dir);

// Direction store: <dir>/<name>.bin/.json, vector kept as float64 so the
// unit-norm invariant survives a round trip.
void save_direction(const std::string& store_dir, const SemanticDirection& d);
SemanticDirection load_direction(const std::string& store_dir, const std::string& name);

} // namespace faceforge
