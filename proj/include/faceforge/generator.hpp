#pragma once

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "faceforge/image.hpp"
#include "faceforge/landmarks.hpp"
#include "faceforge/latent.hpp"

namespace faceforge {

struct RenderedImage {
    Image pixels;
    std::string latent_digest;
};

// Frozen image generator abstraction. Implementations must be immutable
// after construction and safe to call from many threads; synthesize is a
// pure function of (backend identity, w).
class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;

    virtual std::string name() const = 0;
    virtual std::pair<int, int> output_size() const = 0; // (height, width)
    virtual const LatentW& w_avg() const = 0;
    virtual LatentW map_z_to_w(const LatentZ& z) const = 0;
    virtual RenderedImage synthesize(const LatentW& w) const = 0;

    // Ground-truth landmarks; only oracle backends provide these.
    virtual LandmarkSet landmarks(const LatentW&) const;

    // Unquantized render for optimization-based inversion.
    virtual ImageF render_continuous(const LatentW&) const;

    // Orthonormal latent directions that span the backend's dependence on
    // the broadcast latent; empty means "probe every coordinate".
    virtual std::vector<std::vector<double>> probe_directions() const { return {}; }
};

// Verification oracle with known linear attribute semantics.
struct ToyFaceSpec {
    std::map<std::string, std::vector<double>> ground_truth_directions;
    std::vector<std::string> attributes;
    int landmark_count = 68;
};

// Face parameters extracted from a latent. attrs holds the 13 scalar
// controls, each quantized to 8 bits so that the in-image metadata strip
// reproduces them exactly. center_x/center_y are derived from attrs[11,12]
// but may be overridden to translate the face rigidly.
struct ToyParams {
    std::array<double, 13> attrs{};    // values in [0,1]
    std::array<double, 64> identity{}; // clamped to [-4,4], 8-bit grid
    double center_x = 0.0;             // pixels
    double center_y = 0.0;
};

// Procedural face generator: maps the latent through fixed orthonormal
// linear functionals to face parameters (sigmoid-squashed), then renders a
// parametric face with anti-aliased edges. Row semantics follow the usual
// style-generator convention: rows [0,8) drive geometry, rows [8,18) drive
// color. A metadata strip in the top-left corner records the quantized
// parameters and the identity projection, which is what the toy annotator,
// embedder and normal estimator read back.
class ToyGenerator final : public GeneratorBackend {
public:
    static constexpr int kAttrCount = 13;
    static constexpr int kIdentityDim = 64;
    static constexpr int kGeometryRowsEnd = 8; // rows [0,8) geometry, [8,18) color

    explicit ToyGenerator(int size = 256);

    std::string name() const override { return "toy"; }
    std::pair<int, int> output_size() const override { return {size_, size_}; }
    const LatentW& w_avg() const override { return w_avg_; }
    LatentW map_z_to_w(const LatentZ& z) const override;
    RenderedImage synthesize(const LatentW& w) const override;
    LandmarkSet landmarks(const LatentW& w) const override;
    ImageF render_continuous(const LatentW& w) const override;
    std::vector<std::vector<double>> probe_directions() const override;

    const ToyFaceSpec& spec() const { return spec_; }

    // Attribute names in strip order; "happy" is an alias of "smile".
    static const std::vector<std::string>& attribute_names();
    static int attribute_index(const std::string& name);

    ToyParams params_from_w(const LatentW& w) const;
    double attribute_value(const LatentW& w, const std::string& name) const;
    std::array<double, kIdentityDim> identity_values(const LatentW& w) const;

    ImageF render_params(const ToyParams& p) const;
    LandmarkSet landmarks_params(const ToyParams& p) const;

    // Analytic unit normals plus the given image as albedo.
    struct NormalField {
        std::vector<double> normals; // size*size*3, math frame (x right, y up, z out)
        std::vector<double> albedo;  // size*size*3 in [0,1]
        int size = 0;
    };
    NormalField normal_field_params(const ToyParams& p, const Image& albedo_source) const;
    NormalField normal_field(const LatentW& w) const;

    // Reads the metadata strip; empty when the magic pixels are absent.
    static std::optional<ToyParams> decode_strip(const Image& img, int* size_out = nullptr);

    const std::vector<double>& direction(const std::string& attribute) const;

private:
    int size_;
    LatentW w_avg_;
    ToyFaceSpec spec_;
    std::vector<std::vector<double>> basis_; // 13 attr + 64 identity, orthonormal
};

// Registry: "toy" ships; other names resolve to external backends whose
// weights must exist on disk (load failures are reported distinctly from
// inference failures).
std::unique_ptr<GeneratorBackend> make_backend(const std::string& name,
                                               const nlohmann::json& options);

// Process-wide toy instance per output size, for code that reconstructs
// geometry from an image's metadata strip.
const ToyGenerator& shared_toy(int size);

} // namespace faceforge
