#include "faceforge/latent.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>

#include "faceforge/common.hpp"
#include "faceforge/container.hpp"
#include "faceforge/rng.hpp"
#include "faceforge/sha256.hpp"

namespace faceforge {

const char* latent_source_name(LatentSource s) {
    switch (s) {
    case LatentSource::MappedFromZ: return "mapped-from-z";
    case LatentSource::InvertedFromImage: return "inverted-from-image";
    case LatentSource::Edited: return "edited";
    }
    return "unknown";
}

LatentSource latent_source_from_name(const std::string& name) {
    if (name == "mapped-from-z") return LatentSource::MappedFromZ;
    if (name == "inverted-from-image") return LatentSource::InvertedFromImage;
    if (name == "edited") return LatentSource::Edited;
    throw Error(ErrorKind::Io, "unknown latent source: " + name);
}

LayerRange::LayerRange(int lo_, int hi_) : lo(lo_), hi(hi_) {
    require(0 <= lo && lo < hi && hi <= kLatentRows, ErrorKind::Shape,
            "layer range must satisfy 0 <= lo < hi <= 18");
}

SemanticDirection::SemanticDirection(std::string name_, std::vector<double> vec_,
                                     LayerRange layers_, double accuracy)
    : name(std::move(name_)), vec(std::move(vec_)), layers(layers_),
      classifier_accuracy(accuracy) {
    require(vec.size() == std::size_t(kLatentDim) ||
                vec.size() == std::size_t(kLatentRows) * kLatentDim,
            ErrorKind::Shape, "direction vector must have 512 or 18*512 entries");
    double norm2 = 0.0;
    for (double v : vec) {
        require(std::isfinite(v), ErrorKind::Numeric, "direction has non-finite entry");
        norm2 += v * v;
    }
    require(std::abs(std::sqrt(norm2) - 1.0) <= 1e-9, ErrorKind::Numeric,
            "direction '" + name + "' is not unit norm");
}

LatentZ sample_z(std::uint64_t seed) {
    SeededRng rng(seed);
    LatentZ z;
    z.seed = seed;
    z.values.resize(kLatentDim);
    for (double& v : z.values)
        v = rng.gaussian();
    return z;
}

LatentW truncate(const LatentW& w, const LatentW& w_avg, double psi) {
    require(std::isfinite(psi), ErrorKind::Numeric, "truncate: psi must be finite");
    require(w.rows.size() == w_avg.rows.size(), ErrorKind::Shape,
            "truncate: shape mismatch");
    LatentW out = w;
    for (std::size_t i = 0; i < out.rows.size(); ++i)
        out.rows[i] = w_avg.rows[i] + psi * (w.rows[i] - w_avg.rows[i]);
    return out;
}

LatentW apply_direction(const LatentW& w, const SemanticDirection& d, double coeff) {
    require(std::isfinite(coeff), ErrorKind::Numeric, "apply_direction: coeff must be finite");
    LatentW out = w;
    out.source = LatentSource::Edited;
    if (coeff == 0.0)
        return out;
    for (int r = d.layers.lo; r < d.layers.hi; ++r) {
        const double* dv = d.per_row() ? d.vec.data() + std::size_t(r) * kLatentDim
                                       : d.vec.data();
        double* row = out.row(r);
        for (int i = 0; i < kLatentDim; ++i)
            row[i] += coeff * dv[i];
    }
    return out;
}

LatentW mix_styles(const LatentW& source, const LatentW& donor, LayerRange layer_range) {
    LatentW out = source;
    out.source = LatentSource::Edited;
    for (int r = layer_range.lo; r < layer_range.hi; ++r)
        std::memcpy(out.row(r), donor.row(r), sizeof(double) * kLatentDim);
    return out;
}

std::vector<double> edit_coefficients(const EditSpec& spec) {
    require(spec.frames >= 1, ErrorKind::Shape, "edit spec needs frames >= 1");
    require(std::isfinite(spec.coeff_start) && std::isfinite(spec.coeff_end),
            ErrorKind::Numeric, "edit spec has non-finite coefficients");
    std::vector<double> coeffs(spec.frames);
    if (spec.frames == 1) {
        coeffs[0] = spec.coeff_end;
        return coeffs;
    }
    for (int i = 0; i < spec.frames; ++i)
        coeffs[i] = spec.coeff_start +
                    (spec.coeff_end - spec.coeff_start) * double(i) / double(spec.frames - 1);
    return coeffs;
}

std::vector<LatentW> edit_sequence(const LatentW& w, const EditSpec& spec) {
    std::vector<LatentW> frames;
    for (double c : edit_coefficients(spec))
        frames.push_back(apply_direction(w, spec.direction, c));
    return frames;
}

std::string latent_digest(const LatentW& w) {
    Sha256 h;
    h.update(w.rows.data(), w.rows.size() * sizeof(double));
    std::uint8_t tag = std::uint8_t(w.source);
    h.update(&tag, 1);
    auto bytes = h.finish();
    return sha256_hex(bytes.data(), bytes.size());
}

void save_latents(const std::string& subject_dir, const std::optional<LatentZ>& z,
                  const LatentW& w) {
    std::filesystem::create_directories(subject_dir);
    ArrayContainer c;
    if (z) {
        require(z->values.size() == std::size_t(kLatentDim), ErrorKind::Shape,
                "z must have 512 entries");
        c.set("z", "f4", {std::size_t(kLatentDim)}, z->values);
        c.meta()["seed"] = z->seed;
    }
    c.set("w", "f4", {std::size_t(kLatentRows), std::size_t(kLatentDim)}, w.rows);
    c.meta()["source"] = latent_source_name(w.source);
    c.save(subject_dir + "/latent");
}

StoredLatents load_latents(const std::string& subject_dir) {
    ArrayContainer c = ArrayContainer::load(subject_dir + "/latent");
    StoredLatents out;
    require(c.has("w"), ErrorKind::Io, "latent store has no 'w' array");
    auto ws = c.shape("w");
    require(ws.size() == 2 && ws[0] == std::size_t(kLatentRows) &&
                ws[1] == std::size_t(kLatentDim),
            ErrorKind::Shape, "stored 'w' must be 18x512");
    out.w.rows = c.data("w");
    out.w.source = latent_source_from_name(c.meta().value("source", "mapped-from-z"));
    if (c.has("z")) {
        LatentZ z;
        z.values = c.data("z");
        z.seed = c.meta().value("seed", std::uint64_t(0));
        out.z = std::move(z);
    }
    return out;
}

void save_direction(const std::string& store_dir, const SemanticDirection& d) {
    std::filesystem::create_directories(store_dir);
    ArrayContainer c;
    std::vector<std::size_t> shape =
        d.per_row() ? std::vector<std::size_t>{std::size_t(kLatentRows), std::size_t(kLatentDim)}
                    : std::vector<std::size_t>{std::size_t(kLatentDim)};
    c.set("vector", "f8", shape, d.vec);
    c.meta()["attribute"] = d.name;
    c.meta()["layer_lo"] = d.layers.lo;
    c.meta()["layer_hi"] = d.layers.hi;
    c.meta()["classifier_accuracy"] = d.classifier_accuracy;
    c.save(store_dir + "/" + d.name);
}

SemanticDirection load_direction(const std::string& store_dir, const std::string& name) {
    ArrayContainer c = ArrayContainer::load(store_dir + "/" + name);
    LayerRange layers(c.meta().value("layer_lo", 0), c.meta().value("layer_hi", kLatentRows));
    return SemanticDirection(c.meta().value("attribute", name), c.data("vector"), layers,
                             c.meta().value("classifier_accuracy", 0.0));
}

} // namespace faceforge
