#include "faceforge/generator.hpp"

#include <filesystem>

#include "faceforge/common.hpp"

namespace faceforge {

LandmarkSet GeneratorBackend::landmarks(const LatentW&) const {
    throw Error(ErrorKind::Unsupported,
                "backend '" + name() + "' does not provide ground-truth landmarks");
}

ImageF GeneratorBackend::render_continuous(const LatentW&) const {
    throw Error(ErrorKind::Unsupported,
                "backend '" + name() + "' does not provide a continuous render");
}

std::unique_ptr<GeneratorBackend> make_backend(const std::string& name,
                                               const nlohmann::json& options) {
    if (name == "toy") {
        int size = options.value("output_size", 256);
        return std::make_unique<ToyGenerator>(size);
    }
    // External backends resolve through a weights file; a missing or
    // unreadable file is a load failure, distinct from inference errors.
    std::string weights = options.value("weights_path", std::string());
    if (weights.empty() || !std::filesystem::exists(weights))
        throw Error(ErrorKind::Load, "backend '" + name + "' unavailable: weights not found at '" +
                                         weights + "' (load failure)");
    throw Error(ErrorKind::Load,
                "backend '" + name + "' unavailable: no loader registered (load failure)");
}

} // namespace faceforge
