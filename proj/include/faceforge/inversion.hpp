#pragma once

#include <cstdint>
#include <vector>

#include "faceforge/generator.hpp"
#include "faceforge/latent.hpp"

namespace faceforge {

enum class InversionInit { WAvg, Random };

struct InversionConfig {
    int max_iters = 120;
    double step_size = 1.0;          // scale of the per-direction Newton step
    InversionInit init = InversionInit::WAvg;
    double regularizer_weight = 0.0; // pulls the latent toward w_avg
    double tolerance = 1e-10;        // stop when best loss improves less than this
    double probe_step = 1e-3;        // central-difference probe along each direction
    std::uint64_t seed = 0;          // for init = Random
};

struct InversionResult {
    LatentW w_star;
    double final_loss = 0.0;      // pixel MSE + regularizer
    double final_pixel_mse = 0.0; // pixel term alone
    int iterations_used = 0;
    bool converged = false;
    std::vector<double> best_loss_history; // monotone non-increasing
};

// Recovers a broadcast latent whose continuous render matches the target
// under mean-squared pixel loss (pixels in [0,1]) plus
// regularizer_weight * ||v - v_avg||^2 over the broadcast coordinates.
// Central finite differences along the backend's probe directions (every
// coordinate when the backend declares none) give per-direction slope and
// curvature; the update scales each component by its curvature, and step
// halving on loss increase keeps the best-so-far loss monotone.
InversionResult invert(const GeneratorBackend& backend, const RenderedImage& target,
                       const InversionConfig& cfg);

// synthesize(apply_direction(invert(target).w_star, direction, coeff))
RenderedImage invert_then_edit(const GeneratorBackend& backend, const RenderedImage& target,
                               const SemanticDirection& direction, double coeff,
                               const InversionConfig& cfg);

} // namespace faceforge
