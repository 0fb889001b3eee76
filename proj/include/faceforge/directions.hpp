#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "faceforge/generator.hpp"
#include "faceforge/latent.hpp"

namespace faceforge {

// Pluggable attribute labeler. score() returns the attribute strength in
// [0,1] for an image, or nullopt when the sample cannot be labeled.
class Annotator {
public:
    virtual ~Annotator() = default;
    virtual std::string name() const = 0;
    virtual std::vector<std::string> attributes() const = 0;
    virtual bool deterministic() const { return true; }
    virtual std::optional<double> score(const Image& image,
                                        const std::string& attribute) const = 0;
};

// Reads attribute values back from the toy metadata strip.
std::unique_ptr<Annotator> make_toy_annotator();
std::unique_ptr<Annotator> make_annotator(const std::string& name);

struct LabeledLatent {
    LatentW w;
    int label = 0; // {0, 1}
    double confidence = 0.0;
};

struct HarvestResult {
    std::vector<LabeledLatent> samples;
    std::size_t skipped = 0;
};

struct LogRegConfig {
    double l2 = 1e-3;      // ridge strength on the mean objective
    int max_iters = 1000;
    double tol = 1e-8;     // convergence on weight update norm
};

struct FitReport {
    SemanticDirection direction;
    double train_accuracy = 0.0;
    double holdout_accuracy = 0.0;
    std::size_t sample_count = 0;
    bool converged = true;
};

// Samples n latents (seeds derived from `seed`), renders them on the
// backend and thresholds the annotator score at `threshold`. Annotator
// failures are skipped and counted; an all-one-class outcome is an error.
HarvestResult harvest(const GeneratorBackend& backend, const Annotator& annotator,
                      const std::string& attribute, std::size_t n, std::uint64_t seed,
                      double threshold = 0.5);

// L2-regularized logistic regression (IRLS) on the row-averaged latent;
// the weight vector is normalized to unit Euclidean norm. The last 20% of
// samples are held out for the holdout accuracy.
FitReport fit_direction(const std::vector<LabeledLatent>& samples, const std::string& attribute,
                        const LogRegConfig& cfg = {}, LayerRange layers = {});

struct RecipeResult {
    std::map<std::string, SemanticDirection> directions;
    std::map<std::string, FitReport> reports;
    std::vector<std::string> errors; // "<attribute>: <message>"
};

// Default layer ranges per attribute family: expressions/blink/age edit all
// rows, pose edits the coarse rows, style mixes live in the fine rows.
LayerRange default_layer_range(const std::string& attribute);

// Fits directions for the eight recipe attributes (happy, angry, surprise,
// sad, eye_openness, age, yaw, pitch); failures are isolated per attribute.
RecipeResult recipe_directions(const GeneratorBackend& backend, const Annotator& annotator,
                               std::size_t samples_per_attribute, std::uint64_t seed,
                               const LogRegConfig& cfg = {});

// The recipe attributes backed directly by the toy's ground truth, with the
// default layer ranges. Useful as a reference or when no trained direction
// store exists.
std::map<std::string, SemanticDirection> toy_reference_directions(const ToyGenerator& toy);

extern const std::vector<std::string> kRecipeAttributes;

} // namespace faceforge
