#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "faceforge/directions.hpp"
#include "faceforge/generator.hpp"
#include "faceforge/relight.hpp"

namespace faceforge {

struct Rational {
    long long num = 1;
    long long den = 1;
};

// One dataset category: balanced subject counts plus an ordered list of
// (attribute, frames) blocks rendered per subject.
struct CategoryPlan {
    std::string category;
    long long boys = 0;
    long long girls = 0;
    std::vector<std::pair<std::string, int>> blocks;
};

struct RenderPlan {
    std::vector<CategoryPlan> categories;
    Rational scale{1, 1};
};

extern const std::vector<std::string> kKnownCategories;

// The published composition: 20k base, 96k expressions, 24k blink, 12k
// skin/hair, 32k aging, 60k headpose, 80k relight; 324k total. Relight
// reuses the base subjects.
RenderPlan paper_preset();

// Applies plan.scale to the subject counts; non-integral results are an
// error so totals stay exactly linear in the scale.
RenderPlan scaled_plan(const RenderPlan& plan, Rational scale);

struct PlanTotals {
    std::vector<std::pair<std::string, long long>> per_category;
    long long total = 0;
};

PlanTotals plan_totals(const RenderPlan& plan);

struct ManifestRow {
    std::string sample_id;
    std::string subject_id;
    std::string gender; // "boy" | "girl"
    std::string category;
    std::string attribute;
    int frame_index = 0;
    double coeff = 0.0;
    std::string lighting_label;
    std::uint64_t seed = 0; // subject z seed
    std::string relative_path;
    std::string content_digest;
};

// Subject latents are shared across categories (relight reuses base
// subjects); per-item randomness like style-mix donors derives from the
// item hash.
std::uint64_t derive_subject_seed(std::uint64_t dataset_seed, const std::string& gender,
                                  long long subject_index);
std::uint64_t derive_item_seed(std::uint64_t dataset_seed, const std::string& gender,
                               long long subject_index, const std::string& category,
                               const std::string& attribute, int frame_index);

// Edit coefficient ranges per attribute block; defaults cover the seven
// categories and can be overridden from the config.
struct RenderRecipes {
    std::map<std::string, std::pair<double, double>> coeff_ranges;
    LayerRange mix_layers{8, 18};

    static RenderRecipes defaults();
};

struct RenderStats {
    std::size_t planned = 0;
    std::size_t rendered = 0;
    std::size_t skipped = 0; // digest-valid rows reused
    std::vector<std::string> failures;
    std::string manifest_path;
};

// Renders every planned sample into output_root, appending a journal as
// samples complete and rewriting manifest.csv in canonical order at the
// end. Reruns skip rows whose file still matches the recorded digest, so
// interrupted runs resume and deleted files are repaired.
RenderStats render_dataset(const RenderPlan& plan, const GeneratorBackend& backend,
                           const std::map<std::string, SemanticDirection>& directions,
                           const LightingSweep& sweep, const std::string& output_root,
                           std::uint64_t dataset_seed, int workers = 0,
                           const RenderRecipes& recipes = RenderRecipes::defaults());

struct IntegrityReport {
    std::size_t rows = 0;
    std::vector<std::string> violations;
    bool gender_balanced = true;
    bool passed() const { return violations.empty(); }
};

// Checks sample_id uniqueness, file existence, digest match and per-category
// gender balance.
IntegrityReport verify_manifest(const std::string& output_root);

std::vector<ManifestRow> read_manifest_rows(const std::string& csv_path);

} // namespace faceforge
