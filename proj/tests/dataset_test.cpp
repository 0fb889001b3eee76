#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "faceforge/common.hpp"
#include "faceforge/dataset.hpp"
#include "faceforge/image.hpp"

using namespace faceforge;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

long long category_total(const PlanTotals& totals, const std::string& name) {
    for (const auto& [cat, count] : totals.per_category)
        if (cat == name)
            return count;
    return -1;
}

} // namespace

TEST_CASE("the built-in preset reproduces the published composition") {
    PlanTotals totals = plan_totals(paper_preset());
    CHECK(category_total(totals, "base") == 20000);
    CHECK(category_total(totals, "expressions") == 96000);
    CHECK(category_total(totals, "blink") == 24000);
    CHECK(category_total(totals, "skin_hair") == 12000);
    CHECK(category_total(totals, "aging") == 32000);
    CHECK(category_total(totals, "headpose") == 60000);
    CHECK(category_total(totals, "relight") == 80000);
    CHECK(totals.total == 324000);
}

TEST_CASE("scaling is exactly linear on subject counts") {
    RenderPlan scaled = scaled_plan(paper_preset(), Rational{1, 1000});
    CHECK(plan_totals(scaled).total == 324);

    RenderPlan doubled = scaled_plan(paper_preset(), Rational{2, 1});
    CHECK(plan_totals(doubled).total == 648000);

    // 10000/3 is not integral
    CHECK_THROWS_AS((void)scaled_plan(paper_preset(), Rational{1, 3}), Error);

    RenderPlan empty;
    CHECK(plan_totals(empty).total == 0);
}

TEST_CASE("item seeds never collide across the scaled preset") {
    RenderPlan plan = scaled_plan(paper_preset(), Rational{1, 1000});
    std::set<std::uint64_t> seeds;
    std::size_t items = 0;
    for (const auto& cat : plan.categories) {
        for (const std::string gender : {"boy", "girl"}) {
            long long count = gender == "boy" ? cat.boys : cat.girls;
            for (long long s = 0; s < count; ++s)
                for (const auto& [attr, frames] : cat.blocks)
                    for (int f = 0; f < frames; ++f) {
                        seeds.insert(derive_item_seed(1234, gender, s, cat.category, attr, f));
                        ++items;
                    }
        }
    }
    CHECK(items == 324);
    CHECK(seeds.size() == items);

    // subject seeds shared across categories, distinct across subjects
    CHECK(derive_subject_seed(1234, "boy", 0) == derive_subject_seed(1234, "boy", 0));
    CHECK(derive_subject_seed(1234, "boy", 0) != derive_subject_seed(1234, "girl", 0));
    CHECK(derive_subject_seed(1234, "boy", 0) != derive_subject_seed(1234, "boy", 1));
    CHECK(derive_subject_seed(1234, "boy", 0) != derive_subject_seed(4321, "boy", 0));
}

TEST_CASE("render, verify, resume and repair a scaled dataset") {
    TempDir dir("ff_dataset_test");
    ToyGenerator toy(64);
    auto directions = toy_reference_directions(toy);
    LightingSweep sweep = preset61(0.3);
    RenderPlan plan = scaled_plan(paper_preset(), Rational{1, 1000});
    std::string root = dir.path.string();

    RenderStats first = render_dataset(plan, toy, directions, sweep, root, 1234, 2);
    CHECK(first.planned == 324);
    CHECK(first.rendered == 324);
    CHECK(first.skipped == 0);
    CHECK(first.failures.empty());

    std::size_t png_count = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root))
        if (entry.path().extension() == ".png")
            ++png_count;
    CHECK(png_count == 324);

    IntegrityReport verify = verify_manifest(root);
    CHECK(verify.rows == 324);
    CHECK(verify.passed());
    CHECK(verify.gender_balanced);

    // resume over a complete tree renders nothing and keeps the manifest
    auto manifest_before = read_file_bytes(root + "/manifest.csv");
    RenderStats rerun = render_dataset(plan, toy, directions, sweep, root, 1234, 2);
    CHECK(rerun.rendered == 0);
    CHECK(rerun.skipped == 324);
    CHECK(read_file_bytes(root + "/manifest.csv") == manifest_before);

    // deleting one file triggers exactly one repair render
    std::vector<ManifestRow> rows = read_manifest_rows(root + "/manifest.csv");
    fs::remove(root + "/" + rows[17].relative_path);
    RenderStats repair = render_dataset(plan, toy, directions, sweep, root, 1234, 2);
    CHECK(repair.rendered == 1);
    CHECK(repair.skipped == 323);
    CHECK(read_file_bytes(root + "/manifest.csv") == manifest_before);
    CHECK(verify_manifest(root).passed());

    // tampering with a file shows up as a digest violation
    {
        std::ofstream f(root + "/" + rows[3].relative_path,
                        std::ios::binary | std::ios::app);
        f << "x";
    }
    IntegrityReport tampered = verify_manifest(root);
    CHECK_FALSE(tampered.passed());
    REQUIRE(tampered.violations.size() == 1);
    CHECK(tampered.violations[0].find("digest mismatch") != std::string::npos);
}

TEST_CASE("two renders from one dataset seed produce identical trees") {
    TempDir a("ff_dataset_det_a"), b("ff_dataset_det_b");
    ToyGenerator toy(64);
    auto directions = toy_reference_directions(toy);
    LightingSweep sweep = preset61(0.3);
    // a small custom plan keeps this quick but covers every category
    RenderPlan plan;
    plan.categories = {
        {"base", 2, 2, {{"", 1}}},
        {"expressions", 1, 1, {{"happy", 3}, {"sad", 3}}},
        {"blink", 1, 1, {{"eye_openness", 3}}},
        {"skin_hair", 1, 1, {{"mix", 2}}},
        {"aging", 1, 1, {{"age", 2}}},
        {"headpose", 1, 1, {{"yaw", 2}, {"pitch", 2}}},
        {"relight", 1, 1, {{"relight", 4}}},
    };

    render_dataset(plan, toy, directions, sweep, a.path.string(), 99, 2);
    render_dataset(plan, toy, directions, sweep, b.path.string(), 99, 1);

    std::vector<ManifestRow> rows_a = read_manifest_rows(a.path.string() + "/manifest.csv");
    std::vector<ManifestRow> rows_b = read_manifest_rows(b.path.string() + "/manifest.csv");
    REQUIRE(rows_a.size() == rows_b.size());
    for (std::size_t i = 0; i < rows_a.size(); ++i) {
        CHECK(rows_a[i].sample_id == rows_b[i].sample_id);
        CHECK(rows_a[i].content_digest == rows_b[i].content_digest);
        CHECK(read_file_bytes(a.path.string() + "/" + rows_a[i].relative_path) ==
              read_file_bytes(b.path.string() + "/" + rows_b[i].relative_path));
    }

    // a different dataset seed changes content
    TempDir c("ff_dataset_det_c");
    render_dataset(plan, toy, directions, sweep, c.path.string(), 100, 2);
    std::vector<ManifestRow> rows_c = read_manifest_rows(c.path.string() + "/manifest.csv");
    bool any_diff = false;
    for (std::size_t i = 0; i < rows_c.size(); ++i)
        any_diff = any_diff || rows_c[i].content_digest != rows_a[i].content_digest;
    CHECK(any_diff);
}

TEST_CASE("unknown categories and bad frame counts are rejected") {
    RenderPlan plan;
    plan.categories = {{"selfies", 1, 1, {{"", 1}}}};
    CHECK_THROWS_AS((void)plan_totals(plan), Error);

    RenderPlan zero_frames;
    zero_frames.categories = {{"base", 1, 1, {{"", 0}}}};
    CHECK_THROWS_AS((void)plan_totals(zero_frames), Error);
}

TEST_CASE("a corrupt manifest line aborts the read") {
    TempDir dir("ff_manifest_corrupt");
    std::ofstream csv(dir.path / "manifest.csv");
    csv << "sample_id,subject_id,gender,category,attribute,frame_index,coeff,"
           "lighting_label,seed,relative_path,content_digest\n";
    csv << "only,three,columns\n";
    csv.close();
    CHECK_THROWS_AS((void)read_manifest_rows((dir.path / "manifest.csv").string()), Error);
}

TEST_CASE("per-sample render failures are recorded and skipped") {
    TempDir dir("ff_dataset_failures");
    ToyGenerator toy(64);
    LightingSweep sweep = preset61(0.3);
    RenderPlan plan;
    plan.categories = {
        {"base", 1, 1, {{"", 1}}},
        {"blink", 1, 1, {{"eye_openness", 2}}},
    };
    // no directions provided: blink rows fail, base rows render
    RenderStats stats = render_dataset(plan, toy, {}, sweep, dir.path.string(), 5, 1);
    CHECK(stats.planned == 6);
    CHECK(stats.rendered == 2);
    CHECK(stats.failures.size() == 4);
    CHECK(read_manifest_rows(dir.path.string() + "/manifest.csv").size() == 2);
}
