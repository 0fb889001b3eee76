#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "faceforge/common.hpp"
#include "faceforge/generator.hpp"
#include "faceforge/rng.hpp"

using namespace faceforge;

namespace {

LatentW broadcast_vec(const std::vector<double>& v) {
    LatentW w;
    for (int r = 0; r < kLatentRows; ++r)
        for (int i = 0; i < kLatentDim; ++i)
            w.row(r)[i] = v[std::size_t(i)];
    return w;
}

LatentW scaled_direction_w(const ToyGenerator& toy, const std::string& attr, double c) {
    std::vector<double> v(kLatentDim, 0.0);
    const auto& g = toy.direction(attr);
    for (int i = 0; i < kLatentDim; ++i)
        v[std::size_t(i)] = c * g[std::size_t(i)];
    return broadcast_vec(v);
}

SemanticDirection toy_dir(const ToyGenerator& toy, const std::string& attr,
                          LayerRange layers = {}) {
    return SemanticDirection(attr, toy.direction(attr), layers);
}

double mouth_corner_raise(const LandmarkSet& lm) {
    double center = (lm.y(51) + lm.y(57)) / 2.0;
    double corners = (lm.y(48) + lm.y(54)) / 2.0;
    return center - corners;
}

} // namespace

TEST_CASE("toy spec: unit-norm orthonormal ground truth with required attributes") {
    ToyGenerator toy(64);
    const auto& spec = toy.spec();
    CHECK(spec.landmark_count == 68);
    for (const char* required : {"smile", "eye_openness", "yaw", "age", "hue", "gender"})
        CHECK(spec.ground_truth_directions.count(required) == 1);
    for (const auto& [name, vec] : spec.ground_truth_directions) {
        double n2 = 0.0;
        for (double v : vec)
            n2 += v * v;
        CHECK(std::abs(std::sqrt(n2) - 1.0) < 1e-12);
    }
    // happy is an alias of smile
    CHECK(spec.ground_truth_directions.at("happy") == spec.ground_truth_directions.at("smile"));

    auto probes = toy.probe_directions();
    CHECK(probes.size() == ToyGenerator::kAttrCount + ToyGenerator::kIdentityDim);
    for (std::size_t i = 0; i < probes.size(); ++i)
        for (std::size_t j = i + 1; j < probes.size(); ++j) {
            double d = 0.0;
            for (int k = 0; k < kLatentDim; ++k)
                d += probes[i][std::size_t(k)] * probes[j][std::size_t(k)];
            CHECK(std::abs(d) < 1e-10);
        }
}

TEST_CASE("synthesize is deterministic: 100 calls share one digest") {
    ToyGenerator toy(64);
    LatentW w = toy.map_z_to_w(sample_z(7));
    RenderedImage first = toy.synthesize(w);
    std::set<std::vector<std::uint8_t>> renders;
    for (int i = 0; i < 100; ++i)
        renders.insert(toy.synthesize(w).pixels.rgb);
    CHECK(renders.size() == 1);
    CHECK(first.latent_digest == toy.synthesize(w).latent_digest);
}

TEST_CASE("smile edit raises the mouth corners") {
    ToyGenerator toy(128);
    LatentW w = toy.map_z_to_w(sample_z(21));
    LatentW smiled = apply_direction(w, toy_dir(toy, "smile"), 1.0);
    double before = mouth_corner_raise(toy.landmarks(w));
    double after = mouth_corner_raise(toy.landmarks(smiled));
    CHECK(after > before);
}

TEST_CASE("perturbations orthogonal to every ground-truth direction keep parameters") {
    ToyGenerator toy(64);
    LatentW w = toy.map_z_to_w(sample_z(33));

    SeededRng rng(55);
    std::vector<double> pert(kLatentDim);
    for (auto& v : pert)
        v = rng.gaussian();
    // remove every attribute and identity component
    for (const auto& dir : toy.probe_directions()) {
        double d = 0.0;
        for (int i = 0; i < kLatentDim; ++i)
            d += dir[std::size_t(i)] * pert[std::size_t(i)];
        for (int i = 0; i < kLatentDim; ++i)
            pert[std::size_t(i)] -= d * dir[std::size_t(i)];
    }
    LatentW w2 = w;
    for (int r = 0; r < kLatentRows; ++r)
        for (int i = 0; i < kLatentDim; ++i)
            w2.row(r)[i] += pert[std::size_t(i)];

    ToyParams p1 = toy.params_from_w(w), p2 = toy.params_from_w(w2);
    CHECK(p1.attrs == p2.attrs);
    CHECK(p1.identity == p2.identity);
    CHECK(toy.synthesize(w).pixels == toy.synthesize(w2).pixels);
}

TEST_CASE("attribute edits are independent by construction") {
    ToyGenerator toy(64);
    LatentW w = toy.map_z_to_w(sample_z(100));
    for (const std::string& edited : ToyGenerator::attribute_names()) {
        LatentW moved = apply_direction(w, toy_dir(toy, edited), 1.5);
        ToyParams before = toy.params_from_w(w), after = toy.params_from_w(moved);
        for (const std::string& other : ToyGenerator::attribute_names()) {
            int io = ToyGenerator::attribute_index(other);
            if (other == edited)
                continue;
            CHECK(before.attrs[std::size_t(io)] == after.attrs[std::size_t(io)]);
        }
    }
}

TEST_CASE("each attribute responds monotonically to its own direction") {
    ToyGenerator toy(64);
    for (const std::string& attr : ToyGenerator::attribute_names()) {
        double prev = -1.0;
        for (double c : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
            double v = toy.attribute_value(scaled_direction_w(toy, attr, c), attr);
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("closed eye collapses the eyelid gap to zero") {
    ToyGenerator toy(64);
    LatentW closed = scaled_direction_w(toy, "eye_openness", -5.0);
    CHECK(toy.attribute_value(closed, "eye_openness") == 0.0);
    LandmarkSet lm = toy.landmarks(closed);
    CHECK(lm.y(37) == lm.y(41));
    CHECK(lm.y(38) == lm.y(40));
    CHECK(lm.y(43) == lm.y(47));
}

TEST_CASE("eyelid gap is proportional to the eye_openness value") {
    ToyGenerator toy(128);
    double base_gap = 0.0, base_val = 0.0;
    for (double c : {0.5, 1.0, 1.5}) {
        LatentW w = scaled_direction_w(toy, "eye_openness", c);
        LandmarkSet lm = toy.landmarks(w);
        double gap = lm.y(41) - lm.y(37);
        double val = toy.attribute_value(w, "eye_openness");
        if (base_gap == 0.0) {
            base_gap = gap;
            base_val = val;
            continue;
        }
        CHECK(gap / base_gap == doctest::Approx(val / base_val).epsilon(1e-9));
    }
}

TEST_CASE("neutral yaw renders a bilaterally symmetric landmark set") {
    ToyGenerator toy(256);
    // latent confined to the smile axis leaves yaw, pitch and centers neutral
    LatentW w = scaled_direction_w(toy, "smile", 0.4);
    LandmarkSet lm = toy.landmarks(w);
    double cx = toy.params_from_w(w).center_x;
    const int pairs[][2] = {{0, 16},  {1, 15},  {2, 14},  {3, 13},  {4, 12},  {5, 11},
                            {6, 10},  {7, 9},   {17, 26}, {18, 25}, {19, 24}, {20, 23},
                            {21, 22}, {36, 45}, {37, 44}, {38, 43}, {39, 42}, {40, 47},
                            {41, 46}, {31, 35}, {32, 34}, {48, 54}, {49, 53}, {50, 52},
                            {55, 59}, {56, 58}, {60, 64}, {61, 63}, {65, 67}};
    for (auto [i, j] : pairs) {
        CHECK(std::abs((lm.x(i) - cx) + (lm.x(j) - cx)) < 0.5);
        CHECK(std::abs(lm.y(i) - lm.y(j)) < 0.5);
    }
}

TEST_CASE("face translation moves all 68 landmarks rigidly") {
    ToyGenerator toy(256);
    ToyParams p = toy.params_from_w(toy.map_z_to_w(sample_z(64)));
    LandmarkSet before = toy.landmarks_params(p);
    ToyParams moved = p;
    moved.center_x += 10.0;
    moved.center_y += 10.0;
    LandmarkSet after = toy.landmarks_params(moved);
    for (int i = 0; i < 68; ++i) {
        CHECK(after.x(i) - before.x(i) == doctest::Approx(10.0).epsilon(1e-9));
        CHECK(after.y(i) - before.y(i) == doctest::Approx(10.0).epsilon(1e-9));
    }
}

TEST_CASE("landmarks stay inside the frame at yaw and center extremes") {
    ToyGenerator toy(64);
    for (double yaw_c : {-6.0, 6.0}) {
        for (double cx_c : {-8.0, 8.0}) {
            LatentW w = scaled_direction_w(toy, "yaw", yaw_c);
            LatentW shifted = apply_direction(w, toy_dir(toy, "center_x"), cx_c);
            LandmarkSet lm = toy.landmarks(shifted);
            for (int i = 0; i < 68; ++i) {
                CHECK(lm.x(i) >= 0.0);
                CHECK(lm.x(i) <= 64.0);
                CHECK(lm.y(i) >= 0.0);
                CHECK(lm.y(i) <= 64.0);
            }
        }
    }
}

TEST_CASE("fine-layer style mixing changes color attributes only") {
    ToyGenerator toy(64);
    LatentW source = toy.map_z_to_w(sample_z(201));
    LatentW donor = toy.map_z_to_w(sample_z(202));
    LatentW mixed = mix_styles(source, donor, LayerRange(8, 18));

    ToyParams ps = toy.params_from_w(source);
    ToyParams pd = toy.params_from_w(donor);
    ToyParams pm = toy.params_from_w(mixed);

    for (const std::string& attr : ToyGenerator::attribute_names()) {
        int idx = ToyGenerator::attribute_index(attr);
        if (attr == "hue" || attr == "brightness")
            CHECK(pm.attrs[std::size_t(idx)] == pd.attrs[std::size_t(idx)]);
        else
            CHECK(pm.attrs[std::size_t(idx)] == ps.attrs[std::size_t(idx)]);
    }
    CHECK(pm.identity == ps.identity);

    // geometry unchanged implies identical landmark sets
    LandmarkSet lms = toy.landmarks(source), lmm = toy.landmarks(mixed);
    for (int i = 0; i < 68; ++i) {
        CHECK(lms.x(i) == lmm.x(i));
        CHECK(lms.y(i) == lmm.y(i));
    }
}

TEST_CASE("the metadata strip decodes to the exact parameters") {
    ToyGenerator toy(64);
    LatentW w = toy.map_z_to_w(sample_z(301));
    ToyParams p = toy.params_from_w(w);
    RenderedImage img = toy.synthesize(w);
    auto decoded = ToyGenerator::decode_strip(img.pixels);
    REQUIRE(decoded.has_value());
    CHECK(decoded->attrs == p.attrs);
    CHECK(decoded->identity == p.identity);
    CHECK(decoded->center_x == p.center_x);
    CHECK(decoded->center_y == p.center_y);

    Image blank(64, 64);
    CHECK_FALSE(ToyGenerator::decode_strip(blank).has_value());
}

TEST_CASE("backends without landmark support say so") {
    class OpaqueBackend final : public GeneratorBackend {
    public:
        std::string name() const override { return "opaque"; }
        std::pair<int, int> output_size() const override { return {8, 8}; }
        const LatentW& w_avg() const override { return w_; }
        LatentW map_z_to_w(const LatentZ&) const override { return w_; }
        RenderedImage synthesize(const LatentW&) const override {
            return {Image(8, 8), ""};
        }

    private:
        LatentW w_;
    };
    OpaqueBackend backend;
    CHECK_THROWS_AS((void)backend.landmarks(LatentW{}), Error);
    CHECK_THROWS_AS((void)backend.render_continuous(LatentW{}), Error);
}

TEST_CASE("the registry loads the toy and rejects unknown backends as load failures") {
    auto toy = make_backend("toy", {{"output_size", 64}});
    CHECK(toy->name() == "toy");
    CHECK(toy->output_size() == std::pair<int, int>{64, 64});
    try {
        make_backend("external-stylegan", {{"weights_path", "/nonexistent/weights.bin"}});
        FAIL("expected a load error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Load);
    }
}
