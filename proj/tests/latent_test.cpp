#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "faceforge/common.hpp"
#include "faceforge/latent.hpp"
#include "faceforge/rng.hpp"

using namespace faceforge;

namespace {

SemanticDirection basis_direction(int axis, LayerRange layers = {}) {
    std::vector<double> v(kLatentDim, 0.0);
    v[std::size_t(axis)] = 1.0;
    return SemanticDirection("e" + std::to_string(axis), v, layers);
}

LatentW random_w(std::uint64_t seed) {
    SeededRng rng(seed);
    LatentW w;
    for (auto& v : w.rows)
        v = rng.gaussian();
    return w;
}

} // namespace

TEST_CASE("sample_z: same seed is bitwise identical, seeds differ") {
    LatentZ a = sample_z(42), b = sample_z(42), c = sample_z(1), d = sample_z(2);
    CHECK(a.values == b.values);
    CHECK(c.values != d.values);
    CHECK(a.values.size() == 512);
    CHECK(a.seed == 42);
}

TEST_CASE("sample_z moments match a standard normal") {
    const int n = 10000;
    std::vector<double> mean(kLatentDim, 0.0), var(kLatentDim, 0.0);
    std::vector<LatentZ> zs;
    zs.reserve(n);
    for (int i = 0; i < n; ++i)
        zs.push_back(sample_z(std::uint64_t(i) + 1000));
    for (const auto& z : zs)
        for (int k = 0; k < kLatentDim; ++k)
            mean[std::size_t(k)] += z.values[std::size_t(k)] / n;
    for (const auto& z : zs)
        for (int k = 0; k < kLatentDim; ++k) {
            double d = z.values[std::size_t(k)] - mean[std::size_t(k)];
            var[std::size_t(k)] += d * d / n;
        }
    for (int k = 0; k < kLatentDim; ++k) {
        CHECK(std::abs(mean[std::size_t(k)]) < 0.05);
        CHECK(std::abs(var[std::size_t(k)] - 1.0) < 0.1);
    }
}

TEST_CASE("truncate blends toward the mean latent") {
    LatentW w_avg = random_w(1);
    LatentW w = w_avg;
    for (auto& v : w.rows)
        v *= 2.0; // w = 2 * w_avg
    CHECK(truncate(w, w_avg, 1.0).rows == w.rows);
    CHECK(truncate(w, w_avg, 0.0).rows == w_avg.rows);
    LatentW half = truncate(w, w_avg, 0.5);
    for (std::size_t i = 0; i < half.rows.size(); ++i)
        CHECK(half.rows[i] == doctest::Approx(1.5 * w_avg.rows[i]).epsilon(1e-12));
}

TEST_CASE("truncate is affine to rounding precision") {
    LatentW w = random_w(2), w_avg = random_w(3);
    double psi = 0.7310;
    LatentW t = truncate(w, w_avg, psi);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        double lhs = t.rows[i] - w_avg.rows[i];
        double rhs = psi * (w.rows[i] - w_avg.rows[i]);
        CHECK(std::abs(lhs - rhs) <= 1e-15 * std::max(1.0, std::abs(rhs)));
    }
}

TEST_CASE("truncate rejects mismatched shapes") {
    LatentW w = random_w(40), w_avg = random_w(41);
    w_avg.rows.resize(17 * 512);
    CHECK_THROWS_AS((void)truncate(w, w_avg, 0.5), Error);
}

TEST_CASE("apply_direction: coeff 0 is bitwise identity") {
    LatentW w = random_w(4);
    LatentW out = apply_direction(w, basis_direction(3), 0.0);
    CHECK(out.rows == w.rows);
    CHECK(out.source == LatentSource::Edited);
}

TEST_CASE("apply_direction: broadcast basis vector shifts every row") {
    LatentW w; // zeros
    LatentW out = apply_direction(w, basis_direction(0), 2.5);
    for (int r = 0; r < kLatentRows; ++r) {
        CHECK(out.row(r)[0] == 2.5);
        for (int i = 1; i < kLatentDim; ++i)
            CHECK(out.row(r)[i] == 0.0);
    }
}

TEST_CASE("apply_direction is additive in coeff over 1000 random cases") {
    SeededRng rng(99);
    for (int case_i = 0; case_i < 1000; ++case_i) {
        LatentW w = random_w(1000 + std::uint64_t(case_i));
        std::vector<double> dv(kLatentDim);
        double norm = 0.0;
        for (auto& v : dv) {
            v = rng.gaussian();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : dv)
            v /= norm;
        SemanticDirection dir("d", dv, LayerRange{});
        double a = rng.gaussian(), b = rng.gaussian();
        LatentW two_step = apply_direction(apply_direction(w, dir, a), dir, b);
        LatentW one_step = apply_direction(w, dir, a + b);
        for (std::size_t i = 0; i < two_step.rows.size(); ++i)
            CHECK(std::abs(two_step.rows[i] - one_step.rows[i]) <= 1e-9);
    }
}

TEST_CASE("apply_direction leaves rows outside the layer range untouched") {
    LatentW w = random_w(5);
    SemanticDirection dir = basis_direction(7, LayerRange(4, 9));
    LatentW out = apply_direction(w, dir, 3.0);
    for (int r = 0; r < kLatentRows; ++r) {
        if (r >= 4 && r < 9)
            CHECK(out.row(r)[7] == w.row(r)[7] + 3.0);
        else
            for (int i = 0; i < kLatentDim; ++i)
                CHECK(out.row(r)[i] == w.row(r)[i]);
    }
}

TEST_CASE("per-row direction applies row-wise") {
    std::vector<double> dv(std::size_t(kLatentRows) * kLatentDim, 0.0);
    dv[0 * 512 + 1] = 1.0; // only row 0 moves
    SemanticDirection dir("rowwise", dv, LayerRange{});
    LatentW w;
    LatentW out = apply_direction(w, dir, 2.0);
    CHECK(out.row(0)[1] == 2.0);
    for (int r = 1; r < kLatentRows; ++r)
        CHECK(out.row(r)[1] == 0.0);
}

TEST_CASE("mix_styles copies donor rows in range") {
    LatentW src = random_w(6), donor = random_w(7);
    CHECK(mix_styles(src, src, LayerRange(8, 18)).rows == src.rows);

    LatentW mixed = mix_styles(src, donor, LayerRange(8, 18));
    for (int r = 0; r < 8; ++r)
        for (int i = 0; i < kLatentDim; ++i)
            CHECK(mixed.row(r)[i] == src.row(r)[i]);
    for (int r = 8; r < 18; ++r)
        for (int i = 0; i < kLatentDim; ++i)
            CHECK(mixed.row(r)[i] == donor.row(r)[i]);

    LatentW twice = mix_styles(mixed, donor, LayerRange(8, 18));
    CHECK(twice.rows == mixed.rows);

    CHECK_THROWS_AS((void)LayerRange(9, 9), Error); // empty interval
}

TEST_CASE("edit_sequence spaces coefficients inclusively") {
    LatentW w = random_w(8);
    EditSpec spec{basis_direction(0), 0.0, 1.0, 6};
    auto coeffs = edit_coefficients(spec);
    REQUIRE(coeffs.size() == 6);
    for (int i = 0; i < 6; ++i)
        CHECK(coeffs[std::size_t(i)] == doctest::Approx(0.2 * i).epsilon(1e-12));

    auto frames = edit_sequence(w, spec);
    REQUIRE(frames.size() == 6);
    CHECK(frames[0].rows == w.rows); // coeff 0 frame equals input

    EditSpec single{basis_direction(0), 0.0, 0.75, 1};
    auto one = edit_coefficients(single);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == 0.75);
}

TEST_CASE("direction constructor enforces the unit-norm invariant") {
    std::vector<double> v(kLatentDim, 0.0);
    v[0] = 1.0 + 1e-6;
    CHECK_THROWS_AS(SemanticDirection("bad", v, LayerRange{}), Error);
    v[0] = 1.0;
    CHECK_NOTHROW(SemanticDirection("ok", v, LayerRange{}));
}

TEST_CASE("latent store round-trips bit-exactly") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "ff_latent_store_test";
    fs::remove_all(dir);

    LatentZ z = sample_z(77);
    LatentW w = random_w(9);
    w.source = LatentSource::Edited;
    save_latents(dir.string(), z, w);

    auto bin1 = std::filesystem::file_size(dir / "latent.bin");
    StoredLatents loaded = load_latents(dir.string());
    REQUIRE(loaded.z.has_value());
    CHECK(loaded.z->seed == 77);
    CHECK(loaded.w.source == LatentSource::Edited);

    // float32 narrowing happens exactly once
    for (std::size_t i = 0; i < w.rows.size(); ++i)
        CHECK(loaded.w.rows[i] == double(float(w.rows[i])));

    save_latents(dir.string(), loaded.z, loaded.w);
    StoredLatents again = load_latents(dir.string());
    CHECK(again.w.rows == loaded.w.rows);
    CHECK(std::filesystem::file_size(dir / "latent.bin") == bin1);
    fs::remove_all(dir);
}

TEST_CASE("direction store preserves unit norm and metadata") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "ff_direction_store_test";
    fs::remove_all(dir);

    SeededRng rng(11);
    std::vector<double> v(kLatentDim);
    double norm = 0.0;
    for (auto& x : v) {
        x = rng.gaussian();
        norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : v)
        x /= norm;
    SemanticDirection d("smile", v, LayerRange(0, 18), 0.97);
    save_direction(dir.string(), d);
    SemanticDirection loaded = load_direction(dir.string(), "smile");
    CHECK(loaded.name == "smile");
    CHECK(loaded.vec == d.vec);
    CHECK(loaded.layers == d.layers);
    CHECK(loaded.classifier_accuracy == 0.97);
    fs::remove_all(dir);
}
