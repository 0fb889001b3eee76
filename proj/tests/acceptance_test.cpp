// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria run at the tolerances they state; published reference
// numbers are printed as context, never asserted.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "faceforge/common.hpp"
#include "faceforge/dataset.hpp"
#include "faceforge/directions.hpp"
#include "faceforge/generator.hpp"
#include "faceforge/inversion.hpp"
#include "faceforge/latent.hpp"
#include "faceforge/metrics.hpp"
#include "faceforge/relight.hpp"
#include "faceforge/rng.hpp"
#include "faceforge/sha256.hpp"
#include "faceforge/validation.hpp"

using namespace faceforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void check(bool ok, const std::string& what) {
    if (!ok) {
        ++g_failures;
        std::printf("    FAILED: %s\n", what.c_str());
    }
}

void run_criterion(int number, const std::string& title, const std::function<void()>& body) {
    int before = g_failures;
    try {
        body();
    } catch (const std::exception& e) {
        ++g_failures;
        std::printf("    EXCEPTION: %s\n", e.what());
    }
    std::printf("[%s] criterion %d: %s\n", g_failures == before ? "PASS" : "FAIL", number,
                title.c_str());
    std::fflush(stdout);
}

json run_cli_json(const std::string& args) {
    std::string cmd = std::string(FF_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        throw std::runtime_error("popen failed");
    std::string out;
    char buf[4096];
    while (std::size_t got = fread(buf, 1, sizeof(buf), pipe))
        out.append(buf, got);
    int status = pclose(pipe);
    json j = json::parse(out, nullptr, false);
    j["_exit"] = WEXITSTATUS(status);
    return j;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return d / std::sqrt(na * nb);
}

Eigen::MatrixXd random_psd(int dim, SeededRng& rng) {
    Eigen::MatrixXd g(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            g(i, j) = rng.gaussian();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    Eigen::VectorXd ev(dim);
    for (int i = 0; i < dim; ++i)
        ev[i] = 0.5 + 1.5 * rng.uniform01();
    return q * ev.asDiagonal() * q.transpose();
}

void criterion1_table_arithmetic() {
    auto t0 = std::chrono::steady_clock::now();

    json totals = run_cli_json("plan-totals --preset paper");
    check(totals["_exit"] == 0, "plan-totals exits 0");
    const std::pair<const char*, long long> expected[] = {
        {"base", 20000},   {"expressions", 96000}, {"blink", 24000}, {"skin_hair", 12000},
        {"aging", 32000},  {"headpose", 60000},    {"relight", 80000}};
    for (auto [cat, count] : expected)
        check(totals["categories"][cat] == count,
              std::string(cat) + " == " + std::to_string(count));
    check(totals["total"] == 324000, "grand total 324000");

    TempDir dir("ff_accept_c1");
    std::ofstream cfg(dir.path / "config.json");
    cfg << json{{"backend", "toy"},
                {"backend_options", {{"output_size", 256}}},
                {"output_root", (dir.path / "out").string()},
                {"dataset_seed", 20260808},
                {"workers", 2}}
               .dump();
    cfg.close();
    std::string root = (dir.path / "ds").string();
    json render = run_cli_json("--config " + (dir.path / "config.json").string() +
                               " render-dataset --scale 1/1000 --out " + root);
    check(render["_exit"] == 0, "render-dataset exits 0");
    check(render["rendered"] == 324, "exactly 324 files rendered");

    std::size_t pngs = 0;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.path().extension() == ".png")
            ++pngs;
    check(pngs == 324, "324 png files on disk");

    json verify = run_cli_json("verify-manifest --root " + root);
    check(verify["_exit"] == 0 && verify["passed"] == true, "manifest digest-valid");
    check(verify["gender_balanced"] == true, "gender balance per category");

    double secs = seconds_since(t0);
    std::printf("    runtime %.1fs (budget 120s)\n", secs);
    check(secs < 120.0, "runtime under 2 minutes");
}

void criterion2_edit_identity_additivity() {
    // end-to-end bitwise identity through the CLI
    TempDir dir("ff_accept_c2");
    std::ofstream cfg(dir.path / "config.json");
    cfg << json{{"backend", "toy"},
                {"backend_options", {{"output_size", 64}}},
                {"output_root", (dir.path / "out").string()}}
               .dump();
    cfg.close();
    json edit = run_cli_json("--config " + (dir.path / "config.json").string() +
                             " edit --subject-seed 7 --direction happy --coeff 0");
    check(edit["_exit"] == 0, "edit exits 0");
    check(edit["frames"][0]["digest"] == edit["base_digest"],
          "coeff 0 edit digest equals the unedited render digest");

    // additivity over 1000 random property cases
    SeededRng rng(0xACC2);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        LatentW w;
        for (auto& v : w.rows)
            v = rng.gaussian();
        std::vector<double> dv(kLatentDim);
        double norm = 0.0;
        for (auto& v : dv) {
            v = rng.gaussian();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& v : dv)
            v /= norm;
        SemanticDirection dir_vec("d", dv, LayerRange{});
        double a = 3.0 * (rng.uniform01() - 0.5), b = 3.0 * (rng.uniform01() - 0.5);
        LatentW two = apply_direction(apply_direction(w, dir_vec, a), dir_vec, b);
        LatentW one = apply_direction(w, dir_vec, a + b);
        for (std::size_t i = 0; i < two.rows.size(); ++i)
            worst = std::max(worst, std::abs(two.rows[i] - one.rows[i]));

        LatentW zero = apply_direction(w, dir_vec, 0.0);
        if (zero.rows != w.rows)
            worst = 1.0;
    }
    std::printf("    worst additivity deviation %.3g (tolerance 1e-9)\n", worst);
    check(worst <= 1e-9, "composed edits equal summed edits within 1e-9");
}

void criterion3_direction_recovery() {
    auto t0 = std::chrono::steady_clock::now();
    ToyGenerator toy(64);
    auto annotator = make_toy_annotator();
    for (const char* attr : {"smile", "eye_openness", "yaw", "age", "gender"}) {
        HarvestResult h = harvest(toy, *annotator, attr, 2000, 4242);
        FitReport report = fit_direction(h.samples, attr);
        double cos = std::abs(cosine(report.direction.vec, toy.direction(attr)));
        std::printf("    %-13s |cos|=%.4f holdout=%.4f\n", attr, cos,
                    report.holdout_accuracy);
        check(cos >= 0.9, std::string(attr) + " |cosine| >= 0.9");
        check(report.holdout_accuracy >= 0.95, std::string(attr) + " holdout >= 0.95");
    }
    double secs = seconds_since(t0);
    std::printf("    runtime %.1fs (budget 300s)\n", secs);
    check(secs < 300.0, "runtime under 5 minutes");
}

void criterion4_frechet() {
    SeededRng rng(0xACC4);
    ActivationStats s;
    s.mu = Eigen::VectorXd::Random(16);
    s.sigma = random_psd(16, rng);
    s.n = 100;
    check(frechet_distance(s, s) <= 1e-8, "identical stats distance 0 within 1e-8");

    ActivationStats u1, u2;
    u1.mu = Eigen::VectorXd::Constant(1, 0.0);
    u1.sigma = Eigen::MatrixXd::Constant(1, 1, 1.0);
    u1.n = 2;
    u2.mu = Eigen::VectorXd::Constant(1, 1.0);
    u2.sigma = Eigen::MatrixXd::Constant(1, 1, 4.0);
    u2.n = 2;
    check(std::abs(frechet_distance(u1, u2) - 2.0) <= 1e-6, "univariate (0,1)/(1,4) == 2.0");

    ActivationStats e1, e2;
    e1.mu = Eigen::VectorXd::Zero(24);
    e2.mu = Eigen::VectorXd::Zero(24);
    for (int i = 0; i < 24; ++i)
        e2.mu[i] = rng.gaussian();
    e1.sigma = Eigen::MatrixXd::Identity(24, 24);
    e2.sigma = Eigen::MatrixXd::Identity(24, 24);
    e1.n = e2.n = 10;
    check(std::abs(frechet_distance(e1, e2) - e2.mu.squaredNorm()) <= 1e-6,
          "equal-covariance shift == ||v||^2 within 1e-6");

    double worst_sym = 0.0, worst_res = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        int dim = 2 + int(rng.next_u64() % 63);
        Eigen::MatrixXd sa = random_psd(dim, rng), sb = random_psd(dim, rng);
        Eigen::MatrixXd root = sqrt_product(sa, sb);
        worst_res = std::max(worst_res, (root * root - sa * sb).norm() / (sa * sb).norm());
        ActivationStats a, b;
        a.mu = Eigen::VectorXd::Zero(dim);
        b.mu = Eigen::VectorXd::Constant(dim, 0.1);
        a.sigma = sa;
        b.sigma = sb;
        a.n = b.n = 50;
        worst_sym = std::max(worst_sym,
                             std::abs(frechet_distance(a, b) - frechet_distance(b, a)));
    }
    std::printf("    worst symmetry gap %.3g, worst root residual %.3g\n", worst_sym,
                worst_res);
    check(worst_sym <= 1e-8, "symmetry within 1e-8 over 100 random PSD pairs");
    check(worst_res <= 1e-6, "matrix-root residual <= 1e-6 over 100 random PSD pairs");
}

void criterion5_ear() {
    LandmarkSet lm;
    const double pts[6][2] = {{0, 0}, {1, 1}, {3, 1}, {4, 0}, {3, -1}, {1, -1}};
    for (int eye = 0; eye < 2; ++eye)
        for (int k = 0; k < 6; ++k)
            lm.points[std::size_t(36 + 6 * eye + k)] = {pts[k][0] + 10.0 * eye, pts[k][1]};
    check(ear(lm).mean == 0.5, "hand-computed example exactly 0.5");

    SeededRng rng(0xACC5);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        double angle = rng.uniform01() * 2.0 * M_PI;
        double scale = 0.1 + 5.0 * rng.uniform01();
        double c = std::cos(angle) * scale, sn = std::sin(angle) * scale;
        double tx = (rng.uniform01() - 0.5) * 100.0, ty = (rng.uniform01() - 0.5) * 100.0;
        LandmarkSet moved = lm;
        for (auto& p : moved.points) {
            double x = p[0], y = p[1];
            p[0] = c * x - sn * y + tx;
            p[1] = sn * x + c * y + ty;
        }
        worst = std::max(worst, std::abs(ear(moved).mean - 0.5));
    }
    std::printf("    worst similarity-transform deviation %.3g (tolerance 1e-9)\n", worst);
    check(worst <= 1e-9, "similarity-transform invariance within 1e-9");

    ToyGenerator toy(128);
    LatentW subject = toy.map_z_to_w(sample_z(606));
    double af0 = toy.attribute_value(subject, "eye_openness");
    double sig0 = 0.08 + 0.92 * af0;
    double coeff_end = -(std::log(sig0 / (1.0 - sig0)) + 2.64);
    SemanticDirection eye("eye_openness", toy.direction("eye_openness"), LayerRange{});
    BlinkReport blink = blink_sweep_check(toy, subject, eye, 6, 0.0, coeff_end);
    std::printf("    blink EAR %.3f -> %.3f; %s\n", blink.initial, blink.final,
                blink.reference_context.c_str());
    check(blink.strictly_decreasing, "blink sweep strictly decreasing");
    check(blink.final <= 0.5 * blink.initial, "final EAR <= half the initial");
}

void criterion6_relighting() {
    NormalMap sphere = sphere_normal_map(129);
    SeededRng rng(0xACC6);
    for (auto& a : sphere.albedo)
        a = 0.05 + 0.9 * rng.uniform01();

    auto ambient = shade_linear(sphere, ambient_sh(0.7));
    double worst_ratio = 0.0;
    for (std::size_t i = 3; i < 3000; i += 3)
        worst_ratio = std::max(worst_ratio, std::abs(ambient[i] / ambient[0] -
                                                      sphere.albedo[i] / sphere.albedo[0]));
    check(worst_ratio <= 1e-12, "ambient shading preserves albedo ratios in float space");

    std::fill(sphere.albedo.begin(), sphere.albedo.end(), 1.0);
    auto lin = shade_linear(sphere, directional_sh(1.0, 0.0, 0.0, 0.0));
    std::size_t best = 0;
    for (std::size_t i = 0; i < lin.size(); i += 3)
        if (lin[i] > lin[best])
            best = i;
    double angle =
        std::acos(std::clamp(sphere.normals[best], -1.0, 1.0)) * 180.0 / M_PI;
    std::printf("    brightest pixel normal %.2f degrees from +x\n", angle);
    check(angle <= 10.0, "+x light brightest normal within 10 degrees of +x");

    LightingSweep sweep = preset61(0.3);
    check(sweep.conditions.size() == 61, "preset sweep emits exactly 61 conditions");
    std::set<std::string> labels;
    for (const auto& cond : sweep.conditions)
        labels.insert(cond.label);
    for (const char* canon : {"up", "down", "left", "right"})
        check(labels.count(canon) == 1, std::string("canonical label present: ") + canon);
}

void criterion7_inversion() {
    ToyGenerator toy(64);
    for (std::uint64_t seed : {9005ull, 9010ull}) {
        LatentW w0 = toy.map_z_to_w(sample_z(seed));
        RenderedImage target = toy.synthesize(w0);
        InversionResult res = invert(toy, target, InversionConfig{});
        double worst_attr = 0.0;
        for (const auto& name : ToyGenerator::attribute_names())
            worst_attr = std::max(worst_attr,
                                  std::abs(toy.attribute_value(res.w_star, name) -
                                           toy.attribute_value(w0, name)));
        bool monotone = true;
        for (std::size_t i = 1; i < res.best_loss_history.size(); ++i)
            monotone = monotone && res.best_loss_history[i] <= res.best_loss_history[i - 1];
        std::printf("    subject %llu: mse %.2e, worst attribute error %.4f\n",
                    static_cast<unsigned long long>(seed), res.final_pixel_mse, worst_attr);
        check(res.final_pixel_mse <= 1e-3, "pixel MSE <= 1e-3");
        check(worst_attr <= 0.05, "attribute-space error <= 0.05");
        check(monotone, "best-so-far loss monotone non-increasing");
    }
}

void criterion8_uniqueness() {
    ToyGenerator toy(64);
    auto embedder = make_toy_identity_embedder();
    const char* attrs[5] = {"smile", "eye_openness", "yaw", "age", "hue"};
    std::vector<std::vector<Image>> subjects;
    std::vector<Image> bases;
    for (int s = 0; s < 10; ++s) {
        LatentW w = toy.map_z_to_w(sample_z(8800 + std::uint64_t(s)));
        std::vector<Image> group = {toy.synthesize(w).pixels};
        for (const char* attr : attrs) {
            SemanticDirection dir(attr, toy.direction(attr), LayerRange{});
            group.push_back(toy.synthesize(apply_direction(w, dir, 1.2)).pixels);
        }
        bases.push_back(group[0]);
        subjects.push_back(std::move(group));
    }
    UniquenessReport report = uniqueness_report(*embedder, subjects);
    std::printf("    min intra %.4f, max inter %.4f, margin %.4f\n", report.min_intra,
                report.max_inter, report.margin);
    check(report.margin > 0.0, "intra/inter separation margin strictly positive");

    SimilarityMatrix self = cosine_similarity_matrix(*embedder, bases, bases);
    double worst_diag = 0.0;
    for (int i = 0; i < 10; ++i)
        worst_diag = std::max(worst_diag, std::abs(self.scores(i, i) - 1.0));
    check(worst_diag <= 1e-9, "self-similarity diagonal 1.0 within 1e-9");
}

void criterion9_determinism_resume() {
    TempDir a("ff_accept_c9a"), b("ff_accept_c9b");
    ToyGenerator toy(64);
    auto directions = toy_reference_directions(toy);
    LightingSweep sweep = preset61(0.3);
    RenderPlan plan = scaled_plan(paper_preset(), Rational{1, 1000});

    render_dataset(plan, toy, directions, sweep, a.path.string(), 555, 2);
    render_dataset(plan, toy, directions, sweep, b.path.string(), 555, 3);

    std::vector<ManifestRow> rows_a = read_manifest_rows(a.path.string() + "/manifest.csv");
    std::vector<ManifestRow> rows_b = read_manifest_rows(b.path.string() + "/manifest.csv");
    check(rows_a.size() == 324 && rows_b.size() == 324, "both runs produced 324 rows");
    bool identical = rows_a.size() == rows_b.size();
    for (std::size_t i = 0; identical && i < rows_a.size(); ++i)
        identical = rows_a[i].sample_id == rows_b[i].sample_id &&
                    rows_a[i].content_digest == rows_b[i].content_digest;
    check(identical, "two runs from one dataset_seed are digest-identical");
    check(read_file_bytes(a.path.string() + "/manifest.csv") ==
              read_file_bytes(b.path.string() + "/manifest.csv"),
          "manifests byte-identical");

    fs::remove(a.path.string() + "/" + rows_a[123].relative_path);
    RenderStats repair = render_dataset(plan, toy, directions, sweep, a.path.string(), 555, 2);
    std::printf("    repair run re-rendered %zu samples\n", repair.rendered);
    check(repair.rendered == 1, "deleting one file triggers exactly one repair render");
    check(verify_manifest(a.path.string()).passed(), "repaired tree verifies");
}

} // namespace

int main() {
    std::printf("faceforge acceptance suite\n");
    run_criterion(1, "plan arithmetic and the 1/1000 render", criterion1_table_arithmetic);
    run_criterion(2, "edit identity and additivity", criterion2_edit_identity_additivity);
    run_criterion(3, "direction recovery against toy ground truth",
                  criterion3_direction_recovery);
    run_criterion(4, "Frechet distance correctness", criterion4_frechet);
    run_criterion(5, "eye aspect ratio and blink sweep", criterion5_ear);
    run_criterion(6, "spherical-harmonics relighting", criterion6_relighting);
    run_criterion(7, "latent inversion quality", criterion7_inversion);
    run_criterion(8, "identity uniqueness separation", criterion8_uniqueness);
    run_criterion(9, "determinism and resumable rendering", criterion9_determinism_resume);
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d check(s) failed\n", g_failures);
    return 1;
}
