// faceforge: synthetic-face dataset tooling.
//
// Machine-readable JSON goes to stdout; human logs go to stderr. Exit 0 on
// success, 2 on usage errors, 3 on config errors, 4 on any other
// categorized failure (the JSON error object names the category).

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "faceforge/common.hpp"
#include "faceforge/config.hpp"
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

namespace ff = faceforge;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void emit(const json& payload) { std::cout << payload.dump(2) << std::endl; }

void log_line(const std::string& line) { std::cerr << line << "\n"; }

ff::Rational parse_scale(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos)
            return {std::stoll(text), 1};
        return {std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1))};
    } catch (const std::exception&) {
        throw ff::Error(ff::ErrorKind::Usage, "bad --scale value: " + text);
    }
}

std::unique_ptr<ff::GeneratorBackend> open_backend(const ff::Config& cfg) {
    return ff::make_backend(cfg.backend, cfg.backend_options);
}

// store first, toy ground truth second
ff::SemanticDirection resolve_direction(const ff::Config& cfg,
                                        const ff::GeneratorBackend& backend,
                                        const std::string& name) {
    if (fs::exists(cfg.direction_store + "/" + name + ".json"))
        return ff::load_direction(cfg.direction_store, name);
    if (const auto* toy = dynamic_cast<const ff::ToyGenerator*>(&backend))
        return ff::SemanticDirection(name, toy->direction(name),
                                     ff::default_layer_range(name));
    throw ff::Error(ff::ErrorKind::Config,
                    "direction '" + name + "' is neither stored in '" + cfg.direction_store +
                        "' nor provided by backend '" + backend.name() + "'");
}

std::map<std::string, ff::SemanticDirection>
resolve_recipe_directions(const ff::Config& cfg, const ff::GeneratorBackend& backend) {
    std::map<std::string, ff::SemanticDirection> dirs;
    for (const std::string& attr : ff::kRecipeAttributes)
        dirs.emplace(attr, resolve_direction(cfg, backend, attr));
    return dirs;
}

std::vector<std::string> list_pngs(const std::string& dir) {
    ff::require(fs::is_directory(dir), ff::ErrorKind::Io, "not a directory: " + dir);
    std::vector<std::string> paths;
    for (const auto& entry : fs::recursive_directory_iterator(dir))
        if (entry.path().extension() == ".png")
            paths.push_back(entry.path().string());
    std::sort(paths.begin(), paths.end());
    return paths;
}

ff::LightingSweep sweep_from_config(const ff::Config& cfg) {
    return ff::build_sweep(cfg.sweep.azimuths, cfg.sweep.elevations, cfg.sweep.ambient);
}

int run_train_direction(const ff::Config& cfg, const std::string& attribute, std::size_t n,
                        std::uint64_t seed) {
    auto backend = open_backend(cfg);
    auto annotator = ff::make_annotator(cfg.annotator);
    log_line("harvesting " + std::to_string(n) + " samples for '" + attribute + "'");
    ff::HarvestResult harvest = ff::harvest(*backend, *annotator, attribute, n, seed);
    ff::FitReport report = ff::fit_direction(harvest.samples, attribute, cfg.logreg,
                                             ff::default_layer_range(attribute));
    ff::save_direction(cfg.direction_store, report.direction);
    emit(json{{"attribute", attribute},
              {"samples", report.sample_count},
              {"skipped", harvest.skipped},
              {"train_accuracy", report.train_accuracy},
              {"holdout_accuracy", report.holdout_accuracy},
              {"converged", report.converged},
              {"store", cfg.direction_store}});
    return 0;
}

int run_edit(const ff::Config& cfg, std::uint64_t subject_seed, const std::string& direction,
             double coeff_start, double coeff, int frames, std::string out) {
    auto backend = open_backend(cfg);
    ff::SemanticDirection dir = resolve_direction(cfg, *backend, direction);
    ff::LatentW w0 = backend->map_z_to_w(ff::sample_z(subject_seed));
    ff::RenderedImage base = backend->synthesize(w0);
    std::string base_digest = ff::sha256_hex(ff::png_encode(base.pixels));

    if (out.empty())
        out = cfg.output_root + "/edits";
    fs::create_directories(out);

    ff::EditSpec spec{dir, coeff_start, coeff, frames};
    std::vector<double> coeffs = ff::edit_coefficients(spec);
    json results = json::array();
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        ff::RenderedImage frame = backend->synthesize(ff::apply_direction(w0, dir, coeffs[i]));
        char name[128];
        std::snprintf(name, sizeof(name), "seed%llu_%s_f%02zu.png",
                      static_cast<unsigned long long>(subject_seed), direction.c_str(), i);
        std::string path = out + "/" + name;
        auto bytes = ff::png_encode(frame.pixels);
        ff::write_file_bytes(path, bytes);
        results.push_back(
            {{"coeff", coeffs[i]}, {"path", path}, {"digest", ff::sha256_hex(bytes)}});
    }
    emit(json{{"subject_seed", subject_seed},
              {"direction", direction},
              {"base_digest", base_digest},
              {"frames", results}});
    return 0;
}

int run_invert(const ff::Config& cfg, const std::string& image_path, const std::string& out) {
    auto backend = open_backend(cfg);
    ff::RenderedImage target;
    target.pixels = ff::png_read(image_path);
    ff::InversionResult res = ff::invert(*backend, target, cfg.inversion);
    ff::save_latents(out, std::nullopt, res.w_star);
    emit(json{{"image", image_path},
              {"out", out},
              {"final_loss", res.final_loss},
              {"final_pixel_mse", res.final_pixel_mse},
              {"iterations_used", res.iterations_used},
              {"converged", res.converged}});
    return 0;
}

int run_relight(const ff::Config& cfg, const std::string& image_path,
                const std::string& sweep_name, const std::string& light, std::string out) {
    ff::Image image = ff::png_read(image_path);
    ff::NormalMap geometry = ff::estimate_normals(image);
    if (out.empty())
        out = cfg.output_root + "/relit";
    fs::create_directories(out);

    ff::LightingSweep sweep =
        sweep_name == "preset61" ? ff::preset61(cfg.sweep.ambient) : sweep_from_config(cfg);

    std::vector<int> selected;
    if (!light.empty()) {
        const char* names[4] = {"up", "down", "left", "right"};
        for (int c = 0; c < 4; ++c)
            if (light == names[c])
                selected.push_back(sweep.canonical_four[std::size_t(c)]);
        ff::require(!selected.empty(), ff::ErrorKind::Usage,
                    "--light must be one of up|down|left|right");
    } else {
        for (std::size_t i = 0; i < sweep.conditions.size(); ++i)
            selected.push_back(int(i));
    }

    json conditions = json::array();
    json outputs = json::array();
    for (int idx : selected) {
        const ff::SHLighting& cond = sweep.conditions[std::size_t(idx)];
        ff::Image shaded = ff::shade(geometry, cond);
        std::string path = out + "/" + cond.label + ".png";
        auto bytes = ff::png_encode(shaded);
        ff::write_file_bytes(path, bytes);
        outputs.push_back(
            {{"label", cond.label}, {"path", path}, {"digest", ff::sha256_hex(bytes)}});
        conditions.push_back({{"label", cond.label}, {"coeffs", cond.coeffs}});
    }
    {
        std::ofstream cj(out + "/conditions.json", std::ios::trunc);
        cj << conditions.dump(2) << "\n";
    }
    emit(json{{"image", image_path}, {"outputs", outputs}});
    return 0;
}

int run_fid(const ff::Config& cfg, const std::string& dir_a, const std::string& dir_b) {
    auto embedder = ff::make_embedder(cfg.embedder);
    auto stats_of = [&](const std::string& dir) {
        ff::StatsAccumulator acc;
        for (const std::string& path : list_pngs(dir))
            acc.add(embedder->embed(ff::png_read(path)));
        return acc.finalize();
    };
    ff::ActivationStats a = stats_of(dir_a);
    ff::ActivationStats b = stats_of(dir_b);
    double d = ff::frechet_distance(a, b);
    emit(json{{"fid", d}, {"embedder", embedder->name()}, {"n_a", a.n}, {"n_b", b.n}});
    return 0;
}

int run_validate(const ff::Config& cfg, const std::string& suite, std::size_t n,
                 std::uint64_t seed) {
    auto backend = open_backend(cfg);
    const auto* toy = dynamic_cast<const ff::ToyGenerator*>(backend.get());
    ff::require(toy != nullptr, ff::ErrorKind::Unsupported,
                "validate: the shipped suites run on the toy backend");
    std::string out = cfg.output_root + "/validate";
    fs::create_directories(out);

    if (suite == "ear") {
        ff::SemanticDirection eye("eye_openness", toy->direction("eye_openness"),
                                  ff::LayerRange{});
        json subjects = json::array();
        bool all_decreasing = true;
        for (std::size_t s = 0; s < n; ++s) {
            ff::LatentW w = toy->map_z_to_w(ff::sample_z(ff::seed_mix({seed, s})));
            // sweep from the subject's own openness down to fully closed
            double af0 = toy->attribute_value(w, "eye_openness");
            double sig0 = std::clamp(0.08 + 0.92 * af0, 0.1, 0.97);
            double coeff_end = -(std::log(sig0 / (1.0 - sig0)) + 2.64);
            ff::BlinkReport report = ff::blink_sweep_check(*toy, w, eye, 6, 0.0, coeff_end);
            all_decreasing = all_decreasing && report.strictly_decreasing;
            subjects.push_back({{"initial_ear", report.initial},
                                {"final_ear", report.final},
                                {"strictly_decreasing", report.strictly_decreasing},
                                {"ear_values", report.ear_values}});
        }
        emit(json{{"suite", "ear"},
                  {"subjects", subjects},
                  {"all_strictly_decreasing", all_decreasing},
                  {"reference_context", ff::BlinkReport{}.reference_context}});
        return all_decreasing ? 0 : 4;
    }
    if (suite == "landmarks") {
        std::vector<ff::Image> images;
        ff::SemanticDirection yaw("yaw", toy->direction("yaw"), ff::LayerRange{});
        for (std::size_t s = 0; s < n; ++s) {
            ff::LatentW w = toy->map_z_to_w(ff::sample_z(ff::seed_mix({seed, s})));
            images.push_back(
                toy->synthesize(ff::apply_direction(w, yaw, -3.0 + 6.0 * double(s) / double(n)))
                    .pixels);
        }
        ff::LandmarkCheckReport report =
            ff::landmark_check(images, ff::toy_landmark_provider());
        emit(json{{"suite", "landmarks"},
                  {"images", images.size()},
                  {"detection_rate", report.detection_rate}});
        return report.detection_rate == 1.0 ? 0 : 4;
    }
    if (suite == "uniqueness") {
        auto embedder = ff::make_embedder(cfg.embedder);
        std::vector<std::vector<ff::Image>> subjects;
        const char* attrs[4] = {"smile", "eye_openness", "yaw", "age"};
        for (std::size_t s = 0; s < n; ++s) {
            ff::LatentW w = toy->map_z_to_w(ff::sample_z(ff::seed_mix({seed, s})));
            std::vector<ff::Image> group = {toy->synthesize(w).pixels};
            for (const char* attr : attrs) {
                ff::SemanticDirection dir(attr, toy->direction(attr), ff::LayerRange{});
                group.push_back(toy->synthesize(ff::apply_direction(w, dir, 1.2)).pixels);
            }
            subjects.push_back(std::move(group));
        }
        ff::UniquenessReport report = ff::uniqueness_report(*embedder, subjects);
        auto write_csv = [&](const std::string& path, const Eigen::MatrixXd& m) {
            std::ofstream f(path, std::ios::trunc);
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                    f << (j ? "," : "") << m(i, j);
                f << "\n";
            }
        };
        write_csv(out + "/uniqueness_intra.csv", report.intra_scores);
        write_csv(out + "/uniqueness_inter.csv", report.inter_scores);
        emit(json{{"suite", "uniqueness"},
                  {"subjects", subjects.size()},
                  {"min_intra", report.min_intra},
                  {"max_inter", report.max_inter},
                  {"margin", report.margin},
                  {"inconclusive", report.inconclusive},
                  {"matrices",
                   {out + "/uniqueness_intra.csv", out + "/uniqueness_inter.csv"}}});
        return report.margin > 0.0 ? 0 : 4;
    }
    if (suite == "gender") {
        std::vector<ff::LabeledImage> train, test;
        std::size_t total = std::max<std::size_t>(n, 20);
        for (std::size_t i = 0; i < total; ++i) {
            ff::LatentW w = toy->map_z_to_w(ff::sample_z(ff::seed_mix({seed, i})));
            ff::LabeledImage s;
            s.image = toy->synthesize(w).pixels;
            s.label = toy->attribute_value(w, "gender") >= 0.5 ? 1 : 0;
            (i < total * 4 / 5 ? train : test).push_back(std::move(s));
        }
        auto probe = ff::make_linear_probe();
        ff::HarnessReport report = ff::gender_harness_run(*probe, train, test, seed);
        emit(json{{"suite", "gender"},
                  {"model", report.model},
                  {"loss_function", report.loss_function},
                  {"optimizer", report.optimizer},
                  {"train_size", report.train_size},
                  {"test_size", report.test_size},
                  {"test_accuracy", report.test_accuracy},
                  {"reference_context", report.reference_context}});
        return 0;
    }
    throw ff::Error(ff::ErrorKind::Usage, "unknown validation suite: " + suite);
}

int run_render_dataset(const ff::Config& cfg, const std::string& preset,
                       const std::string& scale_text, std::string out) {
    ff::require(preset == "paper", ff::ErrorKind::Usage, "only --preset paper is available");
    ff::RenderPlan plan = ff::scaled_plan(ff::paper_preset(), parse_scale(scale_text));
    auto backend = open_backend(cfg);
    auto directions = resolve_recipe_directions(cfg, *backend);
    ff::LightingSweep sweep = sweep_from_config(cfg);
    if (out.empty())
        out = cfg.output_root + "/dataset";
    ff::RenderRecipes recipes = ff::RenderRecipes::defaults();
    for (const auto& [attr, range] : cfg.coeff_ranges)
        recipes.coeff_ranges[attr] = range;
    log_line("rendering " + std::to_string(ff::plan_totals(plan).total) + " samples into " +
             out);
    ff::RenderStats stats = ff::render_dataset(plan, *backend, directions, sweep, out,
                                               cfg.dataset_seed, cfg.workers, recipes);
    emit(json{{"planned", stats.planned},
              {"rendered", stats.rendered},
              {"skipped", stats.skipped},
              {"failures", stats.failures},
              {"manifest", stats.manifest_path},
              {"output_root", out}});
    return stats.failures.empty() ? 0 : 4;
}

int run_plan_totals(const std::string& preset, const std::string& scale_text) {
    ff::require(preset == "paper", ff::ErrorKind::Usage, "only --preset paper is available");
    ff::RenderPlan plan = ff::scaled_plan(ff::paper_preset(), parse_scale(scale_text));
    ff::PlanTotals totals = ff::plan_totals(plan);
    json cats = json::object();
    for (const auto& [cat, count] : totals.per_category)
        cats[cat] = count;
    emit(json{{"preset", preset},
              {"scale", scale_text},
              {"categories", cats},
              {"total", totals.total}});
    return 0;
}

int run_verify_manifest(const std::string& root) {
    ff::IntegrityReport report = ff::verify_manifest(root);
    emit(json{{"root", root},
              {"rows", report.rows},
              {"violations", report.violations},
              {"gender_balanced", report.gender_balanced},
              {"passed", report.passed()}});
    return report.passed() ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"faceforge: synthetic face dataset factory"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file");
    std::string backend_flag, annotator_flag;
    app.add_option("--backend", backend_flag, "generator backend (overrides config)");
    app.add_option("--annotator", annotator_flag, "attribute labeler (overrides config)");

    std::string attribute, direction, image_path, out, root;
    std::string suite, preset = "paper", scale = "1/1", sweep_name, light;
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    std::uint64_t subject_seed = 0;
    double coeff = 1.0, coeff_start = 0.0;
    int frames = 1;

    auto* train = app.add_subcommand("train-direction", "fit one semantic direction");
    train->add_option("--attribute", attribute)->required();
    train->add_option("--n", n);
    train->add_option("--seed", seed);

    auto* edit = app.add_subcommand("edit", "apply a semantic edit to a seeded subject");
    edit->add_option("--subject-seed", subject_seed)->required();
    edit->add_option("--direction", direction)->required();
    edit->add_option("--coeff", coeff);
    edit->add_option("--coeff-start", coeff_start);
    edit->add_option("--frames", frames);
    edit->add_option("--out", out);

    auto* invert_cmd = app.add_subcommand("invert", "recover a latent from an image");
    invert_cmd->add_option("--image", image_path)->required();
    invert_cmd->add_option("--out", out)->required();

    auto* relight = app.add_subcommand("relight", "shade an image under SH lighting");
    relight->add_option("--image", image_path)->required();
    relight->add_option("--sweep", sweep_name);
    relight->add_option("--light", light);
    relight->add_option("--out", out);

    auto* fid = app.add_subcommand("fid", "Frechet distance between two image sets");
    std::string dir_a, dir_b;
    fid->add_option("--set-a", dir_a)->required();
    fid->add_option("--set-b", dir_b)->required();
    std::string embedder_flag;
    fid->add_option("--embedder", embedder_flag);

    auto* validate = app.add_subcommand("validate", "run a data-quality suite");
    validate->add_option("--suite", suite)->required();
    validate->add_option("--n", n);
    validate->add_option("--seed", seed);

    auto* render = app.add_subcommand("render-dataset", "render the dataset preset");
    render->add_option("--preset", preset);
    render->add_option("--scale", scale);
    render->add_option("--out", out);

    auto* totals = app.add_subcommand("plan-totals", "print the plan arithmetic");
    totals->add_option("--preset", preset);
    totals->add_option("--scale", scale);

    auto* verify = app.add_subcommand("verify-manifest", "check a rendered tree");
    verify->add_option("--root", root)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (app.exit(e) == 0)
            return 0;
        return 2;
    }

    try {
        ff::Config cfg =
            config_path.empty() ? ff::default_config() : ff::load_config(config_path);
        if (!embedder_flag.empty())
            cfg.embedder = embedder_flag;
        if (!backend_flag.empty())
            cfg.backend = backend_flag;
        if (!annotator_flag.empty())
            cfg.annotator = annotator_flag;

        if (train->parsed())
            return run_train_direction(cfg, attribute, n, seed);
        if (edit->parsed())
            return run_edit(cfg, subject_seed, direction, coeff_start, coeff, frames, out);
        if (invert_cmd->parsed())
            return run_invert(cfg, image_path, out);
        if (relight->parsed())
            return run_relight(cfg, image_path, sweep_name, light, out);
        if (fid->parsed())
            return run_fid(cfg, dir_a, dir_b);
        if (validate->parsed())
            return run_validate(cfg, suite, n, seed);
        if (render->parsed())
            return run_render_dataset(cfg, preset, scale, out);
        if (totals->parsed())
            return run_plan_totals(preset, scale);
        if (verify->parsed())
            return run_verify_manifest(root);
        throw ff::Error(ff::ErrorKind::Usage, "no subcommand given");
    } catch (const ff::Error& e) {
        emit(json{{"error", ff::error_kind_name(e.kind())}, {"message", e.what()}});
        log_line(std::string("error (") + ff::error_kind_name(e.kind()) + "): " + e.what());
        switch (e.kind()) {
        case ff::ErrorKind::Usage: return 2;
        case ff::ErrorKind::Config: return 3;
        default: return 4;
        }
    } catch (const std::exception& e) {
        emit(json{{"error", "internal"}, {"message", e.what()}});
        log_line(std::string("error: ") + e.what());
        return 4;
    }
}
