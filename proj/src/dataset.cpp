#include "faceforge/dataset.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "faceforge/common.hpp"
#include "faceforge/rng.hpp"
#include "faceforge/sha256.hpp"

namespace fs = std::filesystem;

namespace faceforge {

const std::vector<std::string> kKnownCategories = {
    "base", "expressions", "blink", "skin_hair", "aging", "headpose", "relight"};

RenderPlan paper_preset() {
    RenderPlan plan;
    plan.categories = {
        {"base", 10000, 10000, {{"", 1}}},
        {"expressions", 2000, 2000, {{"happy", 6}, {"sad", 6}, {"angry", 6}, {"surprise", 6}}},
        {"blink", 2000, 2000, {{"eye_openness", 6}}},
        {"skin_hair", 1000, 1000, {{"mix", 6}}},
        {"aging", 2000, 2000, {{"age", 8}}},
        {"headpose", 2000, 2000, {{"yaw", 8}, {"pitch", 7}}},
        {"relight", 10000, 10000, {{"relight", 4}}},
    };
    return plan;
}

namespace {

long long scale_count(long long count, Rational scale) {
    require(scale.num > 0 && scale.den > 0, ErrorKind::Config, "scale must be positive");
    long long scaled = count * scale.num;
    require(scaled % scale.den == 0, ErrorKind::Config,
            "scale " + std::to_string(scale.num) + "/" + std::to_string(scale.den) +
                " does not divide subject count " + std::to_string(count) + " exactly");
    return scaled / scale.den;
}

void validate_plan(const RenderPlan& plan) {
    for (const auto& cat : plan.categories) {
        bool known = false;
        for (const auto& k : kKnownCategories)
            known = known || k == cat.category;
        require(known, ErrorKind::Config, "unknown category: " + cat.category);
        require(cat.boys >= 0 && cat.girls >= 0, ErrorKind::Config,
                "subject counts must be >= 0");
        for (const auto& [attr, frames] : cat.blocks)
            require(frames >= 1, ErrorKind::Config,
                    "frames must be >= 1 in category " + cat.category + " '" + attr + "'");
    }
}

} // namespace

RenderPlan scaled_plan(const RenderPlan& plan, Rational scale) {
    RenderPlan out = plan;
    out.scale = scale;
    for (auto& cat : out.categories) {
        cat.boys = scale_count(cat.boys, scale);
        cat.girls = scale_count(cat.girls, scale);
    }
    return out;
}

PlanTotals plan_totals(const RenderPlan& plan) {
    validate_plan(plan);
    PlanTotals totals;
    for (const auto& cat : plan.categories) {
        long long frames = 0;
        for (const auto& [attr, f] : cat.blocks)
            frames += f;
        long long count = (cat.boys + cat.girls) * frames;
        totals.per_category.emplace_back(cat.category, count);
        totals.total += count;
    }
    return totals;
}

std::uint64_t derive_subject_seed(std::uint64_t dataset_seed, const std::string& gender,
                                  long long subject_index) {
    return seed_mix({dataset_seed, fnv1a64("subject"), fnv1a64(gender),
                     std::uint64_t(subject_index)});
}

std::uint64_t derive_item_seed(std::uint64_t dataset_seed, const std::string& gender,
                               long long subject_index, const std::string& category,
                               const std::string& attribute, int frame_index) {
    return seed_mix({dataset_seed, fnv1a64("item"), fnv1a64(gender),
                     std::uint64_t(subject_index), fnv1a64(category), fnv1a64(attribute),
                     std::uint64_t(frame_index)});
}

RenderRecipes RenderRecipes::defaults() {
    RenderRecipes r;
    r.coeff_ranges = {
        {"happy", {0.0, 2.5}},  {"sad", {0.0, 2.5}},     {"angry", {0.0, 2.5}},
        {"surprise", {0.0, 2.5}}, {"eye_openness", {0.0, -4.0}}, {"age", {0.0, 3.0}},
        {"yaw", {-2.5, 2.5}},   {"pitch", {-2.5, 2.5}},
    };
    return r;
}

namespace {

struct WorkItem {
    ManifestRow row; // digest filled after rendering
    std::uint64_t subject_seed = 0;
    std::uint64_t item_seed = 0;
    int frames_in_block = 1;
};

std::string format_coeff(double c) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", c);
    return buf;
}

std::string csv_line(const ManifestRow& r) {
    std::ostringstream os;
    os << r.sample_id << ',' << r.subject_id << ',' << r.gender << ',' << r.category << ','
       << r.attribute << ',' << r.frame_index << ',' << format_coeff(r.coeff) << ','
       << r.lighting_label << ',' << r.seed << ',' << r.relative_path << ','
       << r.content_digest;
    return os.str();
}

const char* kCsvHeader =
    "sample_id,subject_id,gender,category,attribute,frame_index,coeff,"
    "lighting_label,seed,relative_path,content_digest";

std::vector<WorkItem> enumerate_plan(const RenderPlan& plan, std::uint64_t dataset_seed,
                                     const RenderRecipes& recipes) {
    validate_plan(plan);
    const char* lighting_names[4] = {"up", "down", "left", "right"};
    std::vector<WorkItem> items;
    for (const auto& cat : plan.categories) {
        for (const std::string gender : {std::string("boy"), std::string("girl")}) {
            long long count = gender == "boy" ? cat.boys : cat.girls;
            for (long long s = 0; s < count; ++s) {
                char sid[64];
                std::snprintf(sid, sizeof(sid), "%s_%06lld", gender.c_str(), s);
                for (const auto& [attr, frames] : cat.blocks) {
                    for (int f = 0; f < frames; ++f) {
                        WorkItem item;
                        ManifestRow& row = item.row;
                        row.subject_id = sid;
                        row.gender = gender;
                        row.category = cat.category;
                        row.attribute = attr;
                        row.frame_index = f;
                        row.seed = derive_subject_seed(dataset_seed, gender, s);
                        item.subject_seed = row.seed;
                        item.item_seed =
                            derive_item_seed(dataset_seed, gender, s, cat.category, attr, f);
                        item.frames_in_block = frames;

                        std::string attr_tag = attr.empty() ? "plain" : attr;
                        char frame_name[96];
                        std::snprintf(frame_name, sizeof(frame_name), "%s_f%02d.png",
                                      attr_tag.c_str(), f);
                        row.relative_path = gender + "/" + cat.category + "/" + sid + "/" +
                                            frame_name;
                        row.sample_id = gender + "_" + std::string(sid).substr(gender.size() + 1) +
                                        "_" + cat.category + "_" + attr_tag + "_f" +
                                        std::to_string(f);

                        if (cat.category == "relight") {
                            row.lighting_label =
                                lighting_names[std::size_t(f) % 4];
                        } else if (auto it = recipes.coeff_ranges.find(attr);
                                   it != recipes.coeff_ranges.end()) {
                            auto [lo, hi] = it->second;
                            row.coeff = frames == 1
                                            ? hi
                                            : lo + (hi - lo) * double(f) / double(frames - 1);
                        }
                        items.push_back(std::move(item));
                    }
                }
            }
        }
    }
    return items;
}

Image render_item(const WorkItem& item, const GeneratorBackend& backend,
                  const std::map<std::string, SemanticDirection>& directions,
                  const LightingSweep& sweep, const RenderRecipes& recipes) {
    const ManifestRow& row = item.row;
    LatentW w0 = backend.map_z_to_w(sample_z(item.subject_seed));

    if (row.category == "base") {
        return backend.synthesize(w0).pixels;
    }
    if (row.category == "skin_hair") {
        LatentW donor = backend.map_z_to_w(sample_z(item.item_seed));
        return backend.synthesize(mix_styles(w0, donor, recipes.mix_layers)).pixels;
    }
    if (row.category == "relight") {
        Image base = backend.synthesize(w0).pixels;
        int canon = sweep.canonical_four[std::size_t(row.frame_index) % 4];
        require(canon >= 0 && canon < int(sweep.conditions.size()), ErrorKind::Config,
                "relight: sweep has no canonical condition " +
                    std::to_string(row.frame_index));
        return shade(estimate_normals(base), sweep.conditions[std::size_t(canon)]);
    }
    auto dit = directions.find(row.attribute);
    require(dit != directions.end(), ErrorKind::Config,
            "render_dataset: missing direction '" + row.attribute + "'");
    return backend.synthesize(apply_direction(w0, dit->second, row.coeff)).pixels;
}

std::map<std::string, ManifestRow> load_existing_rows(const std::string& root) {
    std::map<std::string, ManifestRow> rows;
    for (const char* name : {"manifest.csv", "manifest.journal"}) {
        std::string path = root + "/" + name;
        if (!fs::exists(path))
            continue;
        for (auto& row : read_manifest_rows(path))
            rows[row.sample_id] = std::move(row);
    }
    return rows;
}

} // namespace

std::vector<ManifestRow> read_manifest_rows(const std::string& csv_path) {
    std::ifstream in(csv_path);
    require(in.good(), ErrorKind::Io, "cannot read manifest: " + csv_path);
    std::vector<ManifestRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (first && line == kCsvHeader) {
            first = false;
            continue;
        }
        first = false;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            std::size_t pos = line.find(',', start);
            cols.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos)
                break;
            start = pos + 1;
        }
        require(cols.size() == 11, ErrorKind::State,
                "manifest corruption: bad column count in line: " + line);
        ManifestRow r;
        r.sample_id = cols[0];
        r.subject_id = cols[1];
        r.gender = cols[2];
        r.category = cols[3];
        r.attribute = cols[4];
        r.frame_index = std::stoi(cols[5]);
        r.coeff = std::stod(cols[6]);
        r.lighting_label = cols[7];
        r.seed = std::stoull(cols[8]);
        r.relative_path = cols[9];
        r.content_digest = cols[10];
        rows.push_back(std::move(r));
    }
    return rows;
}

RenderStats render_dataset(const RenderPlan& plan, const GeneratorBackend& backend,
                           const std::map<std::string, SemanticDirection>& directions,
                           const LightingSweep& sweep, const std::string& output_root,
                           std::uint64_t dataset_seed, int workers,
                           const RenderRecipes& recipes) {
    fs::create_directories(output_root);
    std::vector<WorkItem> items = enumerate_plan(plan, dataset_seed, recipes);

    RenderStats stats;
    stats.planned = items.size();
    stats.manifest_path = output_root + "/manifest.csv";

    // digest-valid rows from a previous (possibly interrupted) run survive
    std::map<std::string, ManifestRow> existing = load_existing_rows(output_root);
    std::vector<int> todo;
    for (std::size_t i = 0; i < items.size(); ++i) {
        auto it = existing.find(items[i].row.sample_id);
        if (it != existing.end()) {
            std::string path = output_root + "/" + it->second.relative_path;
            if (fs::exists(path) && sha256_file_hex(path) == it->second.content_digest) {
                items[i].row.content_digest = it->second.content_digest;
                ++stats.skipped;
                continue;
            }
        }
        todo.push_back(int(i));
    }

    std::ofstream journal(output_root + "/manifest.journal", std::ios::app);
    std::mutex journal_mu;
    std::mutex fail_mu;
    std::atomic<std::size_t> cursor{0};

    int n_workers = workers > 0 ? workers : int(std::thread::hardware_concurrency());
    n_workers = std::max(1, std::min<int>(n_workers, int(std::max<std::size_t>(1, todo.size()))));

    auto worker = [&]() {
        while (true) {
            std::size_t k = cursor.fetch_add(1);
            if (k >= todo.size())
                return;
            WorkItem& item = items[std::size_t(todo[k])];
            try {
                Image img = render_item(item, backend, directions, sweep, recipes);
                std::vector<std::uint8_t> png = png_encode(img);
                item.row.content_digest = sha256_hex(png);
                fs::path path = fs::path(output_root) / item.row.relative_path;
                fs::create_directories(path.parent_path());
                write_file_bytes(path.string(), png);
                std::lock_guard<std::mutex> lock(journal_mu);
                journal << csv_line(item.row) << "\n";
                journal.flush();
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(fail_mu);
                stats.failures.push_back(item.row.sample_id + ": " + e.what());
                item.row.content_digest.clear();
            }
        }
    };

    std::vector<std::thread> pool;
    for (int t = 0; t < n_workers; ++t)
        pool.emplace_back(worker);
    for (auto& t : pool)
        t.join();
    stats.rendered = todo.size() - stats.failures.size();

    // canonical-order manifest rewrite; the journal folds in and disappears
    {
        std::ofstream out(stats.manifest_path, std::ios::trunc);
        require(out.good(), ErrorKind::Io, "cannot write manifest: " + stats.manifest_path);
        out << kCsvHeader << "\n";
        for (const auto& item : items)
            if (!item.row.content_digest.empty())
                out << csv_line(item.row) << "\n";
    }
    journal.close();
    fs::remove(output_root + "/manifest.journal");

    nlohmann::json meta;
    meta["format"] = "faceforge-manifest/1";
    meta["dataset_seed"] = dataset_seed;
    meta["scale"] = std::to_string(plan.scale.num) + "/" + std::to_string(plan.scale.den);
    meta["backend"] = backend.name();
    meta["tool_version"] = "faceforge 1.0";
    nlohmann::json cats = nlohmann::json::array();
    for (const auto& cat : plan.categories) {
        nlohmann::json blocks = nlohmann::json::array();
        for (const auto& [attr, frames] : cat.blocks)
            blocks.push_back({{"attribute", attr}, {"frames", frames}});
        cats.push_back({{"category", cat.category},
                        {"boys", cat.boys},
                        {"girls", cat.girls},
                        {"blocks", blocks}});
    }
    meta["plan"] = cats;
    std::ofstream meta_out(output_root + "/manifest_meta.json", std::ios::trunc);
    meta_out << meta.dump(2) << "\n";

    return stats;
}

IntegrityReport verify_manifest(const std::string& output_root) {
    IntegrityReport report;
    std::string csv = output_root + "/manifest.csv";
    require(fs::exists(csv), ErrorKind::State, "no manifest at " + csv);
    std::vector<ManifestRow> rows = read_manifest_rows(csv);
    report.rows = rows.size();

    std::set<std::string> ids;
    // category -> gender -> distinct subjects
    std::map<std::string, std::map<std::string, std::set<std::string>>> subjects;
    for (const auto& row : rows) {
        if (!ids.insert(row.sample_id).second)
            report.violations.push_back("duplicate sample_id: " + row.sample_id);
        std::string path = output_root + "/" + row.relative_path;
        if (!fs::exists(path)) {
            report.violations.push_back("missing file: " + row.relative_path);
        } else if (sha256_file_hex(path) != row.content_digest) {
            report.violations.push_back("digest mismatch: " + row.relative_path);
        }
        subjects[row.category][row.gender].insert(row.subject_id);
    }
    for (const auto& [category, by_gender] : subjects) {
        std::size_t boys = by_gender.count("boy") ? by_gender.at("boy").size() : 0;
        std::size_t girls = by_gender.count("girl") ? by_gender.at("girl").size() : 0;
        if (boys != girls) {
            report.gender_balanced = false;
            report.violations.push_back("gender imbalance in " + category + ": " +
                                        std::to_string(boys) + " boys vs " +
                                        std::to_string(girls) + " girls");
        }
    }
    return report;
}

} // namespace faceforge
