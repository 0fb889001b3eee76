#include "faceforge/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "faceforge/common.hpp"

namespace faceforge {

namespace {

void apply_env_overrides(Config& cfg) {
    if (const char* v = std::getenv("FACEFORGE_OUTPUT_ROOT"))
        cfg.output_root = v;
    if (const char* v = std::getenv("FACEFORGE_DIRECTION_STORE"))
        cfg.direction_store = v;
}

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known,
                    const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        require(known.count(it.key()) > 0, ErrorKind::Config,
                "unknown config key '" + it.key() + "' in " + where);
}

} // namespace

Config default_config() {
    Config cfg;
    apply_env_overrides(cfg);
    return cfg;
}

Config parse_config(const nlohmann::json& j) {
    require(j.is_object(), ErrorKind::Config, "config root must be an object");
    reject_unknown(j,
                   {"backend", "backend_options", "annotator", "embedder", "direction_store",
                    "output_root", "dataset_seed", "workers", "sweep", "coeff_ranges", "logreg",
                    "inversion"},
                   "config root");

    Config cfg;
    cfg.backend = j.value("backend", cfg.backend);
    if (j.contains("backend_options")) {
        require(j["backend_options"].is_object(), ErrorKind::Config,
                "backend_options must be an object");
        cfg.backend_options = j["backend_options"];
    }
    cfg.annotator = j.value("annotator", cfg.annotator);
    cfg.embedder = j.value("embedder", cfg.embedder);
    cfg.direction_store = j.value("direction_store", cfg.direction_store);
    cfg.output_root = j.value("output_root", cfg.output_root);
    cfg.dataset_seed = j.value("dataset_seed", cfg.dataset_seed);
    cfg.workers = j.value("workers", cfg.workers);

    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        reject_unknown(s, {"azimuths", "elevations", "ambient"}, "sweep");
        cfg.sweep.azimuths = s.value("azimuths", cfg.sweep.azimuths);
        if (s.contains("elevations"))
            cfg.sweep.elevations = s["elevations"].get<std::vector<double>>();
        cfg.sweep.ambient = s.value("ambient", cfg.sweep.ambient);
    }
    if (j.contains("coeff_ranges")) {
        for (auto it = j["coeff_ranges"].begin(); it != j["coeff_ranges"].end(); ++it) {
            auto arr = it.value();
            require(arr.is_array() && arr.size() == 2, ErrorKind::Config,
                    "coeff_ranges entries must be [start, end]");
            cfg.coeff_ranges[it.key()] = {arr[0].get<double>(), arr[1].get<double>()};
        }
    }
    if (j.contains("logreg")) {
        const auto& l = j["logreg"];
        reject_unknown(l, {"l2", "max_iters", "tol"}, "logreg");
        cfg.logreg.l2 = l.value("l2", cfg.logreg.l2);
        cfg.logreg.max_iters = l.value("max_iters", cfg.logreg.max_iters);
        cfg.logreg.tol = l.value("tol", cfg.logreg.tol);
    }
    if (j.contains("inversion")) {
        const auto& v = j["inversion"];
        reject_unknown(v,
                       {"max_iters", "step_size", "init", "regularizer_weight", "tolerance",
                        "probe_step", "seed"},
                       "inversion");
        cfg.inversion.max_iters = v.value("max_iters", cfg.inversion.max_iters);
        cfg.inversion.step_size = v.value("step_size", cfg.inversion.step_size);
        std::string init = v.value("init", std::string("w_avg"));
        require(init == "w_avg" || init == "random", ErrorKind::Config,
                "inversion.init must be 'w_avg' or 'random'");
        cfg.inversion.init = init == "w_avg" ? InversionInit::WAvg : InversionInit::Random;
        cfg.inversion.regularizer_weight =
            v.value("regularizer_weight", cfg.inversion.regularizer_weight);
        cfg.inversion.tolerance = v.value("tolerance", cfg.inversion.tolerance);
        cfg.inversion.probe_step = v.value("probe_step", cfg.inversion.probe_step);
        cfg.inversion.seed = v.value("seed", cfg.inversion.seed);
    }

    apply_env_overrides(cfg);
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::Config, "cannot open config: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Config, "config parse error in " + path + ": " + e.what());
    }
    return parse_config(j);
}

nlohmann::json config_schema() {
    return nlohmann::json{
        {"backend", "generator backend name (toy)"},
        {"backend_options", "object passed to the backend; toy: {output_size}"},
        {"annotator", "attribute labeler name (toy)"},
        {"embedder", "embedding extractor name (toy-identity | pixel)"},
        {"direction_store", "directory of persisted semantic directions"},
        {"output_root", "dataset render root"},
        {"dataset_seed", "64-bit master seed for dataset rendering"},
        {"workers", "render worker threads; 0 = hardware concurrency"},
        {"sweep", "{azimuths, elevations[], ambient}"},
        {"coeff_ranges", "attribute -> [coeff_start, coeff_end] overrides"},
        {"logreg", "{l2, max_iters, tol}"},
        {"inversion", "{max_iters, step_size, init, regularizer_weight, tolerance, "
                      "probe_step, seed}"},
    };
}

} // namespace faceforge
