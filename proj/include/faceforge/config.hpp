#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "faceforge/directions.hpp"
#include "faceforge/inversion.hpp"

namespace faceforge {

// Tool configuration, loaded from a JSON file and schema-checked: unknown
// keys are rejected so typos fail loudly. Environment variables
// FACEFORGE_OUTPUT_ROOT and FACEFORGE_DIRECTION_STORE override the two
// path fields (paths only, by policy).
struct Config {
    std::string backend = "toy";
    nlohmann::json backend_options = {{"output_size", 256}};
    std::string annotator = "toy";
    std::string embedder = "toy-identity";
    std::string direction_store = "directions";
    std::string output_root = "out";
    std::uint64_t dataset_seed = 1234;
    int workers = 0;
    struct Sweep {
        int azimuths = 12;
        std::vector<double> elevations = {-30, -15, 0, 15, 30};
        double ambient = 0.3;
    } sweep;
    std::map<std::string, std::pair<double, double>> coeff_ranges; // overrides
    LogRegConfig logreg;
    InversionConfig inversion;
};

Config default_config();
Config load_config(const std::string& path);
Config parse_config(const nlohmann::json& j);
nlohmann::json config_schema();

} // namespace faceforge
