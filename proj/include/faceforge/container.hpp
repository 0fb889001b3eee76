#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace faceforge {

// Self-describing container of named numeric arrays: a flat little-endian
// .bin file plus a .json sidecar listing name/dtype/shape/offset per array
// and any extra metadata. dtype is "f4" or "f8"; values travel as doubles
// in memory and are narrowed on write when dtype is f4, so a save/load/save
// cycle reproduces the files byte for byte.
class ArrayContainer {
public:
    void set(const std::string& name, const std::string& dtype,
             std::vector<std::size_t> shape, std::vector<double> data);

    bool has(const std::string& name) const;
    const std::vector<double>& data(const std::string& name) const;
    const std::vector<std::size_t>& shape(const std::string& name) const;
    const std::string& dtype(const std::string& name) const;

    nlohmann::json& meta() { return meta_; }
    const nlohmann::json& meta() const { return meta_; }

    // base path without extension; writes base.bin and base.json
    void save(const std::string& base_path) const;
    static ArrayContainer load(const std::string& base_path);

private:
    struct Entry {
        std::string dtype;
        std::vector<std::size_t> shape;
        std::vector<double> data;
    };
    std::map<std::string, Entry> arrays_;
    nlohmann::json meta_ = nlohmann::json::object();
};

} // namespace faceforge
