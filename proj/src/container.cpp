#include "faceforge/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "faceforge/common.hpp"

static_assert(std::endian::native == std::endian::little,
              "container serialization assumes a little-endian host");

namespace faceforge {

namespace {

std::size_t element_count(const std::vector<std::size_t>& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape)
        n *= d;
    return n;
}

std::size_t dtype_size(const std::string& dtype) {
    if (dtype == "f4") return 4;
    if (dtype == "f8") return 8;
    throw Error(ErrorKind::Shape, "unknown dtype: " + dtype);
}

} // namespace

void ArrayContainer::set(const std::string& name, const std::string& dtype,
                         std::vector<std::size_t> shape, std::vector<double> data) {
    dtype_size(dtype);
    require(element_count(shape) == data.size(), ErrorKind::Shape,
            "array '" + name + "': shape does not match data length");
    arrays_[name] = Entry{dtype, std::move(shape), std::move(data)};
}

bool ArrayContainer::has(const std::string& name) const {
    return arrays_.count(name) > 0;
}

const std::vector<double>& ArrayContainer::data(const std::string& name) const {
    auto it = arrays_.find(name);
    require(it != arrays_.end(), ErrorKind::Io, "container missing array: " + name);
    return it->second.data;
}

const std::vector<std::size_t>& ArrayContainer::shape(const std::string& name) const {
    auto it = arrays_.find(name);
    require(it != arrays_.end(), ErrorKind::Io, "container missing array: " + name);
    return it->second.shape;
}

const std::string& ArrayContainer::dtype(const std::string& name) const {
    auto it = arrays_.find(name);
    require(it != arrays_.end(), ErrorKind::Io, "container missing array: " + name);
    return it->second.dtype;
}

void ArrayContainer::save(const std::string& base_path) const {
    std::vector<std::uint8_t> blob;
    nlohmann::json index = nlohmann::json::array();

    for (const auto& [name, entry] : arrays_) {
        std::size_t offset = blob.size();
        if (entry.dtype == "f4") {
            for (double v : entry.data) {
                float f = static_cast<float>(v);
                std::uint8_t buf[4];
                std::memcpy(buf, &f, 4);
                blob.insert(blob.end(), buf, buf + 4);
            }
        } else {
            for (double v : entry.data) {
                std::uint8_t buf[8];
                std::memcpy(buf, &v, 8);
                blob.insert(blob.end(), buf, buf + 8);
            }
        }
        index.push_back({{"name", name},
                         {"dtype", entry.dtype},
                         {"shape", entry.shape},
                         {"offset", offset},
                         {"nbytes", entry.data.size() * dtype_size(entry.dtype)}});
    }

    nlohmann::json header = meta_;
    header["format"] = "faceforge-arrays/1";
    header["arrays"] = index;

    std::ofstream bin(base_path + ".bin", std::ios::binary | std::ios::trunc);
    require(bin.good(), ErrorKind::Io, "cannot write " + base_path + ".bin");
    bin.write(reinterpret_cast<const char*>(blob.data()), std::streamsize(blob.size()));

    std::ofstream js(base_path + ".json", std::ios::trunc);
    require(js.good(), ErrorKind::Io, "cannot write " + base_path + ".json");
    js << header.dump(2) << "\n";
}

ArrayContainer ArrayContainer::load(const std::string& base_path) {
    std::ifstream js(base_path + ".json");
    require(js.good(), ErrorKind::Io, "cannot read " + base_path + ".json");
    nlohmann::json header = nlohmann::json::parse(js, nullptr, true);
    require(header.value("format", "") == "faceforge-arrays/1", ErrorKind::Io,
            "unrecognized container format in " + base_path + ".json");

    std::ifstream bin(base_path + ".bin", std::ios::binary);
    require(bin.good(), ErrorKind::Io, "cannot read " + base_path + ".bin");
    std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(bin)),
                                   std::istreambuf_iterator<char>());

    ArrayContainer c;
    for (const auto& e : header.at("arrays")) {
        std::string name = e.at("name");
        std::string dtype = e.at("dtype");
        std::vector<std::size_t> shape = e.at("shape").get<std::vector<std::size_t>>();
        std::size_t offset = e.at("offset");
        std::size_t n = element_count(shape);
        std::size_t nbytes = n * dtype_size(dtype);
        require(offset + nbytes <= blob.size(), ErrorKind::Io,
                "container blob truncated for array: " + name);
        std::vector<double> data(n);
        if (dtype == "f4") {
            for (std::size_t i = 0; i < n; ++i) {
                float f;
                std::memcpy(&f, blob.data() + offset + 4 * i, 4);
                data[i] = f;
            }
        } else {
            for (std::size_t i = 0; i < n; ++i)
                std::memcpy(&data[i], blob.data() + offset + 8 * i, 8);
        }
        c.set(name, dtype, std::move(shape), std::move(data));
    }
    header.erase("arrays");
    header.erase("format");
    c.meta_ = header;
    return c;
}

} // namespace faceforge
