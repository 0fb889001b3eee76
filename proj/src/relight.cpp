#include "faceforge/relight.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "faceforge/common.hpp"
#include "faceforge/generator.hpp"

namespace faceforge {

namespace {

const double kPi = std::numbers::pi;

// Lambertian band convolution weights per coefficient.
const double kBandWeight[9] = {kPi,
                               2.0 * kPi / 3.0, 2.0 * kPi / 3.0, 2.0 * kPi / 3.0,
                               kPi / 4.0, kPi / 4.0, kPi / 4.0, kPi / 4.0, kPi / 4.0};

struct ShConstants {
    double c00, c1, c2m2, c20, c22;
    ShConstants() {
        c00 = 0.5 * std::sqrt(1.0 / kPi);
        c1 = std::sqrt(3.0 / (4.0 * kPi));
        c2m2 = 0.5 * std::sqrt(15.0 / kPi);
        c20 = 0.25 * std::sqrt(5.0 / kPi);
        c22 = 0.25 * std::sqrt(15.0 / kPi);
    }
};

const ShConstants kSh;

std::array<double, 9> sh_basis_unchecked(double x, double y, double z) {
    return {kSh.c00,
            kSh.c1 * y, kSh.c1 * z, kSh.c1 * x,
            kSh.c2m2 * x * y, kSh.c2m2 * y * z, kSh.c20 * (3.0 * z * z - 1.0),
            kSh.c2m2 * x * z, kSh.c22 * (x * x - y * y)};
}

} // namespace

std::array<double, 9> sh_basis(double nx, double ny, double nz) {
    double norm = std::sqrt(nx * nx + ny * ny + nz * nz);
    require(std::abs(norm - 1.0) <= 1e-6, ErrorKind::Numeric,
            "sh_basis expects a unit direction");
    return sh_basis_unchecked(nx, ny, nz);
}

double sh_irradiance(const SHLighting& light, double nx, double ny, double nz) {
    auto y = sh_basis_unchecked(nx, ny, nz);
    double e = 0.0;
    for (int i = 0; i < 9; ++i)
        e += kBandWeight[i] * light.coeffs[i] * y[i];
    return e;
}

std::vector<double> shade_linear(const NormalMap& g, const SHLighting& light) {
    require(g.width > 0 && g.height > 0 &&
                g.normals.size() == std::size_t(g.width) * g.height * 3 &&
                g.albedo.size() == g.normals.size(),
            ErrorKind::Shape, "shade: inconsistent normal map");
    std::vector<double> out(g.normals.size());
    for (std::size_t p = 0; p < out.size(); p += 3) {
        double nx = g.normals[p], ny = g.normals[p + 1], nz = g.normals[p + 2];
        double n2 = nx * nx + ny * ny + nz * nz;
        require(std::abs(n2 - 1.0) <= 2.5e-6, ErrorKind::Numeric,
                "shade: non-unit normal in geometry");
        double e = std::max(0.0, sh_irradiance(light, nx, ny, nz));
        out[p] = g.albedo[p] * e;
        out[p + 1] = g.albedo[p + 1] * e;
        out[p + 2] = g.albedo[p + 2] * e;
    }
    return out;
}

Image shade(const NormalMap& g, const SHLighting& light) {
    std::vector<double> lin = shade_linear(g, light);
    ImageF f(g.width, g.height);
    f.rgb = std::move(lin);
    return quantize(f);
}

SHLighting directional_sh(double dx, double dy, double dz, double ambient,
                          double intensity) {
    require(ambient >= 0.0, ErrorKind::Numeric, "ambient must be >= 0");
    double norm = std::sqrt(dx * dx + dy * dy + dz * dz);
    require(std::abs(norm - 1.0) <= 1e-6, ErrorKind::Numeric,
            "directional_sh expects a unit direction");
    SHLighting l;
    auto y = sh_basis_unchecked(dx, dy, dz);
    for (int i = 0; i < 9; ++i)
        l.coeffs[i] = intensity * y[i];
    // constant term tuned so the ambient part contributes exactly `ambient`
    // irradiance at every normal
    l.coeffs[0] += ambient / (kBandWeight[0] * kSh.c00);
    return l;
}

SHLighting ambient_sh(double ambient) {
    return directional_sh(0.0, 0.0, 1.0, ambient, 0.0);
}

namespace {

std::string angle_label(double az_deg, double el_deg) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "az%03d_el%+03d", int(std::lround(az_deg)),
                  int(std::lround(el_deg)));
    return buf;
}

} // namespace

LightingSweep build_sweep(int azimuth_steps, const std::vector<double>& elevations_deg,
                          double ambient) {
    require(azimuth_steps >= 1 && !elevations_deg.empty(), ErrorKind::Shape,
            "build_sweep needs at least one azimuth and one elevation");
    LightingSweep sweep;
    SHLighting amb = ambient_sh(ambient);
    amb.label = "ambient";
    sweep.conditions.push_back(amb);

    // the ring closest to the image plane hosts the canonical directions
    double best_el = elevations_deg[0];
    for (double el : elevations_deg)
        if (std::abs(el) < std::abs(best_el))
            best_el = el;

    const double canonical_az[4] = {90.0, 270.0, 180.0, 0.0}; // up, down, left, right
    const char* canonical_name[4] = {"up", "down", "left", "right"};
    double canonical_err[4] = {1e9, 1e9, 1e9, 1e9};

    for (double el_deg : elevations_deg) {
        double el = el_deg * kPi / 180.0;
        for (int ai = 0; ai < azimuth_steps; ++ai) {
            double az_deg = 360.0 * ai / azimuth_steps;
            double az = az_deg * kPi / 180.0;
            SHLighting cond = directional_sh(std::cos(el) * std::cos(az),
                                             std::cos(el) * std::sin(az),
                                             std::sin(el), ambient);
            cond.label = angle_label(az_deg, el_deg);
            int idx = int(sweep.conditions.size());
            if (el_deg == best_el) {
                for (int c = 0; c < 4; ++c) {
                    double diff = std::fmod(std::abs(az_deg - canonical_az[c]), 360.0);
                    diff = std::min(diff, 360.0 - diff);
                    if (diff < canonical_err[c]) {
                        canonical_err[c] = diff;
                        sweep.canonical_four[c] = idx;
                        if (diff < 1e-9)
                            cond.label = canonical_name[c];
                    }
                }
            }
            sweep.conditions.push_back(cond);
        }
    }
    return sweep;
}

LightingSweep preset61(double ambient) {
    LightingSweep s = build_sweep(12, {-30.0, -15.0, 0.0, 15.0, 30.0}, ambient);
    require(int(s.conditions.size()) == 61, ErrorKind::Numeric,
            "preset sweep must emit 61 conditions");
    return s;
}

NormalMap sphere_normal_map(int size) {
    NormalMap m;
    m.width = size;
    m.height = size;
    m.normals.assign(std::size_t(size) * size * 3, 0.0);
    m.albedo.assign(std::size_t(size) * size * 3, 1.0);
    double cx = size / 2.0, cy = size / 2.0, r = size / 2.0 - 1.0;
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            double dx = (x + 0.5 - cx) / r, dy = (y + 0.5 - cy) / r;
            double rr = dx * dx + dy * dy;
            std::size_t i = (std::size_t(y) * size + x) * 3;
            if (rr < 1.0) {
                m.normals[i] = dx;
                m.normals[i + 1] = -dy; // image y down, normals y up
                m.normals[i + 2] = std::sqrt(1.0 - rr);
            } else {
                m.normals[i + 2] = 1.0;
            }
        }
    }
    return m;
}

NormalMap estimate_normals(const Image& image) {
    // toy path: the metadata strip reconstructs the exact geometry
    if (image.width == image.height && image.width >= 64) {
        if (auto params = ToyGenerator::decode_strip(image)) {
            const ToyGenerator& toy = shared_toy(image.width);
            auto nf = toy.normal_field_params(*params, image);
            NormalMap m;
            m.width = image.width;
            m.height = image.height;
            m.normals = std::move(nf.normals);
            m.albedo = std::move(nf.albedo);
            return m;
        }
    }

    // fallback: bounding-box ellipsoid fit against the border background
    double bg[3];
    for (int c = 0; c < 3; ++c)
        bg[c] = (image.at(0, image.height - 1, c) +
                 image.at(image.width - 1, image.height - 1, c)) /
                2.0;
    int x0 = image.width, x1 = -1, y0 = image.height, y1 = -1;
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            double d = 0.0;
            for (int c = 0; c < 3; ++c)
                d = std::max(d, std::abs(image.at(x, y, c) - bg[c]));
            if (d > 12.0) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
        }
    }
    require(x1 - x0 > 2 && y1 - y0 > 2, ErrorKind::Inference,
            "estimate_normals: no face-like region detected");

    NormalMap m;
    m.width = image.width;
    m.height = image.height;
    m.normals.assign(std::size_t(image.width) * image.height * 3, 0.0);
    m.albedo.resize(m.normals.size());
    double cx = (x0 + x1 + 1) / 2.0, cy = (y0 + y1 + 1) / 2.0;
    double a = (x1 - x0 + 1) / 2.0, b = (y1 - y0 + 1) / 2.0;
    double c = std::min(a, b);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            std::size_t i = (std::size_t(y) * image.width + x) * 3;
            double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
            double r2 = (dx / a) * (dx / a) + (dy / b) * (dy / b);
            if (r2 < 1.0) {
                double z = c * std::sqrt(1.0 - r2);
                double gx = dx / (a * a), gy = dy / (b * b), gz = z / (c * c);
                double n = std::sqrt(gx * gx + gy * gy + gz * gz);
                m.normals[i] = gx / n;
                m.normals[i + 1] = -gy / n;
                m.normals[i + 2] = gz / n;
            } else {
                m.normals[i + 2] = 1.0;
            }
            for (int ch = 0; ch < 3; ++ch)
                m.albedo[i + ch] = image.at(x, y, ch) / 255.0;
        }
    }
    return m;
}

} // namespace faceforge
