#pragma once

#include <array>
#include <string>
#include <vector>

#include "faceforge/image.hpp"

namespace faceforge {

// Order-2 real spherical-harmonics lighting environment, 9 coefficients in
// the order l=0; l=1 m=-1,0,1; l=2 m=-2..2. Real SH without the
// Condon-Shortley phase; normalization constants as in sh_basis.
struct SHLighting {
    std::array<double, 9> coeffs{};
    std::string label;
};

// Per-pixel unit normals (math frame: x right, y up, z toward the viewer)
// plus albedo in [0,1].
struct NormalMap {
    int width = 0;
    int height = 0;
    std::vector<double> normals; // w*h*3
    std::vector<double> albedo;  // w*h*3
};

struct LightingSweep {
    std::vector<SHLighting> conditions;
    // indices of the canonical up/down/left/right conditions
    std::array<int, 4> canonical_four{-1, -1, -1, -1};
};

// The 9 real SH basis values at a unit direction. Constants:
//   Y00        = 0.282095
//   Y1{-1,0,1} = 0.488603 * {y, z, x}
//   Y2{-2..2}  = 1.092548*xy, 1.092548*yz, 0.315392*(3z^2-1),
//                1.092548*xz, 0.546274*(x^2-y^2)
std::array<double, 9> sh_basis(double nx, double ny, double nz);

// Lambertian irradiance at a normal: sum_i A_l * coeffs_i * Y_i(n), with the
// band convolution weights A0 = pi, A1 = 2*pi/3, A2 = pi/4.
double sh_irradiance(const SHLighting& light, double nx, double ny, double nz);

// Per-pixel albedo * max(0, irradiance), in float space (no clamp above 1).
std::vector<double> shade_linear(const NormalMap& geometry, const SHLighting& light);

// shade_linear clamped to [0,1] and quantized.
Image shade(const NormalMap& geometry, const SHLighting& light);

// Distant directional light of the given intensity projected onto the SH
// basis, plus a constant term contributing exactly `ambient` irradiance.
SHLighting directional_sh(double dx, double dy, double dz, double ambient,
                          double intensity = 1.0);

SHLighting ambient_sh(double ambient);

// One ambient condition followed by a grid of directional conditions
// (elevations outer, azimuths inner; azimuth 0 = +x, 90deg = +y). The
// canonical four point along +y, -y, -x, +x at the elevation closest to the
// image plane.
LightingSweep build_sweep(int azimuth_steps, const std::vector<double>& elevations_deg,
                          double ambient);

// 12 azimuths x 5 elevations + ambient = 61 conditions.
LightingSweep preset61(double ambient = 0.3);

// Unit-normal map of a front-facing sphere of the given diameter; pixels
// outside the disk face the viewer. Albedo is constant 1.
NormalMap sphere_normal_map(int size);

// Toy images decode exactly through their metadata strip; anything else
// goes through a shape-prior ellipsoid fit (approximate, documented).
// Pixels outside the detected face keep the (0,0,1) convention.
NormalMap estimate_normals(const Image& image);

} // namespace faceforge
