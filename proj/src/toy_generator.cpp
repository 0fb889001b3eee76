#include "faceforge/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "faceforge/common.hpp"
#include "faceforge/rng.hpp"

namespace faceforge {

namespace {

constexpr std::uint64_t kBasisSeed = 0xFACEBA5Eull;
constexpr std::uint8_t kStripMagic[4] = {250, 60, 150, 90};
constexpr int kStripPixels = 4 + ToyGenerator::kAttrCount + ToyGenerator::kIdentityDim;

// strip-order attribute controls; indices are load-bearing
const std::vector<std::string> kAttributeNames = {
    "smile", "sad", "angry", "surprise", "eye_openness", "yaw", "pitch",
    "age", "gender", "hue", "brightness", "center_x", "center_y"};

constexpr int kIdxSmile = 0, kIdxSad = 1, kIdxAngry = 2, kIdxSurprise = 3,
              kIdxEye = 4, kIdxYaw = 5, kIdxPitch = 6, kIdxAge = 7,
              kIdxGender = 8, kIdxHue = 9, kIdxBrightness = 10,
              kIdxCenterX = 11, kIdxCenterY = 12;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double quant8(double v01) {
    v01 = std::clamp(v01, 0.0, 1.0);
    return double(std::lround(v01 * 255.0)) / 255.0;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

struct Rgb {
    double r, g, b;
};

Rgb mix(const Rgb& base, const Rgb& over, double cov) {
    return {base.r + (over.r - base.r) * cov, base.g + (over.g - base.g) * cov,
            base.b + (over.b - base.b) * cov};
}

Rgb hsv_to_rgb(double h_deg, double s, double v) {
    double h = std::fmod(std::fmod(h_deg, 360.0) + 360.0, 360.0) / 60.0;
    int i = int(h) % 6;
    double f = h - std::floor(h);
    double p = v * (1 - s), q = v * (1 - f * s), t = v * (1 - (1 - f) * s);
    switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
    }
}

// anti-aliasing half-width in pixels; keeps the render C0 in every
// parameter so finite differences see real slopes
constexpr double kAA = 1.5;

double edge_cov(double signed_dist) { return clamp01(0.5 - signed_dist / kAA); }

double ellipse_dist(double dx, double dy, double a, double b) {
    double r = std::sqrt((dx / a) * (dx / a) + (dy / b) * (dy / b));
    return (r - 1.0) * std::min(a, b);
}

double segment_dist(double px, double py, double x0, double y0, double x1, double y1) {
    double vx = x1 - x0, vy = y1 - y0;
    double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? clamp01(((px - x0) * vx + (py - y0) * vy) / len2) : 0.0;
    double dx = px - (x0 + t * vx), dy = py - (y0 + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

// Geometry derived from one parameter set; shared by render, landmarks and
// the normal field so they can never disagree.
// Every vertical feature position is rigidly tied to the feature center, so
// pitch is the only per-feature vertical degree of freedom and pixel-space
// inversion cannot trade it against expression parameters.
struct FaceGeom {
    double cx, cy;         // head center, pixels
    double a, b;           // head semi-axes
    double hair_th;        // outer hair rim width
    double hairline_y;
    double fx, fy;         // feature block center
    double eye_y, ex_off, ew, ehm, eh, aperture;
    double brow_y, blen, tilt_amt, brow_th;
    double mouth_y, mw, curv, lip_h, mouth_gap;
    double nose_top, nose_bot, nose_w;
};

FaceGeom face_geometry(const ToyParams& p, int size) {
    const auto& q = p.attrs;
    FaceGeom g;
    double S = size;
    double fs = 0.55 + 0.30 * q[kIdxAge];
    double wf = 1.0 + 0.16 * (q[kIdxGender] - 0.5);
    g.cx = p.center_x;
    g.cy = p.center_y;
    g.a = 0.26 * fs * wf * S;
    g.b = 0.34 * fs * S;
    g.hair_th = (0.015 + 0.055 * (1.0 - q[kIdxGender])) * fs * S;
    g.fx = g.cx + (q[kIdxYaw] - 0.5) * 0.35 * g.a;
    g.fy = g.cy + (q[kIdxPitch] - 0.5) * 0.30 * g.b;
    // the hairline tracks pitch as it would under a real head tilt
    g.hairline_y = g.cy - g.b * (0.55 + 0.15 * q[kIdxGender]) +
                   (q[kIdxPitch] - 0.5) * 0.18 * g.b;
    g.eye_y = g.fy - 0.18 * g.b;
    g.ex_off = 0.45 * g.a;
    g.ew = 0.18 * g.a;
    g.ehm = 0.06 * g.b;
    g.aperture = q[kIdxEye];
    g.eh = g.ehm * g.aperture;
    g.brow_y = g.eye_y - 0.18 * g.b;
    g.blen = 0.20 * g.a;
    g.tilt_amt = (q[kIdxAngry] - 0.5) * 0.08 * g.b;
    g.brow_th = 0.030 * g.b;
    g.mouth_y = g.fy + 0.27 * g.b;
    g.mw = (0.30 - 0.12 * q[kIdxSad]) * g.a; // sad purses the mouth
    g.curv = (q[kIdxSmile] - 0.5) * 0.16 * g.b;
    g.lip_h = 0.05 * g.b;
    g.mouth_gap = q[kIdxSurprise] * 0.8 * g.lip_h; // surprise opens the mouth
    g.nose_top = g.fy - 0.05 * g.b;
    g.nose_bot = g.fy + 0.12 * g.b;
    g.nose_w = 0.022 * g.a;
    return g;
}

double center_x_px(double u, int size) { return size * (0.5 + 0.38 * (u - 0.5)); }
double center_y_px(double u, int size) { return size * (0.55 + 0.24 * (u - 0.5)); }

} // namespace

const std::vector<std::string>& ToyGenerator::attribute_names() { return kAttributeNames; }

int ToyGenerator::attribute_index(const std::string& name) {
    std::string key = name == "happy" ? "smile" : name;
    for (std::size_t i = 0; i < kAttributeNames.size(); ++i)
        if (kAttributeNames[i] == key)
            return int(i);
    throw Error(ErrorKind::Unsupported, "toy generator has no attribute '" + name + "'");
}

ToyGenerator::ToyGenerator(int size) : size_(size) {
    require(size_ >= 64, ErrorKind::Config, "toy generator needs output_size >= 64");

    // Fixed orthonormal basis: 13 attribute directions then 64 identity
    // directions, Gram-Schmidt over seeded Gaussians.
    SeededRng rng(kBasisSeed);
    int total = kAttrCount + kIdentityDim;
    basis_.reserve(total);
    while (int(basis_.size()) < total) {
        std::vector<double> v(kLatentDim);
        for (double& x : v)
            x = rng.gaussian();
        for (const auto& u : basis_) {
            double d = 0.0;
            for (int i = 0; i < kLatentDim; ++i)
                d += u[i] * v[i];
            for (int i = 0; i < kLatentDim; ++i)
                v[i] -= d * u[i];
        }
        double norm = 0.0;
        for (double x : v)
            norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-6)
            continue;
        for (double& x : v)
            x /= norm;
        basis_.push_back(std::move(v));
    }

    spec_.landmark_count = 68;
    spec_.attributes = kAttributeNames;
    spec_.attributes.push_back("happy");
    for (int k = 0; k < kAttrCount; ++k)
        spec_.ground_truth_directions[kAttributeNames[k]] = basis_[k];
    spec_.ground_truth_directions["happy"] = basis_[kIdxSmile];

    w_avg_ = LatentW{};
    w_avg_.source = LatentSource::MappedFromZ;
}

const std::vector<double>& ToyGenerator::direction(const std::string& attribute) const {
    return basis_[attribute_index(attribute)];
}

LatentW ToyGenerator::map_z_to_w(const LatentZ& z) const {
    require(z.values.size() == std::size_t(kLatentDim), ErrorKind::Shape,
            "z must have 512 entries");
    // The mapping network analogue: w is the projection of z onto the span
    // of the semantic and identity directions, broadcast to every row. The
    // render ignores the orthogonal residual, so mapped latents carry no
    // dead coordinates.
    std::vector<double> projected(kLatentDim, 0.0);
    for (const auto& dir : basis_) {
        double d = 0.0;
        for (int i = 0; i < kLatentDim; ++i)
            d += dir[std::size_t(i)] * z.values[std::size_t(i)];
        for (int i = 0; i < kLatentDim; ++i)
            projected[std::size_t(i)] += d * dir[std::size_t(i)];
    }
    LatentW w;
    w.source = LatentSource::MappedFromZ;
    for (int r = 0; r < kLatentRows; ++r)
        std::copy(projected.begin(), projected.end(), w.row(r));
    return w;
}

namespace {

ToyParams extract_params(const LatentW& w, const std::vector<std::vector<double>>& basis,
                         int size, bool quantized) {
    std::vector<double> geo(kLatentDim, 0.0), col(kLatentDim, 0.0);
    for (int r = 0; r < ToyGenerator::kGeometryRowsEnd; ++r)
        for (int i = 0; i < kLatentDim; ++i)
            geo[i] += w.row(r)[i];
    for (int r = ToyGenerator::kGeometryRowsEnd; r < kLatentRows; ++r)
        for (int i = 0; i < kLatentDim; ++i)
            col[i] += w.row(r)[i];
    for (int i = 0; i < kLatentDim; ++i) {
        geo[i] /= ToyGenerator::kGeometryRowsEnd;
        col[i] /= kLatentRows - ToyGenerator::kGeometryRowsEnd;
    }

    auto project = [&](int k, const std::vector<double>& feat) {
        double d = 0.0;
        for (int i = 0; i < kLatentDim; ++i)
            d += basis[k][i] * feat[i];
        return d;
    };

    ToyParams p;
    for (int k = 0; k < ToyGenerator::kAttrCount; ++k) {
        const std::vector<double>& feat = (k == kIdxHue || k == kIdxBrightness) ? col : geo;
        double t = project(k, feat);
        double v;
        if (k == kIdxCenterX || k == kIdxCenterY) {
            v = clamp01(0.5 + t / 10.0);
        } else if (k == kIdxEye) {
            // visible eyelid aperture: exactly closed below a floor
            v = std::max(0.0, (sigmoid(t) - 0.08) / 0.92);
        } else {
            v = sigmoid(t);
        }
        p.attrs[k] = quantized ? quant8(v) : v;
    }
    for (int j = 0; j < ToyGenerator::kIdentityDim; ++j) {
        double v = std::clamp(project(ToyGenerator::kAttrCount + j, geo), -4.0, 4.0);
        if (quantized)
            v = quant8((v + 4.0) / 8.0) * 8.0 - 4.0;
        p.identity[j] = v;
    }
    p.center_x = center_x_px(p.attrs[kIdxCenterX], size);
    p.center_y = center_y_px(p.attrs[kIdxCenterY], size);
    return p;
}

} // namespace

ToyParams ToyGenerator::params_from_w(const LatentW& w) const {
    return extract_params(w, basis_, size_, true);
}

double ToyGenerator::attribute_value(const LatentW& w, const std::string& name) const {
    return params_from_w(w).attrs[attribute_index(name)];
}

std::array<double, ToyGenerator::kIdentityDim>
ToyGenerator::identity_values(const LatentW& w) const {
    return params_from_w(w).identity;
}

ImageF ToyGenerator::render_params(const ToyParams& p) const {
    const FaceGeom g = face_geometry(p, size_);
    const auto& q = p.attrs;

    const Rgb bg = {0.92, 0.92, 0.94};
    const Rgb skin = hsv_to_rgb(25.0 + (q[kIdxHue] - 0.5) * 140.0, 0.32, 0.88);
    const Rgb hair = {0.22, 0.13, 0.09};
    const Rgb brow = {0.25, 0.16, 0.11};
    const Rgb sclera = {0.97, 0.97, 0.97};
    const Rgb iris = {0.25, 0.35, 0.58};
    const Rgb lash = {0.15, 0.12, 0.10};
    const Rgb mouth = {0.72, 0.28, 0.30};
    const Rgb mouth_gap_color = {0.28, 0.08, 0.10};
    const Rgb nose = {skin.r * 0.82, skin.g * 0.82, skin.b * 0.82};
    const double bf = 0.6 + 0.4 * q[kIdxBrightness];

    ImageF img(size_, size_);
    for (int y = 0; y < size_; ++y) {
        for (int x = 0; x < size_; ++x) {
            double px = x + 0.5, py = y + 0.5;
            Rgb c = bg;

            // head
            double head_d = ellipse_dist(px - g.cx, py - g.cy, g.a, g.b);
            c = mix(c, skin, edge_cov(head_d));

            // hair: outer dome clipped above the hairline
            double outer_d =
                ellipse_dist(px - g.cx, py - g.cy, g.a + g.hair_th, g.b + g.hair_th);
            double hair_cov = edge_cov(outer_d) * edge_cov(py - g.hairline_y);
            c = mix(c, hair, hair_cov);

            // brows; angry pulls the inner ends down, surprise raises both
            for (int side = -1; side <= 1; side += 2) {
                double ex = g.fx + side * g.ex_off;
                double outer_x = ex + side * g.blen, inner_x = ex - side * g.blen;
                double d = segment_dist(px, py, outer_x, g.brow_y - g.tilt_amt,
                                        inner_x, g.brow_y + g.tilt_amt) -
                           g.brow_th;
                c = mix(c, brow, edge_cov(d));
            }

            // eyes
            for (int side = -1; side <= 1; side += 2) {
                double ex = g.fx + side * g.ex_off;
                if (g.eh > 1e-9) {
                    double sd = ellipse_dist(px - ex, py - g.eye_y, g.ew, g.eh);
                    double cov_s = edge_cov(sd);
                    c = mix(c, sclera, cov_s);
                    double ir = 0.5 * g.ew;
                    double id = std::sqrt((px - ex) * (px - ex) +
                                          (py - g.eye_y) * (py - g.eye_y)) -
                                ir;
                    c = mix(c, iris, edge_cov(id) * cov_s);
                }
                double lash_y = g.eye_y - g.eh;
                double ld = segment_dist(px, py, ex - g.ew, lash_y, ex + g.ew, lash_y) -
                            0.012 * g.b;
                c = mix(c, lash, edge_cov(ld));
                // crease above the eye, fixed relative to the socket
                double crease_y = g.eye_y - 1.4 * g.ehm;
                double cd = segment_dist(px, py, ex - 0.8 * g.ew, crease_y,
                                         ex + 0.8 * g.ew, crease_y) -
                            0.008 * g.b;
                c = mix(c, lash, 0.6 * edge_cov(cd));
            }

            // nose: stem plus base bar
            {
                double d1 = segment_dist(px, py, g.fx, g.nose_top, g.fx, g.nose_bot) - g.nose_w;
                c = mix(c, nose, edge_cov(d1));
                double d2 = segment_dist(px, py, g.fx - 0.06 * g.a, g.nose_bot + 0.01 * g.b,
                                          g.fx + 0.06 * g.a, g.nose_bot + 0.01 * g.b) -
                            0.018 * g.b;
                c = mix(c, nose, edge_cov(d2));
            }

            // mouth: tapered band around a parabola; smile raises corners,
            // surprise opens a dark gap between the lips
            {
                double u = (px - g.fx) / g.mw;
                double uc = std::clamp(u, -1.0, 1.0);
                double curve_y = g.mouth_y - g.curv * uc * uc;
                double half_h = g.lip_h * (1.0 - 0.6 * std::abs(uc));
                double d = std::abs(py - curve_y) - half_h;
                d = std::max(d, (std::abs(u) - 1.0) * g.mw);
                c = mix(c, mouth, edge_cov(d));
                double gap_h = g.mouth_gap * (1.0 - uc * uc);
                double dg = std::abs(py - curve_y) - gap_h;
                dg = std::max(dg, (std::abs(u) - 0.9) * g.mw);
                c = mix(c, mouth_gap_color, edge_cov(dg));
            }

            img.at(x, y, 0) = c.r * bf;
            img.at(x, y, 1) = c.g * bf;
            img.at(x, y, 2) = c.b * bf;
        }
    }

    // metadata strip: magic, 13 attribute bytes, 64 identity bytes, gray
    for (int k = 0; k < kStripPixels; ++k) {
        int x = k % size_, y = k / size_;
        double v;
        if (k < 4)
            v = kStripMagic[k] / 255.0;
        else if (k < 4 + kAttrCount)
            v = p.attrs[k - 4];
        else
            v = (p.identity[k - 4 - kAttrCount] + 4.0) / 8.0;
        img.at(x, y, 0) = v;
        img.at(x, y, 1) = v;
        img.at(x, y, 2) = v;
    }
    return img;
}

RenderedImage ToyGenerator::synthesize(const LatentW& w) const {
    for (double v : w.rows)
        require(std::isfinite(v), ErrorKind::Numeric, "synthesize: latent has non-finite entry");
    ImageF f = render_params(params_from_w(w));
    return RenderedImage{quantize(f), latent_digest(w)};
}

ImageF ToyGenerator::render_continuous(const LatentW& w) const {
    return render_params(extract_params(w, basis_, size_, false));
}

std::vector<std::vector<double>> ToyGenerator::probe_directions() const {
    return basis_; // attribute + identity directions span the render's dependence
}

LandmarkSet ToyGenerator::landmarks_params(const ToyParams& p) const {
    const FaceGeom g = face_geometry(p, size_);
    LandmarkSet lm;
    lm.source = LandmarkSource::ToyGroundTruth;
    auto set = [&](int i, double x, double y) { lm.points[i] = {x, y}; };

    // jaw 0..16 along the lower half of the head ellipse, left ear to right
    for (int i = 0; i <= 16; ++i) {
        double phi = std::numbers::pi - double(i) * std::numbers::pi / 16.0;
        set(i, g.cx + g.a * std::cos(phi), g.cy + g.b * std::sin(phi));
    }
    // brows 17..21 (image left, outer to inner) and 22..26 (inner to outer)
    for (int k = 0; k < 5; ++k) {
        double s = -1.0 + 0.5 * k; // -1 outer .. +1 inner
        double exl = g.fx - g.ex_off;
        set(17 + k, exl - g.blen + 0.5 * k * g.blen, g.brow_y + g.tilt_amt * s);
    }
    for (int k = 0; k < 5; ++k) {
        double s = 1.0 - 0.5 * k; // +1 inner .. -1 outer
        double exr = g.fx + g.ex_off;
        set(22 + k, exr - g.blen + 0.5 * k * g.blen, g.brow_y + g.tilt_amt * s);
    }
    // nose bridge 27..30 and base 31..35
    for (int k = 0; k < 4; ++k)
        set(27 + k, g.fx, g.nose_top + (g.nose_bot - g.nose_top) * k / 3.0);
    for (int k = 0; k < 5; ++k)
        set(31 + k, g.fx + (k - 2) * 0.03 * g.a, g.nose_bot + 0.02 * g.b);
    // eyes 36..41 (image left) and 42..47 (image right)
    for (int side = 0; side < 2; ++side) {
        double ex = g.fx + (side == 0 ? -g.ex_off : g.ex_off);
        int base = side == 0 ? 36 : 42;
        set(base + 0, ex - g.ew, g.eye_y);
        set(base + 1, ex - 0.4 * g.ew, g.eye_y - g.eh);
        set(base + 2, ex + 0.4 * g.ew, g.eye_y - g.eh);
        set(base + 3, ex + g.ew, g.eye_y);
        set(base + 4, ex + 0.4 * g.ew, g.eye_y + g.eh);
        set(base + 5, ex - 0.4 * g.ew, g.eye_y + g.eh);
    }
    // mouth outer 48..59 and inner 60..67
    auto outer_y = [&](double u, int sign) {
        double cy = g.mouth_y - g.curv * u * u;
        return cy + sign * g.lip_h * (1.0 - u * u);
    };
    const double us[5] = {-2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0};
    set(48, g.fx - g.mw, g.mouth_y - g.curv);
    for (int k = 0; k < 5; ++k)
        set(49 + k, g.fx + us[k] * g.mw, outer_y(us[k], -1));
    set(54, g.fx + g.mw, g.mouth_y - g.curv);
    for (int k = 0; k < 5; ++k)
        set(55 + k, g.fx + us[4 - k] * g.mw, outer_y(us[4 - k], +1));
    auto inner_y = [&](double u, int sign) {
        double cy = g.mouth_y - g.curv * u * u;
        return cy + sign * g.mouth_gap * (1.0 - u * u);
    };
    set(60, g.fx - 0.9 * g.mw, g.mouth_y - g.curv * 0.81);
    set(61, g.fx - 0.45 * g.mw, inner_y(-0.45, -1));
    set(62, g.fx, inner_y(0.0, -1));
    set(63, g.fx + 0.45 * g.mw, inner_y(0.45, -1));
    set(64, g.fx + 0.9 * g.mw, g.mouth_y - g.curv * 0.81);
    set(65, g.fx + 0.45 * g.mw, inner_y(0.45, +1));
    set(66, g.fx, inner_y(0.0, +1));
    set(67, g.fx - 0.45 * g.mw, inner_y(-0.45, +1));
    return lm;
}

LandmarkSet ToyGenerator::landmarks(const LatentW& w) const {
    return landmarks_params(params_from_w(w));
}

ToyGenerator::NormalField ToyGenerator::normal_field_params(const ToyParams& p,
                                                            const Image& albedo_source) const {
    require(albedo_source.width == size_ && albedo_source.height == size_, ErrorKind::Shape,
            "albedo image does not match toy output size");
    const FaceGeom g = face_geometry(p, size_);
    NormalField nf;
    nf.size = size_;
    nf.normals.resize(std::size_t(size_) * size_ * 3);
    nf.albedo.resize(std::size_t(size_) * size_ * 3);

    double A = g.a + g.hair_th, B = g.b + g.hair_th;
    double C = 0.60 * std::min(A, B);
    for (int y = 0; y < size_; ++y) {
        for (int x = 0; x < size_; ++x) {
            double dx = (x + 0.5) - g.cx, dy = (y + 0.5) - g.cy;
            double r2 = (dx / A) * (dx / A) + (dy / B) * (dy / B);
            double nx = 0.0, ny = 0.0, nz = 1.0;
            if (r2 < 1.0) {
                double z = C * std::sqrt(1.0 - r2);
                double gx = dx / (A * A), gy = dy / (B * B), gz = z / (C * C);
                double n = std::sqrt(gx * gx + gy * gy + gz * gz);
                nx = gx / n;
                ny = -gy / n; // image y grows down; normals use y-up
                nz = gz / n;
            }
            std::size_t i = (std::size_t(y) * size_ + x) * 3;
            nf.normals[i] = nx;
            nf.normals[i + 1] = ny;
            nf.normals[i + 2] = nz;
            for (int ch = 0; ch < 3; ++ch)
                nf.albedo[i + ch] = albedo_source.at(x, y, ch) / 255.0;
        }
    }
    // strip pixels are metadata, not geometry
    for (int k = 0; k < kStripPixels; ++k) {
        std::size_t i = (std::size_t(k / size_) * size_ + (k % size_)) * 3;
        nf.normals[i] = 0.0;
        nf.normals[i + 1] = 0.0;
        nf.normals[i + 2] = 1.0;
    }
    return nf;
}

ToyGenerator::NormalField ToyGenerator::normal_field(const LatentW& w) const {
    ToyParams p = params_from_w(w);
    return normal_field_params(p, quantize(render_params(p)));
}

std::optional<ToyParams> ToyGenerator::decode_strip(const Image& img, int* size_out) {
    if (img.width < 64 || std::size_t(img.width) * img.height < kStripPixels)
        return std::nullopt;
    auto gray_at = [&](int k) -> int {
        int x = k % img.width, y = k / img.width;
        std::uint8_t r = img.at(x, y, 0), g = img.at(x, y, 1), b = img.at(x, y, 2);
        if (r != g || g != b)
            return -1;
        return r;
    };
    for (int k = 0; k < 4; ++k)
        if (gray_at(k) != kStripMagic[k])
            return std::nullopt;
    ToyParams p;
    for (int k = 0; k < kAttrCount; ++k) {
        int v = gray_at(4 + k);
        if (v < 0)
            return std::nullopt;
        p.attrs[k] = v / 255.0;
    }
    for (int j = 0; j < kIdentityDim; ++j) {
        int v = gray_at(4 + kAttrCount + j);
        if (v < 0)
            return std::nullopt;
        p.identity[j] = v / 255.0 * 8.0 - 4.0;
    }
    p.center_x = center_x_px(p.attrs[kIdxCenterX], img.width);
    p.center_y = center_y_px(p.attrs[kIdxCenterY], img.width);
    if (size_out)
        *size_out = img.width;
    return p;
}

const ToyGenerator& shared_toy(int size) {
    static std::mutex mu;
    static std::map<int, std::unique_ptr<ToyGenerator>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[size];
    if (!slot)
        slot = std::make_unique<ToyGenerator>(size);
    return *slot;
}

} // namespace faceforge
