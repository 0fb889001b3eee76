#pragma once

#include <array>

namespace faceforge {

enum class LandmarkSource { ToyGroundTruth, ExternalDetector };

// 68 facial keypoints in the standard annotation order (0-16 jaw, 17-26
// brows, 27-35 nose, 36-47 eyes, 48-67 mouth), pixel coordinates with the
// origin at the top-left corner.
struct LandmarkSet {
    std::array<std::array<double, 2>, 68> points{};
    LandmarkSource source = LandmarkSource::ToyGroundTruth;

    double x(int i) const { return points[i][0]; }
    double y(int i) const { return points[i][1]; }
};

} // namespace faceforge
