#pragma once

#include <array>

#include "nsplan/scene.hpp"

namespace nsplan {

inline constexpr std::size_t kEdgeFeatureDims = 18;
using EdgeFeatures = std::array<double, kEdgeFeatureDims>;

/// Pairwise geometry of object i relative to object j (index 0 is dim 1):
///   0-4   image-normalized dx, dy, |dx|, |dy|, planar distance
///   5-8   normalized box sizes of i and j
///   9-10  log of the width/height ratios, ratios clipped to [0.1, 10]
///   11-14 3D deltas and 3D distance in metres
///   15    IoU of the image boxes
///   16    planar distance over the mean normalized box diagonal
///   17    atan2(dy, dx) / pi
/// Throws DomainError for non-positive image dimensions or zero-size boxes.
EdgeFeatures edge_features(const SceneObject& obj_i, const SceneObject& obj_j, const ImageDims& dims);

}  // namespace nsplan
