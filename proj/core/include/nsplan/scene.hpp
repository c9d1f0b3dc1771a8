#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nsplan/json.hpp"
#include "nsplan/predicate.hpp"

namespace nsplan {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

/// Object extents: w along x, h vertical (z), d along y.
struct Size3 {
  double w = 0.0;
  double h = 0.0;
  double d = 0.0;
  friend bool operator==(const Size3&, const Size3&) = default;
};

/// Axis-aligned image box in pixels: centre and extent.
struct BBox2d {
  double cx = 0.0;
  double cy = 0.0;
  double bw = 0.0;
  double bh = 0.0;
  friend bool operator==(const BBox2d&, const BBox2d&) = default;
};

struct ImageDims {
  double width = 224.0;
  double height = 224.0;
  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

struct SceneObject {
  std::string id;
  Vec3 position;  // box centre, metres; table top at z = 0
  Size3 size;
  BBox2d bbox2d;
  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Scene {
  std::vector<SceneObject> objects;
  std::vector<std::pair<std::string, std::string>> support;  // (upper, lower)
  ImageDims image_dims;
  std::uint64_t seed = 0;

  const SceneObject& object(const std::string& id) const;
  std::vector<std::string> ids() const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

namespace geometry {
inline constexpr double kContactEps = 0.005;    // Touching: surface gap below 5 mm
inline constexpr double kCloseDist = 0.15;      // CloseTo: xy centre distance
inline constexpr double kTableHalfExtent = 0.30;
inline constexpr double kViewHalfExtent = 0.35;  // orthographic camera footprint
inline constexpr double kOcclusionIou = 0.3;
inline constexpr double kOnMinHeightGap = 0.02;
inline constexpr double kOnMaxPlanarDist = 0.15;
}  // namespace geometry

inline constexpr int kMinSceneObjects = 3;
inline constexpr int kMaxSceneObjects = 10;

/// Objects are named a, b, c, ... Each object after the first is stacked on a
/// random clear object with probability `stack_bias`, otherwise placed on the
/// table without overlapping other footprints. Throws DomainError for an
/// object count outside [3, 10] or a bias outside [0, 1].
Scene generate_scene(int n_objects, double stack_bias, std::uint64_t seed);

/// Top-down orthographic projection of a box onto the image plane.
BBox2d project(const Vec3& position, const Size3& size, const ImageDims& dims = {});

double iou(const BBox2d& a, const BBox2d& b);

/// Distance between two axis-aligned boxes (0 when they touch or overlap).
double surface_gap(const SceneObject& a, const SceneObject& b);

/// True predicates of the scene; every other candidate predicate is false.
std::set<GroundPredicate> ground_truth_state(const Scene& scene);

/// Objects covered by a higher object's image box with IoU above 0.3.
std::set<std::string> occluded_objects(const Scene& scene);

/// Throws DomainError when the support relation is cyclic or a supported
/// object does not sit above its supporter.
void validate_scene(const Scene& scene);

nlohmann::json to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& doc);

}  // namespace nsplan
