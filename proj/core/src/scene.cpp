#include "nsplan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "nsplan/error.hpp"

namespace nsplan {

using namespace geometry;

const SceneObject& Scene::object(const std::string& id) const {
  for (const auto& o : objects) {
    if (o.id == id) return o;
  }
  throw DomainError("no object named " + id);
}

std::vector<std::string> Scene::ids() const {
  std::vector<std::string> out;
  out.reserve(objects.size());
  for (const auto& o : objects) out.push_back(o.id);
  return out;
}

BBox2d project(const Vec3& position, const Size3& size, const ImageDims& dims) {
  const double span = 2.0 * kViewHalfExtent;
  return {(position.x + kViewHalfExtent) / span * dims.width,
          (kViewHalfExtent - position.y) / span * dims.height, size.w / span * dims.width,
          size.d / span * dims.height};
}

double iou(const BBox2d& a, const BBox2d& b) {
  const double ix = std::max(0.0, std::min(a.cx + a.bw / 2, b.cx + b.bw / 2) -
                                      std::max(a.cx - a.bw / 2, b.cx - b.bw / 2));
  const double iy = std::max(0.0, std::min(a.cy + a.bh / 2, b.cy + b.bh / 2) -
                                      std::max(a.cy - a.bh / 2, b.cy - b.bh / 2));
  const double inter = ix * iy;
  const double uni = a.bw * a.bh + b.bw * b.bh - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double surface_gap(const SceneObject& a, const SceneObject& b) {
  auto axis_gap = [](double ca, double cb, double ea, double eb) {
    return std::max(0.0, std::abs(ca - cb) - (ea + eb) / 2.0);
  };
  const double gx = axis_gap(a.position.x, b.position.x, a.size.w, b.size.w);
  const double gy = axis_gap(a.position.y, b.position.y, a.size.d, b.size.d);
  const double gz = axis_gap(a.position.z, b.position.z, a.size.h, b.size.h);
  return std::sqrt(gx * gx + gy * gy + gz * gz);
}

Scene generate_scene(int n_objects, double stack_bias, std::uint64_t seed) {
  if (n_objects < kMinSceneObjects || n_objects > kMaxSceneObjects) {
    throw DomainError("object count must lie in [3,10], got " + std::to_string(n_objects));
  }
  if (!(stack_bias >= 0.0 && stack_bias <= 1.0)) {
    throw DomainError("stack bias must lie in [0,1]");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  constexpr double kMinSize = 0.04;
  constexpr double kMaxSize = 0.08;
  constexpr double kFootprintMargin = 0.03;
  constexpr double kStackJitter = 0.003;

  Scene scene;
  scene.seed = seed;
  std::map<std::string, bool> is_clear;

  for (int k = 0; k < n_objects; ++k) {
    SceneObject obj;
    obj.id = std::string(1, static_cast<char>('a' + k));
    obj.size = {uniform(kMinSize, kMaxSize), uniform(kMinSize, kMaxSize),
                uniform(kMinSize, kMaxSize)};

    std::vector<std::string> tops;
    for (const auto& o : scene.objects) {
      if (is_clear[o.id]) tops.push_back(o.id);
    }
    const bool stack = unit(rng) < stack_bias && !tops.empty();
    bool placed = false;
    if (stack) {
      const auto& base = scene.object(tops[static_cast<std::size_t>(unit(rng) * tops.size()) %
                                           tops.size()]);
      // footprints never grow up a tower, so neighbouring towers stay apart
      obj.size.w = std::min(obj.size.w, base.size.w);
      obj.size.d = std::min(obj.size.d, base.size.d);
      obj.position = {base.position.x + uniform(-kStackJitter, kStackJitter),
                      base.position.y + uniform(-kStackJitter, kStackJitter),
                      base.position.z + base.size.h / 2 + obj.size.h / 2};
      scene.support.emplace_back(obj.id, base.id);
      is_clear[base.id] = false;
      placed = true;
    }
    for (int attempt = 0; !placed && attempt < 10000; ++attempt) {
      const Vec3 candidate{uniform(-kTableHalfExtent + obj.size.w / 2, kTableHalfExtent - obj.size.w / 2),
                           uniform(-kTableHalfExtent + obj.size.d / 2, kTableHalfExtent - obj.size.d / 2),
                           obj.size.h / 2};
      const bool free = std::none_of(scene.objects.begin(), scene.objects.end(), [&](const auto& o) {
        return std::abs(o.position.x - candidate.x) < (o.size.w + obj.size.w) / 2 + kFootprintMargin &&
               std::abs(o.position.y - candidate.y) < (o.size.d + obj.size.d) / 2 + kFootprintMargin;
      });
      if (free) {
        obj.position = candidate;
        placed = true;
      }
    }
    if (!placed) throw CapacityError("could not place object " + obj.id + " on the table");
    obj.bbox2d = project(obj.position, obj.size, scene.image_dims);
    is_clear[obj.id] = true;
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

std::set<GroundPredicate> ground_truth_state(const Scene& scene) {
  std::set<GroundPredicate> truth;
  std::set<std::string> supporting;
  for (const auto& [upper, lower] : scene.support) {
    truth.insert(on(upper, lower));
    supporting.insert(lower);
  }
  for (const auto& a : scene.objects) {
    if (!supporting.count(a.id)) truth.insert(clear(a.id));
    for (const auto& b : scene.objects) {
      if (a.id == b.id) continue;
      if (a.position.x + a.size.w / 2 < b.position.x - b.size.w / 2) truth.insert(left_of(a.id, b.id));
      if (a.id < b.id) {
        if (surface_gap(a, b) < kContactEps) truth.insert(touching(a.id, b.id));
        if (std::hypot(a.position.x - b.position.x, a.position.y - b.position.y) < kCloseDist) {
          truth.insert(close_to(a.id, b.id));
        }
      }
    }
  }
  return truth;
}

std::set<std::string> occluded_objects(const Scene& scene) {
  std::set<std::string> out;
  for (const auto& o : scene.objects) {
    for (const auto& q : scene.objects) {
      if (q.id == o.id) continue;
      if (q.position.z > o.position.z && iou(o.bbox2d, q.bbox2d) > kOcclusionIou) {
        out.insert(o.id);
        break;
      }
    }
  }
  return out;
}

void validate_scene(const Scene& scene) {
  std::map<std::string, std::string> below;
  for (const auto& o : scene.objects) {
    if (!(o.size.w > 0 && o.size.h > 0 && o.size.d > 0)) {
      throw DomainError("object " + o.id + " has non-positive size");
    }
    if (o.position.z < 0) throw DomainError("object " + o.id + " lies below the table");
  }
  for (const auto& [upper, lower] : scene.support) {
    if (scene.object(upper).position.z <= scene.object(lower).position.z) {
      throw DomainError("supported object " + upper + " is not above " + lower);
    }
    if (!below.emplace(upper, lower).second) {
      throw DomainError("object " + upper + " has two supporters");
    }
  }
  for (const auto& [start, _] : below) {
    std::string cur = start;
    for (std::size_t steps = 0; below.count(cur); ++steps) {
      cur = below.at(cur);
      if (cur == start || steps > below.size()) throw DomainError("support relation is cyclic");
    }
  }
}

nlohmann::json to_json(const Scene& scene) {
  auto objects = nlohmann::json::array();
  for (const auto& o : scene.objects) {
    objects.push_back({{"id", o.id},
                       {"position", {o.position.x, o.position.y, o.position.z}},
                       {"size", {o.size.w, o.size.h, o.size.d}},
                       {"bbox2d", {o.bbox2d.cx, o.bbox2d.cy, o.bbox2d.bw, o.bbox2d.bh}}});
  }
  auto support = nlohmann::json::array();
  for (const auto& [u, l] : scene.support) support.push_back({u, l});
  return {{"seed", scene.seed},
          {"image_dims", {scene.image_dims.width, scene.image_dims.height}},
          {"objects", objects},
          {"support", support}};
}

Scene scene_from_json(const nlohmann::json& doc) {
  Scene scene;
  try {
    scene.seed = doc.value("seed", std::uint64_t{0});
    if (doc.contains("image_dims")) {
      scene.image_dims = {doc["image_dims"].at(0).get<double>(), doc["image_dims"].at(1).get<double>()};
    }
    for (const auto& rec : doc.at("objects")) {
      SceneObject o;
      o.id = rec.at("id").get<std::string>();
      const auto& p = rec.at("position");
      const auto& s = rec.at("size");
      o.position = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
      o.size = {s.at(0).get<double>(), s.at(1).get<double>(), s.at(2).get<double>()};
      if (rec.contains("bbox2d")) {
        const auto& b = rec["bbox2d"];
        o.bbox2d = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                    b.at(3).get<double>()};
      } else {
        o.bbox2d = project(o.position, o.size, scene.image_dims);
      }
      scene.objects.push_back(std::move(o));
    }
    for (const auto& pair : doc.value("support", nlohmann::json::array())) {
      scene.support.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("malformed scene document: ") + e.what());
  }
  validate_scene(scene);
  return scene;
}

}  // namespace nsplan
