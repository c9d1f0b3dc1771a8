#include "nsplan/edge_features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nsplan/error.hpp"

namespace nsplan {

EdgeFeatures edge_features(const SceneObject& obj_i, const SceneObject& obj_j, const ImageDims& dims) {
  if (!(dims.width > 0.0 && dims.height > 0.0)) throw DomainError("image dimensions must be positive");
  const auto& bi = obj_i.bbox2d;
  const auto& bj = obj_j.bbox2d;
  if (!(bi.bw > 0.0 && bi.bh > 0.0 && bj.bw > 0.0 && bj.bh > 0.0)) {
    throw DomainError("edge features need boxes with positive extent");
  }
  auto log_ratio = [](double num, double den) { return std::log(std::clamp(num / den, 0.1, 10.0)); };

  EdgeFeatures f{};
  const double dx = (bi.cx - bj.cx) / dims.width;
  const double dy = (bi.cy - bj.cy) / dims.height;
  const double dxy = std::hypot(dx, dy);
  f[0] = dx;
  f[1] = dy;
  f[2] = std::abs(dx);
  f[3] = std::abs(dy);
  f[4] = dxy;

  const double wi = bi.bw / dims.width, hi = bi.bh / dims.height;
  const double wj = bj.bw / dims.width, hj = bj.bh / dims.height;
  f[5] = wi;
  f[6] = hi;
  f[7] = wj;
  f[8] = hj;
  f[9] = log_ratio(bi.bw, bj.bw);
  f[10] = log_ratio(bi.bh, bj.bh);

  const double dx3 = obj_i.position.x - obj_j.position.x;
  const double dy3 = obj_i.position.y - obj_j.position.y;
  const double dz3 = obj_i.position.z - obj_j.position.z;
  f[11] = dx3;
  f[12] = dy3;
  f[13] = dz3;
  f[14] = std::sqrt(dx3 * dx3 + dy3 * dy3 + dz3 * dz3);

  f[15] = iou(bi, bj);
  const double mean_diag = 0.5 * (std::hypot(wi, hi) + std::hypot(wj, hj));
  f[16] = dxy / mean_diag;
  f[17] = std::atan2(dy, dx) / std::numbers::pi;
  return f;
}

}  // namespace nsplan
