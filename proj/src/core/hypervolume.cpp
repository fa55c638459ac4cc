#include "cmofl/core/hypervolume.hpp"

#include <algorithm>
#include <array>
#include <string>

#include "cmofl/core/errors.hpp"

namespace cmofl {
namespace {

using Point2 = std::array<double, 2>;

bool inside(const ObjectiveVector& y, const ReferencePoint& z) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(y[i] <= z[i])) return false;
  }
  return true;
}

// Staircase sweep over points sorted by the first coordinate.
double area_2d(std::vector<Point2> pts, double z0, double z1) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double floor_y = z1;
  for (const auto& p : pts) {
    if (p[1] < floor_y) {
      area += (z0 - p[0]) * (floor_y - p[1]);
      floor_y = p[1];
    }
  }
  return area;
}

}  // namespace

std::size_t count_outside_reference(const std::vector<ObjectiveVector>& points,
                                    const ReferencePoint& z) {
  std::size_t n = 0;
  for (const auto& y : points) {
    if (y.size() != z.size()) throw InvalidInput("hypervolume: dimension mismatch");
    if (!inside(y, z)) ++n;
  }
  return n;
}

double hypervolume(const std::vector<ObjectiveVector>& points,
                   const ReferencePoint& z) {
  const std::size_t m = z.size();
  if (m != 2 && m != 3) {
    throw UnsupportedDimension("hypervolume supports 2 or 3 objectives, got " +
                               std::to_string(m));
  }
  std::vector<const ObjectiveVector*> kept;
  kept.reserve(points.size());
  for (const auto& y : points) {
    if (y.size() != m) throw InvalidInput("hypervolume: dimension mismatch");
    if (inside(y, z)) kept.push_back(&y);
  }
  if (kept.empty()) return 0.0;

  if (m == 2) {
    std::vector<Point2> pts;
    pts.reserve(kept.size());
    for (const auto* y : kept) pts.push_back({(*y)[0], (*y)[1]});
    return area_2d(std::move(pts), z[0], z[1]);
  }

  // Sweep along the third objective: between consecutive levels the dominated
  // cross-section is the 2-d hypervolume of every point already passed.
  std::sort(kept.begin(), kept.end(),
            [](const ObjectiveVector* a, const ObjectiveVector* b) {
              return (*a)[2] < (*b)[2];
            });
  double volume = 0.0;
  std::vector<Point2> slice;
  slice.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    slice.push_back({(*kept[i])[0], (*kept[i])[1]});
    const double top = (i + 1 < kept.size()) ? (*kept[i + 1])[2] : z[2];
    const double depth = top - (*kept[i])[2];
    if (depth > 0.0) volume += depth * area_2d(slice, z[0], z[1]);
  }
  return volume;
}

}  // namespace cmofl
