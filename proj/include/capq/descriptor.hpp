#pragma once

#include <memory>
#include <string>
#include <vector>

#include "capq/geom.hpp"

namespace capq {

// Analytic description of a compact set F. Every kind supports an exact
// distance function, so shell pieces can be re-rasterized at any resolution
// without accumulating grid error. Dilations about a point map each kind to
// the same kind with transformed parameters, which keeps shell rescaling
// exact as well.
//
// `clip` (intersection with a closed annulus or ball about a center) and
// `complement` (used to pose solve domains such as the inside of a ball) are
// derived kinds produced by shell decomposition and domain setup; they
// round-trip through the same text serialization as the constructor kinds.
class SetDescriptor {
 public:
  enum class Kind { empty, points, ball, segment, box, cantor, set_union, clip, complement };

  SetDescriptor();  // empty set

  static SetDescriptor empty();
  static SetDescriptor point_cloud(std::vector<Vec3> pts);
  static SetDescriptor closed_ball(const Vec3& center, double radius);
  static SetDescriptor segment(const Vec3& a, const Vec3& b);
  static SetDescriptor box(const Vec3& lo, const Vec3& hi);
  // Cantor-type fractal: coordinates listed in `fractal_coords` carry the
  // two-piece contraction with the given ratio and depth; the other
  // coordinates of [lo, hi] are kept whole. ratio must lie in (0, 1/2).
  static SetDescriptor cantor(const Vec3& lo, const Vec3& hi, double ratio, int depth,
                              std::vector<int> fractal_coords);
  static SetDescriptor set_union(std::vector<SetDescriptor> parts);
  static SetDescriptor complement(const SetDescriptor& inner);

  Kind kind() const;
  bool is_empty() const;

  // Distance from x to the set (0 on the set). Exact for every kind except
  // `clip`, where it is the max of the part distances: a lower bound on the
  // true distance that is exact on the set itself, which is all rasterization
  // needs.
  double distance(const Vec3& x) const;

  // Negative inside full-dimensional kinds (ball, box, complement, unions of
  // those); equal to distance() for thin kinds.
  double signed_distance(const Vec3& x) const;

  // Loose world-space bounding box (meaningless for complement).
  void bounds(Vec3& lo, Vec3& hi) const;
  double diameter() const;

  // Smallest geometric feature (Cantor box side, ball radius, ...). Used by
  // rasterize/solve preconditions.
  double feature_scale() const;

  bool has_interior() const;

  // Dilation by `factor` about `center`: returns factor*(F - center) + center.
  SetDescriptor dilate(const Vec3& center, double factor) const;
  SetDescriptor translate(const Vec3& shift) const;

  // Intersection with the closed annulus rin <= |x - center| <= rout
  // (rin = 0 gives the closed ball).
  SetDescriptor clip_annulus(const Vec3& center, double rin, double rout) const;

  // For Cantor-type sets: number of generator boxes at the stored depth.
  long long cantor_box_count() const;

  std::string to_string() const;
  static SetDescriptor parse(const std::string& text);

  struct Node;
  explicit SetDescriptor(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

 private:
  std::shared_ptr<const Node> node_;
};

}  // namespace capq
