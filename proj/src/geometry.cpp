// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#include "uodet/geometry.hpp"

#include <algorithm>
#include <stdexcept>

namespace uodet {

Corners to_corners(const BBox& box) noexcept {
  const double hw = 0.5 * box.w;
  const double hh = 0.5 * box.h;
  return {box.cx - hw, box.cy - hh, box.cx + hw, box.cy + hh};
}

BBox from_corners(const Corners& corners) {
  if (corners.x1 > corners.x2 || corners.y1 > corners.y2) {
    throw std::invalid_argument(
        "from_corners: corners must satisfy x1 <= x2 and y1 <= y2");
  }
  return {0.5 * (corners.x1 + corners.x2), 0.5 * (corners.y1 + corners.y2),
          corners.x2 - corners.x1, corners.y2 - corners.y1};
}

BBox box_from_corners(double x1, double y1, double x2, double y2) {
  return from_corners({x1, y1, x2, y2});
}

double box_area(const BBox& box) noexcept { return box.w * box.h; }

namespace {

double intersection_area(const Corners& a, const Corners& b) noexcept {
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

Corners enclosing(const Corners& a, const Corners& b) noexcept {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

double corner_area(const Corners& c) noexcept {
  return (c.x2 - c.x1) * (c.y2 - c.y1);
}

}  // namespace

// Areas inside the scores always derive from the corner view, so that
// identical boxes intersect in exactly their own area and a == b scores
// exactly 1.

double iou(const BBox& a, const BBox& b) noexcept {
  const Corners ca = to_corners(a);
  const Corners cb = to_corners(b);
  const double inter = intersection_area(ca, cb);
  const double uni = corner_area(ca) + corner_area(cb) - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double giou(const BBox& a, const BBox& b) noexcept {
  const Corners ca = to_corners(a);
  const Corners cb = to_corners(b);
  const double inter = intersection_area(ca, cb);
  const double uni = corner_area(ca) + corner_area(cb) - inter;
  const double overlap = uni > 0.0 ? inter / uni : 0.0;
  const double enc = corner_area(enclosing(ca, cb));
  if (enc <= 0.0) return overlap;
  return overlap - (enc - uni) / enc;
}

double diou(const BBox& a, const BBox& b) noexcept {
  const Corners enc = enclosing(to_corners(a), to_corners(b));
  const double dx = enc.x2 - enc.x1;
  const double dy = enc.y2 - enc.y1;
  const double diag2 = dx * dx + dy * dy;
  const double ox = a.cx - b.cx;
  const double oy = a.cy - b.cy;
  const double penalty = diag2 > 0.0 ? (ox * ox + oy * oy) / diag2 : 0.0;
  return iou(a, b) - penalty;
}

}  // namespace uodet
