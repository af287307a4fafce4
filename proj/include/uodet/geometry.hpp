// Copyright (c) 2026 The uodet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace uodet {

/// Axis-aligned bounding box in normalized center format: (cx, cy) is the
/// box center, (w, h) the extent, all as fractions of the image size.
/// w and h must be nonnegative; zero-extent boxes are legal and score as
/// measure-zero areas.
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
};

/// Corner view of a box: (x1, y1) min corner, (x2, y2) max corner.
struct Corners {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;
};

Corners to_corners(const BBox& box) noexcept;

/// Inverse of to_corners. Throws std::invalid_argument when x1 > x2 or
/// y1 > y2.
BBox from_corners(const Corners& corners);

/// Shorthand for fixtures and scene construction.
BBox box_from_corners(double x1, double y1, double x2, double y2);

double box_area(const BBox& box) noexcept;

/// Intersection over union in [0, 1]. Defined as 0 when the union has no
/// area (two degenerate boxes).
double iou(const BBox& a, const BBox& b) noexcept;

/// Generalized IoU: iou minus (area(enclosing) - area(union)) /
/// area(enclosing). In (-1, 1] for positive-area boxes.
double giou(const BBox& a, const BBox& b) noexcept;

/// Distance IoU: iou minus squared center distance over the squared
/// diagonal of the smallest enclosing box. In [-1, 1].
double diou(const BBox& a, const BBox& b) noexcept;

}  // namespace uodet
