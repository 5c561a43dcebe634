#pragma once

// Reference implementations used only by tests. They are deliberately
// naive and share no code with the library.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "vrec/box.hpp"
#include "vrec/camera.hpp"

namespace oracle {

struct Cells {
  std::int64_t inter = 0;
  std::int64_t uni = 0;
};

// Counts the cells of a 1/sub grid covered by each box. Exact for corners on
// the grid.
Cells raster_cells(const vrec::BBox2D& a, const vrec::BBox2D& b, int sub);
double raster_iou(const vrec::BBox2D& a, const vrec::BBox2D& b, int sub);

// P(pos > neg) + 0.5 P(pos == neg) over all pairs.
double mann_whitney(std::span<const double> positives, std::span<const double> negatives);

// Sum of squared point-to-line distances.
double ray_objective(std::span<const vrec::Ray3> rays, const Eigen::Vector3d& p);

// Cyclic coordinate descent with exact parabolic line search, started at the
// centroid of pairwise closest-approach midpoints.
Eigen::Vector3d descent_minimizer(std::span<const vrec::Ray3> rays);

// Finds, by enumerating every subset, the unique kept set S such that a box
// is in S iff no higher-priority member of S overlaps it above threshold.
// Priority: higher score, then lower index. Returns sorted indices.
std::vector<std::size_t> nms_by_enumeration(std::span<const vrec::ScoredBox> boxes,
                                            double threshold);

}  // namespace oracle
