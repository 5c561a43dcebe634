#pragma once

#include <Eigen/Core>

#include "vrec/box.hpp"

namespace vrec {

using StateVector = Eigen::Matrix<double, 8, 1>;
using StateMatrix = Eigen::Matrix<double, 8, 8>;
using MeasurementVector = Eigen::Matrix<double, 4, 1>;

// Constant-velocity box filter over (cx, cy, aspect = w/h, h) and their
// velocities. Noise levels scale with the box height.
struct KalmanState {
  StateVector mean = StateVector::Zero();
  StateMatrix covariance = StateMatrix::Identity();

  // Box at the current mean, Absent when the mean has no positive extent.
  BBox2D box() const;
};

inline constexpr double kStdWeightPosition = 1.0 / 20.0;
inline constexpr double kStdWeightVelocity = 1.0 / 160.0;

MeasurementVector to_xyah(const BBox2D& box);

KalmanState kalman_initiate(const BBox2D& measurement);
// Propagates dt >= 1 frames, one process-noise step per frame.
KalmanState kalman_predict(const KalmanState& state, int dt = 1);
// Throws ErrorCode::kAbsentInput for an Absent measurement and
// ErrorCode::kNonPositiveHeight if the corrected height is not positive.
KalmanState kalman_update(const KalmanState& state, const BBox2D& measurement);

}  // namespace vrec
