#include "vrec/kalman.hpp"

#include <Eigen/Cholesky>

#include "vrec/errors.hpp"

namespace vrec {
namespace {

using MeasurementMatrix = Eigen::Matrix<double, 4, 8>;

StateMatrix motion_matrix() {
  StateMatrix f = StateMatrix::Identity();
  for (int i = 0; i < 4; ++i) f(i, 4 + i) = 1.0;
  return f;
}

MeasurementMatrix measurement_matrix() {
  MeasurementMatrix h = MeasurementMatrix::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  return h;
}

}  // namespace

MeasurementVector to_xyah(const BBox2D& box) {
  MeasurementVector z;
  z << (box.x1() + box.x2()) * 0.5, (box.y1() + box.y2()) * 0.5,
      box.width() / box.height(), box.height();
  return z;
}

BBox2D KalmanState::box() const {
  const double h = mean(3);
  const double w = mean(2) * h;
  if (!(h > 0.0) || !(w > 0.0) || !mean.head<4>().allFinite()) {
    return BBox2D::absent();
  }
  return BBox2D::from_corners(mean(0) - w * 0.5, mean(1) - h * 0.5,
                              mean(0) + w * 0.5, mean(1) + h * 0.5);
}

KalmanState kalman_initiate(const BBox2D& measurement) {
  if (!measurement.present()) {
    throw Error(ErrorCode::kAbsentInput, "cannot start a track from an Absent box");
  }
  KalmanState s;
  const MeasurementVector z = to_xyah(measurement);
  s.mean.head<4>() = z;
  s.mean.tail<4>().setZero();
  const double h = z(3);
  StateVector std;
  std << 2 * kStdWeightPosition * h, 2 * kStdWeightPosition * h, 1e-2,
      2 * kStdWeightPosition * h, 10 * kStdWeightVelocity * h,
      10 * kStdWeightVelocity * h, 1e-5, 10 * kStdWeightVelocity * h;
  s.covariance = std.array().square().matrix().asDiagonal();
  return s;
}

KalmanState kalman_predict(const KalmanState& state, int dt) {
  if (dt < 1) {
    throw Error(ErrorCode::kInvalidArgument, "prediction step must be >= 1 frame");
  }
  static const StateMatrix f = motion_matrix();
  KalmanState s = state;
  for (int step = 0; step < dt; ++step) {
    const double h = s.mean(3);
    StateVector std;
    std << kStdWeightPosition * h, kStdWeightPosition * h, 1e-2,
        kStdWeightPosition * h, kStdWeightVelocity * h, kStdWeightVelocity * h,
        1e-5, kStdWeightVelocity * h;
    const StateMatrix q = std.array().square().matrix().asDiagonal();
    s.mean = f * s.mean;
    s.covariance = f * s.covariance * f.transpose() + q;
  }
  return s;
}

KalmanState kalman_update(const KalmanState& state, const BBox2D& measurement) {
  if (!measurement.present()) {
    throw Error(ErrorCode::kAbsentInput, "cannot correct with an Absent box");
  }
  static const MeasurementMatrix hm = measurement_matrix();
  const double h = state.mean(3);
  MeasurementVector std;
  std << kStdWeightPosition * h, kStdWeightPosition * h, 1e-1,
      kStdWeightPosition * h;
  const Eigen::Matrix4d r = std.array().square().matrix().asDiagonal();

  const Eigen::Matrix4d innovation_cov =
      hm * state.covariance * hm.transpose() + r;
  const Eigen::Matrix<double, 8, 4> pht = state.covariance * hm.transpose();
  // K = P H^T S^-1, solved as S K^T = H P.
  const Eigen::Matrix<double, 8, 4> gain =
      innovation_cov.llt().solve(pht.transpose()).transpose();

  KalmanState s;
  s.mean = state.mean + gain * (to_xyah(measurement) - hm * state.mean);
  // Joseph form keeps the covariance symmetric positive semi-definite.
  const StateMatrix ikh = StateMatrix::Identity() - gain * hm;
  s.covariance = ikh * state.covariance * ikh.transpose() +
                 gain * r * gain.transpose();
  s.covariance = 0.5 * (s.covariance + s.covariance.transpose()).eval();
  if (!(s.mean(3) > 0.0)) {
    throw Error(ErrorCode::kNonPositiveHeight, "corrected box height is not positive");
  }
  return s;
}

}  // namespace vrec
