#pragma once

#include <vector>
#include <Eigen/Dense>

#include "mpsflow/errors.hpp"

namespace mpsflow {

// Benettin-style frame bookkeeping: maintains an orthonormal frame Q and the
// accumulated log growth of each direction under repeated linear step maps.
class VolumeGrowthTracker {
 public:
  explicit VolumeGrowthTracker(int dim)
      : q_(Eigen::MatrixXd::Identity(dim, dim)), log_growth_(Eigen::VectorXd::Zero(dim)) {}

  void apply(const Eigen::MatrixXd& step_map) { q_ = step_map * q_; }

  // QR re-orthonormalization with positive diagonal; adds log |R_ii|.
  void renormalize();

  const Eigen::MatrixXd& frame() const { return q_; }
  const Eigen::VectorXd& log_growth() const { return log_growth_; }
  int dim() const { return static_cast<int>(q_.rows()); }

 private:
  Eigen::MatrixXd q_;
  Eigen::VectorXd log_growth_;
};

// Log-volume of the projection of the leading k frame directions onto the
// coordinate rows in `rows`: sum of their log growths plus half the log Gram
// determinant of the projected orthonormal frame.
double projected_log_volume(const VolumeGrowthTracker& tracker, const std::vector<int>& rows,
                            int k);

// Subsystem growth rate with the expanding-directions convention:
// k = min(|rows|, #positive exponents).
double subsystem_rate(const VolumeGrowthTracker& tracker, const std::vector<int>& rows,
                      double elapsed);

}  // namespace mpsflow
