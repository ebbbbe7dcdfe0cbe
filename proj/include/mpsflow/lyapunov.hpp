#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "mpsflow/dynamics.hpp"
#include "mpsflow/volume.hpp"

namespace mpsflow {

struct LyapunovOptions {
  double t_total = 100.0;
  double dt = 0.01;
  int qr_interval = 5;
  double fd_step = 1e-5;
  long cap = kDefaultDenseCap;
};

struct LyapunovResult {
  Eigen::VectorXd exponents;  // sorted descending, length 2 n_modes
  double ks_entropy = 0.0;    // sum of positive exponents
  double total_time = 0.0;
  bool converged = true;

  // Running estimates for convergence diagnostics.
  std::vector<double> checkpoint_times;
  std::vector<Eigen::VectorXd> running_exponents;

  // Final frame state, for projected subsystem volumes.
  Eigen::MatrixXd frame;
  Eigen::VectorXd log_growth;  // per frame column, unsorted (QR order)
  std::optional<ModeTable> mode_table;
};

// Benettin algorithm along the projected flow: evolves an orthonormal frame
// of real chart perturbations through finite-difference Jacobians of the
// chart vector field, transporting the frame into each new chart.
LyapunovResult lyapunov_spectrum(const MpsChain& chain0, const LocalHamiltonian& h,
                                 const LyapunovOptions& opt);

// Growth rate of the projected volume of the leading expanding directions on
// the segment's coordinate block; segment = full chain recovers ks_entropy.
double subsystem_exponent(const LyapunovResult& result, const Segment& seg);

// Real phase-space coordinate rows (p then q blocks) of a segment's modes.
std::vector<int> segment_coordinate_rows(const ModeTable& table, const Segment& seg);

}  // namespace mpsflow
