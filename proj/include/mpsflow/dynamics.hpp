#pragma once

#include <memory>
#include <vector>

#include "mpsflow/hamiltonian.hpp"
#include "mpsflow/tangent.hpp"

namespace mpsflow {

// Velocity of the projected flow at the chart origin:
// xdot_mu = -i (d_mu Psi)† H Psi.
TangentCoords tdvp_vector_field(const MpsChain& chain, const LocalHamiltonian& h,
                                long cap = kDefaultDenseCap);

// Evaluates the time-dependent variational flow inside the fixed local chart
// of a base chain: the state at chart point x, its Wirtinger Jacobians, and
// the least-squares velocity (the orthogonal projection of -iH Psi onto the
// real tangent span of the chart at x). Dense-oracle scale only.
class ChartSolver {
 public:
  ChartSolver(const MpsChain& base, const LocalHamiltonian& h, long cap = kDefaultDenseCap);

  int n_modes() const { return table_.total(); }
  const ModeTable& table() const { return table_; }
  const MpsChain& base() const { return base_; }

  // Velocity in chart coordinates at chart point x (complex, length n_modes).
  Eigen::VectorXcd velocity(const Eigen::VectorXcd& x) const;

  double energy(const Eigen::VectorXcd& x) const;

  // Dense state at chart point x.
  Eigen::VectorXcd state(const Eigen::VectorXcd& x) const;

  // Holomorphic and antiholomorphic Jacobian columns at x (dim x n each).
  void jacobians(const Eigen::VectorXcd& x, Eigen::MatrixXcd& jh, Eigen::MatrixXcd& ja) const;

  TangentCoords to_coords(const Eigen::VectorXcd& flat) const;
  Eigen::VectorXcd from_coords(const TangentCoords& coords) const;

 private:
  struct SiteBasis {
    Eigen::MatrixXcd a0;                   // site tensor, matrix form
    std::vector<Eigen::MatrixXcd> modes;   // B_mu per mode
  };

  MpsChain base_;
  const LocalHamiltonian* h_;
  ModeTable table_;
  std::vector<SiteBasis> basis_;
  long cap_;

  struct PointData;
  void evaluate_point(const Eigen::VectorXcd& x, PointData& out, bool with_jacobians) const;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<std::vector<double>> cut_entropies;  // bonds 1..N-1 per record
  std::vector<MpsChain> snapshots;                 // recorded every `stride` steps
  int snapshot_stride = 1;
};

// Classical RK4 in the local chart with a Thouless retraction each step.
Trajectory tdvp_evolve(const MpsChain& chain0, const LocalHamiltonian& h, double t_final,
                       double dt, int snapshot_stride = 1, long cap = kDefaultDenseCap);

// Dense propagator exp(-iHt) by eigendecomposition; the oracle for TDVP runs.
class ExactPropagator {
 public:
  ExactPropagator(const LocalHamiltonian& h, long cap = kDefaultDenseCap);
  Eigen::VectorXcd evolve(const Eigen::VectorXcd& psi, double t) const;
  double spectral_norm() const { return spectral_norm_; }

 private:
  Eigen::MatrixXcd vectors_;
  Eigen::VectorXd values_;
  double spectral_norm_ = 0.0;
};

DenseState exact_evolve(const DenseState& state, const LocalHamiltonian& h, double t,
                        long cap = kDefaultDenseCap);

double fidelity(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

}  // namespace mpsflow
