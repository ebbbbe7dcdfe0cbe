#pragma once

#include <complex>
#include <vector>
#include <Eigen/Dense>

#include "mpsflow/errors.hpp"

namespace mpsflow {

using cplx = std::complex<double>;

inline constexpr long kDefaultDenseCap = 1L << 20;

// Dense amplitude vector over an ordered list of slots (physical sites plus,
// for segments, the two edge ancillae). Slot 0 is the slowest index.
struct DenseState {
  Eigen::VectorXcd amplitudes;
  std::vector<int> slot_dims;

  long dim() const { return amplitudes.size(); }
  double norm() const { return amplitudes.norm(); }
};

inline long checked_dense_dim(const std::vector<int>& dims, long cap) {
  long total = 1;
  for (int d : dims) {
    if (d <= 0) throw DimensionError("dense slot dimension must be positive");
    if (total > cap / d) throw ResourceCapError("dense dimension exceeds cap");
    total *= d;
  }
  return total;
}

// rho = Tr_rest |psi><psi| over the contiguous index window [first, last] of a
// state with `n_slots` slots of dimension `d` each.
Eigen::MatrixXcd reduced_density_window(const Eigen::VectorXcd& psi, int n_slots, int d,
                                        int first, int last);

// Trace a density matrix on (left ⊗ mid ⊗ right) down to the middle factor.
Eigen::MatrixXcd trace_out_edges(const Eigen::MatrixXcd& rho, int dim_left, int dim_mid,
                                 int dim_right);

// Von Neumann entropy (nats) of a Hermitian PSD matrix; eigenvalues below
// `tol` in magnitude are treated as exact zeros.
double von_neumann_entropy(const Eigen::MatrixXcd& rho, double tol = 1e-12);

// Entanglement entropy of |psi> across the cut after slot `cut` (slots of
// dimension d, n_slots total), computed from singular values.
double dense_cut_entropy(const Eigen::VectorXcd& psi, int n_slots, int d, int cut);

// Apply a one-site operator (d x d) at slot `site` of a uniform-d state.
Eigen::VectorXcd apply_one_site(const Eigen::VectorXcd& psi, int n_slots, int d, int site,
                                const Eigen::MatrixXcd& op);

// Apply a two-site operator (d^2 x d^2) on slots (site, site+1).
Eigen::VectorXcd apply_two_site(const Eigen::VectorXcd& psi, int n_slots, int d, int site,
                                const Eigen::MatrixXcd& op);

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

}  // namespace mpsflow
