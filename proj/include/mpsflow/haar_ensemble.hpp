#pragma once

#include <cstdint>
#include <vector>
#include <Eigen/Dense>

#include "mpsflow/errors.hpp"

namespace mpsflow {

// Coordinate action of a Haar-averaged doubled transfer operator on the
// two-dimensional invariant subspace spanned by the Bell contractions
// |I> (within-copy pairing) and |S> (cross-copy pairing). The basis is not
// orthogonal: <I|I> = <S|S> = D^2, <I|S> = D.
struct ReducedOperator {
  Eigen::Matrix2d m;
  int d = 0;
  int bond = 0;
};

struct EnsembleSpectrum {
  int d = 0;
  int bond = 0;
  ReducedOperator transfer;   // averaged T ⊗ conj(T)
  ReducedOperator o1;         // one derivative insertion (any mode index)
  ReducedOperator o2_summed;  // two derivative insertions, summed over one mode index
  Eigen::Matrix2d p;          // spectral projector onto the leading eigenvalue 1
  Eigen::Matrix2d q_proj;     // complementary projector
  double lambda = 0.0;        // subleading eigenvalue
  double xi = 0.0;            // correlation length, 1/xi = -log(lambda)
};

// Closed forms for the reduced ensemble operators; construction re-checks the
// spectral identities (P + Q = I, P Q = 0, T = P + lambda Q) to 1e-12.
EnsembleSpectrum reduced_operators(int d, int bond);

enum class MomentVariant { exact, large_d };

struct OverlapMoments {
  int d = 0;
  int bond = 0;
  int j_max = 0;
  MomentVariant variant = MomentVariant::exact;
  Eigen::MatrixXd i;  // I_{y j}, 1-based values stored at (y-1, j-1)
};

OverlapMoments overlap_moments(int d, int bond, int j_max,
                               MomentVariant variant = MomentVariant::exact);

// Mode-summed squared second-tangent overlap moment on a finite ring of
// n_sites, evaluated exactly in the reduced two-dimensional calculus from the
// closed-form operators (no large-N limit taken).
double ring_moment(int d, int bond, int y, int j, int n_sites);

struct DensityOfStates {
  int j_max = 0;
  Eigen::VectorXd rho;
  double residual = 0.0;          // max-norm residual of the solved system
  double truncation_drift = 0.0;  // max relative change of rho(1..j_max/2) at 2 j_max
  double rho_infinity = 0.0;      // tail estimate from the last solved entries
};

// Solves sum_j I_yj / rho(j) = 1 truncated at j_max; checks stability by
// re-solving at 2 j_max.
DensityOfStates solve_density_of_states(int d, int bond, int j_max,
                                        MomentVariant variant = MomentVariant::exact);

struct McEntryTable {
  Eigen::Matrix2d mean;
  Eigen::Matrix2d std_error;
};

struct McReducedReport {
  int d = 0;
  int bond = 0;
  long samples = 0;
  McEntryTable transfer, o1, o2_summed;
  double max_sigma_transfer = 0.0;   // worst entry deviation from closed form, sigma units
  double max_sigma_o1 = 0.0;
  double max_sigma_o2 = 0.0;
  double fixed_point_residual = 0.0;  // per-sample worst |<psi+|T - <psi+||
  // Discrimination (sigma units) between the adopted reading of the summed
  // two-derivative operator and the naive misprint reading of its column.
  double o2_alternative_sigma = 0.0;
};

McReducedReport mc_verify_reduced(int d, int bond, long samples, std::uint64_t seed,
                                  int batches = 100);

struct McMomentsReport {
  int d = 0, bond = 0, n_sites = 0, y = 0, j = 0;
  long samples = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double closed_form = 0.0;      // B26/B27-style infinite-chain value
  double ring_exact = 0.0;       // finite-ring reduced-calculus value
  double norm_estimate = 0.0;    // second-tangent norm, expected ~ 1
  double norm_std_error = 0.0;
  double index_spread_sigma = 0.0;  // dependence on the probed external index
};

McMomentsReport mc_verify_moments(int d, int bond, int n_sites, int y, int j, long samples,
                                  std::uint64_t seed, int batches = 100);

}  // namespace mpsflow
