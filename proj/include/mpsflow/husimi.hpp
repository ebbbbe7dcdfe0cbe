#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpsflow/hamiltonian.hpp"
#include "mpsflow/mps.hpp"

namespace mpsflow {

// rho padded by maximally mixed edge ancillae:
// (1/(D_eL D_eR)) I ⊗ rho ⊗ I.
struct PaddedDensity {
  Eigen::MatrixXcd rho_tilde;
  int edge_left = 1;
  int edge_right = 1;
  int phys_dim = 0;  // full physical dimension of the segment, d^{|I|}
};

PaddedDensity pad_density(const Eigen::MatrixXcd& rho, int edge_left, int edge_right);

// Q = Psi† rho~ Psi for a dense segment state with layout (eL, phys, eR).
double husimi_q(const PaddedDensity& padded, const Eigen::VectorXcd& segment_state);

// Inverse weight of the overcomplete segment family:
// V = 1 / (d^{|I|} D_eL D_eR).
double segment_volume_factor(int d, int segment_len, int edge_left, int edge_right);

struct HusimiEstimate {
  std::string functional;
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
  double min_sampled_q = 0.0;
};

// Description of the sampling family: a segment of a reference chain, or any
// explicit bond profile for the segment (edges included).
struct SegmentFamily {
  int d = 0;
  std::vector<int> bond_profile;  // length |I|+1, entries are the bond dims,
                                  // front/back are the edge ancilla dims
  int length() const { return static_cast<int>(bond_profile.size()) - 1; }
  int edge_left() const { return bond_profile.front(); }
  int edge_right() const { return bond_profile.back(); }
};

SegmentFamily family_from_chain(const MpsChain& chain, const Segment& seg);

// Reduced density matrix of a window of a dense pure state on a uniform-d
// chain (convenience for building rho_I).
Eigen::MatrixXcd window_density(const DenseState& state, int first, int last);

HusimiEstimate mc_normalization(const PaddedDensity& padded, const SegmentFamily& family,
                                long samples, std::uint64_t seed, int batches = 100);

struct ChannelEstimate {
  Eigen::MatrixXcd mean;       // estimate of E_MPS(rho)
  Eigen::MatrixXd std_error;   // per-entry (complex magnitude) standard errors
  long samples = 0;
};

ChannelEstimate mc_channel_apply(const PaddedDensity& padded, const SegmentFamily& family,
                                 long samples, std::uint64_t seed, int batches = 100);

struct EntropyBoundReport {
  double exact_entropy = 0.0;
  HusimiEstimate mean_intrinsic;
  HusimiEstimate wehrl;
  double bound = 0.0;
  double slack = 0.0;
  double slack_std_error = 0.0;
};

EntropyBoundReport entropy_bound_report(const PaddedDensity& padded, const SegmentFamily& family,
                                        long samples, std::uint64_t seed, int batches = 100);

struct MarginalCheckReport {
  std::vector<double> q_direct;     // Q_I at each probe
  std::vector<double> q_marginal;   // Monte-Carlo marginal over the complement
  std::vector<double> std_errors;
  double worst_sigma = 0.0;
};

// Verifies that the segment distribution is the marginal of the full-chain
// distribution. Complement segments are glued to probes over the shared
// ancillae, undoing the edge normalization so the composite is a full-chain
// state.
MarginalCheckReport marginal_check(const Eigen::MatrixXcd& rho_full, const MpsChain& chain,
                                   const Segment& seg, int probes, long inner_samples,
                                   std::uint64_t seed, int batches = 50);
MarginalCheckReport marginal_check(const DenseState& state, const MpsChain& chain,
                                   const Segment& seg, int probes, long inner_samples,
                                   std::uint64_t seed, int batches = 50);

// dQ/dt at a probe segment state for I = full chain:
// -i Psi† [H, rho] Psi; throws if the imaginary residue exceeds 1e-8.
double q_time_derivative(const Eigen::MatrixXcd& rho, const LocalHamiltonian& h,
                         const Eigen::VectorXcd& probe);

}  // namespace mpsflow
