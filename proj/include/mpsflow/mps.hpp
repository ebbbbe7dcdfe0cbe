#pragma once

#include <cstdint>
#include <optional>
#include <vector>
#include <Eigen/Dense>

#include "mpsflow/dense.hpp"
#include "mpsflow/rng.hpp"

namespace mpsflow {

inline constexpr double kCanonicalTol = 1e-10;

// One site of a finite chain. The primary datum is the frame unitary `u` of
// size (d*dl) x (d*dl); the site tensor in matrix form is its first `dr`
// columns, with row index r = n*dl + a (physical n slowest). Keeping the full
// frame makes tensors left-canonical by construction and gives local
// parameterizations a basis that transports smoothly under updates.
struct SiteFrame {
  Eigen::MatrixXcd u;
  int d = 0;
  int dl = 0;
  int dr = 0;

  Eigen::MatrixXcd tensor() const { return u.leftCols(dr); }
  // Block A_n (dl x dr) of the matrix form.
  Eigen::MatrixXcd tensor_block(int n) const { return u.block(n * dl, 0, dl, dr); }
};

struct Segment {
  int first = 0;  // 0-based site indices, inclusive
  int last = 0;

  int length() const { return last - first + 1; }
};

// Finite MPS in left-canonical form with eagerly cached right environments.
// Bonds are numbered 0..N with bond b to the left of site b; the environment
// at bond b is the positive unit-trace matrix obtained by contracting sites
// b..N-1 from the right.
class MpsChain {
 public:
  static MpsChain random(int n_sites, int d, const std::vector<int>& bond_profile,
                         std::uint64_t seed);
  // Tensors in matrix form (d*dl) x dr. Repairs canonical form by QR sweep if
  // the residual exceeds the tolerance.
  static MpsChain from_site_tensors(int d, std::vector<Eigen::MatrixXcd> tensors,
                                    const std::vector<int>& bond_profile);
  static MpsChain product_state(int d, const std::vector<Eigen::VectorXcd>& local_states);

  int size() const { return static_cast<int>(sites_.size()); }
  int phys_dim() const { return d_; }
  const SiteFrame& site(int i) const { return sites_[i]; }
  std::vector<int> bond_profile() const;
  int bond_dim(int bond) const { return bond <= 0 ? 1 : (bond >= size() ? 1 : sites_[bond].dl); }

  // Gamma at bond b (paper's right environment), b in [0, N].
  const Eigen::MatrixXcd& environment(int bond) const { return envs_[bond]; }
  const std::vector<Eigen::MatrixXcd>& environments() const { return envs_; }

  double max_canonical_residual() const;

  DenseState to_dense(long cap = kDefaultDenseCap) const;
  DenseState segment_to_dense(const Segment& seg, long cap = kDefaultDenseCap) const;

  double cut_entropy(int bond) const;

  // Conjugates bond b: A^{[b-1]} -> A^{[b-1]} G, A^{[b]} -> (I ⊗ G†) A^{[b]}.
  MpsChain gauge_transformed(int bond, const Eigen::MatrixXcd& g) const;

  // Replaces frames wholesale (used by the Thouless update); recomputes
  // environments and repairs canonical form if needed.
  static MpsChain from_frames(int d, std::vector<SiteFrame> frames);

 private:
  MpsChain() = default;
  void finalize(bool repair_if_needed);
  void recompute_environments();
  void canonical_repair_sweep();

  int d_ = 0;
  std::vector<SiteFrame> sites_;
  std::vector<Eigen::MatrixXcd> envs_;
};

void validate_bond_profile(int n_sites, int d, const std::vector<int>& profile);

// Completes an isometry (columns orthonormal) to a full unitary.
Eigen::MatrixXcd complete_to_unitary(const Eigen::MatrixXcd& isometry);

std::complex<double> overlap(const MpsChain& a, const MpsChain& b);

// Random Haar segment state with the given internal bond structure; edge
// dimensions are bond_profile.front()/back(). Returned dense layout is
// (edge-L, physical..., edge-R) with the 1/sqrt(D_eR) normalization.
DenseState random_segment_state(int n_sites, int d, const std::vector<int>& bond_profile,
                                Rng& rng);

// Bond profile [1, min(D, d, d^{N-1}), ..., 1] capped by d^i and d^{N-i}.
std::vector<int> uniform_profile(int n_sites, int d, int max_bond);

}  // namespace mpsflow
