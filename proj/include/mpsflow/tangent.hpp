#pragma once

#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "mpsflow/hamiltonian.hpp"
#include "mpsflow/mps.hpp"

namespace mpsflow {

// Tangent modes at a site are pairs (r, b): frame column r in [dr, d*dl)
// paired with right-bond index b in [0, dr), enumerated r-major. For uniform
// bonds (dl == dr) this is exactly (physical n in 1..d-1) x (left bond) x
// (right bond) in row-major order; where dr < dl the columns r in [dr, dl)
// (physical index 0) complete the tangent space, and at saturated bonds
// (dr == d*dl) the site carries no modes.
struct ModeTable {
  std::vector<int> offsets;  // per site, plus total at the back
  int d = 0;

  explicit ModeTable(const MpsChain& chain);
  int total() const { return offsets.back(); }
  int count(int site) const { return offsets[site + 1] - offsets[site]; }
  int global_index(int site, int mode) const { return offsets[site] + mode; }
  int site_of(int global) const;
};

inline int mode_count(const SiteFrame& s) { return (s.d * s.dl - s.dr) * s.dr; }

// Per-site complex coefficients over the mode enumeration above.
struct TangentCoords {
  std::vector<Eigen::VectorXcd> x;

  static TangentCoords zero(const MpsChain& chain);
  double norm() const;
};

struct ConditioningReport {
  bool floored = false;
  double min_env_eigenvalue = 1.0;
};

// Gamma^{-1/2} at the right bond of `site`, eigenvalue-floored at 1e-12.
Eigen::MatrixXcd env_inverse_sqrt(const MpsChain& chain, int site,
                                  ConditioningReport* report = nullptr);

// B tensor in matrix form for one mode: u.col(r) (Gamma^{-1/2} row b).
Eigen::MatrixXcd b_mode(const MpsChain& chain, int site, int mode,
                        ConditioningReport* report = nullptr);

// B(x) = U X(x) Gamma^{-1/2} for a full coefficient vector at one site.
Eigen::MatrixXcd b_tensor(const MpsChain& chain, int site, const Eigen::VectorXcd& coeffs,
                          ConditioningReport* report = nullptr);

// x as a rank-3 tensor in matrix form (row n*dl+a, column b); the slice with
// physical index 0 vanishes whenever dr >= dl.
Eigen::MatrixXcd coords_as_site_matrix(const MpsChain& chain, int site,
                                       const Eigen::VectorXcd& coeffs);

// A -> exp(B A† - A B†) A at each site; exactly norm- and gauge-compatible.
MpsChain thouless_update(const MpsChain& chain, const TangentCoords& x,
                         ConditioningReport* report = nullptr);

// Dense state with site tensors replaced at selected sites.
Eigen::VectorXcd dense_with_insertions(const MpsChain& chain,
                                       const std::map<int, Eigen::MatrixXcd>& replace,
                                       long cap = kDefaultDenseCap);

DenseState tangent_vector(const MpsChain& chain, int site, int mode,
                          long cap = kDefaultDenseCap);
DenseState second_tangent_vector(const MpsChain& chain, int i, int mu, int j, int nu,
                                 long cap = kDefaultDenseCap);

// <bra-insertions | op-sum | ket-insertions> by transfer contraction.
cplx sandwich(const MpsChain& chain, const std::map<int, Eigen::MatrixXcd>& bra_replace,
              const std::map<int, Eigen::MatrixXcd>& ket_replace,
              const LocalHamiltonian* op = nullptr);

struct Grammian {
  std::vector<std::pair<int, int>> site_pairs;  // (i, j) with i < j
  std::vector<int> block_offsets;               // per pair, plus total
  Eigen::MatrixXcd g;                           // Hermitian over combined (pair, mu, nu)

  int index_of(int pair_idx, int mu, int nu, int n_nu) const {
    return block_offsets[pair_idx] + mu * n_nu + nu;
  }
};

// Pairwise overlaps of second-tangent vectors for the requested site pairs.
// Uses transfer contractions; `dense_check` recomputes via dense vectors.
Grammian grammian(const MpsChain& chain, const std::vector<std::pair<int, int>>& site_pairs,
                  bool dense_route = false, long cap = kDefaultDenseCap);

// eps[(i,mu),(j,nu)] = (d_mu^i Psi)† H (d_nu^j Psi) over all modes.
Eigen::MatrixXcd effective_epsilon(const MpsChain& chain, const LocalHamiltonian& h,
                                   bool dense_route = true, long cap = kDefaultDenseCap);

// Full mode-indexed anomalous matrix: Delta[(i,mu),(j,nu)] =
// (d_mu^i d_nu^j Psi)† H Psi / rho(j - i) for sites i < j, extended
// symmetrically; same-site blocks are zero.
Eigen::MatrixXcd anomalous_delta(const MpsChain& chain, const LocalHamiltonian& h,
                                 const std::function<double(int)>& dos,
                                 bool dense_route = true, long cap = kDefaultDenseCap);

}  // namespace mpsflow
