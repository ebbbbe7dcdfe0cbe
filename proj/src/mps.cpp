#include "mpsflow/mps.hpp"

#include <cmath>

namespace mpsflow {

void validate_bond_profile(int n_sites, int d, const std::vector<int>& profile) {
  if (n_sites < 1) throw ArgumentError("chain needs at least one site");
  if (d < 2) throw ArgumentError("physical dimension must be >= 2");
  if (static_cast<int>(profile.size()) != n_sites + 1)
    throw DimensionError("bond profile must have N+1 entries");
  if (profile.front() != 1 || profile.back() != 1)
    throw DimensionError("bond profile must start and end at 1");
  for (int i = 1; i <= n_sites; ++i) {
    if (profile[i] < 1) throw DimensionError("bond dimensions must be positive");
    if (profile[i] > d * profile[i - 1])
      throw DimensionError("bond profile violates D_i <= d * D_{i-1}");
  }
}

std::vector<int> uniform_profile(int n_sites, int d, int max_bond) {
  std::vector<int> profile(n_sites + 1, 1);
  for (int b = 1; b < n_sites; ++b) {
    long left = 1, right = 1;
    for (int k = 0; k < std::min(b, 24); ++k) left = std::min<long>(left * d, max_bond);
    for (int k = 0; k < std::min(n_sites - b, 24); ++k) right = std::min<long>(right * d, max_bond);
    profile[b] = static_cast<int>(std::min({static_cast<long>(max_bond), left, right}));
  }
  return profile;
}

Eigen::MatrixXcd complete_to_unitary(const Eigen::MatrixXcd& isometry) {
  const long m = isometry.rows();
  const long k = isometry.cols();
  if (k > m) throw DimensionError("complete_to_unitary: more columns than rows");
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(isometry);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd u(m, m);
  u.leftCols(k) = isometry;
  u.rightCols(m - k) = q.rightCols(m - k);
  return u;
}

MpsChain MpsChain::random(int n_sites, int d, const std::vector<int>& bond_profile,
                          std::uint64_t seed) {
  validate_bond_profile(n_sites, d, bond_profile);
  Rng rng(seed);
  MpsChain chain;
  chain.d_ = d;
  chain.sites_.resize(n_sites);
  for (int i = 0; i < n_sites; ++i) {
    SiteFrame& s = chain.sites_[i];
    s.d = d;
    s.dl = bond_profile[i];
    s.dr = bond_profile[i + 1];
    s.u = rng.haar_unitary(d * s.dl);
  }
  chain.finalize(false);
  return chain;
}

MpsChain MpsChain::from_site_tensors(int d, std::vector<Eigen::MatrixXcd> tensors,
                                     const std::vector<int>& bond_profile) {
  const int n = static_cast<int>(tensors.size());
  validate_bond_profile(n, d, bond_profile);
  MpsChain chain;
  chain.d_ = d;
  chain.sites_.resize(n);
  for (int i = 0; i < n; ++i) {
    SiteFrame& s = chain.sites_[i];
    s.d = d;
    s.dl = bond_profile[i];
    s.dr = bond_profile[i + 1];
    if (tensors[i].rows() != static_cast<long>(d) * s.dl || tensors[i].cols() != s.dr)
      throw DimensionError("from_site_tensors: tensor shape does not match profile");
    s.u = Eigen::MatrixXcd::Zero(d * s.dl, d * s.dl);
    s.u.leftCols(s.dr) = tensors[i];
  }
  chain.finalize(true);
  return chain;
}

MpsChain MpsChain::product_state(int d, const std::vector<Eigen::VectorXcd>& local_states) {
  std::vector<Eigen::MatrixXcd> tensors;
  tensors.reserve(local_states.size());
  for (const auto& v : local_states) {
    if (v.size() != d) throw DimensionError("product_state: local state dimension");
    const double nrm = v.norm();
    if (nrm <= 0.0) throw ArgumentError("product_state: zero local state");
    tensors.push_back(v / nrm);
  }
  return from_site_tensors(d, std::move(tensors),
                           std::vector<int>(local_states.size() + 1, 1));
}

MpsChain MpsChain::from_frames(int d, std::vector<SiteFrame> frames) {
  MpsChain chain;
  chain.d_ = d;
  chain.sites_ = std::move(frames);
  chain.finalize(true);
  return chain;
}

void MpsChain::finalize(bool repair_if_needed) {
  // Fill in any frames whose orthogonal complement block is missing or stale.
  for (auto& s : sites_) {
    const double frame_residual =
        (s.u.adjoint() * s.u - Eigen::MatrixXcd::Identity(s.u.rows(), s.u.cols()))
            .cwiseAbs()
            .maxCoeff();
    if (frame_residual > kCanonicalTol) {
      const Eigen::MatrixXcd a = s.u.leftCols(s.dr);
      const double iso_residual =
          (a.adjoint() * a - Eigen::MatrixXcd::Identity(s.dr, s.dr)).cwiseAbs().maxCoeff();
      if (iso_residual > kCanonicalTol) {
        if (!repair_if_needed) throw PreconditionError("site tensor is not left-canonical");
        canonical_repair_sweep();
        return;  // sweep calls finalize again
      }
      s.u = complete_to_unitary(a);
    }
  }
  recompute_environments();
}

void MpsChain::canonical_repair_sweep() {
  Eigen::MatrixXcd carry = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = 0; i < size(); ++i) {
    SiteFrame& s = sites_[i];
    Eigen::MatrixXcd a(d_ * s.dl, s.dr);
    for (int n = 0; n < d_; ++n)
      a.middleRows(n * s.dl, s.dl) = carry * s.u.block(n * s.dl, 0, s.dl, s.dr);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(d_ * s.dl, s.dr);
    Eigen::MatrixXcd r = qr.matrixQR().topRows(s.dr).triangularView<Eigen::Upper>();
    for (int j = 0; j < s.dr; ++j) {
      const cplx rjj = r(j, j);
      const double mag = std::abs(rjj);
      const cplx phase = mag > 1e-300 ? rjj / mag : 1.0;
      q.col(j) *= phase;
      r.row(j) *= std::conj(phase);
    }
    s.u = complete_to_unitary(q);
    carry = r;
  }
  // carry is now the 1x1 norm/phase; it is dropped, which normalizes the state.
  recompute_environments();
}

void MpsChain::recompute_environments() {
  const int n = size();
  envs_.assign(n + 1, Eigen::MatrixXcd());
  envs_[n] = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = n - 1; i >= 0; --i) {
    const SiteFrame& s = sites_[i];
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(s.dl, s.dl);
    for (int m = 0; m < d_; ++m) {
      const Eigen::MatrixXcd an = s.u.block(m * s.dl, 0, s.dl, s.dr);
      g.noalias() += an * envs_[i + 1] * an.adjoint();
    }
    // Symmetrize away roundoff.
    envs_[i] = 0.5 * (g + g.adjoint());
  }
}

std::vector<int> MpsChain::bond_profile() const {
  std::vector<int> p(size() + 1, 1);
  for (int i = 0; i < size(); ++i) p[i] = sites_[i].dl;
  p[size()] = 1;
  return p;
}

double MpsChain::max_canonical_residual() const {
  double worst = 0.0;
  for (const auto& s : sites_) {
    const Eigen::MatrixXcd a = s.u.leftCols(s.dr);
    worst = std::max(worst,
                     (a.adjoint() * a - Eigen::MatrixXcd::Identity(s.dr, s.dr)).cwiseAbs().maxCoeff());
  }
  return worst;
}

DenseState MpsChain::to_dense(long cap) const {
  std::vector<int> dims(size(), d_);
  checked_dense_dim(dims, cap);
  // Prefix contraction; row index over physical states with site 0 slowest.
  Eigen::MatrixXcd prefix = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = 0; i < size(); ++i) {
    const SiteFrame& s = sites_[i];
    Eigen::MatrixXcd next(prefix.rows() * d_, s.dr);
    for (int n = 0; n < d_; ++n) {
      const Eigen::MatrixXcd block = prefix * s.tensor_block(n);
      for (long r = 0; r < prefix.rows(); ++r) next.row(r * d_ + n) = block.row(r);
    }
    prefix = std::move(next);
  }
  DenseState out;
  out.slot_dims = dims;
  out.amplitudes = prefix.col(0);
  return out;
}

DenseState MpsChain::segment_to_dense(const Segment& seg, long cap) const {
  if (seg.first < 0 || seg.last >= size() || seg.first > seg.last)
    throw ArgumentError("segment out of range");
  const int del = bond_dim(seg.first);
  const int der = bond_dim(seg.last + 1);
  std::vector<int> dims;
  dims.push_back(del);
  for (int i = 0; i < seg.length(); ++i) dims.push_back(d_);
  dims.push_back(der);
  checked_dense_dim(dims, cap);

  // Rows enumerate (edge-L, physical...) with edge-L slowest.
  Eigen::MatrixXcd prefix = Eigen::MatrixXcd::Identity(del, del);
  for (int i = seg.first; i <= seg.last; ++i) {
    const SiteFrame& s = sites_[i];
    Eigen::MatrixXcd next(prefix.rows() * d_, s.dr);
    for (int n = 0; n < d_; ++n) {
      const Eigen::MatrixXcd block = prefix * s.tensor_block(n);
      for (long r = 0; r < prefix.rows(); ++r) next.row(r * d_ + n) = block.row(r);
    }
    prefix = std::move(next);
  }
  DenseState out;
  out.slot_dims = dims;
  out.amplitudes = Eigen::VectorXcd(prefix.rows() * der);
  const double scale = 1.0 / std::sqrt(static_cast<double>(der));
  for (long r = 0; r < prefix.rows(); ++r)
    out.amplitudes.segment(r * der, der) = scale * prefix.row(r).transpose();
  return out;
}

double MpsChain::cut_entropy(int bond) const {
  if (bond < 1 || bond > size() - 1) throw ArgumentError("cut_entropy: bond out of range");
  return von_neumann_entropy(envs_[bond]);
}

MpsChain MpsChain::gauge_transformed(int bond, const Eigen::MatrixXcd& g) const {
  if (bond < 1 || bond > size() - 1) throw ArgumentError("gauge_transformed: bond out of range");
  const int db = bond_dim(bond);
  if (g.rows() != db || g.cols() != db) throw DimensionError("gauge_transformed: unitary size");
  std::vector<SiteFrame> frames = sites_;
  SiteFrame& left = frames[bond - 1];
  Eigen::MatrixXcd gl = Eigen::MatrixXcd::Identity(left.u.cols(), left.u.cols());
  gl.topLeftCorner(db, db) = g;
  left.u = left.u * gl;
  SiteFrame& right = frames[bond];
  for (int n = 0; n < d_; ++n)
    right.u.middleRows(n * right.dl, right.dl) =
        g.adjoint() * right.u.middleRows(n * right.dl, right.dl);
  return from_frames(d_, std::move(frames));
}

std::complex<double> overlap(const MpsChain& a, const MpsChain& b) {
  if (a.size() != b.size() || a.phys_dim() != b.phys_dim())
    throw DimensionError("overlap: shape mismatch");
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = 0; i < a.size(); ++i) {
    const SiteFrame& sa = a.site(i);
    const SiteFrame& sb = b.site(i);
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(sa.dr, sb.dr);
    for (int n = 0; n < a.phys_dim(); ++n)
      next.noalias() += sa.tensor_block(n).adjoint() * x * sb.tensor_block(n);
    x = std::move(next);
  }
  return x(0, 0);
}

DenseState random_segment_state(int n_sites, int d, const std::vector<int>& bond_profile,
                                Rng& rng) {
  if (static_cast<int>(bond_profile.size()) != n_sites + 1)
    throw DimensionError("random_segment_state: profile size");
  const int del = bond_profile.front();
  const int der = bond_profile.back();
  for (int i = 1; i <= n_sites; ++i)
    if (bond_profile[i] > d * bond_profile[i - 1] || bond_profile[i] < 1)
      throw DimensionError("random_segment_state: invalid profile");

  Eigen::MatrixXcd prefix = Eigen::MatrixXcd::Identity(del, del);
  for (int i = 0; i < n_sites; ++i) {
    const int dl = bond_profile[i];
    const int dr = bond_profile[i + 1];
    const Eigen::MatrixXcd u = rng.haar_unitary(d * dl);
    Eigen::MatrixXcd next(prefix.rows() * d, dr);
    for (int n = 0; n < d; ++n) {
      const Eigen::MatrixXcd block = prefix * u.block(n * dl, 0, dl, dr);
      for (long r = 0; r < prefix.rows(); ++r) next.row(r * d + n) = block.row(r);
    }
    prefix = std::move(next);
  }
  DenseState out;
  out.slot_dims.push_back(del);
  for (int i = 0; i < n_sites; ++i) out.slot_dims.push_back(d);
  out.slot_dims.push_back(der);
  out.amplitudes = Eigen::VectorXcd(prefix.rows() * der);
  const double scale = 1.0 / std::sqrt(static_cast<double>(der));
  for (long r = 0; r < prefix.rows(); ++r)
    out.amplitudes.segment(r * der, der) = scale * prefix.row(r).transpose();
  return out;
}

}  // namespace mpsflow
