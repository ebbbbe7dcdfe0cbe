#include "mpsflow/dynamics.hpp"

#include <cmath>

#include "mpsflow/parallel.hpp"

namespace mpsflow {

TangentCoords tdvp_vector_field(const MpsChain& chain, const LocalHamiltonian& h, long cap) {
  TangentCoords v = TangentCoords::zero(chain);
  bool dense_ok = true;
  long dim = 1;
  for (int i = 0; i < chain.size(); ++i) {
    if (dim > cap / chain.phys_dim()) {
      dense_ok = false;
      break;
    }
    dim *= chain.phys_dim();
  }
  if (dense_ok) {
    const Eigen::VectorXcd h_psi = h.apply_dense(chain.to_dense(cap).amplitudes);
    for (int i = 0; i < chain.size(); ++i)
      for (int mu = 0; mu < v.x[i].size(); ++mu)
        v.x[i](mu) = cplx(0, -1) * tangent_vector(chain, i, mu, cap).amplitudes.dot(h_psi);
  } else {
    for (int i = 0; i < chain.size(); ++i)
      for (int mu = 0; mu < v.x[i].size(); ++mu)
        v.x[i](mu) = cplx(0, -1) * sandwich(chain, {{i, b_mode(chain, i, mu)}}, {}, &h);
  }
  return v;
}

struct ChartSolver::PointData {
  std::vector<Eigen::MatrixXcd> a_x;  // site tensors at x
  Eigen::VectorXcd psi;
  Eigen::MatrixXcd jh, ja;
};

ChartSolver::ChartSolver(const MpsChain& base, const LocalHamiltonian& h, long cap)
    : base_(base), h_(&h), table_(base), cap_(cap) {
  checked_dense_dim(std::vector<int>(base_.size(), base_.phys_dim()), cap_);
  basis_.resize(base_.size());
  for (int i = 0; i < base_.size(); ++i) {
    basis_[i].a0 = base_.site(i).tensor();
    const int n = table_.count(i);
    basis_[i].modes.reserve(n);
    for (int mu = 0; mu < n; ++mu) basis_[i].modes.push_back(b_mode(base_, i, mu));
  }
}

TangentCoords ChartSolver::to_coords(const Eigen::VectorXcd& flat) const {
  TangentCoords t = TangentCoords::zero(base_);
  for (int i = 0; i < base_.size(); ++i)
    for (int mu = 0; mu < table_.count(i); ++mu) t.x[i](mu) = flat(table_.global_index(i, mu));
  return t;
}

Eigen::VectorXcd ChartSolver::from_coords(const TangentCoords& coords) const {
  Eigen::VectorXcd flat(table_.total());
  for (int i = 0; i < base_.size(); ++i)
    for (int mu = 0; mu < table_.count(i); ++mu) flat(table_.global_index(i, mu)) = coords.x[i](mu);
  return flat;
}

void ChartSolver::evaluate_point(const Eigen::VectorXcd& x, PointData& out,
                                 bool with_jacobians) const {
  const int n_sites = base_.size();
  const int d = base_.phys_dim();

  struct ExpData {
    Eigen::MatrixXcd v;     // eigenvectors of iK
    Eigen::VectorXd theta;  // eigenvalues of iK
    bool trivial = true;
  };
  std::vector<ExpData> exps(n_sites);
  out.a_x.resize(n_sites);

  for (int i = 0; i < n_sites; ++i) {
    const int n = table_.count(i);
    bool zero = true;
    for (int mu = 0; mu < n && zero; ++mu)
      if (x(table_.global_index(i, mu)) != cplx(0, 0)) zero = false;
    if (zero) {
      out.a_x[i] = basis_[i].a0;
      continue;
    }
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(basis_[i].a0.rows(), basis_[i].a0.cols());
    for (int mu = 0; mu < n; ++mu) b += x(table_.global_index(i, mu)) * basis_[i].modes[mu];
    const Eigen::MatrixXcd& a0 = basis_[i].a0;
    const Eigen::MatrixXcd k = b * a0.adjoint() - a0 * b.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cplx(0, 1) * k);
    ExpData& e = exps[i];
    e.trivial = false;
    e.v = es.eigenvectors();
    e.theta = es.eigenvalues();
    Eigen::VectorXcd phases(e.theta.size());
    for (int t = 0; t < phases.size(); ++t) phases(t) = std::exp(cplx(0, -e.theta(t)));
    out.a_x[i] = e.v * phases.asDiagonal() * e.v.adjoint() * a0;
  }

  // Prefix (d^i x D_i) and suffix (D_i x d^{N-i}) contractions of the updated
  // tensors; row/column physical index ordering is site 0 slowest.
  std::vector<Eigen::MatrixXcd> prefix(n_sites + 1), suffix(n_sites + 1);
  prefix[0] = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = 0; i < n_sites; ++i) {
    const int dl = base_.site(i).dl;
    const int dr = base_.site(i).dr;
    Eigen::MatrixXcd next(prefix[i].rows() * d, dr);
    for (int n = 0; n < d; ++n) {
      const Eigen::MatrixXcd block = prefix[i] * out.a_x[i].middleRows(n * dl, dl);
      for (long r = 0; r < prefix[i].rows(); ++r) next.row(r * d + n) = block.row(r);
    }
    prefix[i + 1] = std::move(next);
  }
  suffix[n_sites] = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = n_sites - 1; i >= 0; --i) {
    const int dl = base_.site(i).dl;
    const long tail = suffix[i + 1].cols();
    Eigen::MatrixXcd next(dl, tail * d);
    for (int n = 0; n < d; ++n)
      next.middleCols(n * tail, tail) = out.a_x[i].middleRows(n * dl, dl) * suffix[i + 1];
    suffix[i] = std::move(next);
  }
  out.psi = prefix[n_sites].col(0);

  if (!with_jacobians) return;

  const long dim = out.psi.size();
  const int total = table_.total();
  out.jh.resize(dim, total);
  out.ja.resize(dim, total);

  // Frechet derivative of exp at K along dir, on the eigenbasis of iK:
  // entry (a,b) scales by e^{-i(ta+tb)/2} sinc((ta-tb)/2).
  auto frechet = [](const ExpData& e, const Eigen::MatrixXcd& dir) {
    const Eigen::MatrixXcd m = e.v.adjoint() * dir * e.v;
    const int sz = static_cast<int>(m.rows());
    Eigen::MatrixXcd scaled(sz, sz);
    for (int a = 0; a < sz; ++a)
      for (int b = 0; b < sz; ++b) {
        const double ta = e.theta(a), tb = e.theta(b);
        const double half = 0.5 * (ta - tb);
        const double sinc =
            std::abs(half) < 1e-8 ? 1.0 - half * half / 6.0 : std::sin(half) / half;
        const cplx mid = std::exp(cplx(0, -0.5 * (ta + tb)));
        scaled(a, b) = m(a, b) * mid * sinc;
      }
    return Eigen::MatrixXcd(e.v * scaled * e.v.adjoint());
  };

  auto column_from_insertion = [&](int site, const Eigen::MatrixXcd& t, Eigen::VectorXcd& col) {
    const int dl = base_.site(site).dl;
    const long pre_rows = prefix[site].rows();
    const long post_cols = suffix[site + 1].cols();
    for (int n = 0; n < d; ++n) {
      const Eigen::MatrixXcd block = (prefix[site] * t.middleRows(n * dl, dl)) * suffix[site + 1];
      for (long r = 0; r < pre_rows; ++r)
        col.segment((r * d + n) * post_cols, post_cols) = block.row(r).transpose();
    }
  };

  Eigen::VectorXcd col(dim);
  for (int i = 0; i < n_sites; ++i) {
    const int n = table_.count(i);
    const Eigen::MatrixXcd& a0 = basis_[i].a0;
    for (int mu = 0; mu < n; ++mu) {
      const int g = table_.global_index(i, mu);
      const Eigen::MatrixXcd& bmu = basis_[i].modes[mu];
      if (exps[i].trivial) {
        column_from_insertion(i, bmu, col);
        out.jh.col(g) = col;
        // The antiholomorphic derivative at the origin is the zero state for
        // left-canonical tensors (A† B = 0 kills its norm).
        out.ja.col(g).setZero();
      } else {
        column_from_insertion(i, frechet(exps[i], bmu * a0.adjoint()) * a0, col);
        out.jh.col(g) = col;
        column_from_insertion(i, frechet(exps[i], -a0 * bmu.adjoint()) * a0, col);
        out.ja.col(g) = col;
      }
    }
  }
}

Eigen::VectorXcd ChartSolver::state(const Eigen::VectorXcd& x) const {
  PointData data;
  evaluate_point(x, data, false);
  return data.psi;
}

double ChartSolver::energy(const Eigen::VectorXcd& x) const {
  PointData data;
  evaluate_point(x, data, false);
  const Eigen::VectorXcd h_psi = h_->apply_dense(data.psi);
  return data.psi.dot(h_psi).real() / data.psi.squaredNorm();
}

void ChartSolver::jacobians(const Eigen::VectorXcd& x, Eigen::MatrixXcd& jh,
                            Eigen::MatrixXcd& ja) const {
  PointData data;
  evaluate_point(x, data, true);
  jh = std::move(data.jh);
  ja = std::move(data.ja);
}

Eigen::VectorXcd ChartSolver::velocity(const Eigen::VectorXcd& x) const {
  PointData data;
  evaluate_point(x, data, true);
  const int n = table_.total();
  const long dim = data.psi.size();

  const Eigen::VectorXcd h_psi = h_->apply_dense(data.psi);
  const double e0 = data.psi.dot(h_psi).real() / data.psi.squaredNorm();
  const Eigen::VectorXcd w = cplx(0, -1) * (h_psi - e0 * data.psi);

  // Real tangent directions: d/dp = jh + ja, d/dq = i(jh - ja).
  Eigen::MatrixXcd jr(dim, 2 * n);
  jr.leftCols(n) = data.jh + data.ja;
  jr.rightCols(n) = cplx(0, 1) * (data.jh - data.ja);

  // Away from the origin the coordinate directions acquire a global-phase
  // component. The physical flow lives on rays, so quotient it out of the
  // fit; otherwise the projected dynamics leaks phase-fiber volume.
  const double norm2 = data.psi.squaredNorm();
  const Eigen::VectorXcd i_psi = cplx(0, 1) * data.psi;
  const Eigen::RowVectorXd phase_coeff = ((i_psi.adjoint() * jr) / norm2).real();
  jr.noalias() -= i_psi * phase_coeff.cast<cplx>();

  // Normal equations Re(J† J) u = Re(J† w), solved matrix-free by CG; near
  // the origin the system is a tiny perturbation of the identity.
  const Eigen::VectorXd rhs = (jr.adjoint() * w).real();
  Eigen::VectorXd u = Eigen::VectorXd::Zero(2 * n);
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  const double tol2 = std::max(rs, 1.0) * 1e-26;
  for (int it = 0; it < 2 * n + 10 && rs > tol2; ++it) {
    const Eigen::VectorXd ap = (jr.adjoint() * (jr * p.cast<cplx>())).real();
    const double denom = p.dot(ap);
    if (denom <= 0.0) break;
    const double alpha = rs / denom;
    u += alpha * p;
    r -= alpha * ap;
    const double rs_new = r.squaredNorm();
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }
  return u.head(n) + cplx(0, 1) * u.tail(n);
}

Trajectory tdvp_evolve(const MpsChain& chain0, const LocalHamiltonian& h, double t_final,
                       double dt, int snapshot_stride, long cap) {
  if (dt <= 0.0) throw ArgumentError("tdvp_evolve: dt must be positive");
  if (snapshot_stride < 1) snapshot_stride = 1;
  Trajectory traj;
  traj.snapshot_stride = snapshot_stride;
  MpsChain chain = chain0;
  const int n_steps = static_cast<int>(std::llround(t_final / dt));

  auto record = [&](double t, const MpsChain& c) {
    traj.times.push_back(t);
    traj.energies.push_back(sandwich(c, {}, {}, &h).real());
    std::vector<double> s;
    for (int b = 1; b < c.size(); ++b) s.push_back(c.cut_entropy(b));
    traj.cut_entropies.push_back(std::move(s));
    traj.snapshots.push_back(c);
  };
  record(0.0, chain);

  for (int step = 0; step < n_steps; ++step) {
    const ChartSolver solver(chain, h, cap);
    const int n = solver.n_modes();
    const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(n);
    const Eigen::VectorXcd k1 = solver.velocity(zero);
    const Eigen::VectorXcd k2 = solver.velocity(0.5 * dt * k1);
    const Eigen::VectorXcd k3 = solver.velocity(0.5 * dt * k2);
    const Eigen::VectorXcd k4 = solver.velocity(dt * k3);
    const Eigen::VectorXcd x_step = (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    chain = thouless_update(chain, solver.to_coords(x_step));
    if (chain.max_canonical_residual() > 1e-8)
      throw NumericalConsistencyError("tdvp_evolve: step rejected, canonical repair failed");
    if ((step + 1) % snapshot_stride == 0 || step + 1 == n_steps)
      record(dt * (step + 1), chain);
  }
  return traj;
}

ExactPropagator::ExactPropagator(const LocalHamiltonian& h, long cap) {
  const Eigen::MatrixXcd hm = h.dense_matrix(cap);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hm);
  vectors_ = es.eigenvectors();
  values_ = es.eigenvalues();
  spectral_norm_ = std::max(std::abs(values_.minCoeff()), std::abs(values_.maxCoeff()));
}

Eigen::VectorXcd ExactPropagator::evolve(const Eigen::VectorXcd& psi, double t) const {
  const Eigen::VectorXcd coeffs = vectors_.adjoint() * psi;
  Eigen::VectorXcd rotated(coeffs.size());
  for (int k = 0; k < coeffs.size(); ++k)
    rotated(k) = coeffs(k) * std::exp(cplx(0, -values_(k) * t));
  return vectors_ * rotated;
}

DenseState exact_evolve(const DenseState& state, const LocalHamiltonian& h, double t, long cap) {
  const ExactPropagator prop(h, cap);
  DenseState out = state;
  out.amplitudes = prop.evolve(state.amplitudes, t);
  return out;
}

double fidelity(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

}  // namespace mpsflow
