#include "mpsflow/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "mpsflow/parallel.hpp"

namespace mpsflow {

void VolumeGrowthTracker::renormalize() {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(q_);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < q_.cols(); ++j) {
    double rjj = r(j, j);
    if (rjj < 0) {
      q.col(j) *= -1.0;
      rjj = -rjj;
    }
    log_growth_(j) += std::log(std::max(rjj, 1e-300));
  }
  q_ = q;
}

double projected_log_volume(const VolumeGrowthTracker& tracker, const std::vector<int>& rows,
                            int k) {
  if (k <= 0) return 0.0;
  if (k > static_cast<int>(rows.size()))
    throw ArgumentError("projected_log_volume: k exceeds projection rank");
  Eigen::MatrixXd projected(rows.size(), k);
  for (std::size_t r = 0; r < rows.size(); ++r)
    projected.row(r) = tracker.frame().row(rows[r]).head(k);
  const Eigen::MatrixXd gram = projected.transpose() * projected;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  double log_det = 0.0;
  for (int i = 0; i < k; ++i) log_det += std::log(std::max(es.eigenvalues()(i), 1e-300));
  double log_vol = 0.5 * log_det;
  for (int i = 0; i < k; ++i) log_vol += tracker.log_growth()(i);
  return log_vol;
}

double subsystem_rate(const VolumeGrowthTracker& tracker, const std::vector<int>& rows,
                      double elapsed) {
  if (elapsed <= 0.0) throw ArgumentError("subsystem_rate: elapsed time must be positive");
  int n_plus = 0;
  for (int i = 0; i < tracker.dim(); ++i)
    if (tracker.log_growth()(i) > 0.0) ++n_plus;
  const int k = std::min<int>(static_cast<int>(rows.size()), n_plus);
  if (k == 0) return 0.0;
  return projected_log_volume(tracker, rows, k) / elapsed;
}

namespace {

Eigen::VectorXd realify(const Eigen::VectorXcd& v) {
  Eigen::VectorXd out(2 * v.size());
  out.head(v.size()) = v.real();
  out.tail(v.size()) = v.imag();
  return out;
}

Eigen::VectorXcd probe_vector(int n, int direction, double step) {
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
  if (direction < n)
    x(direction) = step;
  else
    x(direction - n) = cplx(0.0, step);
  return x;
}

}  // namespace

std::vector<int> segment_coordinate_rows(const ModeTable& table, const Segment& seg) {
  std::vector<int> rows;
  const int n = table.total();
  for (int site = seg.first; site <= seg.last; ++site)
    for (int mu = 0; mu < table.count(site); ++mu) {
      rows.push_back(table.global_index(site, mu));      // p-coordinate
      rows.push_back(n + table.global_index(site, mu));  // q-coordinate
    }
  return rows;
}

LyapunovResult lyapunov_spectrum(const MpsChain& chain0, const LocalHamiltonian& h,
                                 const LyapunovOptions& opt) {
  if (opt.dt <= 0 || opt.t_total <= 0) throw ArgumentError("lyapunov_spectrum: bad time grid");
  if (opt.fd_step <= 0) throw ArgumentError("lyapunov_spectrum: bad fd_step");

  LyapunovResult result;
  MpsChain chain = chain0;
  auto solver = std::make_unique<ChartSolver>(chain, h, opt.cap);
  const int n = solver->n_modes();
  const int dim = 2 * n;
  result.mode_table = solver->table();

  VolumeGrowthTracker tracker(dim);
  const int n_steps = static_cast<int>(std::llround(opt.t_total / opt.dt));
  const int checkpoint_stride = std::max(1, n_steps / 64);

  for (int step = 0; step < n_steps; ++step) {
    // Base point advances by chart RK4.
    const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(n);
    const Eigen::VectorXcd k1 = solver->velocity(zero);
    const Eigen::VectorXcd k2 = solver->velocity(0.5 * opt.dt * k1);
    const Eigen::VectorXcd k3 = solver->velocity(0.5 * opt.dt * k2);
    const Eigen::VectorXcd k4 = solver->velocity(opt.dt * k3);
    const Eigen::VectorXcd x_step = (opt.dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    // Jacobian of the chart vector field by central differences around the
    // step midpoint. The chart is canonical only at its origin; probing at
    // the midpoint keeps the accumulated step-map determinant honest through
    // second order, which the exponent-sum identity relies on.
    const Eigen::VectorXcd x_mid = 0.5 * x_step;
    Eigen::MatrixXd jac(dim, dim);
    parallel_for(dim, [&](int b) {
      Eigen::VectorXcd probe = x_mid;
      probe += probe_vector(n, b, opt.fd_step);
      const Eigen::VectorXd fp = realify(solver->velocity(probe));
      probe = x_mid;
      probe += probe_vector(n, b, -opt.fd_step);
      const Eigen::VectorXd fm = realify(solver->velocity(probe));
      jac.col(b) = (fp - fm) / (2.0 * opt.fd_step);
    });

    // Chart coordinates of the old frame directions, re-expressed in the
    // orthonormal mode basis at the new base point.
    Eigen::MatrixXcd jh, ja;
    solver->jacobians(x_step, jh, ja);
    Eigen::MatrixXcd jr(jh.rows(), dim);
    jr.leftCols(n) = jh + ja;
    jr.rightCols(n) = cplx(0, 1) * (jh - ja);

    MpsChain next_chain = thouless_update(chain, solver->to_coords(x_step));
    if (next_chain.max_canonical_residual() > 1e-8)
      throw NumericalConsistencyError("lyapunov_spectrum: step rejected");
    auto next_solver = std::make_unique<ChartSolver>(next_chain, h, opt.cap);

    Eigen::MatrixXcd new_modes(jh.rows(), n);
    {
      Eigen::MatrixXcd jh2, ja2;
      next_solver->jacobians(Eigen::VectorXcd::Zero(n), jh2, ja2);
      new_modes = jh2;
    }
    const Eigen::MatrixXcd coeffs = new_modes.adjoint() * jr;  // n x 2n complex
    Eigen::MatrixXd transition(dim, dim);
    transition.topRows(n) = coeffs.real();
    transition.bottomRows(n) = coeffs.imag();

    tracker.apply(transition * (opt.dt * jac).exp());
    if ((step + 1) % opt.qr_interval == 0 || step + 1 == n_steps) tracker.renormalize();

    chain = std::move(next_chain);
    solver = std::move(next_solver);

    if ((step + 1) % checkpoint_stride == 0 || step + 1 == n_steps) {
      const double t = opt.dt * (step + 1);
      result.checkpoint_times.push_back(t);
      result.running_exponents.push_back(tracker.log_growth() / t);
    }
  }

  result.total_time = opt.dt * n_steps;
  result.log_growth = tracker.log_growth();
  result.frame = tracker.frame();
  result.exponents = tracker.log_growth() / result.total_time;
  std::sort(result.exponents.data(), result.exponents.data() + result.exponents.size(),
            std::greater<double>());
  result.ks_entropy = 0.0;
  for (int i = 0; i < result.exponents.size(); ++i)
    if (result.exponents(i) > 0.0) result.ks_entropy += result.exponents(i);

  // Convergence diagnostic: running estimates over the last half of the run
  // should agree with the final values to 10% (with an absolute floor).
  result.converged = true;
  for (std::size_t c = 0; c < result.checkpoint_times.size(); ++c) {
    if (result.checkpoint_times[c] < 0.5 * result.total_time) continue;
    for (int i = 0; i < dim; ++i) {
      const double final_est = result.log_growth(i) / result.total_time;
      const double tol = 0.1 * std::max(std::abs(final_est), 0.02);
      if (std::abs(result.running_exponents[c](i) - final_est) > tol) result.converged = false;
    }
  }
  return result;
}

double subsystem_exponent(const LyapunovResult& result, const Segment& seg) {
  if (!result.mode_table.has_value())
    throw PreconditionError("subsystem_exponent: no frame history recorded");
  if (seg.last < seg.first) return 0.0;
  int n_plus = 0;
  for (int i = 0; i < result.log_growth.size(); ++i)
    if (result.log_growth(i) > 0.0) ++n_plus;
  const std::vector<int> rows = segment_coordinate_rows(*result.mode_table, seg);
  const int k = std::min<int>(static_cast<int>(rows.size()), n_plus);
  if (k == 0) return 0.0;
  Eigen::MatrixXd projected(rows.size(), k);
  for (std::size_t r = 0; r < rows.size(); ++r)
    projected.row(r) = result.frame.row(rows[r]).head(k);
  const Eigen::MatrixXd gram = projected.transpose() * projected;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  double log_vol = 0.0;
  for (int i = 0; i < k; ++i) {
    log_vol += result.log_growth(i);
    log_vol += 0.5 * std::log(std::max(es.eigenvalues()(i), 1e-300));
  }
  return log_vol / result.total_time;
}

}  // namespace mpsflow
