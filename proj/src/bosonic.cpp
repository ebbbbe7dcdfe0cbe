#include "mpsflow/bosonic.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace mpsflow {

QuadraticBosonModel build_model(const MpsChain& chain, const LocalHamiltonian& h,
                                const std::function<double(int)>& dos, long cap) {
  QuadraticBosonModel model;
  model.epsilon = effective_epsilon(chain, h, true, cap);
  model.delta = anomalous_delta(chain, h, dos, true, cap);
  model.e0 = sandwich(chain, {}, {}, &h).real();
  const ModeTable table(chain);
  model.mode_sites.resize(table.total());
  for (int i = 0; i < chain.size(); ++i)
    for (int mu = 0; mu < table.count(i); ++mu) model.mode_sites[table.global_index(i, mu)] = i;
  return model;
}

QuadraticBosonModel two_mode_squeezer(double coupling) {
  QuadraticBosonModel model;
  model.epsilon = Eigen::MatrixXcd::Zero(2, 2);
  model.delta = Eigen::MatrixXcd::Zero(2, 2);
  model.delta(0, 1) = coupling;
  model.delta(1, 0) = coupling;
  model.e0 = 0.0;
  model.mode_sites = {0, 1};
  return model;
}

Eigen::MatrixXd quadratic_form_matrix(const QuadraticBosonModel& model) {
  const int n = model.n_modes();
  const Eigen::MatrixXcd eps = model.epsilon - model.e0 * Eigen::MatrixXcd::Identity(n, n);
  if ((eps - eps.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
    throw ArgumentError("quadratic_form_matrix: epsilon must be Hermitian");
  const Eigen::MatrixXd x = eps.real();
  const Eigen::MatrixXd y = eps.imag();
  const Eigen::MatrixXd r = model.delta.real();
  const Eigen::MatrixXd s = model.delta.imag();
  // H = sum eps~ a†a + sum_{m<n} (delta a†a† + conj aa) in quadratures:
  // 1/2 q (X+R) q + 1/2 p (X-R) p + q (S-Y) p.
  Eigen::MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = x + r;
  h.bottomRightCorner(n, n) = x - r;
  h.topRightCorner(n, n) = s - y;
  h.bottomLeftCorner(n, n) = (s - y).transpose();
  return 0.5 * (h + h.transpose());
}

Eigen::MatrixXd symplectic_form(int n_modes) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
  omega.topRightCorner(n_modes, n_modes) = Eigen::MatrixXd::Identity(n_modes, n_modes);
  omega.bottomLeftCorner(n_modes, n_modes) = -Eigen::MatrixXd::Identity(n_modes, n_modes);
  return omega;
}

Eigen::MatrixXd flow_generator(const QuadraticBosonModel& model) {
  return symplectic_form(model.n_modes()) * quadratic_form_matrix(model);
}

CovarianceState vacuum_covariance(int n_modes) {
  return {0.5 * Eigen::MatrixXd::Identity(2 * n_modes, 2 * n_modes)};
}

double symplectic_residual(const Eigen::MatrixXd& s) {
  const int n = static_cast<int>(s.rows()) / 2;
  const Eigen::MatrixXd omega = symplectic_form(n);
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  return (s.transpose() * omega * s - omega).cwiseAbs().maxCoeff() / (scale * scale);
}

CovarianceState evolve_covariance(const QuadraticBosonModel& model, const CovarianceState& sigma0,
                                  double t) {
  const Eigen::MatrixXd k = flow_generator(model);
  const Eigen::MatrixXd s = (t * k).exp();
  if (symplectic_residual(s) > 1e-6)
    throw NumericalConsistencyError("evolve_covariance: non-symplectic drift");
  CovarianceState out;
  out.sigma = s * sigma0.sigma * s.transpose();
  out.sigma = 0.5 * (out.sigma + out.sigma.transpose());
  return out;
}

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& sigma_block) {
  const int n = static_cast<int>(sigma_block.rows()) / 2;
  const Eigen::MatrixXd m = symplectic_form(n) * sigma_block;
  Eigen::EigenSolver<Eigen::MatrixXd> es(m);
  std::vector<double> nus;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double im = es.eigenvalues()(i).imag();
    if (im > 0) nus.push_back(im);
  }
  std::sort(nus.begin(), nus.end(), std::greater<double>());
  if (static_cast<int>(nus.size()) != n)
    throw NumericalConsistencyError("symplectic_eigenvalues: spectrum did not pair up");
  return nus;
}

namespace {
std::vector<int> subset_rows(int n_modes, const std::vector<int>& subset) {
  std::vector<int> rows;
  for (int m : subset) {
    if (m < 0 || m >= n_modes) throw ArgumentError("mode subset index out of range");
    rows.push_back(m);
    rows.push_back(n_modes + m);
  }
  return rows;
}
}  // namespace

double gaussian_entropy(const CovarianceState& state, const std::vector<int>& mode_subset) {
  if (mode_subset.empty()) throw ArgumentError("gaussian_entropy: empty subset");
  const int n = state.n_modes();
  const std::vector<int> rows = subset_rows(n, mode_subset);
  Eigen::MatrixXd block(rows.size(), rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < rows.size(); ++b) block(a, b) = state.sigma(rows[a], rows[b]);
  // Small symplectic eigenvalues of a strongly squeezed block carry an
  // absolute error proportional to the largest entry.
  const double tol = 1e-8 * std::max(1.0, block.cwiseAbs().maxCoeff());
  double entropy = 0.0;
  for (double nu : symplectic_eigenvalues(block)) {
    if (nu < 0.5 - tol)
      throw NumericalConsistencyError("gaussian_entropy: symplectic eigenvalue below vacuum");
    if (nu <= 0.5 + tol) continue;
    entropy += (nu + 0.5) * std::log(nu + 0.5) - (nu - 0.5) * std::log(nu - 0.5);
  }
  return entropy;
}

RateReport entropy_growth_rate(const QuadraticBosonModel& model,
                               const std::vector<int>& mode_subset, double t_window,
                               int n_samples) {
  if (t_window <= 0 || n_samples < 8) throw ArgumentError("entropy_growth_rate: bad window");
  const Eigen::MatrixXd k = flow_generator(model);
  const double dt = t_window / n_samples;
  const Eigen::MatrixXd step = (dt * k).exp();
  if (symplectic_residual(step) > 1e-6)
    throw NumericalConsistencyError("entropy_growth_rate: non-symplectic step");

  RateReport report;
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(k.rows(), k.cols());
  const CovarianceState vac = vacuum_covariance(model.n_modes());
  for (int i = 0; i <= n_samples; ++i) {
    CovarianceState state;
    state.sigma = s * vac.sigma * s.transpose();
    report.times.push_back(i * dt);
    report.entropies.push_back(gaussian_entropy(state, mode_subset));
    s = step * s;
  }

  // Least-squares slope over the second half.
  const int first = n_samples / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int m = 0;
  for (int i = first; i <= n_samples; ++i) {
    sx += report.times[i];
    sy += report.entropies[i];
    sxx += report.times[i] * report.times[i];
    sxy += report.times[i] * report.entropies[i];
    syy += report.entropies[i] * report.entropies[i];
    ++m;
  }
  const double denom = m * sxx - sx * sx;
  report.rate = denom != 0.0 ? (m * sxy - sx * sy) / denom : 0.0;
  const double var_y = syy - sy * sy / m;
  const double ss_res = var_y - report.rate * (sxy - sx * sy / m);
  report.r_squared = var_y > 0 ? 1.0 - ss_res / var_y : 1.0;
  report.linear_regime = report.r_squared >= 0.99;
  return report;
}

double classical_subsystem_exponent(const QuadraticBosonModel& model,
                                    const std::vector<int>& mode_subset, double t_total) {
  if (t_total <= 0) throw ArgumentError("classical_subsystem_exponent: bad time");
  if (mode_subset.empty()) return 0.0;
  const Eigen::MatrixXd k = flow_generator(model);
  // Step small enough to keep the QR accumulation well conditioned.
  const double k_norm = k.cwiseAbs().rowwise().sum().maxCoeff();
  const int half_steps =
      std::max(16, static_cast<int>(std::ceil(0.5 * t_total * std::max(k_norm, 0.5))));
  const Eigen::MatrixXd step = (0.5 * t_total / half_steps * k).exp();
  VolumeGrowthTracker tracker(static_cast<int>(k.rows()));
  for (int i = 0; i < half_steps; ++i) {
    tracker.apply(step);
    tracker.renormalize();
  }
  const VolumeGrowthTracker midpoint = tracker;
  for (int i = 0; i < half_steps; ++i) {
    tracker.apply(step);
    tracker.renormalize();
  }
  // Rate from the second half of the run; this discards the frame-alignment
  // transient that a plain volume/time quotient retains.
  int n_plus = 0;
  for (int i = 0; i < tracker.dim(); ++i)
    if (tracker.log_growth()(i) > 0.0) ++n_plus;
  const std::vector<int> rows = subset_rows(model.n_modes(), mode_subset);
  const int kk = std::min<int>(static_cast<int>(rows.size()), n_plus);
  if (kk == 0) return 0.0;
  const double late = projected_log_volume(tracker, rows, kk);
  const double mid = projected_log_volume(midpoint, rows, kk);
  return (late - mid) / (0.5 * t_total);
}

Eigen::MatrixXcd evolve_alpha(const QuadraticBosonModel& model, const Eigen::MatrixXcd& alpha0,
                              double t, double dt) {
  if (dt <= 0) throw ArgumentError("evolve_alpha: dt must be positive");
  const int n = model.n_modes();
  const Eigen::MatrixXcd eps =
      model.epsilon - model.e0 * Eigen::MatrixXcd::Identity(n, n);
  auto rhs = [&](const Eigen::MatrixXcd& a) {
    return Eigen::MatrixXcd(cplx(0, -1) * (eps * a + a * eps.transpose() + model.delta));
  };
  Eigen::MatrixXcd alpha = alpha0;
  const int n_steps = std::max(1, static_cast<int>(std::llround(t / dt)));
  const double h = t / n_steps;
  for (int i = 0; i < n_steps; ++i) {
    const Eigen::MatrixXcd k1 = rhs(alpha);
    const Eigen::MatrixXcd k2 = rhs(alpha + 0.5 * h * k1);
    const Eigen::MatrixXcd k3 = rhs(alpha + 0.5 * h * k2);
    const Eigen::MatrixXcd k4 = rhs(alpha + h * k3);
    alpha += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return alpha;
}

Eigen::MatrixXcd pair_correlations(const CovarianceState& state) {
  const int n = state.n_modes();
  Eigen::MatrixXcd m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const double qq = state.sigma(a, b);
      const double pp = state.sigma(n + a, n + b);
      const double qp = state.sigma(a, n + b);
      const double pq = state.sigma(n + a, b);
      m(a, b) = 0.5 * (qq - pp) + cplx(0, 0.5) * (qp + pq);
    }
  return m;
}

}  // namespace mpsflow
