#pragma once

#include <functional>
#include <vector>

#include "mpsflow/tangent.hpp"
#include "mpsflow/volume.hpp"

namespace mpsflow {

// Effective quadratic model over tangent modes: Hermitian hopping epsilon,
// symmetric pair-creation delta (zero on same-site blocks), vacuum energy e0.
struct QuadraticBosonModel {
  Eigen::MatrixXcd epsilon;
  Eigen::MatrixXcd delta;
  double e0 = 0.0;
  std::vector<int> mode_sites;

  int n_modes() const { return static_cast<int>(epsilon.rows()); }
};

QuadraticBosonModel build_model(const MpsChain& chain, const LocalHamiltonian& h,
                                const std::function<double(int)>& dos,
                                long cap = kDefaultDenseCap);

// Simple hand-built models for oracle checks.
QuadraticBosonModel two_mode_squeezer(double coupling);

// Real symmetric quadratic form in (q, p) ordering; the generator of the
// classical flow is K = Omega * H.
Eigen::MatrixXd quadratic_form_matrix(const QuadraticBosonModel& model);
Eigen::MatrixXd symplectic_form(int n_modes);
Eigen::MatrixXd flow_generator(const QuadraticBosonModel& model);

struct CovarianceState {
  Eigen::MatrixXd sigma;  // 2n x 2n, (q, p) ordering

  int n_modes() const { return static_cast<int>(sigma.rows()) / 2; }
};

CovarianceState vacuum_covariance(int n_modes);  // sigma = I/2

// sigma(t) = S sigma S^T with S = exp(tK); throws if the relative symplectic
// residual of S exceeds 1e-6.
CovarianceState evolve_covariance(const QuadraticBosonModel& model, const CovarianceState& sigma0,
                                  double t);

// Relative residual of S^T Omega S = Omega.
double symplectic_residual(const Eigen::MatrixXd& s);

std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& sigma_block);

double gaussian_entropy(const CovarianceState& state, const std::vector<int>& mode_subset);

struct RateReport {
  double rate = 0.0;
  double r_squared = 0.0;
  bool linear_regime = false;
  std::vector<double> times;
  std::vector<double> entropies;
};

// Slope of S(t) for the subset over the second half of [0, t_window].
RateReport entropy_growth_rate(const QuadraticBosonModel& model,
                               const std::vector<int>& mode_subset, double t_window,
                               int n_samples = 64);

// Log-volume growth rate of the flow's image frame projected on the subset's
// phase-space block (expanding-directions Gram convention).
double classical_subsystem_exponent(const QuadraticBosonModel& model,
                                    const std::vector<int>& mode_subset, double t_total);

// d alpha/dt = -i((eps - e0) alpha + alpha (eps - e0)^T) - i delta, by RK4.
Eigen::MatrixXcd evolve_alpha(const QuadraticBosonModel& model, const Eigen::MatrixXcd& alpha0,
                              double t, double dt);

// Pair-correlation matrix <a_m a_n> of a zero-mean Gaussian state.
Eigen::MatrixXcd pair_correlations(const CovarianceState& state);

}  // namespace mpsflow
