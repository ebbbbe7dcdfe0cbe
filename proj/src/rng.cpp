#include "mpsflow/rng.hpp"

#include <cmath>

namespace mpsflow {

double Rng::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller on explicitly generated uniforms; no library distributions so
  // the stream is platform-independent.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(a);
  have_cached_normal_ = true;
  return r * std::cos(a);
}

std::complex<double> Rng::complex_normal() {
  const double re = normal();
  const double im = normal();
  return {re, im};
}

Eigen::MatrixXcd Rng::haar_unitary(int m) {
  Eigen::MatrixXcd g(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) g(i, j) = complex_normal();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < m; ++j) {
    const std::complex<double> rjj = r(j, j);
    const double mag = std::abs(rjj);
    const std::complex<double> phase = mag > 0.0 ? rjj / mag : 1.0;
    q.col(j) *= phase;
  }
  return q;
}

}  // namespace mpsflow
