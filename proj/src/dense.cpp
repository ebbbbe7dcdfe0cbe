#include "mpsflow/dense.hpp"

#include <cmath>

namespace mpsflow {

namespace {
long ipow(int base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}
}  // namespace

Eigen::MatrixXcd reduced_density_window(const Eigen::VectorXcd& psi, int n_slots, int d,
                                        int first, int last) {
  if (first < 0 || last >= n_slots || first > last)
    throw ArgumentError("reduced_density_window: bad window");
  const long dim_l = ipow(d, first);
  const long dim_m = ipow(d, last - first + 1);
  const long dim_r = ipow(d, n_slots - 1 - last);
  if (dim_l * dim_m * dim_r != psi.size())
    throw DimensionError("reduced_density_window: size mismatch");
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim_m, dim_m);
  for (long l = 0; l < dim_l; ++l) {
    // psi[(l, m, r)] with r fastest.
    Eigen::Map<const Eigen::MatrixXcd> block(psi.data() + l * dim_m * dim_r, dim_r, dim_m);
    rho.noalias() += block.transpose() * block.conjugate();
  }
  return rho;
}

Eigen::MatrixXcd trace_out_edges(const Eigen::MatrixXcd& rho, int dim_left, int dim_mid,
                                 int dim_right) {
  const long dim = static_cast<long>(dim_left) * dim_mid * dim_right;
  if (rho.rows() != dim || rho.cols() != dim) throw DimensionError("trace_out_edges: size mismatch");
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_mid, dim_mid);
  for (int a = 0; a < dim_left; ++a)
    for (int b = 0; b < dim_right; ++b) {
      for (int m = 0; m < dim_mid; ++m) {
        const long row = (static_cast<long>(a) * dim_mid + m) * dim_right + b;
        for (int mp = 0; mp < dim_mid; ++mp) {
          const long col = (static_cast<long>(a) * dim_mid + mp) * dim_right + b;
          out(m, mp) += rho(row, col);
        }
      }
    }
  return out;
}

double von_neumann_entropy(const Eigen::MatrixXcd& rho, double tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i);
    if (p < -1e-8) throw NumericalConsistencyError("von_neumann_entropy: negative eigenvalue");
    if (p > tol) s -= p * std::log(p);
  }
  return s;
}

double dense_cut_entropy(const Eigen::VectorXcd& psi, int n_slots, int d, int cut) {
  if (cut < 1 || cut >= n_slots) throw ArgumentError("dense_cut_entropy: bad cut");
  const long rows = ipow(d, cut);
  const long cols = ipow(d, n_slots - cut);
  Eigen::Map<const Eigen::MatrixXcd> m(psi.data(), cols, rows);  // column-major: row index fastest
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m.transpose());
  double s = 0.0;
  for (int i = 0; i < svd.singularValues().size(); ++i) {
    const double p = svd.singularValues()(i) * svd.singularValues()(i);
    if (p > 1e-14) s -= p * std::log(p);
  }
  return s;
}

Eigen::VectorXcd apply_one_site(const Eigen::VectorXcd& psi, int n_slots, int d, int site,
                                const Eigen::MatrixXcd& op) {
  if (op.rows() != d || op.cols() != d) throw DimensionError("apply_one_site: operator size");
  const long stride = ipow(d, n_slots - 1 - site);
  const long blocks = psi.size() / (stride * d);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (long b = 0; b < blocks; ++b) {
    const long base = b * stride * d;
    for (int n = 0; n < d; ++n)
      for (int m = 0; m < d; ++m) {
        if (op(n, m) == cplx(0.0, 0.0)) continue;
        out.segment(base + n * stride, stride) += op(n, m) * psi.segment(base + m * stride, stride);
      }
  }
  return out;
}

Eigen::VectorXcd apply_two_site(const Eigen::VectorXcd& psi, int n_slots, int d, int site,
                                const Eigen::MatrixXcd& op) {
  if (op.rows() != d * d || op.cols() != d * d) throw DimensionError("apply_two_site: operator size");
  if (site < 0 || site + 1 >= n_slots) throw ArgumentError("apply_two_site: bad site");
  const long stride = ipow(d, n_slots - 2 - site);
  const long blocks = psi.size() / (stride * d * d);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (long b = 0; b < blocks; ++b) {
    const long base = b * stride * d * d;
    for (int r = 0; r < d * d; ++r)
      for (int c = 0; c < d * d; ++c) {
        if (op(r, c) == cplx(0.0, 0.0)) continue;
        out.segment(base + r * stride, stride) += op(r, c) * psi.segment(base + c * stride, stride);
      }
  }
  return out;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace mpsflow
