#include "mpsflow/hamiltonian.hpp"

namespace mpsflow {

namespace {
void check_hermitian(const Eigen::MatrixXcd& h, const char* what) {
  if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
    throw ArgumentError(std::string(what) + ": term is not Hermitian");
}
}  // namespace

void LocalHamiltonian::add_one_site(int site, const Eigen::MatrixXcd& h) {
  if (site < 0 || site >= n_) throw ArgumentError("add_one_site: site out of range");
  if (h.rows() != d_ || h.cols() != d_) throw DimensionError("add_one_site: term size");
  check_hermitian(h, "add_one_site");
  one_.emplace_back(site, h);
}

void LocalHamiltonian::add_two_site(int left_site, const Eigen::MatrixXcd& h) {
  if (left_site < 0 || left_site + 1 >= n_) throw ArgumentError("add_two_site: site out of range");
  if (h.rows() != d_ * d_ || h.cols() != d_ * d_) throw DimensionError("add_two_site: term size");
  check_hermitian(h, "add_two_site");
  two_.emplace_back(left_site, h);
}

Eigen::VectorXcd LocalHamiltonian::apply_dense(const Eigen::VectorXcd& psi) const {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (const auto& [site, h] : one_) out += apply_one_site(psi, n_, d_, site, h);
  for (const auto& [site, h] : two_) out += apply_two_site(psi, n_, d_, site, h);
  return out;
}

Eigen::MatrixXcd LocalHamiltonian::dense_matrix(long cap) const {
  const long dim = checked_dense_dim(std::vector<int>(n_, d_), cap);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
  auto embed = [&](int site, const Eigen::MatrixXcd& term, int span) {
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Identity(1, 1);
    long left = 1;
    for (int k = 0; k < site; ++k) left *= d_;
    long right = 1;
    for (int k = site + span; k < n_; ++k) right *= d_;
    full = kron(Eigen::MatrixXcd::Identity(left, left), term);
    full = kron(full, Eigen::MatrixXcd::Identity(right, right));
    h += full;
  };
  for (const auto& [site, term] : one_) embed(site, term, 1);
  for (const auto& [site, term] : two_) embed(site, term, 2);
  return h;
}

Eigen::Matrix2cd pauli_x() {
  Eigen::Matrix2cd m;
  m << 0, 1, 1, 0;
  return m;
}

Eigen::Matrix2cd pauli_y() {
  Eigen::Matrix2cd m;
  m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
  return m;
}

Eigen::Matrix2cd pauli_z() {
  Eigen::Matrix2cd m;
  m << 1, 0, 0, -1;
  return m;
}

LocalHamiltonian LocalHamiltonian::ising(int n_sites, double j_zz, double g_x, double h_z) {
  LocalHamiltonian h(n_sites, 2);
  const Eigen::MatrixXcd zz = kron(pauli_z(), pauli_z());
  for (int i = 0; i + 1 < n_sites; ++i) h.add_two_site(i, j_zz * zz);
  for (int i = 0; i < n_sites; ++i) {
    Eigen::MatrixXcd local = g_x * pauli_x() + h_z * pauli_z();
    if (local.cwiseAbs().maxCoeff() > 0) h.add_one_site(i, local);
  }
  return h;
}

LocalHamiltonian LocalHamiltonian::preset(const std::string& name, int n_sites) {
  if (name == "ising_chaotic") return ising(n_sites, 1.0, 1.05, 0.5);
  if (name == "ising_integrable") return ising(n_sites, 1.0, 1.05, 0.0);
  throw ArgumentError("unknown Hamiltonian preset: " + name);
}

}  // namespace mpsflow
