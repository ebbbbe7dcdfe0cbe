#pragma once

#include <string>
#include <utility>
#include <vector>
#include <Eigen/Dense>

#include "mpsflow/dense.hpp"

namespace mpsflow {

// Sum of one-site (d x d) and nearest-neighbour two-site (d^2 x d^2) Hermitian
// terms on a uniform-d chain. Two-site terms are labelled by the left site.
class LocalHamiltonian {
 public:
  LocalHamiltonian(int n_sites, int d) : n_(n_sites), d_(d) {}

  void add_one_site(int site, const Eigen::MatrixXcd& h);
  void add_two_site(int left_site, const Eigen::MatrixXcd& h);

  int size() const { return n_; }
  int phys_dim() const { return d_; }
  const std::vector<std::pair<int, Eigen::MatrixXcd>>& one_site_terms() const { return one_; }
  const std::vector<std::pair<int, Eigen::MatrixXcd>>& two_site_terms() const { return two_; }

  Eigen::VectorXcd apply_dense(const Eigen::VectorXcd& psi) const;
  Eigen::MatrixXcd dense_matrix(long cap = kDefaultDenseCap) const;

  // Spin-1/2 chain J*ZZ + g*X + h*Z. J=1, g=1.05, h=0.5 is the chaotic
  // benchmark default; h=0 is the integrable transverse-field point.
  static LocalHamiltonian ising(int n_sites, double j_zz, double g_x, double h_z);
  static LocalHamiltonian preset(const std::string& name, int n_sites);

 private:
  int n_;
  int d_;
  std::vector<std::pair<int, Eigen::MatrixXcd>> one_;
  std::vector<std::pair<int, Eigen::MatrixXcd>> two_;
};

Eigen::Matrix2cd pauli_x();
Eigen::Matrix2cd pauli_y();
Eigen::Matrix2cd pauli_z();

}  // namespace mpsflow
