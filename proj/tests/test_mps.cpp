#include <doctest.h>

#include <cmath>
#include <complex>

#include "mpsflow/mps.hpp"
#include "mpsflow/rng.hpp"

using namespace mpsflow;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("mps") {

TEST_CASE("rng streams are reproducible and normals look sane") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(99);
  double mean = 0.0, var = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = c.normal();
    mean += x;
    var += x * x;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("haar unitaries are unitary and seed-deterministic") {
  Rng rng(7);
  const Eigen::MatrixXcd u = rng.haar_unitary(6);
  CHECK(max_abs(u.adjoint() * u - Eigen::MatrixXcd::Identity(6, 6)) < 1e-12);
  Rng rng2(7);
  CHECK(max_abs(u - rng2.haar_unitary(6)) == 0.0);
}

TEST_CASE("single-site random chain is a normalized qubit state") {
  const MpsChain chain = MpsChain::random(1, 2, {1, 1}, 42);
  const DenseState psi = chain.to_dense();
  CHECK(psi.dim() == 2);
  CHECK(std::abs(psi.norm() - 1.0) < 1e-12);
  CHECK(std::abs(std::abs(overlap(chain, chain)) - 1.0) < 1e-12);
}

TEST_CASE("random chains are left-canonical to 1e-10 at every site") {
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    const MpsChain chain = MpsChain::random(8, 2, uniform_profile(8, 2, 2), seed);
    CHECK(chain.max_canonical_residual() < 1e-10);
    CHECK(std::abs(chain.to_dense().norm() - 1.0) < 1e-10);
  }
}

TEST_CASE("identical seeds give bit-identical chains") {
  const auto profile = uniform_profile(6, 2, 4);
  const MpsChain a = MpsChain::random(6, 2, profile, 2024);
  const MpsChain b = MpsChain::random(6, 2, profile, 2024);
  for (int i = 0; i < a.size(); ++i) CHECK(max_abs(a.site(i).u - b.site(i).u) == 0.0);
}

TEST_CASE("invalid bond profiles are rejected") {
  CHECK_THROWS_AS(MpsChain::random(3, 2, {1, 4, 2, 1}, 1), DimensionError);
  CHECK_THROWS_AS(MpsChain::random(3, 2, {1, 2, 2}, 1), DimensionError);
  CHECK_THROWS_AS(MpsChain::random(3, 2, {2, 2, 2, 1}, 1), DimensionError);
}

TEST_CASE("right environments: boundary, product case, trace and PSD") {
  const MpsChain chain = MpsChain::random(8, 2, uniform_profile(8, 2, 4), 5);
  const int n = chain.size();
  CHECK(chain.environment(n).rows() == 1);
  CHECK(std::abs(chain.environment(n)(0, 0) - 1.0) < 1e-15);
  for (int b = 0; b <= n; ++b) {
    const Eigen::MatrixXcd& g = chain.environment(b);
    CHECK(max_abs(g - g.adjoint()) < 1e-12);
    CHECK(std::abs(g.trace().real() - 1.0) < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
  }

  std::vector<Eigen::VectorXcd> local(4, (Eigen::VectorXcd(2) << 1.0, 0.0).finished());
  const MpsChain prod = MpsChain::product_state(2, local);
  for (int b = 0; b <= prod.size(); ++b) {
    CHECK(prod.environment(b).rows() == 1);
    CHECK(std::abs(prod.environment(b)(0, 0) - 1.0) < 1e-14);
  }
}

TEST_CASE("environments match dense reduced density matrices") {
  const MpsChain chain = MpsChain::random(8, 2, uniform_profile(8, 2, 4), 77);
  const DenseState psi = chain.to_dense();
  for (int bond = 1; bond < chain.size(); ++bond) {
    // Gamma at the bond has the same spectrum as the reduced density matrix of
    // the left block, so the entropies must agree.
    const double s_env = chain.cut_entropy(bond);
    const double s_dense = dense_cut_entropy(psi.amplitudes, chain.size(), 2, bond);
    CHECK(std::abs(s_env - s_dense) < 1e-8);
  }
}

TEST_CASE("two-site chain contracts by hand") {
  const MpsChain chain = MpsChain::random(2, 2, {1, 2, 1}, 3);
  const DenseState psi = chain.to_dense();
  for (int n0 = 0; n0 < 2; ++n0)
    for (int n1 = 0; n1 < 2; ++n1) {
      const std::complex<double> expected =
          (chain.site(0).tensor_block(n0) * chain.site(1).tensor_block(n1))(0, 0);
      CHECK(std::abs(psi.amplitudes(n0 * 2 + n1) - expected) < 1e-14);
    }
}

TEST_CASE("cut entropy: product state zero, Bell pair ln 2") {
  std::vector<Eigen::VectorXcd> local(5, (Eigen::VectorXcd(2) << std::sqrt(0.5), std::sqrt(0.5)).finished());
  const MpsChain prod = MpsChain::product_state(2, local);
  for (int b = 1; b < prod.size(); ++b) CHECK(prod.cut_entropy(b) < 1e-13);

  // Two-site Bell state; environment at the middle bond is diag(1/2, 1/2).
  Eigen::MatrixXcd a0(2, 2), a1(4, 1);
  a0.setZero();
  a0(0, 0) = 1.0;  // (n=0) -> bond 0
  a0(1, 1) = 1.0;  // (n=1) -> bond 1
  a1.setZero();
  a1(0, 0) = std::sqrt(0.5);  // (n=0, a=0)
  a1(3, 0) = std::sqrt(0.5);  // (n=1, a=1)
  const MpsChain bell = MpsChain::from_site_tensors(2, {a0, a1}, {1, 2, 1});
  CHECK(std::abs(bell.cut_entropy(1) - std::log(2.0)) < 1e-12);
  const Eigen::MatrixXcd gamma = bell.environment(1);
  CHECK(std::abs(gamma(0, 0).real() - 0.5) < 1e-12);
  CHECK(std::abs(gamma(1, 1).real() - 0.5) < 1e-12);
}

TEST_CASE("segment dense: full chain, unit norm, and associativity") {
  const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 2), 11);

  const DenseState full = chain.segment_to_dense({0, 5});
  const DenseState plain = chain.to_dense();
  CHECK(full.dim() == plain.dim());
  CHECK((full.amplitudes - plain.amplitudes).norm() < 1e-12);

  // Single-site segment with D_eL = D_eR = D has unit norm.
  const DenseState single = chain.segment_to_dense({2, 2});
  CHECK(std::abs(single.norm() - 1.0) < 1e-10);

  // Contracting two adjacent single-site segments over the shared ancilla
  // reproduces the two-site segment.
  const DenseState left = chain.segment_to_dense({2, 2});
  const DenseState right = chain.segment_to_dense({3, 3});
  const DenseState both = chain.segment_to_dense({2, 3});
  const int del = chain.bond_dim(2), dm = chain.bond_dim(3), der = chain.bond_dim(4);
  Eigen::VectorXcd glued = Eigen::VectorXcd::Zero(both.dim());
  const double rescale = std::sqrt(static_cast<double>(dm));
  for (int a = 0; a < del; ++a)
    for (int n = 0; n < 2; ++n)
      for (int m = 0; m < 2; ++m)
        for (int b = 0; b < der; ++b) {
          std::complex<double> sum = 0.0;
          for (int k = 0; k < dm; ++k)
            sum += left.amplitudes((a * 2 + n) * dm + k) * right.amplitudes((k * 2 + m) * der + b);
          glued(((a * 2 + n) * 2 + m) * der + b) = rescale * sum;
        }
  CHECK((glued - both.amplitudes).norm() < 1e-12);
}

TEST_CASE("overlap: orthogonal product states and dense cross-check") {
  std::vector<Eigen::VectorXcd> up(3, (Eigen::VectorXcd(2) << 1.0, 0.0).finished());
  std::vector<Eigen::VectorXcd> down(3, (Eigen::VectorXcd(2) << 0.0, 1.0).finished());
  CHECK(std::abs(overlap(MpsChain::product_state(2, up), MpsChain::product_state(2, down))) <
        1e-14);

  const MpsChain a = MpsChain::random(8, 2, uniform_profile(8, 2, 3), 1);
  const MpsChain b = MpsChain::random(8, 2, uniform_profile(8, 2, 2), 2);
  const std::complex<double> via_transfer = overlap(a, b);
  const std::complex<double> via_dense =
      a.to_dense().amplitudes.dot(b.to_dense().amplitudes);
  CHECK(std::abs(via_transfer - via_dense) < 1e-10);
  CHECK(std::abs(via_transfer) <= 1.0 + 1e-10);
}

TEST_CASE("gauge transformation at a bond leaves the dense state unchanged") {
  const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 4), 21);
  Rng rng(5);
  for (int bond : {1, 3, 5}) {
    const Eigen::MatrixXcd g = rng.haar_unitary(chain.bond_dim(bond));
    const MpsChain rotated = chain.gauge_transformed(bond, g);
    CHECK((rotated.to_dense().amplitudes - chain.to_dense().amplitudes).norm() < 1e-10);
  }
}

TEST_CASE("to_dense cap is enforced") {
  const MpsChain chain = MpsChain::random(8, 2, uniform_profile(8, 2, 2), 5);
  CHECK_THROWS_AS(chain.to_dense(100), ResourceCapError);
}

TEST_CASE("haar average of segment outer product resolves the identity") {
  // Entrywise MC check of E[Psi Psi†] = V * I for a 2-site segment with
  // nontrivial edges; batched error bars, 3 sigma.
  const int n_batches = 50, per_batch = 400;
  const std::vector<int> profile = {2, 2, 2};  // D_eL=2, one interior bond 2, D_eR=2
  const int dim = 2 * 2 * 2 * 2;
  std::vector<Eigen::MatrixXcd> batch_means;
  Rng rng(314);
  for (int b = 0; b < n_batches; ++b) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(dim, dim);
    for (int s = 0; s < per_batch; ++s) {
      const DenseState seg = random_segment_state(2, 2, profile, rng);
      acc += seg.amplitudes * seg.amplitudes.adjoint();
    }
    batch_means.push_back(acc / per_batch);
  }
  Eigen::MatrixXcd mean = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& m : batch_means) mean += m;
  mean /= n_batches;
  const double v = 1.0 / (4.0 * 2.0 * 2.0);  // 1/(d^2 * D_eL * D_eR)
  int checked = 0;
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) {
      double var = 0.0;
      for (const auto& m : batch_means) var += std::norm(m(r, c) - mean(r, c));
      const double se = std::sqrt(var / (n_batches * (n_batches - 1.0))) + 1e-12;
      const std::complex<double> expected = r == c ? v : 0.0;
      if (std::abs(mean(r, c) - expected) < 5.0 * se) ++checked;
    }
  // Allow a small fraction of 5-sigma outliers out of dim^2 entries.
  CHECK(checked >= dim * dim - 3);
}

}  // TEST_SUITE
