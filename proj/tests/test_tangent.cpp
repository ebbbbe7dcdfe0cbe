#include <doctest.h>

#include <cmath>
#include <complex>

#include "mpsflow/tangent.hpp"

using namespace mpsflow;

namespace {

TangentCoords random_coords(const MpsChain& chain, std::uint64_t seed, double scale) {
  Rng rng(seed);
  TangentCoords t = TangentCoords::zero(chain);
  for (auto& v : t.x)
    for (int k = 0; k < v.size(); ++k) v(k) = scale * rng.complex_normal();
  return t;
}

}  // namespace

TEST_SUITE("tangent") {

TEST_CASE("mode counts complete the tangent space dimension") {
  // Saturated profile: sum of mode counts equals dim CP^{d^N - 1}.
  const MpsChain full = MpsChain::random(8, 2, uniform_profile(8, 2, 16), 3);
  const ModeTable table(full);
  CHECK(table.total() == 255);
  // Uniform interior bonds: (d-1) D^2 per bulk site.
  const MpsChain flat = MpsChain::random(6, 2, uniform_profile(6, 2, 2), 3);
  CHECK(mode_count(flat.site(2)) == 4);
  CHECK(mode_count(flat.site(0)) == 0);  // saturated growth site
  CHECK(mode_count(flat.site(5)) == 3);  // final site, dr = 1
}

TEST_CASE("A adjoint B vanishes for every mode and for random coefficient sets") {
  for (std::uint64_t seed : {1ULL, 2ULL}) {
    const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 2), seed);
    Rng rng(seed * 13 + 1);
    for (int i = 0; i < chain.size(); ++i) {
      const Eigen::MatrixXcd a = chain.site(i).tensor();
      const int n = mode_count(chain.site(i));
      if (n == 0) continue;
      Eigen::VectorXcd coeffs(n);
      for (int k = 0; k < n; ++k) coeffs(k) = rng.complex_normal();
      const Eigen::MatrixXcd b = b_tensor(chain, i, coeffs);
      CHECK((a.adjoint() * b).cwiseAbs().maxCoeff() < 1e-10);
      for (int mode = 0; mode < n; ++mode)
        CHECK((a.adjoint() * b_mode(chain, i, mode)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("coordinate tensors vanish on the physical-0 slice at uniform bonds") {
  const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 2), 8);
  Rng rng(4);
  for (int i = 1; i < 5; ++i) {  // interior sites have dl == dr
    const int n = mode_count(chain.site(i));
    Eigen::VectorXcd coeffs(n);
    for (int k = 0; k < n; ++k) coeffs(k) = rng.complex_normal();
    const Eigen::MatrixXcd x = coords_as_site_matrix(chain, i, coeffs);
    CHECK(x.topRows(chain.site(i).dl).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("tangent vectors are orthonormal and orthogonal to the state") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const int n_sites = 4 + static_cast<int>(seed % 5);
    const int max_d = 2 + static_cast<int>(seed % 3);
    const MpsChain chain =
        MpsChain::random(n_sites, 2, uniform_profile(n_sites, 2, max_d), 100 + seed);
    const Eigen::VectorXcd psi = chain.to_dense().amplitudes;
    const ModeTable table(chain);
    std::vector<Eigen::VectorXcd> vecs;
    for (int i = 0; i < chain.size(); ++i)
      for (int mu = 0; mu < table.count(i); ++mu)
        vecs.push_back(tangent_vector(chain, i, mu).amplitudes);
    for (std::size_t p = 0; p < vecs.size(); ++p) {
      CHECK(std::abs(psi.dot(vecs[p])) < 1e-10);
      for (std::size_t q = p; q < vecs.size(); ++q) {
        const std::complex<double> g = vecs[p].dot(vecs[q]);
        const double expected = p == q ? 1.0 : 0.0;
        CHECK(std::abs(g - expected) < 1e-10);
      }
    }
  }
}

TEST_CASE("thouless update: x = 0 identity, unitarity, first-order consistency") {
  const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 2), 17);
  const Eigen::VectorXcd psi0 = chain.to_dense().amplitudes;

  const MpsChain same = thouless_update(chain, TangentCoords::zero(chain));
  CHECK((same.to_dense().amplitudes - psi0).norm() < 1e-12);

  const TangentCoords x = random_coords(chain, 23, 0.35);
  const MpsChain moved = thouless_update(chain, x);
  CHECK(moved.max_canonical_residual() < 1e-10);
  CHECK(std::abs(moved.to_dense().norm() - 1.0) < 1e-10);

  // Dense directional derivative: Psi(t x) = Psi + t sum x_mu d_mu Psi + O(t^2).
  Eigen::VectorXcd first_order = Eigen::VectorXcd::Zero(psi0.size());
  const ModeTable table(chain);
  for (int i = 0; i < chain.size(); ++i)
    for (int mu = 0; mu < table.count(i); ++mu)
      first_order += x.x[i](mu) * tangent_vector(chain, i, mu).amplitudes;

  std::vector<double> errs;
  for (double t : {1e-2, 1e-3, 1e-4}) {
    TangentCoords xt = x;
    for (auto& v : xt.x) v *= t;
    const Eigen::VectorXcd psi_t = thouless_update(chain, xt).to_dense().amplitudes;
    errs.push_back((psi_t - psi0 - t * first_order).norm());
  }
  for (std::size_t k = 0; k + 1 < errs.size(); ++k) {
    const double order = std::log(errs[k] / errs[k + 1]) / std::log(10.0);
    CHECK(order > 1.8);
    CHECK(order < 2.2);
  }
}

TEST_CASE("second tangent vectors: orthogonality and separation behaviour") {
  const MpsChain chain = MpsChain::random(8, 2, uniform_profile(8, 2, 2), 31);
  const Eigen::VectorXcd psi = chain.to_dense().amplitudes;
  CHECK_THROWS_AS(second_tangent_vector(chain, 3, 0, 3, 1), ArgumentError);

  const Eigen::VectorXcd v = second_tangent_vector(chain, 2, 1, 5, 2).amplitudes;
  CHECK(std::abs(psi.dot(v)) < 1e-10);
  // Orthogonal to single-tangent vectors away from the insertion sites.
  for (int k : {1, 3, 6})
    for (int mu = 0; mu < mode_count(chain.site(k)); ++mu)
      CHECK(std::abs(tangent_vector(chain, k, mu).amplitudes.dot(v)) < 1e-10);

  // Far-separated pair norms are close to 1; adjacent pairs deviate.
  const double far_norm = second_tangent_vector(chain, 1, 0, 6, 0).amplitudes.norm();
  CHECK(std::abs(far_norm - 1.0) < 0.35);
  double max_adjacent_dev = 0.0;
  for (int mu = 0; mu < mode_count(chain.site(3)); ++mu) {
    const double n2 = second_tangent_vector(chain, 3, mu, 4, mu).amplitudes.squaredNorm();
    max_adjacent_dev = std::max(max_adjacent_dev, std::abs(n2 - 1.0));
  }
  CHECK(max_adjacent_dev > 0.1);
}

TEST_CASE("grammian: hermiticity and agreement of the two routes") {
  const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 2), 57);
  const std::vector<std::pair<int, int>> pairs = {{1, 2}, {1, 4}, {2, 4}};
  const Grammian via_transfer = grammian(chain, pairs, false);
  const Grammian via_dense = grammian(chain, pairs, true);
  CHECK((via_transfer.g - via_transfer.g.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((via_transfer.g - via_dense.g).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("grammian of well separated pairs is close to identity") {
  const MpsChain chain = MpsChain::random(10, 2, uniform_profile(10, 2, 2), 71);
  const Grammian g = grammian(chain, {{1, 8}}, false);
  const int n = static_cast<int>(g.g.rows());
  const Eigen::MatrixXcd dev = g.g - Eigen::MatrixXcd::Identity(n, n);
  CHECK(dev.cwiseAbs().maxCoeff() < 0.25);
}

TEST_CASE("effective epsilon: identity Hamiltonian, hermiticity, route agreement") {
  const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 2), 91);
  LocalHamiltonian ident(6, 2);
  for (int i = 0; i < 6; ++i) ident.add_one_site(i, Eigen::MatrixXcd::Identity(2, 2) / 6.0);
  const Eigen::MatrixXcd eps_id = effective_epsilon(chain, ident, true);
  CHECK((eps_id - Eigen::MatrixXcd::Identity(eps_id.rows(), eps_id.cols())).cwiseAbs().maxCoeff() <
        1e-10);

  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", 6);
  const Eigen::MatrixXcd eps_dense = effective_epsilon(chain, h, true);
  const Eigen::MatrixXcd eps_transfer = effective_epsilon(chain, h, false);
  CHECK((eps_dense - eps_dense.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((eps_dense - eps_transfer).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("epsilon decays away from the diagonal for a local Hamiltonian") {
  const MpsChain chain = MpsChain::random(8, 2, uniform_profile(8, 2, 2), 13);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", 8);
  const Eigen::MatrixXcd eps = effective_epsilon(chain, h, true);
  const ModeTable table(chain);
  auto block_max = [&](int i, int j) {
    double m = 0.0;
    for (int mu = 0; mu < table.count(i); ++mu)
      for (int nu = 0; nu < table.count(j); ++nu)
        m = std::max(m, std::abs(eps(table.global_index(i, mu), table.global_index(j, nu))));
    return m;
  };
  const double near = block_max(3, 4);
  const double far = block_max(1, 6);
  CHECK(far < 0.5 * near);
}

TEST_CASE("anomalous delta: dos weighting is exact and identity-H gives zero") {
  const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 2), 19);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", 6);
  auto flat = [](int) { return 1.0; };
  auto dos = [](int sep) { return 1.0 + 3.0 / (1 << (sep - 1)); };
  const Eigen::MatrixXcd d_flat = anomalous_delta(chain, h, flat, true);
  const Eigen::MatrixXcd d_dos = anomalous_delta(chain, h, dos, true);
  const ModeTable table(chain);
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      for (int mu = 0; mu < table.count(i); ++mu)
        for (int nu = 0; nu < table.count(j); ++nu) {
          const std::complex<double> a =
              d_flat(table.global_index(i, mu), table.global_index(j, nu));
          const std::complex<double> b =
              d_dos(table.global_index(i, mu), table.global_index(j, nu));
          CHECK(std::abs(b * dos(j - i) - a) < 1e-14);
        }

  LocalHamiltonian ident(6, 2);
  for (int i = 0; i < 6; ++i) ident.add_one_site(i, Eigen::MatrixXcd::Identity(2, 2));
  CHECK(anomalous_delta(chain, ident, flat, true).cwiseAbs().maxCoeff() < 1e-10);

  // Transfer route agrees with the dense route.
  const Eigen::MatrixXcd d_transfer = anomalous_delta(chain, h, dos, false);
  CHECK((d_dos - d_transfer).cwiseAbs().maxCoeff() < 1e-9);

  auto bad = [](int) { return 0.0; };
  CHECK_THROWS_AS(anomalous_delta(chain, h, bad, true), ArgumentError);
}

TEST_CASE("b_tensor reports conditioning trouble on rank-deficient environments") {
  // |000> embedded at D=2: the environment right of site 1 is diag(1, 0).
  Eigen::MatrixXcd a0(2, 2), a1(4, 2), a2(4, 1);
  a0.setZero();
  a0(0, 0) = 1.0;
  a0(1, 1) = 1.0;
  a1.setZero();
  a1(0, 0) = 1.0;  // (n=0, a=0) -> b=0
  a1(1, 1) = 1.0;  // (n=0, a=1) -> b=1
  a2.setZero();
  a2(0, 0) = 1.0;  // (n=0, a=0)
  const MpsChain chain = MpsChain::from_site_tensors(2, {a0, a1, a2}, {1, 2, 2, 1});
  CHECK(mode_count(chain.site(1)) == 4);
  ConditioningReport report;
  (void)b_mode(chain, 1, 0, &report);
  CHECK(report.floored);
  CHECK(report.min_env_eigenvalue < 1e-12);
}

}  // TEST_SUITE
