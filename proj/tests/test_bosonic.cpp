#include <doctest.h>

#include <cmath>

#include "mpsflow/bosonic.hpp"
#include "mpsflow/haar_ensemble.hpp"
#include <unsupported/Eigen/MatrixFunctions>

using namespace mpsflow;

TEST_SUITE("bosonic") {

TEST_CASE("two-mode squeezer: exact symplectic eigenvalue growth and entropy") {
  const double coupling = 0.5;
  const QuadraticBosonModel model = two_mode_squeezer(coupling);
  const CovarianceState vac = vacuum_covariance(2);
  CHECK(gaussian_entropy(vac, {0, 1}) == doctest::Approx(0.0).epsilon(1e-12));

  for (double t : {0.5, 1.0, 2.0}) {
    const CovarianceState evolved = evolve_covariance(model, vac, t);
    // Single-mode block: nu(t)/nu(0) = cosh(2 coupling t); vacuum nu is 1/2.
    Eigen::MatrixXd block(2, 2);
    block << evolved.sigma(0, 0), evolved.sigma(0, 2), evolved.sigma(2, 0), evolved.sigma(2, 2);
    const double nu = symplectic_eigenvalues(block)[0];
    CHECK(nu == doctest::Approx(0.5 * std::cosh(2 * coupling * t)).epsilon(1e-8));
    // Entropy matches the closed form for that nu.
    const double expected =
        (nu + 0.5) * std::log(nu + 0.5) - (nu - 0.5) * std::log(nu - 0.5);
    CHECK(gaussian_entropy(evolved, {0}) == doctest::Approx(expected).epsilon(1e-10));
    // Pure two-mode state overall.
    CHECK(gaussian_entropy(evolved, {0, 1}) < 1e-8);
  }

  // Asymptotic rate 2 * coupling, and the classical exponent matches it.
  const double t_window = 2.0 / coupling * 4.0;
  const RateReport rate = entropy_growth_rate(model, {0}, t_window);
  CHECK(rate.linear_regime);
  CHECK(std::abs(rate.rate - 2 * coupling) / (2 * coupling) < 0.02);
  const double lam = classical_subsystem_exponent(model, {0}, t_window);
  CHECK(std::abs(lam - 2 * coupling) / (2 * coupling) < 0.02);
}

TEST_CASE("passive evolution preserves purity and produces no entropy") {
  QuadraticBosonModel model;
  model.epsilon = Eigen::MatrixXcd::Zero(3, 3);
  model.epsilon.diagonal() << 0.7, 1.1, 0.4;
  model.delta = Eigen::MatrixXcd::Zero(3, 3);
  model.e0 = 0.0;
  model.mode_sites = {0, 1, 2};

  const CovarianceState evolved = evolve_covariance(model, vacuum_covariance(3), 3.7);
  CHECK((evolved.sigma - vacuum_covariance(3).sigma).cwiseAbs().maxCoeff() < 1e-10);
  const RateReport rate = entropy_growth_rate(model, {0, 2}, 10.0);
  CHECK(std::abs(rate.rate) < 1e-6);
  CHECK(classical_subsystem_exponent(model, {0, 1, 2}, 10.0) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("symplectic integrity of generated flows") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 4;
    QuadraticBosonModel model;
    model.epsilon = Eigen::MatrixXcd(n, n);
    model.delta = Eigen::MatrixXcd::Zero(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) model.epsilon(r, c) = 0.4 * rng.complex_normal();
    model.epsilon = (model.epsilon + model.epsilon.adjoint()).eval();
    for (int r = 0; r < n; ++r)
      for (int c = r + 1; c < n; ++c) {
        model.delta(r, c) = 0.35 * rng.complex_normal();
        model.delta(c, r) = model.delta(r, c);
      }
    model.mode_sites = {0, 0, 1, 1};
    const Eigen::MatrixXd k = flow_generator(model);
    const Eigen::MatrixXd s = (2.0 * k).exp();
    CHECK(symplectic_residual(s) < 1e-8);
    CHECK(std::abs(std::abs(s.determinant()) - 1.0) < 1e-8);
  }
}

TEST_CASE("entropy growth rate equals the classical subsystem exponent") {
  Rng rng(57);
  int tested = 0;
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 6;
    QuadraticBosonModel model;
    model.epsilon = Eigen::MatrixXcd(n, n);
    model.delta = Eigen::MatrixXcd::Zero(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) model.epsilon(r, c) = 0.3 * rng.complex_normal();
    model.epsilon = (model.epsilon + model.epsilon.adjoint()).eval();
    for (int r = 0; r < n; ++r)
      for (int c = r + 1; c < n; ++c) {
        model.delta(r, c) = 0.4 * rng.complex_normal();
        model.delta(c, r) = model.delta(r, c);
      }
    model.mode_sites = {0, 1, 2, 3, 4, 5};

    // Pick the window from the fastest growth rate of the generator.
    Eigen::EigenSolver<Eigen::MatrixXd> es(flow_generator(model));
    const double lam_max = es.eigenvalues().real().maxCoeff();
    if (lam_max < 0.15) continue;
    const double t_window = 18.0 / lam_max;
    const std::vector<int> subset = {0, 1, 2};
    const RateReport rate = entropy_growth_rate(model, subset, t_window, 96);
    if (!rate.linear_regime) continue;
    const double lam = classical_subsystem_exponent(model, subset, t_window);
    CHECK(std::abs(rate.rate - lam) / std::max(lam, 1e-12) < 0.05);
    ++tested;
  }
  CHECK(tested >= 3);
}

TEST_CASE("alpha evolution: trivial cases and the covariance oracle") {
  const int n = 2;
  QuadraticBosonModel model = two_mode_squeezer(0.4);

  // Delta = 0 keeps alpha at zero.
  QuadraticBosonModel passive = model;
  passive.delta.setZero();
  const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(n, n);
  CHECK(evolve_alpha(passive, zero, 1.0, 1e-2).cwiseAbs().maxCoeff() < 1e-14);

  // epsilon = 0 integrates to exactly -i Delta t.
  const Eigen::MatrixXcd alpha = evolve_alpha(model, zero, 0.3, 1e-3);
  CHECK((alpha - cplx(0, -1) * 0.3 * model.delta).cwiseAbs().maxCoeff() < 1e-12);

  // With hopping switched on, alpha tracks the Gaussian pair correlations to
  // first order in t.
  QuadraticBosonModel full = model;
  full.epsilon << 0.9, cplx(0.2, 0.1), cplx(0.2, -0.1), 1.3;
  const double t = 1e-2 / 0.4;  // |Delta| t = 1e-2
  const Eigen::MatrixXcd alpha_t = evolve_alpha(full, zero, t, t / 64);
  const CovarianceState evolved = evolve_covariance(full, vacuum_covariance(n), t);
  const Eigen::MatrixXcd pair = pair_correlations(evolved);
  const double rel = (alpha_t - pair).cwiseAbs().maxCoeff() / pair.cwiseAbs().maxCoeff();
  CHECK(rel < 1e-3);
}

TEST_CASE("chain-built model: hermiticity, identity subtraction, delta bookkeeping") {
  const int n = 5;
  const MpsChain chain = MpsChain::random(n, 2, uniform_profile(n, 2, 2), 61);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", n);
  const DensityOfStates dos = solve_density_of_states(2, 2, 30);
  auto dos_fn = [&](int sep) { return sep <= dos.j_max ? dos.rho(sep - 1) : dos.rho_infinity; };
  const QuadraticBosonModel model = build_model(chain, h, dos_fn);

  CHECK((model.epsilon - model.epsilon.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(static_cast<int>(model.mode_sites.size()) == model.n_modes());

  // H = E * identity: epsilon collapses onto E * identity (the free part of
  // the effective Hamiltonian vanishes) and delta vanishes.
  LocalHamiltonian ident(n, 2);
  const double e_val = 0.7;
  for (int i = 0; i < n; ++i)
    ident.add_one_site(i, (e_val / n) * Eigen::MatrixXcd::Identity(2, 2));
  const QuadraticBosonModel trivial = build_model(chain, ident, dos_fn);
  CHECK((trivial.epsilon -
         e_val * Eigen::MatrixXcd::Identity(trivial.n_modes(), trivial.n_modes()))
            .cwiseAbs()
            .maxCoeff() < 1e-10);
  CHECK(std::abs(trivial.e0 - e_val) < 1e-12);
  CHECK(trivial.delta.cwiseAbs().maxCoeff() < 1e-10);

  // Suppressed vs naive delta differ exactly by rho(|j-i|).
  auto flat = [](int) { return 1.0; };
  const QuadraticBosonModel naive = build_model(chain, h, flat);
  const ModeTable table(chain);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int mu = 0; mu < table.count(i); ++mu)
        for (int nu = 0; nu < table.count(j); ++nu) {
          const int gi = table.global_index(i, mu);
          const int gj = table.global_index(j, nu);
          CHECK(std::abs(model.delta(gi, gj) * dos_fn(j - i) - naive.delta(gi, gj)) < 1e-13);
        }
}

TEST_CASE("gaussian entropy rejects sub-vacuum blocks") {
  CovarianceState bad = vacuum_covariance(2);
  bad.sigma(0, 0) = 0.2;
  bad.sigma(2, 2) = 0.2;
  CHECK_THROWS_AS(gaussian_entropy(bad, {0}), NumericalConsistencyError);
  CHECK_THROWS_AS(gaussian_entropy(vacuum_covariance(2), {}), ArgumentError);
}

}  // TEST_SUITE
