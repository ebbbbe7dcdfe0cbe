#include <doctest.h>

#include <cmath>

#include "mpsflow/dynamics.hpp"
#include "mpsflow/lyapunov.hpp"

using namespace mpsflow;

namespace {

Eigen::VectorXcd dense_velocity(const MpsChain& chain, const TangentCoords& v) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(chain.to_dense().dim());
  const ModeTable table(chain);
  for (int i = 0; i < chain.size(); ++i)
    for (int mu = 0; mu < table.count(i); ++mu)
      out += v.x[i](mu) * tangent_vector(chain, i, mu).amplitudes;
  return out;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("vector field vanishes on a representable eigenstate") {
  // Classical Ising (no transverse field): computational product states are
  // exact eigenstates at any bond dimension.
  const int n = 6;
  const LocalHamiltonian h = LocalHamiltonian::ising(n, 1.0, 0.0, 0.5);
  std::vector<Eigen::VectorXcd> local(n, (Eigen::VectorXcd(2) << 1.0, 0.0).finished());
  const MpsChain chain = MpsChain::product_state(2, local);
  const TangentCoords v = tdvp_vector_field(chain, h);
  CHECK(v.norm() < 1e-10);
}

TEST_CASE("vector field is gauge consistent as a dense velocity") {
  const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 2), 5);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", 6);
  const Eigen::VectorXcd v0 = dense_velocity(chain, tdvp_vector_field(chain, h));
  Rng rng(77);
  for (int bond : {2, 4}) {
    const MpsChain rotated = chain.gauge_transformed(bond, rng.haar_unitary(chain.bond_dim(bond)));
    const Eigen::VectorXcd v1 = dense_velocity(rotated, tdvp_vector_field(rotated, h));
    CHECK((v0 - v1).norm() < 1e-9);
  }
  // The dense velocity is orthogonal to the state (norm is conserved exactly).
  CHECK(std::abs(chain.to_dense().amplitudes.dot(v0)) < 1e-10);
}

TEST_CASE("dense and transfer routes of the vector field agree") {
  const MpsChain chain = MpsChain::random(7, 2, uniform_profile(7, 2, 3), 11);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", 7);
  const TangentCoords dense = tdvp_vector_field(chain, h, kDefaultDenseCap);
  const TangentCoords transfer = tdvp_vector_field(chain, h, /*cap=*/16);  // force transfer path
  for (int i = 0; i < chain.size(); ++i)
    CHECK((dense.x[i] - transfer.x[i]).norm() < 1e-9);
}

TEST_CASE("chart solver: origin velocity matches the direct formula") {
  const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 2), 21);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", 6);
  const ChartSolver solver(chain, h);
  const Eigen::VectorXcd at_origin = solver.velocity(Eigen::VectorXcd::Zero(solver.n_modes()));
  const Eigen::VectorXcd direct = solver.from_coords(tdvp_vector_field(chain, h));
  CHECK((at_origin - direct).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("chart solver state matches thouless retraction") {
  const MpsChain chain = MpsChain::random(5, 2, uniform_profile(5, 2, 2), 31);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", 5);
  const ChartSolver solver(chain, h);
  Rng rng(3);
  Eigen::VectorXcd x(solver.n_modes());
  for (int k = 0; k < x.size(); ++k) x(k) = 0.1 * rng.complex_normal();
  const Eigen::VectorXcd via_solver = solver.state(x);
  const Eigen::VectorXcd via_update =
      thouless_update(chain, solver.to_coords(x)).to_dense().amplitudes;
  CHECK((via_solver - via_update).norm() < 1e-12);
}

TEST_CASE("chart jacobian matches finite differences of the state") {
  const MpsChain chain = MpsChain::random(4, 2, uniform_profile(4, 2, 2), 41);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", 4);
  const ChartSolver solver(chain, h);
  const int n = solver.n_modes();
  Rng rng(9);
  Eigen::VectorXcd x(n);
  for (int k = 0; k < n; ++k) x(k) = 0.05 * rng.complex_normal();

  Eigen::MatrixXcd jh, ja;
  solver.jacobians(x, jh, ja);
  const double step = 1e-6;
  for (int mode : {0, n / 2, n - 1}) {
    Eigen::VectorXcd dx = Eigen::VectorXcd::Zero(n);
    dx(mode) = step;
    // Holomorphic + antiholomorphic combination equals the real derivative.
    const Eigen::VectorXcd fd_p = (solver.state(x + dx) - solver.state(x - dx)) / (2 * step);
    CHECK((fd_p - (jh.col(mode) + ja.col(mode))).norm() < 1e-7);
    dx(mode) = cplx(0, step);
    const Eigen::VectorXcd fd_q = (solver.state(x + dx) - solver.state(x - dx)) / (2 * step);
    CHECK((fd_q - cplx(0, 1) * (jh.col(mode) - ja.col(mode))).norm() < 1e-7);
  }
}

TEST_CASE("zero Hamiltonian gives the identity trajectory") {
  const MpsChain chain = MpsChain::random(5, 2, uniform_profile(5, 2, 2), 3);
  const LocalHamiltonian h(5, 2);
  const Trajectory traj = tdvp_evolve(chain, h, 0.1, 0.02);
  const Eigen::VectorXcd psi0 = chain.to_dense().amplitudes;
  CHECK((traj.snapshots.back().to_dense().amplitudes - psi0).norm() < 1e-12);
}

TEST_CASE("energy is conserved to high order over single steps") {
  const MpsChain chain = MpsChain::random(6, 2, uniform_profile(6, 2, 2), 13);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", 6);
  const double e0 = sandwich(chain, {}, {}, &h).real();
  std::vector<double> errs;
  for (double dt : {2e-2, 1e-2}) {
    const Trajectory traj = tdvp_evolve(chain, h, dt, dt);
    errs.push_back(std::abs(traj.energies.back() - e0));
  }
  // One RK4 step on the exact chart field: local energy defect ~ dt^5.
  const double order = std::log(errs[0] / errs[1]) / std::log(2.0);
  CHECK(order > 3.5);
}

TEST_CASE("full bond dimension TDVP reproduces exact evolution") {
  const int n = 6;
  const MpsChain chain = MpsChain::random(n, 2, uniform_profile(n, 2, 8), 17);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", n);
  const Trajectory traj = tdvp_evolve(chain, h, 0.5, 2e-3, 50);
  const ExactPropagator prop(h);
  const Eigen::VectorXcd psi0 = chain.to_dense().amplitudes;
  const Eigen::VectorXcd exact = prop.evolve(psi0, 0.5);
  const double f = fidelity(traj.snapshots.back().to_dense().amplitudes, exact);
  CHECK(f >= 1.0 - 1e-6);
  // Energy drift stays at integrator precision.
  CHECK(std::abs(traj.energies.back() - traj.energies.front()) < 1e-8 * prop.spectral_norm());
}

TEST_CASE("exact propagator: identity at t=0, unitary, Rabi half period") {
  LocalHamiltonian h(1, 2);
  h.add_one_site(0, pauli_x());
  const ExactPropagator prop(h);
  Eigen::VectorXcd psi(2);
  psi << 1.0, 0.0;
  CHECK((prop.evolve(psi, 0.0) - psi).norm() < 1e-14);
  const Eigen::VectorXcd rotated = prop.evolve(psi, M_PI / 2.0);
  CHECK(std::abs(rotated.norm() - 1.0) < 1e-12);
  // exp(-i X pi/2)|0> = -i |1>.
  CHECK(std::abs(rotated(0)) < 1e-12);
  CHECK(std::abs(rotated(1) - cplx(0, -1)) < 1e-12);
}

TEST_CASE("lyapunov smoke run: pairing, volume identities, monotone segments") {
  const int n = 5;
  const MpsChain chain = MpsChain::random(n, 2, uniform_profile(n, 2, 2), 23);
  const LocalHamiltonian h = LocalHamiltonian::preset("ising_chaotic", n);
  LyapunovOptions opt;
  opt.t_total = 12.0;
  opt.dt = 0.02;
  opt.qr_interval = 5;
  const LyapunovResult result = lyapunov_spectrum(chain, h, opt);

  const int dim = static_cast<int>(result.exponents.size());
  CHECK(dim == 2 * ModeTable(chain).total());
  // Short run: loose symplectic checks only.
  CHECK(std::abs(result.exponents.sum()) < 0.2);
  double pairing = 0.0;
  for (int i = 0; i < dim / 2; ++i)
    pairing = std::max(pairing, std::abs(result.exponents(i) + result.exponents(dim - 1 - i)));
  CHECK(pairing < 0.4);

  // Full-segment exponent sums the leading expanding frame columns; it can
  // differ from the sorted positive sum by column-ordering noise near zero.
  const double full = subsystem_exponent(result, {0, n - 1});
  CHECK(full == doctest::Approx(result.ks_entropy).epsilon(0.01));
  const double left2 = subsystem_exponent(result, {0, 1});
  const double left4 = subsystem_exponent(result, {0, 3});
  CHECK(left2 <= left4 + 0.05);
  CHECK(left4 <= full + 0.05);
}

}  // TEST_SUITE
