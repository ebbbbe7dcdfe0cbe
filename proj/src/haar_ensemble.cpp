#include "mpsflow/haar_ensemble.hpp"

#include <cmath>

#include "mpsflow/parallel.hpp"
#include "mpsflow/rng.hpp"
#include "mpsflow/dense.hpp"

namespace mpsflow {

namespace {

Eigen::Matrix2d rank_one(double a, double b, double r0, double r1) {
  Eigen::Matrix2d m;
  m << a * r0, a * r1, b * r0, b * r1;
  return m;
}

}  // namespace

EnsembleSpectrum reduced_operators(int d, int bond) {
  if (d < 2 || bond < 2) throw ArgumentError("reduced_operators: requires d >= 2 and D >= 2");
  const double dd = d;
  const double db = bond;
  const double denom = dd * dd * db * db - 1.0;

  EnsembleSpectrum out;
  out.d = d;
  out.bond = bond;

  out.transfer.d = out.o1.d = out.o2_summed.d = d;
  out.transfer.bond = out.o1.bond = out.o2_summed.bond = bond;

  out.transfer.m << dd * (dd * db * db - 1.0), dd * db * (dd - 1.0), db * (dd - 1.0),
      dd * db * db - 1.0;
  out.transfer.m /= denom;

  out.o1.m = rank_one(-dd, dd * db, 1.0, db) / denom;

  // Column vector of the mode-summed two-derivative operator: (dD,
  // d D^2 (d-1) - 1), scaled by D. The printed source is ambiguous here; this
  // reading is fixed by the Monte-Carlo verifier and by consistency with the
  // diagonal moment formula.
  out.o2_summed.m = db * rank_one(dd * db, dd * db * db * (dd - 1.0) - 1.0, 1.0, db) / denom;

  out.lambda = dd * (db * db - 1.0) / denom;
  out.xi = -1.0 / std::log(out.lambda);

  const double pden = dd * db * db + 1.0;
  out.p = rank_one(dd * db, 1.0, db, 1.0) / pden;
  out.q_proj = rank_one(-1.0, db, -1.0, dd * db) / pden;

  const double tol = 1e-12;
  const Eigen::Matrix2d ident = Eigen::Matrix2d::Identity();
  if (((out.p + out.q_proj) - ident).cwiseAbs().maxCoeff() > tol ||
      (out.p * out.q_proj).cwiseAbs().maxCoeff() > tol ||
      (out.p * out.p - out.p).cwiseAbs().maxCoeff() > tol ||
      (out.transfer.m - (out.p + out.lambda * out.q_proj)).cwiseAbs().maxCoeff() > tol)
    throw NumericalConsistencyError("reduced_operators: spectral identities violated");
  if (!(out.lambda > 0.0 && out.lambda < 1.0))
    throw NumericalConsistencyError("reduced_operators: subleading eigenvalue out of range");
  return out;
}

OverlapMoments overlap_moments(int d, int bond, int j_max, MomentVariant variant) {
  if (j_max < 2) throw ArgumentError("overlap_moments: j_max must be at least 2");
  const EnsembleSpectrum spec = reduced_operators(d, bond);
  const double dd = d, db = bond;
  const double lambda = spec.lambda;

  OverlapMoments out;
  out.d = d;
  out.bond = bond;
  out.j_max = j_max;
  out.variant = variant;
  out.i.resize(j_max, j_max);

  for (int y = 1; y <= j_max; ++y)
    for (int j = 1; j <= j_max; ++j) {
      double value = 0.0;
      const int far = std::max(y, j);
      if (variant == MomentVariant::exact) {
        if (y != j) {
          const double pref = std::pow(db, 4) * std::pow(db * db - 1.0, 2) * dd *
                              (dd * dd - 1.0) /
                              ((dd * db * db + 1.0) * std::pow(dd * dd * db * db - 1.0, 2));
          value = std::pow(lambda, far - 1) * pref;
        } else {
          const double head = std::pow(db * db * (dd + 1.0) / (dd * db * db + 1.0), 2);
          const double tail = dd * (dd + 1.0) * std::pow(db, 4) * (db * db - 1.0) /
                              (dd * db * db + 1.0) *
                              (1.0 / (dd * db * db + 1.0) - 1.0 / (dd * dd * db * db - 1.0));
          value = head + std::pow(lambda, y - 1) * tail;
        }
      } else {
        if (y != j) {
          value = db * db * (dd * dd - 1.0) / std::pow(dd, far + 3);
        } else {
          value = 1.0 + (dd * dd - 1.0) * db * db / (dd * dd * std::pow(dd, y - 1));
        }
      }
      out.i(y - 1, j - 1) = value;
    }
  return out;
}

double ring_moment(int d, int bond, int y, int j, int n_sites) {
  if (y < 1 || j < 1) throw ArgumentError("ring_moment: positions start at 1");
  if (n_sites <= std::max(y, j) + 1) throw ArgumentError("ring_moment: ring too short");
  const EnsembleSpectrum spec = reduced_operators(d, bond);
  const double n_modes = (d - 1.0) * bond * bond;

  auto power = [&](int k) {
    Eigen::Matrix2d acc = Eigen::Matrix2d::Identity();
    for (int i = 0; i < k; ++i) acc = acc * spec.transfer.m;
    return acc;
  };

  Eigen::Matrix2d chain;
  if (y == j) {
    chain = spec.o2_summed.m * power(y - 1) * spec.o2_summed.m * power(n_sites - 1 - y);
  } else {
    const int a = std::min(y, j), b = std::max(y, j);
    chain = spec.o2_summed.m * power(a - 1) * spec.o1.m * power(b - a - 1) *
            (n_modes * spec.o1.m) * power(n_sites - 1 - b);
  }
  return chain.trace();
}

DensityOfStates solve_density_of_states(int d, int bond, int j_max, MomentVariant variant) {
  if (j_max < 4) throw ArgumentError("solve_density_of_states: j_max too small");

  auto solve = [&](int jm) {
    const OverlapMoments mom = overlap_moments(d, bond, jm, variant);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(jm);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(mom.i);
    if (!lu.isInvertible())
      throw SolverError("solve_density_of_states: truncated moment matrix is singular");
    const Eigen::VectorXd w = lu.solve(ones);
    return std::make_pair(w, (mom.i * w - ones).cwiseAbs().maxCoeff());
  };

  const auto [w, residual] = solve(j_max);
  const auto [w2, residual2] = solve(2 * j_max);
  (void)residual2;

  DensityOfStates out;
  out.j_max = j_max;
  out.residual = residual;
  out.rho.resize(j_max);
  for (int k = 0; k < j_max; ++k) {
    if (!(w(k) > 0.0))
      throw SolverError("solve_density_of_states: nonpositive weight in solution");
    out.rho(k) = 1.0 / w(k);
  }
  double drift = 0.0;
  for (int k = 0; k < j_max / 2; ++k) {
    const double rho2 = 1.0 / w2(k);
    drift = std::max(drift, std::abs(rho2 - out.rho(k)) / std::abs(out.rho(k)));
  }
  out.truncation_drift = drift;
  const int tail = std::max(1, j_max / 8);
  double acc = 0.0;
  for (int k = j_max - tail; k < j_max; ++k) acc += out.rho(k);
  out.rho_infinity = acc / tail;
  return out;
}

namespace {

struct QuadCoords {
  double on_i = 0.0;
  double on_s = 0.0;
};

// Coordinates of a quad-space matrix W (layout (x1 x2) x (x3 x4)) in the
// non-orthogonal (|I>, |S>) basis, via the 2x2 Gram solve.
QuadCoords quad_coordinates(const Eigen::MatrixXcd& w, int bond) {
  Eigen::VectorXcd iota = Eigen::VectorXcd::Zero(bond * bond);
  for (int a = 0; a < bond; ++a) iota(a * bond + a) = 1.0;
  const double braket_i = (iota.adjoint() * w * iota).real().value();
  const double braket_s = w.real().trace();
  const double db = bond;
  Eigen::Matrix2d gram;
  gram << db * db, db, db, db * db;
  const Eigen::Vector2d rhs(braket_i, braket_s);
  const Eigen::Vector2d coords = gram.fullPivLu().solve(rhs);
  return {coords(0), coords(1)};
}

struct ReducedAccumulator {
  // Batch means of the coordinate actions on |I> and |S| per operator.
  std::vector<Eigen::Matrix2d> batch;
  Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
  long count = 0;

  void add(const Eigen::Matrix2d& m) {
    acc += m;
    ++count;
  }
  void flush() {
    batch.push_back(acc / count);
    acc.setZero();
    count = 0;
  }
  McEntryTable table() const {
    McEntryTable t;
    t.mean.setZero();
    for (const auto& b : batch) t.mean += b;
    t.mean /= batch.size();
    Eigen::Matrix2d var = Eigen::Matrix2d::Zero();
    for (const auto& b : batch) var += (b - t.mean).cwiseAbs2();
    t.std_error = (var / (batch.size() * (batch.size() - 1.0))).cwiseSqrt();
    return t;
  }
};

double max_sigma(const McEntryTable& table, const Eigen::Matrix2d& expected) {
  double worst = 0.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      worst = std::max(worst,
                       std::abs(table.mean(r, c) - expected(r, c)) / (table.std_error(r, c) + 1e-300));
  return worst;
}

}  // namespace

McReducedReport mc_verify_reduced(int d, int bond, long samples, std::uint64_t seed, int batches) {
  if (bond < 2) throw ArgumentError("mc_verify_reduced: requires D >= 2");
  if (samples < 10000) throw ArgumentError("mc_verify_reduced: needs at least 1e4 samples");
  const EnsembleSpectrum spec = reduced_operators(d, bond);
  const int db2 = bond * bond;
  const long per_batch = samples / batches;

  Eigen::VectorXcd iota = Eigen::VectorXcd::Zero(db2);
  for (int a = 0; a < bond; ++a) iota(a * bond + a) = 1.0;

  ReducedAccumulator acc_t, acc_o1, acc_o2;
  double fixed_point_residual = 0.0;

  // Probe a fixed derivative mode: frame column r0 = bond (first tangent
  // column), right-bond selector 0.
  const int probe_col = bond;
  const int probe_sel = 0;

  Rng rng(seed);
  for (int b = 0; b < batches; ++b) {
    rng.reseed(Rng::child_seed(seed, b));
    for (long s = 0; s < per_batch; ++s) {
      const Eigen::MatrixXcd u = rng.haar_unitary(d * bond);
      const Eigen::MatrixXcd a = u.leftCols(bond);

      Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(db2, db2);
      for (int n = 0; n < d; ++n) {
        const Eigen::MatrixXcd an = a.middleRows(n * bond, bond);
        // (x1 x2) row pairing: kron over the two bond copies.
        for (int x1 = 0; x1 < bond; ++x1)
          for (int x2 = 0; x2 < bond; ++x2)
            for (int y1 = 0; y1 < bond; ++y1)
              for (int y2 = 0; y2 < bond; ++y2)
                t(x1 * bond + x2, y1 * bond + y2) += an(x1, y1) * std::conj(an(x2, y2));
      }

      fixed_point_residual = std::max(
          fixed_point_residual, ((iota.transpose() * t).transpose() - iota).cwiseAbs().maxCoeff());

      auto coords_matrix = [&](const Eigen::MatrixXcd& op) {
        const Eigen::VectorXcd on_i = op * iota;
        Eigen::Matrix2d m;
        // Action on |I>: W = (op iota)(op iota)†; on |S>: W = op op†.
        const QuadCoords ci = quad_coordinates(on_i * on_i.adjoint(), bond);
        const QuadCoords cs = quad_coordinates(op * op.adjoint(), bond);
        m << ci.on_i, cs.on_i, ci.on_s, cs.on_s;
        return m;
      };

      acc_t.add(coords_matrix(t));

      // One-derivative operator at a fixed mode.
      const Eigen::VectorXcd col = std::sqrt(static_cast<double>(bond)) * u.col(probe_col);
      Eigen::MatrixXcd o1 = Eigen::MatrixXcd::Zero(db2, db2);
      for (int n = 0; n < d; ++n) {
        const Eigen::VectorXcd bn = col.segment(n * bond, bond);
        const Eigen::MatrixXcd an = a.middleRows(n * bond, bond);
        for (int x1 = 0; x1 < bond; ++x1)
          for (int x2 = 0; x2 < bond; ++x2)
            for (int y2 = 0; y2 < bond; ++y2)
              o1(x1 * bond + x2, probe_sel * bond + y2) += bn(x1) * std::conj(an(x2, y2));
      }
      acc_o1.add(coords_matrix(o1));

      // Two-derivative operator summed over the ket mode, bra mode fixed.
      Eigen::MatrixXcd o2 = Eigen::MatrixXcd::Zero(db2, db2);
      const Eigen::VectorXcd bra_col = std::sqrt(static_cast<double>(bond)) * u.col(probe_col);
      Eigen::MatrixXcd w_i = Eigen::MatrixXcd::Zero(db2, db2);
      Eigen::MatrixXcd w_s = Eigen::MatrixXcd::Zero(db2, db2);
      for (int mu_col = bond; mu_col < d * bond; ++mu_col)
        for (int mu_sel = 0; mu_sel < bond; ++mu_sel) {
          const Eigen::VectorXcd ket_col = std::sqrt(static_cast<double>(bond)) * u.col(mu_col);
          o2.setZero();
          for (int n = 0; n < d; ++n) {
            const Eigen::VectorXcd kn = ket_col.segment(n * bond, bond);
            const Eigen::VectorXcd bn = bra_col.segment(n * bond, bond);
            for (int x1 = 0; x1 < bond; ++x1)
              for (int x2 = 0; x2 < bond; ++x2)
                o2(x1 * bond + x2, mu_sel * bond + probe_sel) += kn(x1) * std::conj(bn(x2));
          }
          const Eigen::VectorXcd on_i = o2 * iota;
          w_i += on_i * on_i.adjoint();
          w_s += o2 * o2.adjoint();
        }
      Eigen::Matrix2d m2;
      const QuadCoords ci = quad_coordinates(w_i, bond);
      const QuadCoords cs = quad_coordinates(w_s, bond);
      m2 << ci.on_i, cs.on_i, ci.on_s, cs.on_s;
      acc_o2.add(m2);
    }
    acc_t.flush();
    acc_o1.flush();
    acc_o2.flush();
  }

  McReducedReport report;
  report.d = d;
  report.bond = bond;
  report.samples = per_batch * batches;
  report.transfer = acc_t.table();
  report.o1 = acc_o1.table();
  report.o2_summed = acc_o2.table();
  report.fixed_point_residual = fixed_point_residual;
  report.max_sigma_transfer = max_sigma(report.transfer, spec.transfer.m);
  report.max_sigma_o1 = max_sigma(report.o1, spec.o1.m);
  report.max_sigma_o2 = max_sigma(report.o2_summed, spec.o2_summed.m);

  // Alternative (misprint) reading of the two-derivative column.
  const double dd = d, dbb = bond;
  const double denom = dd * dd * dbb * dbb - 1.0;
  const Eigen::Matrix2d alt =
      dbb * rank_one(dd * dbb * dbb * (dd - 1.0), -1.0, 1.0, dbb) / denom;
  report.o2_alternative_sigma = max_sigma(report.o2_summed, alt);
  return report;
}

McMomentsReport mc_verify_moments(int d, int bond, int n_sites, int y, int j, long samples,
                                  std::uint64_t seed, int batches) {
  if (y < 1 || j < 1 || y >= n_sites - 1 || j >= n_sites - 1)
    throw ArgumentError("mc_verify_moments: positions must fit in the ring");
  const long per_batch = std::max<long>(1, samples / batches);
  const int db2 = bond * bond;

  const OverlapMoments closed = overlap_moments(d, bond, std::max({y, j, 2}) + 1);

  McMomentsReport report;
  report.d = d;
  report.bond = bond;
  report.n_sites = n_sites;
  report.y = y;
  report.j = j;
  report.closed_form = closed.i(y - 1, j - 1);
  report.ring_exact = ring_moment(d, bond, y, j, n_sites);

  struct ModeIdx {
    int col, sel;
  };
  std::vector<ModeIdx> modes;
  for (int c = bond; c < d * bond; ++c)
    for (int s = 0; s < bond; ++s) modes.push_back({c, s});

  // Two probe choices of the external (bra) indices for the index-independence
  // check: eta at site 0, delta at site y.
  const std::vector<std::pair<ModeIdx, ModeIdx>> probes = {
      {modes.front(), modes.front()}, {modes.back(), modes[modes.size() / 2]}};

  std::vector<std::vector<double>> batch_estimates(probes.size());
  std::vector<double> batch_norms;

  Rng rng(seed);
  for (int b = 0; b < batches; ++b) {
    rng.reseed(Rng::child_seed(seed, 1000 + b));
    std::vector<KahanSum> sums(probes.size());
    KahanSum norm_sum;
    for (long s = 0; s < per_batch; ++s) {
      // Independent Haar frames on the ring.
      std::vector<Eigen::MatrixXcd> frames(n_sites);
      for (int i = 0; i < n_sites; ++i) frames[i] = rng.haar_unitary(d * bond);

      auto site_tensor = [&](int i) { return frames[i].leftCols(bond); };
      auto deriv_tensor = [&](int i, const ModeIdx& m) {
        Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(d * bond, bond);
        t.col(m.sel) = std::sqrt(static_cast<double>(bond)) * frames[i].col(m.col);
        return t;
      };
      // Doubled site matrix M = sum_n ket_n ⊗ conj(bra_n).
      auto doubled = [&](const Eigen::MatrixXcd& ket, const Eigen::MatrixXcd& bra) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(db2, db2);
        for (int n = 0; n < d; ++n) {
          const Eigen::MatrixXcd kn = ket.middleRows(n * bond, bond);
          const Eigen::MatrixXcd bn = bra.middleRows(n * bond, bond);
          for (int x1 = 0; x1 < bond; ++x1)
            for (int x2 = 0; x2 < bond; ++x2)
              for (int y1 = 0; y1 < bond; ++y1)
                for (int y2 = 0; y2 < bond; ++y2)
                  m(x1 * bond + x2, y1 * bond + y2) += kn(x1, y1) * std::conj(bn(x2, y2));
        }
        return m;
      };

      std::vector<Eigen::MatrixXcd> plain(n_sites);
      for (int i = 0; i < n_sites; ++i) plain[i] = doubled(site_tensor(i), site_tensor(i));

      // Segment products between the marked sites 0 < y < j (or y == j).
      auto product_range = [&](int from, int to) {  // [from, to)
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(db2, db2);
        for (int i = from; i < to; ++i) acc = acc * plain[i];
        return acc;
      };

      const int site_a = std::min(y, j), site_b = std::max(y, j);
      const Eigen::MatrixXcd mid1 = product_range(1, site_a);
      const Eigen::MatrixXcd mid2 = product_range(site_a + 1, site_b);
      const Eigen::MatrixXcd wrap = product_range(site_b + 1, n_sites);

      for (std::size_t pi = 0; pi < probes.size(); ++pi) {
        const auto& [eta, delta] = probes[pi];
        double total = 0.0;
        if (y == j) {
          for (const auto& mu : modes) {
            const Eigen::MatrixXcd m0 = doubled(deriv_tensor(0, mu), deriv_tensor(0, eta));
            for (const auto& nu : modes) {
              const Eigen::MatrixXcd my = doubled(deriv_tensor(y, nu), deriv_tensor(y, delta));
              const cplx z = (m0 * mid1 * my * wrap).trace();
              total += std::norm(z);
            }
          }
        } else {
          // Bra derivative at y, ket derivative at j.
          Eigen::MatrixXcd ma, mb;
          if (y < j)
            ma = doubled(site_tensor(y), deriv_tensor(y, delta));
          else
            mb = doubled(site_tensor(y), deriv_tensor(y, delta));
          for (const auto& mu : modes) {
            const Eigen::MatrixXcd m0 = doubled(deriv_tensor(0, mu), deriv_tensor(0, eta));
            for (const auto& nu : modes) {
              if (y < j)
                mb = doubled(deriv_tensor(j, nu), site_tensor(j));
              else
                ma = doubled(deriv_tensor(j, nu), site_tensor(j));
              const cplx z = (m0 * mid1 * ma * mid2 * mb * wrap).trace();
              total += std::norm(z);
            }
          }
        }
        sums[pi].add(total);
      }

      // Norm of the bra vector (second-tangent state) for the first probe.
      {
        const auto& [eta, delta] = probes[0];
        const Eigen::MatrixXcd m0 = doubled(deriv_tensor(0, eta), deriv_tensor(0, eta));
        const Eigen::MatrixXcd my = doubled(deriv_tensor(y, delta), deriv_tensor(y, delta));
        const Eigen::MatrixXcd before_y = product_range(1, y);
        const Eigen::MatrixXcd after_y = product_range(y + 1, n_sites);
        norm_sum.add((m0 * before_y * my * after_y).trace().real());
      }
    }
    for (std::size_t pi = 0; pi < probes.size(); ++pi)
      batch_estimates[pi].push_back(sums[pi].value() / per_batch);
    batch_norms.push_back(norm_sum.value() / per_batch);
  }

  auto mean_se = [&](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / (xs.size() * (xs.size() - 1.0)));
    return std::make_pair(mean, se);
  };

  const auto [est0, se0] = mean_se(batch_estimates[0]);
  const auto [est1, se1] = mean_se(batch_estimates[1]);
  const auto [norm_mean, norm_se] = mean_se(batch_norms);

  report.samples = per_batch * batches;
  report.estimate = est0;
  report.std_error = se0;
  report.norm_estimate = norm_mean;
  report.norm_std_error = norm_se;
  report.index_spread_sigma = std::abs(est0 - est1) / std::sqrt(se0 * se0 + se1 * se1 + 1e-300);
  return report;
}

}  // namespace mpsflow
