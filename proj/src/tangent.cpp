#include "mpsflow/tangent.hpp"

#include <cmath>

namespace mpsflow {

ModeTable::ModeTable(const MpsChain& chain) : d(chain.phys_dim()) {
  offsets.resize(chain.size() + 1, 0);
  for (int i = 0; i < chain.size(); ++i)
    offsets[i + 1] = offsets[i] + mode_count(chain.site(i));
}

int ModeTable::site_of(int global) const {
  for (int i = 0; i + 1 < static_cast<int>(offsets.size()); ++i)
    if (global < offsets[i + 1]) return i;
  throw ArgumentError("mode index out of range");
}

TangentCoords TangentCoords::zero(const MpsChain& chain) {
  TangentCoords t;
  t.x.resize(chain.size());
  for (int i = 0; i < chain.size(); ++i)
    t.x[i] = Eigen::VectorXcd::Zero(mode_count(chain.site(i)));
  return t;
}

double TangentCoords::norm() const {
  double s = 0.0;
  for (const auto& v : x) s += v.squaredNorm();
  return std::sqrt(s);
}

Eigen::MatrixXcd env_inverse_sqrt(const MpsChain& chain, int site, ConditioningReport* report) {
  const Eigen::MatrixXcd& gamma = chain.environment(site + 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gamma);
  constexpr double kFloor = 1e-12;
  Eigen::VectorXd vals = es.eigenvalues();
  if (report) report->min_env_eigenvalue = std::min(report->min_env_eigenvalue, vals.minCoeff());
  Eigen::VectorXd inv_sqrt(vals.size());
  for (int k = 0; k < vals.size(); ++k) {
    double v = vals(k);
    if (v < kFloor) {
      v = kFloor;
      if (report) report->floored = true;
    }
    inv_sqrt(k) = 1.0 / std::sqrt(v);
  }
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
}

namespace {
std::pair<int, int> unpack_mode(const SiteFrame& s, int mode) {
  const int n = mode_count(s);
  if (mode < 0 || mode >= n) throw ArgumentError("tangent mode out of range");
  return {s.dr + mode / s.dr, mode % s.dr};
}
}  // namespace

Eigen::MatrixXcd b_mode(const MpsChain& chain, int site, int mode, ConditioningReport* report) {
  const SiteFrame& s = chain.site(site);
  const auto [r, b] = unpack_mode(s, mode);
  const Eigen::MatrixXcd isqrt = env_inverse_sqrt(chain, site, report);
  return s.u.col(r) * isqrt.row(b);
}

Eigen::MatrixXcd b_tensor(const MpsChain& chain, int site, const Eigen::VectorXcd& coeffs,
                          ConditioningReport* report) {
  const SiteFrame& s = chain.site(site);
  if (coeffs.size() != mode_count(s)) throw DimensionError("b_tensor: coefficient count");
  const Eigen::MatrixXcd isqrt = env_inverse_sqrt(chain, site, report);
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(s.d * s.dl, s.dr);
  for (int mode = 0; mode < coeffs.size(); ++mode) {
    const auto [r, b] = unpack_mode(s, mode);
    x(r, b) = coeffs(mode);
  }
  // U picks frame columns r >= dr, so A† B = 0 holds by construction.
  return s.u * (x * isqrt);
}

Eigen::MatrixXcd coords_as_site_matrix(const MpsChain& chain, int site,
                                       const Eigen::VectorXcd& coeffs) {
  const SiteFrame& s = chain.site(site);
  if (coeffs.size() != mode_count(s)) throw DimensionError("coords_as_site_matrix: count");
  Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(s.d * s.dl, s.dr);
  for (int mode = 0; mode < coeffs.size(); ++mode) {
    const auto [r, b] = unpack_mode(s, mode);
    x(r, b) = coeffs(mode);
  }
  return x;
}

MpsChain thouless_update(const MpsChain& chain, const TangentCoords& x,
                         ConditioningReport* report) {
  if (static_cast<int>(x.x.size()) != chain.size())
    throw DimensionError("thouless_update: site count");
  std::vector<SiteFrame> frames;
  frames.reserve(chain.size());
  for (int i = 0; i < chain.size(); ++i) {
    SiteFrame s = chain.site(i);
    if (x.x[i].size() > 0 && x.x[i].cwiseAbs().maxCoeff() > 0.0) {
      const Eigen::MatrixXcd b = b_tensor(chain, i, x.x[i], report);
      const Eigen::MatrixXcd a = s.tensor();
      const Eigen::MatrixXcd k = b * a.adjoint() - a * b.adjoint();
      // exp of the anti-Hermitian K through the Hermitian iK.
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(cplx(0, 1) * k);
      Eigen::VectorXcd phases(es.eigenvalues().size());
      for (int t = 0; t < phases.size(); ++t)
        phases(t) = std::exp(cplx(0, -es.eigenvalues()(t)));
      const Eigen::MatrixXcd expk =
          es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
      s.u = expk * s.u;
    }
    frames.push_back(std::move(s));
  }
  return MpsChain::from_frames(chain.phys_dim(), std::move(frames));
}

Eigen::VectorXcd dense_with_insertions(const MpsChain& chain,
                                       const std::map<int, Eigen::MatrixXcd>& replace,
                                       long cap) {
  checked_dense_dim(std::vector<int>(chain.size(), chain.phys_dim()), cap);
  const int d = chain.phys_dim();
  Eigen::MatrixXcd prefix = Eigen::MatrixXcd::Identity(1, 1);
  for (int i = 0; i < chain.size(); ++i) {
    const SiteFrame& s = chain.site(i);
    const auto it = replace.find(i);
    const Eigen::MatrixXcd& t = it != replace.end() ? it->second : s.tensor();
    if (t.rows() != static_cast<long>(d) * s.dl || t.cols() != s.dr)
      throw DimensionError("dense_with_insertions: replacement shape");
    Eigen::MatrixXcd next(prefix.rows() * d, s.dr);
    for (int n = 0; n < d; ++n) {
      const Eigen::MatrixXcd block = prefix * t.middleRows(n * s.dl, s.dl);
      for (long r = 0; r < prefix.rows(); ++r) next.row(r * d + n) = block.row(r);
    }
    prefix = std::move(next);
  }
  return prefix.col(0);
}

DenseState tangent_vector(const MpsChain& chain, int site, int mode, long cap) {
  DenseState out;
  out.slot_dims.assign(chain.size(), chain.phys_dim());
  out.amplitudes = dense_with_insertions(chain, {{site, b_mode(chain, site, mode)}}, cap);
  return out;
}

DenseState second_tangent_vector(const MpsChain& chain, int i, int mu, int j, int nu, long cap) {
  if (i >= j) throw ArgumentError("second_tangent_vector: requires i < j");
  DenseState out;
  out.slot_dims.assign(chain.size(), chain.phys_dim());
  out.amplitudes = dense_with_insertions(
      chain, {{i, b_mode(chain, i, mu)}, {j, b_mode(chain, j, nu)}}, cap);
  return out;
}

namespace {

const Eigen::MatrixXcd& pick(const MpsChain& chain, const std::map<int, Eigen::MatrixXcd>& repl,
                             int site, Eigen::MatrixXcd& scratch) {
  const auto it = repl.find(site);
  if (it != repl.end()) return it->second;
  scratch = chain.site(site).tensor();
  return scratch;
}

// Plain transfer step: X <- sum_n bra_n† X ket_n.
Eigen::MatrixXcd transfer_plain(const Eigen::MatrixXcd& bra,
                                const Eigen::MatrixXcd& ket, const Eigen::MatrixXcd& x, int dl_bra,
                                int dl_ket, int d) {
  const int dr_bra = static_cast<int>(bra.cols());
  const int dr_ket = static_cast<int>(ket.cols());
  Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(dr_bra, dr_ket);
  for (int n = 0; n < d; ++n)
    next.noalias() +=
        bra.middleRows(n * dl_bra, dl_bra).adjoint() * x * ket.middleRows(n * dl_ket, dl_ket);
  return next;
}

}  // namespace

cplx sandwich(const MpsChain& chain, const std::map<int, Eigen::MatrixXcd>& bra_replace,
              const std::map<int, Eigen::MatrixXcd>& ket_replace, const LocalHamiltonian* op) {
  const int d = chain.phys_dim();
  const int n_sites = chain.size();

  auto run_term = [&](int term_site, int span, const Eigen::MatrixXcd* term) -> cplx {
    Eigen::MatrixXcd x = Eigen::MatrixXcd::Identity(1, 1);
    Eigen::MatrixXcd scratch_b, scratch_k;
    for (int i = 0; i < n_sites; ++i) {
      const Eigen::MatrixXcd& bra = pick(chain, bra_replace, i, scratch_b);
      const Eigen::MatrixXcd& ket = pick(chain, ket_replace, i, scratch_k);
      const int dl = chain.site(i).dl;
      if (term && i == term_site && span == 1) {
        Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(bra.cols(), ket.cols());
        for (int n = 0; n < d; ++n)
          for (int m = 0; m < d; ++m) {
            const cplx w = (*term)(n, m);
            if (w == cplx(0, 0)) continue;
            next.noalias() +=
                w * bra.middleRows(n * dl, dl).adjoint() * x * ket.middleRows(m * dl, dl);
          }
        x = std::move(next);
      } else if (term && i == term_site && span == 2) {
        Eigen::MatrixXcd scratch_b2, scratch_k2;
        const Eigen::MatrixXcd& bra2 = pick(chain, bra_replace, i + 1, scratch_b2);
        const Eigen::MatrixXcd& ket2 = pick(chain, ket_replace, i + 1, scratch_k2);
        const int dl2 = chain.site(i + 1).dl;
        // Y[n1][m1] carries the site-i contraction for each physical pair.
        std::vector<Eigen::MatrixXcd> y(d * d);
        for (int n1 = 0; n1 < d; ++n1)
          for (int m1 = 0; m1 < d; ++m1)
            y[n1 * d + m1] =
                bra.middleRows(n1 * dl, dl).adjoint() * x * ket.middleRows(m1 * dl, dl);
        Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(bra2.cols(), ket2.cols());
        for (int n1 = 0; n1 < d; ++n1)
          for (int n2 = 0; n2 < d; ++n2)
            for (int m1 = 0; m1 < d; ++m1)
              for (int m2 = 0; m2 < d; ++m2) {
                const cplx w = (*term)(n1 * d + n2, m1 * d + m2);
                if (w == cplx(0, 0)) continue;
                next.noalias() += w * bra2.middleRows(n2 * dl2, dl2).adjoint() * y[n1 * d + m1] *
                                  ket2.middleRows(m2 * dl2, dl2);
              }
        x = std::move(next);
        ++i;
      } else {
        x = transfer_plain(bra, ket, x, dl, dl, d);
      }
    }
    return x(0, 0);
  };

  if (!op) return run_term(-1, 0, nullptr);
  cplx total = 0.0;
  for (const auto& [site, term] : op->one_site_terms()) total += run_term(site, 1, &term);
  for (const auto& [site, term] : op->two_site_terms()) total += run_term(site, 2, &term);
  return total;
}

Grammian grammian(const MpsChain& chain, const std::vector<std::pair<int, int>>& site_pairs,
                  bool dense_route, long cap) {
  Grammian out;
  out.site_pairs = site_pairs;
  out.block_offsets.assign(site_pairs.size() + 1, 0);
  for (std::size_t p = 0; p < site_pairs.size(); ++p) {
    const auto [i, j] = site_pairs[p];
    if (i >= j) throw ArgumentError("grammian: site pairs need i < j");
    out.block_offsets[p + 1] = out.block_offsets[p] + mode_count(chain.site(i)) *
                                                          mode_count(chain.site(j));
  }
  const int total = out.block_offsets.back();
  out.g = Eigen::MatrixXcd::Zero(total, total);

  if (dense_route) {
    Eigen::MatrixXcd columns(chain.to_dense(cap).dim(), total);
    int col = 0;
    for (const auto& [i, j] : site_pairs)
      for (int mu = 0; mu < mode_count(chain.site(i)); ++mu)
        for (int nu = 0; nu < mode_count(chain.site(j)); ++nu)
          columns.col(col++) = second_tangent_vector(chain, i, mu, j, nu, cap).amplitudes;
    out.g = columns.adjoint() * columns;
  } else {
    std::vector<std::tuple<int, int, int, int>> basis;  // (i, mu, j, nu)
    for (const auto& [i, j] : site_pairs)
      for (int mu = 0; mu < mode_count(chain.site(i)); ++mu)
        for (int nu = 0; nu < mode_count(chain.site(j)); ++nu) basis.emplace_back(i, mu, j, nu);
    for (std::size_t r = 0; r < basis.size(); ++r) {
      const auto [x, eta, y, delta] = basis[r];
      const std::map<int, Eigen::MatrixXcd> bra = {{x, b_mode(chain, x, eta)},
                                                   {y, b_mode(chain, y, delta)}};
      for (std::size_t c = r; c < basis.size(); ++c) {
        const auto [i, mu, j, nu] = basis[c];
        const cplx v = sandwich(chain, bra,
                                {{i, b_mode(chain, i, mu)}, {j, b_mode(chain, j, nu)}});
        out.g(r, c) = v;
        out.g(c, r) = std::conj(v);
      }
    }
  }
  return out;
}

Eigen::MatrixXcd effective_epsilon(const MpsChain& chain, const LocalHamiltonian& h,
                                   bool dense_route, long cap) {
  const ModeTable table(chain);
  const int total = table.total();
  Eigen::MatrixXcd eps(total, total);
  if (dense_route) {
    Eigen::MatrixXcd columns(chain.to_dense(cap).dim(), total);
    int col = 0;
    for (int i = 0; i < chain.size(); ++i)
      for (int mu = 0; mu < table.count(i); ++mu)
        columns.col(col++) = tangent_vector(chain, i, mu, cap).amplitudes;
    Eigen::MatrixXcd h_cols(columns.rows(), total);
    for (int c = 0; c < total; ++c) h_cols.col(c) = h.apply_dense(columns.col(c));
    eps = columns.adjoint() * h_cols;
  } else {
    for (int i = 0; i < chain.size(); ++i)
      for (int mu = 0; mu < table.count(i); ++mu) {
        const std::map<int, Eigen::MatrixXcd> bra = {{i, b_mode(chain, i, mu)}};
        for (int j = 0; j < chain.size(); ++j)
          for (int nu = 0; nu < table.count(j); ++nu)
            eps(table.global_index(i, mu), table.global_index(j, nu)) =
                sandwich(chain, bra, {{j, b_mode(chain, j, nu)}}, &h);
      }
  }
  return 0.5 * (eps + eps.adjoint());
}

Eigen::MatrixXcd anomalous_delta(const MpsChain& chain, const LocalHamiltonian& h,
                                 const std::function<double(int)>& dos, bool dense_route,
                                 long cap) {
  const ModeTable table(chain);
  const int total = table.total();
  Eigen::MatrixXcd delta = Eigen::MatrixXcd::Zero(total, total);
  Eigen::VectorXcd h_psi;
  if (dense_route) h_psi = h.apply_dense(chain.to_dense(cap).amplitudes);
  for (int i = 0; i < chain.size(); ++i)
    for (int j = i + 1; j < chain.size(); ++j) {
      const double rho = dos(j - i);
      if (!(rho > 0.0)) throw ArgumentError("anomalous_delta: density of states must be positive");
      for (int mu = 0; mu < table.count(i); ++mu)
        for (int nu = 0; nu < table.count(j); ++nu) {
          cplx v;
          if (dense_route) {
            v = second_tangent_vector(chain, i, mu, j, nu, cap).amplitudes.dot(h_psi);
          } else {
            v = sandwich(chain, {{i, b_mode(chain, i, mu)}, {j, b_mode(chain, j, nu)}}, {}, &h);
          }
          v /= rho;
          delta(table.global_index(i, mu), table.global_index(j, nu)) = v;
          delta(table.global_index(j, nu), table.global_index(i, mu)) = v;
        }
    }
  return delta;
}

}  // namespace mpsflow
