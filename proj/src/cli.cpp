#include "mpsflow/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mpsflow/bosonic.hpp"
#include "mpsflow/dynamics.hpp"
#include "mpsflow/haar_ensemble.hpp"
#include "mpsflow/husimi.hpp"
#include "mpsflow/lyapunov.hpp"

namespace mpsflow::cli {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_int(long v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%ld", v);
  return buf;
}

// One CSV result file plus its sidecar manifest.
class ResultWriter {
 public:
  ResultWriter(std::string out_dir, std::string name, std::vector<std::string> columns,
               const Config& config, bool quiet)
      : out_dir_(std::move(out_dir)),
        name_(std::move(name)),
        columns_(std::move(columns)),
        quiet_(quiet) {
    for (const auto& [k, v] : config.raw()) config_echo_[k] = v;
    body_ += join(columns_);
    body_ += '\n';
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size()) throw Error("result row arity mismatch");
    body_ += join(cells);
    body_ += '\n';
  }

  void note(const std::string& key, const std::string& value) { notes_[key] = value; }

  void finalize() {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir_);
    const std::string csv_path = out_dir_ + "/" + name_ + ".csv";
    {
      std::ofstream out(csv_path, std::ios::binary);
      if (!out) throw Error("cannot write " + csv_path);
      out << body_;
    }
    nlohmann::json manifest;
    manifest["experiment"] = name_;
    manifest["config"] = config_echo_;
    manifest["code_version"] = "mpsflow 0.1.0";
    manifest["csv"] = name_ + ".csv";
    const auto now = std::chrono::system_clock::now();
    manifest["timestamp_unix_ms"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count();
    manifest["provenance"] = notes_;
    std::ofstream mout(out_dir_ + "/" + name_ + ".manifest.json", std::ios::binary);
    mout << manifest.dump(2) << '\n';
    if (!quiet_) std::printf("wrote %s\n", csv_path.c_str());
  }

 private:
  static std::string join(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) line += ',';
      line += cells[i];
    }
    return line;
  }

  std::string out_dir_, name_;
  std::vector<std::string> columns_;
  bool quiet_;
  std::string body_;
  std::map<std::string, std::string> config_echo_;
  std::map<std::string, std::string> notes_;
};

LocalHamiltonian hamiltonian_from(Config& cfg, int n) {
  const std::string preset = cfg.get_string("preset");
  if (preset == "custom")
    return LocalHamiltonian::ising(n, cfg.get_double("j_zz"), cfg.get_double("g_x"),
                                   cfg.get_double("h_z"));
  return LocalHamiltonian::preset(preset, n);
}

std::vector<Segment> parse_segments(const std::string& text) {
  // "a:b,c:d" with 1-based inclusive site ranges.
  std::vector<Segment> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("segment must look like first:last");
    const int first = std::stoi(item.substr(0, colon));
    const int last = std::stoi(item.substr(colon + 1));
    if (first < 1 || last < first) throw ConfigError("bad segment " + item);
    out.push_back({first - 1, last - 1});
  }
  return out;
}

void run_gen(Config& cfg, const std::string& out_dir, bool quiet) {
  const int n = static_cast<int>(cfg.get_long("n_sites"));
  const int d = static_cast<int>(cfg.get_long("phys_dim"));
  const int bond = static_cast<int>(cfg.get_long("bond_dim"));
  const std::uint64_t seed = cfg.get_seed("seed");
  cfg.reject_unknown();

  const MpsChain chain = MpsChain::random(n, d, uniform_profile(n, d, bond), seed);
  ResultWriter w(out_dir, "gen", {"bond", "bond_dim", "cut_entropy"}, cfg, quiet);
  for (int b = 1; b < n; ++b)
    w.row({fmt_int(b), fmt_int(chain.bond_dim(b)), fmt17(chain.cut_entropy(b))});
  w.note("canonical_residual", fmt17(chain.max_canonical_residual()));
  w.note("oracle", "left-canonical construction from Haar frames");
  w.finalize();
}

void run_evolve(Config& cfg, const std::string& out_dir, bool quiet) {
  const int n = static_cast<int>(cfg.get_long("n_sites"));
  const int d = static_cast<int>(cfg.get_long("phys_dim"));
  const int bond = static_cast<int>(cfg.get_long("bond_dim"));
  const double t_total = cfg.get_double("t_total");
  const double dt = cfg.get_double("dt");
  const std::uint64_t seed = cfg.get_seed("seed");
  const long stride = cfg.get_long_or("snapshot_stride", 10);
  const LocalHamiltonian h = hamiltonian_from(cfg, n);
  cfg.reject_unknown();

  const MpsChain chain0 = MpsChain::random(n, d, uniform_profile(n, d, bond), seed);
  const Trajectory traj = tdvp_evolve(chain0, h, t_total, dt, static_cast<int>(stride));

  std::vector<std::string> cols = {"t", "energy"};
  for (int b = 1; b < n; ++b) cols.push_back("s_bond_" + std::to_string(b));
  ResultWriter w(out_dir, "evolve", cols, cfg, quiet);
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    std::vector<std::string> cells = {fmt17(traj.times[r]), fmt17(traj.energies[r])};
    for (double s : traj.cut_entropies[r]) cells.push_back(fmt17(s));
    w.row(cells);
  }
  w.note("integrator", "chart RK4 with Thouless retraction");
  w.finalize();
}

void run_lyapunov(Config& cfg, const std::string& out_dir, bool quiet) {
  const int n = static_cast<int>(cfg.get_long("n_sites"));
  const int d = static_cast<int>(cfg.get_long("phys_dim"));
  const int bond = static_cast<int>(cfg.get_long("bond_dim"));
  LyapunovOptions opt;
  opt.t_total = cfg.get_double("t_total");
  opt.dt = cfg.get_double("dt");
  opt.qr_interval = static_cast<int>(cfg.get_long_or("qr_interval", 5));
  opt.fd_step = cfg.get_double_or("fd_step", 1e-5);
  const std::uint64_t seed = cfg.get_seed("seed");
  const std::string segments_text = cfg.get_string_or("segments", "");
  const LocalHamiltonian h = hamiltonian_from(cfg, n);
  cfg.reject_unknown();

  const MpsChain chain0 = MpsChain::random(n, d, uniform_profile(n, d, bond), seed);
  const LyapunovResult result = lyapunov_spectrum(chain0, h, opt);

  ResultWriter w(out_dir, "lyapunov", {"kind", "label", "value"}, cfg, quiet);
  for (int i = 0; i < result.exponents.size(); ++i)
    w.row({"exponent", fmt_int(i), fmt17(result.exponents(i))});
  w.row({"ks_entropy", "-", fmt17(result.ks_entropy)});
  w.row({"subsystem", "full", fmt17(subsystem_exponent(result, {0, n - 1}))});
  if (!segments_text.empty())
    for (const Segment& seg : parse_segments(segments_text))
      w.row({"subsystem", std::to_string(seg.first + 1) + ":" + std::to_string(seg.last + 1),
             fmt17(subsystem_exponent(result, seg))});
  w.note("converged", result.converged ? "true" : "false");
  w.note("projection_convention",
         "volume of the top min(2 n_I, n_positive) expanding directions projected on the "
         "segment coordinate block");
  w.finalize();
}

void run_husimi_bound(Config& cfg, const std::string& out_dir, bool quiet) {
  const int n = static_cast<int>(cfg.get_long("n_sites"));
  const int d = static_cast<int>(cfg.get_long("phys_dim"));
  const int bond = static_cast<int>(cfg.get_long("bond_dim"));
  const int first = static_cast<int>(cfg.get_long("segment_first")) - 1;
  const int last = static_cast<int>(cfg.get_long("segment_last")) - 1;
  const long samples = cfg.get_long("samples");
  const long batches = cfg.get_long_or("batches", 100);
  const std::uint64_t seed = cfg.get_seed("seed");
  const std::string state_kind = cfg.get_string("state");
  double quench_time = 0.0;
  std::optional<LocalHamiltonian> h;
  if (state_kind == "quench") {
    quench_time = cfg.get_double("quench_time");
    h = hamiltonian_from(cfg, n);
  }
  cfg.reject_unknown();

  const MpsChain chain = MpsChain::random(n, d, uniform_profile(n, d, bond), seed);
  DenseState state = chain.to_dense();
  if (state_kind == "haar") {
    Rng rng(Rng::child_seed(seed, 0x5eed));
    for (long i = 0; i < state.amplitudes.size(); ++i) state.amplitudes(i) = rng.complex_normal();
    state.amplitudes.normalize();
  } else if (state_kind == "quench") {
    state = exact_evolve(state, *h, quench_time);
  } else if (state_kind != "manifold") {
    throw ConfigError("state must be one of manifold|haar|quench");
  }

  const Segment seg{first, last};
  const Eigen::MatrixXcd rho = reduced_density_window(state.amplitudes, n, d, first, last);
  const PaddedDensity padded = pad_density(rho, chain.bond_dim(first), chain.bond_dim(last + 1));
  const SegmentFamily fam = family_from_chain(chain, seg);

  const HusimiEstimate norm = mc_normalization(padded, fam, samples, seed, static_cast<int>(batches));
  const EntropyBoundReport report =
      entropy_bound_report(padded, fam, samples, seed + 1, static_cast<int>(batches));

  ResultWriter w(out_dir, "husimi-bound",
                 {"state", "exact_entropy", "mean_intrinsic", "mean_intrinsic_se", "wehrl",
                  "wehrl_se", "bound", "slack", "slack_se", "normalization", "normalization_se",
                  "min_sampled_q"},
                 cfg, quiet);
  w.row({state_kind, fmt17(report.exact_entropy), fmt17(report.mean_intrinsic.value),
         fmt17(report.mean_intrinsic.std_error), fmt17(report.wehrl.value),
         fmt17(report.wehrl.std_error), fmt17(report.bound), fmt17(report.slack),
         fmt17(report.slack_std_error), fmt17(norm.value), fmt17(norm.std_error),
         fmt17(norm.min_sampled_q)});
  w.note("sigma_convention", "batch-mean standard errors, " + std::to_string(batches) + " batches");
  w.finalize();
}

void run_haar_verify(Config& cfg, const std::string& out_dir, bool quiet) {
  const int d = static_cast<int>(cfg.get_long("phys_dim"));
  const int bond = static_cast<int>(cfg.get_long("bond_dim"));
  const long samples = cfg.get_long("samples");
  const std::uint64_t seed = cfg.get_seed("seed");
  const long moments_sites = cfg.get_long_or("moments_sites", 0);
  const long moments_samples = cfg.get_long_or("moments_samples", 20000);
  cfg.reject_unknown();

  const EnsembleSpectrum spec = reduced_operators(d, bond);
  const McReducedReport mc = mc_verify_reduced(d, bond, samples, seed);

  ResultWriter w(out_dir, "haar-verify",
                 {"object", "row", "col", "closed_form", "mc_mean", "mc_se", "sigma"}, cfg, quiet);
  auto dump = [&](const char* name, const Eigen::Matrix2d& closed, const McEntryTable& table) {
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        const double sigma =
            std::abs(table.mean(r, c) - closed(r, c)) / (table.std_error(r, c) + 1e-300);
        w.row({name, fmt_int(r), fmt_int(c), fmt17(closed(r, c)), fmt17(table.mean(r, c)),
               fmt17(table.std_error(r, c)), fmt17(sigma)});
      }
  };
  dump("transfer", spec.transfer.m, mc.transfer);
  dump("o1", spec.o1.m, mc.o1);
  dump("o2_summed", spec.o2_summed.m, mc.o2_summed);
  if (moments_sites > 2) {
    const McMomentsReport mm = mc_verify_moments(d, bond, static_cast<int>(moments_sites), 1, 3,
                                                 moments_samples, seed + 7);
    w.row({"moment_1_3", "-", "-", fmt17(mm.closed_form), fmt17(mm.estimate),
           fmt17(mm.std_error),
           fmt17(std::abs(mm.estimate - mm.closed_form) / (mm.std_error + 1e-300))});
    w.row({"moment_ring_1_3", "-", "-", fmt17(mm.ring_exact), fmt17(mm.estimate),
           fmt17(mm.std_error),
           fmt17(std::abs(mm.estimate - mm.ring_exact) / (mm.std_error + 1e-300))});
  }
  w.note("lambda", fmt17(spec.lambda));
  w.note("fixed_point_residual", fmt17(mc.fixed_point_residual));
  w.note("o2_misprint_rejection_sigma", fmt17(mc.o2_alternative_sigma));
  w.finalize();
}

void run_dos(Config& cfg, const std::string& out_dir, bool quiet) {
  const int d = static_cast<int>(cfg.get_long("phys_dim"));
  const int bond = static_cast<int>(cfg.get_long("bond_dim"));
  const long j_max = cfg.get_long_or("j_max", 40);
  cfg.reject_unknown();

  const DensityOfStates dos = solve_density_of_states(d, bond, static_cast<int>(j_max));
  ResultWriter w(out_dir, "dos", {"j", "rho", "residual"}, cfg, quiet);
  for (int j = 1; j <= dos.j_max; ++j)
    w.row({fmt_int(j), fmt17(dos.rho(j - 1)), fmt17(dos.residual)});
  w.note("truncation_drift", fmt17(dos.truncation_drift));
  w.note("rho_infinity", fmt17(dos.rho_infinity));
  w.note("tail_constant",
         "the diagonal moment's D->infinity limit gives ((d+1)/d)^2, while the large-D "
         "simplification quotes 1; the additive constant of rho is therefore not forced to 1");
  w.finalize();
}

void run_bosonic(Config& cfg, const std::string& out_dir, bool quiet) {
  const std::string mode = cfg.get_string("model");
  ResultWriter w(out_dir, "bosonic",
                 {"quantity", "subset", "value", "extra"}, cfg, quiet);
  if (mode == "tms") {
    const double coupling = cfg.get_double("coupling");
    const double t_total = cfg.get_double("t_total");
    cfg.reject_unknown();
    const QuadraticBosonModel model = two_mode_squeezer(coupling);
    const CovarianceState evolved = evolve_covariance(model, vacuum_covariance(2), t_total);
    const double nu = symplectic_eigenvalues(
        evolved.sigma)[0];
    const RateReport rate = entropy_growth_rate(model, {0}, t_total);
    const double lam = classical_subsystem_exponent(model, {0}, t_total);
    w.row({"symplectic_eigenvalue_mode0", "0", fmt17(nu), fmt17(std::cosh(2 * coupling * t_total) / 2.0)});
    w.row({"entropy_rate", "0", fmt17(rate.rate), fmt17(rate.r_squared)});
    w.row({"subsystem_exponent", "0", fmt17(lam), ""});
  } else if (mode == "chain") {
    const int n = static_cast<int>(cfg.get_long("n_sites"));
    const int d = static_cast<int>(cfg.get_long("phys_dim"));
    const int bond = static_cast<int>(cfg.get_long("bond_dim"));
    const std::uint64_t seed = cfg.get_seed("seed");
    const long j_max = cfg.get_long_or("j_max", 40);
    const double t_window = cfg.get_double_or("t_window", 12.0);
    const LocalHamiltonian h = hamiltonian_from(cfg, n);
    cfg.reject_unknown();

    const MpsChain chain = MpsChain::random(n, d, uniform_profile(n, d, bond), seed);
    const DensityOfStates dos = solve_density_of_states(d, bond, static_cast<int>(j_max));
    auto dos_fn = [&](int sep) {
      return sep <= dos.j_max ? dos.rho(sep - 1) : dos.rho_infinity;
    };
    auto flat = [](int) { return 1.0; };
    const QuadraticBosonModel suppressed = build_model(chain, h, dos_fn);
    const QuadraticBosonModel naive = build_model(chain, h, flat);

    std::vector<int> half;
    for (int m = 0; m < suppressed.n_modes(); ++m)
      if (suppressed.mode_sites[m] < n / 2) half.push_back(m);

    const RateReport rate_s = entropy_growth_rate(suppressed, half, t_window);
    const RateReport rate_n = entropy_growth_rate(naive, half, t_window);
    const double lam_s = classical_subsystem_exponent(suppressed, half, t_window);
    const double lam_n = classical_subsystem_exponent(naive, half, t_window);
    w.row({"entropy_rate_suppressed", "left_half", fmt17(rate_s.rate), fmt17(rate_s.r_squared)});
    w.row({"entropy_rate_naive", "left_half", fmt17(rate_n.rate), fmt17(rate_n.r_squared)});
    w.row({"subsystem_exponent_suppressed", "left_half", fmt17(lam_s), ""});
    w.row({"subsystem_exponent_naive", "left_half", fmt17(lam_n), ""});
    w.row({"rate_ratio_naive_over_suppressed", "left_half",
           fmt17(rate_n.rate / std::max(rate_s.rate, 1e-300)), "exploratory, no gate"});
    w.row({"rho_1", "-", fmt17(dos.rho(0)), ""});
    w.row({"bond_dim_squared", "-", fmt17(static_cast<double>(bond) * bond), ""});
  } else {
    throw ConfigError("model must be tms|chain");
  }
  w.note("convention", "vacuum covariance I/2, natural-log entropies");
  w.finalize();
}

void run_oracle_compare(Config& cfg, const std::string& out_dir, bool quiet) {
  const int n = static_cast<int>(cfg.get_long("n_sites"));
  const int d = static_cast<int>(cfg.get_long("phys_dim"));
  const int bond = static_cast<int>(cfg.get_long("bond_dim"));
  const double t_total = cfg.get_double("t_total");
  const double dt = cfg.get_double("dt");
  const std::uint64_t seed = cfg.get_seed("seed");
  const long stride = cfg.get_long_or("snapshot_stride", 100);
  const LocalHamiltonian h = hamiltonian_from(cfg, n);
  cfg.reject_unknown();

  const MpsChain chain0 = MpsChain::random(n, d, uniform_profile(n, d, bond), seed);
  const Trajectory traj = tdvp_evolve(chain0, h, t_total, dt, static_cast<int>(stride));
  const ExactPropagator prop(h);
  const Eigen::VectorXcd psi0 = chain0.to_dense().amplitudes;

  ResultWriter w(out_dir, "oracle-compare", {"t", "fidelity", "energy_tdvp", "energy_exact"}, cfg,
                 quiet);
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    const Eigen::VectorXcd exact = prop.evolve(psi0, traj.times[r]);
    const Eigen::VectorXcd tdvp = traj.snapshots[r].to_dense().amplitudes;
    const double e_exact = exact.dot(h.apply_dense(exact)).real();
    w.row({fmt17(traj.times[r]), fmt17(fidelity(tdvp, exact)), fmt17(traj.energies[r]),
           fmt17(e_exact)});
  }
  w.note("oracle", "dense eigendecomposition propagator");
  w.finalize();
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

Config Config::parse_text(const std::string& text) {
  Config cfg;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + " is not key = value");
    const std::string key = trim(trimmed.substr(0, eq));
    const std::string value = trim(trimmed.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) + " has empty key or value");
    if (cfg.values_.count(key))
      throw ConfigError("duplicate config key: " + key);
    cfg.values_[key] = value;
    cfg.consumed_[key] = false;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing required config key: " + key);
  consumed_[key] = true;
  return it->second;
}

long Config::get_long(const std::string& key) {
  const std::string v = get_string(key);
  std::size_t pos = 0;
  const long out = std::stol(v, &pos);
  if (pos != v.size()) throw ConfigError("config key " + key + " is not an integer");
  return out;
}

double Config::get_double(const std::string& key) {
  const std::string v = get_string(key);
  std::size_t pos = 0;
  const double out = std::stod(v, &pos);
  if (pos != v.size()) throw ConfigError("config key " + key + " is not a number");
  return out;
}

std::uint64_t Config::get_seed(const std::string& key) {
  const std::string v = get_string(key);
  std::size_t pos = 0;
  const unsigned long long out = std::stoull(v, &pos);
  if (pos != v.size()) throw ConfigError("config key " + key + " is not a seed");
  return out;
}

long Config::get_long_or(const std::string& key, long fallback) {
  if (!has(key)) return fallback;
  return get_long(key);
}

double Config::get_double_or(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  return get_double(key);
}

std::string Config::get_string_or(const std::string& key, const std::string& fallback) {
  if (!has(key)) return fallback;
  return get_string(key);
}

void Config::override_value(const std::string& key, const std::string& value) {
  values_[key] = value;
  consumed_[key] = false;
}

void Config::reject_unknown() const {
  for (const auto& [key, used] : consumed_)
    if (!used) throw ConfigError("unknown config key: " + key);
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"mpsflow experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  bool quiet = false;
  std::optional<std::uint64_t> seed_override;
  std::optional<long> samples_override;

  const std::vector<std::string> subcommands = {"gen",        "evolve", "lyapunov",
                                                "husimi-bound", "haar-verify", "dos",
                                                "bosonic",    "oracle-compare"};
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : subcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value config file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed_override, "override the config seed");
    sub->add_option("--samples", samples_override, "override the config sample count");
    sub->add_flag("--quiet", quiet, "suppress progress output");
    subs[name] = sub;
  }

  std::vector<const char*> argv;
  argv.push_back("mpsflow");
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    CLI::App dummy;
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Config cfg = Config::parse_file(config_path);
    if (seed_override) cfg.override_value("seed", std::to_string(*seed_override));
    if (samples_override) cfg.override_value("samples", std::to_string(*samples_override));

    for (const auto& name : subcommands) {
      if (!subs[name]->parsed()) continue;
      if (name == "gen") run_gen(cfg, out_dir, quiet);
      if (name == "evolve") run_evolve(cfg, out_dir, quiet);
      if (name == "lyapunov") run_lyapunov(cfg, out_dir, quiet);
      if (name == "husimi-bound") run_husimi_bound(cfg, out_dir, quiet);
      if (name == "haar-verify") run_haar_verify(cfg, out_dir, quiet);
      if (name == "dos") run_dos(cfg, out_dir, quiet);
      if (name == "bosonic") run_bosonic(cfg, out_dir, quiet);
      if (name == "oracle-compare") run_oracle_compare(cfg, out_dir, quiet);
    }
    return 0;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ResourceCapError& e) {
    std::fprintf(stderr, "resource error: %s\n", e.what());
    return 3;
  } catch (const NumericalConsistencyError& e) {
    std::fprintf(stderr, "numerical consistency error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

}  // namespace mpsflow::cli
