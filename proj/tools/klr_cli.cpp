#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "klr/diagnostics.hpp"
#include "klr/experiment.hpp"
#include "klr/gram_operator.hpp"
#include "klr/input_matrix.hpp"
#include "klr/krylov.hpp"
#include "klr/matrix_market.hpp"
#include "klr/metrics.hpp"
#include "klr/rng.hpp"
#include "klr/spectrum.hpp"

using namespace klr;

namespace {

struct Common {
  std::uint64_t seed = 0;
  Index n = 1000;
  Index k = 10;
  Index trials = 1;
};

struct SpectrumFlags {
  std::string kind = "exponential";
  double alpha = 1.1;
  double beta = 1.0;
  double gap = 1e-2;
  Index rank = 0;  // repeated pairs; 0 means k
  std::string matrix;
};

void add_common(CLI::App* app, Common& c, bool with_trials = true) {
  app->add_option("--seed", c.seed, "base seed");
  app->add_option("--n", c.n, "dimension");
  app->add_option("--k", c.k, "target rank");
  if (with_trials) app->add_option("--trials", c.trials, "number of seeded trials");
}

void add_spectrum(CLI::App* app, SpectrumFlags& s, bool with_matrix) {
  app->add_option("--kind", s.kind, "exponential|polynomial|paired_gap|repeated_pairs|wishart_lb")
      ->check(CLI::IsMember({"exponential", "polynomial", "paired_gap", "repeated_pairs", "wishart_lb"}));
  app->add_option("--alpha", s.alpha, "decay base for exponential spectra");
  app->add_option("--beta", s.beta, "polynomial exponent");
  app->add_option("--gap", s.gap, "paired gap size");
  app->add_option("--rank", s.rank, "repeated-pairs rank (default k)");
  if (with_matrix) app->add_option("--matrix", s.matrix, "Matrix Market file used instead of a synthetic spectrum");
}

SpectrumSpec make_spectrum(const SpectrumFlags& s, Index n, Index k) {
  SpectrumSpec spec;
  spec.n = n;
  if (s.kind == "exponential") spec.kind = spectra::Exponential{s.alpha};
  else if (s.kind == "polynomial") spec.kind = spectra::Polynomial{s.beta};
  else if (s.kind == "paired_gap") spec.kind = spectra::PairedGap{s.alpha, s.gap};
  else if (s.kind == "repeated_pairs") spec.kind = spectra::RepeatedPairs{s.alpha, s.rank > 0 ? s.rank : k};
  else spec.kind = spectra::WishartLB{};
  return spec;
}

InputMatrix make_input(const SpectrumFlags& s, Index n, Index k) {
  if (!s.matrix.empty()) return InputMatrix::dense(read_matrix_market(s.matrix));
  return InputMatrix::diagonal(generate(make_spectrum(s, n, k)));
}

OrthoPolicy parse_policy(const std::string& name) {
  if (name == "full_reorth" || name == "full") return OrthoPolicy::full_reorth;
  if (name == "lanczos_local" || name == "lanczos") return OrthoPolicy::lanczos_local;
  throw ContractError("unknown orthogonalization policy '" + name + "'");
}

Norm parse_norm(const std::string& name, double p) {
  if (name == "frobenius") return Norm::frobenius();
  if (name == "spectral") return Norm::spectral();
  if (name == "schatten") return Norm::schatten(p);
  throw ContractError("unknown norm '" + name + "'");
}

struct LowrankFlags {
  Index t = 60;
  Index b = 1;
  std::string policy = "full_reorth";
  std::string start = "gaussian";
  Index ell = 0;
  double delta = 0.0;
  std::string norm = "frobenius";
  double p = 2.0;
};

int run_lowrank(const Common& c, const SpectrumFlags& sf, const LowrankFlags& f) {
  const InputMatrix a = make_input(sf, c.n, c.k);
  require(c.trials >= 1, "trials must be at least 1");
  const Norm norm = parse_norm(f.norm, f.p);
  for (Index trial = 0; trial < c.trials; ++trial) {
    const std::uint64_t seed = trial == 0 ? c.seed : trial_seed(c.seed, "lowrank", trial);
    GramOperator op = as_operator(a);
    if (f.delta > 0.0) {
      const std::uint64_t dseed = Rng(seed).split(hash_label("perturbation")).seed();
      op = a.is_diagonal() ? perturb_diagonal(a.diagonal_entries(), f.delta, dseed) : perturb_diagonal(op, f.delta, dseed);
    }
    SolverConfig cfg;
    cfg.target_rank = c.k;
    cfg.block_size = f.b;
    cfg.iterations = f.t;
    cfg.policy = parse_policy(f.policy);
    cfg.seed = seed;
    if (f.start == "simulated") cfg.start = SimulatedStart{f.ell > 0 ? f.ell : c.k};
    else if (f.start != "gaussian") throw ContractError("unknown start '" + f.start + "'");
    const SolverResult r = block_krylov(op, cfg);
    const double eps = epsilon_empirical(a, r.q, c.k, norm);
    std::printf("trial=%ld eps_empirical=%.6g matvecs=%lld subspace_dim=%ld drops=%ld\n", long(trial), eps,
                static_cast<long long>(r.matvecs), long(r.subspace_dim), long(r.drop_count));
  }
  return 0;
}

struct ExperimentFlags {
  std::string preset;
  std::string out;
  std::string scale = "paper";
  int threads = 0;
  bool serial = false;
};

int run_experiment(const Common& c, const CLI::App& sub, const ExperimentFlags& f) {
  const Scale scale = f.scale == "fast" ? Scale::fast : Scale::paper;
  std::vector<Preset> presets;
  if (f.preset == "all") presets = all_presets();
  else presets.push_back(parse_preset(f.preset));
  if (f.threads > 0) omp_set_num_threads(f.threads);
  const auto dir = output_directory(f.out);
  std::filesystem::create_directories(dir);
  int status = 0;
  for (Preset p : presets) {
    ExperimentConfig cfg = default_config(p, scale, sub.count("--k") ? c.k : 0);
    if (sub.count("--n")) cfg.n = c.n;
    if (sub.count("--trials")) cfg.trials = c.trials;
    cfg.base_seed = c.seed;
    cfg.validate();
    const ExperimentOutput out = run_preset(cfg, f.serial ? Execution::serial : Execution::parallel);
    const auto csv = dir / (std::string(to_string(p)) + ".csv");
    write_csv(out.records, csv);
    const std::vector<std::string> keys{"spectrum_id", "block_size", "delta", "ortho_policy", "matvecs"};
    write_summary_csv(aggregate_quantiles(out.records, keys), keys, dir / (std::string(to_string(p)) + "_summary.csv"));
    for (const auto& fail : out.failures) {
      std::fprintf(stderr, "cell failed: %s b=%ld trial=%ld: %s\n", fail.spectrum_id.c_str(), long(fail.block_size),
                   long(fail.trial_index), fail.message.c_str());
      status = 1;
    }
    std::printf("%s: %zu records -> %s\n", to_string(p), out.records.size(), csv.string().c_str());
  }
  return status;
}

int run_spectrum(const Common& c, const SpectrumFlags& sf) {
  const Vector sigma = generate(make_spectrum(sf, c.n, c.k));
  for (Index i = 0; i < sigma.size(); ++i) std::printf("%.4f\n", sigma[i]);
  return 0;
}

struct DiagnoseFlags {
  std::vector<Index> ells;
  std::vector<Index> bs;
  std::string start = "gaussian";
};

int run_diagnose(const Common& c, const SpectrumFlags& sf, const DiagnoseFlags& f) {
  const InputMatrix a = make_input(sf, c.n, c.k);
  const Vector& sigma = a.singular_values();
  const Index n = a.rows();
  std::vector<Index> ells = f.ells, bs = f.bs;
  if (ells.empty())
    for (Index ell : {c.k, 2 * c.k})
      if (ell < sigma.size()) ells.push_back(ell);
  if (bs.empty())
    for (Index b : {Index{1}, Index{2}, c.k})
      if (b <= c.k && (bs.empty() || bs.back() != b)) bs.push_back(b);
  const GapReport g = gap_report(sigma, c.k, ells, bs);
  std::printf("g_min_over_next %.6g\ng_min_over_self %.6g\n", g.g_min_over_next, g.g_min_over_self);
  for (const auto& [ell, v] : g.g_k_to_ell) std::printf("g_k_to_ell[%ld] %.6g\n", long(ell), v);
  for (const auto& [b, v] : g.g_min_b) std::printf("g_min_b[%ld] %.6g\n", long(b), v);

  Matrix u_k;
  if (a.is_diagonal()) {
    // singular vectors are coordinate vectors, ordered by |entry|
    const Vector& d = a.diagonal_entries();
    std::vector<Index> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return std::abs(d[x]) > std::abs(d[y]); });
    u_k = Matrix::Zero(n, c.k);
    for (Index j = 0; j < c.k; ++j) u_k(order[static_cast<std::size_t>(j)], j) = 1.0;
  } else {
    Eigen::BDCSVD<Matrix> svd(a.dense_matrix(), Eigen::ComputeThinU);
    u_k = svd.matrixU().leftCols(c.k);
  }
  Matrix b;
  if (f.start == "gaussian") {
    b = gaussian_start(n, c.k, c.seed);
  } else if (f.start == "simulated") {
    GramOperator op = as_operator(a);
    b = build_simulated_block(op, gaussian_start(n, 1, c.seed).col(0), c.k);
  } else {
    throw ContractError("unknown start '" + f.start + "'");
  }
  const GoodnessReport r = kl_goodness(u_k, b, c.k);
  std::printf("goodness_L %.6g\ngoodness_sigma_min %.6g\n", r.L, r.smallest_singular_value);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Krylov low-rank approximation: solves, diagnostics and experiment presets"};
  app.require_subcommand(1);

  Common lc, ec, sc, dc;
  SpectrumFlags lsf, ssf, dsf;
  LowrankFlags lf;
  ExperimentFlags ef;
  DiagnoseFlags df;

  auto* lowrank = app.add_subcommand("lowrank", "one solve; prints eps_empirical and matvecs");
  add_common(lowrank, lc);
  add_spectrum(lowrank, lsf, true);
  lowrank->add_option("--t", lf.t, "Krylov iterations");
  lowrank->add_option("--b", lf.b, "block size");
  lowrank->add_option("--policy", lf.policy, "full_reorth|lanczos_local");
  lowrank->add_option("--start", lf.start, "gaussian|simulated");
  lowrank->add_option("--ell", lf.ell, "width of the simulated start block (default k)");
  lowrank->add_option("--delta", lf.delta, "diagonal perturbation half-width");
  lowrank->add_option("--norm", lf.norm, "frobenius|spectral|schatten");
  lowrank->add_option("--p", lf.p, "Schatten p");

  auto* experiment = app.add_subcommand("experiment", "runs a preset and writes <preset>.csv and <preset>_summary.csv");
  add_common(experiment, ec);
  experiment->add_option("--preset", ef.preset, "preset name or all")->required();
  experiment->add_option("--out", ef.out, "output directory (default $KLR_OUTPUT_DIR, else .)");
  experiment->add_option("--scale", ef.scale, "paper|fast")->check(CLI::IsMember({"paper", "fast"}));
  experiment->add_option("--threads", ef.threads, "OpenMP threads");
  experiment->add_flag("--serial", ef.serial, "run cells on one thread");

  auto* spectrum = app.add_subcommand("spectrum", "prints a synthetic spectrum, one value per line");
  add_common(spectrum, sc);
  add_spectrum(spectrum, ssf, false);

  auto* diagnose = app.add_subcommand("diagnose", "prints gap statistics and (k, L)-goodness of a start block");
  add_common(diagnose, dc);
  add_spectrum(diagnose, dsf, true);
  diagnose->add_option("--ell", df.ells, "ell values for g_k_to_ell")->delimiter(',');
  diagnose->add_option("--b", df.bs, "block sizes for g_min_b")->delimiter(',');
  diagnose->add_option("--start", df.start, "gaussian|simulated");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (*lowrank) return run_lowrank(lc, lsf, lf);
    if (*experiment) return run_experiment(ec, *experiment, ef);
    if (*spectrum) return run_spectrum(sc, ssf);
    if (*diagnose) return run_diagnose(dc, dsf, df);
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
