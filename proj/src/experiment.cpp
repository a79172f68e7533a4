#include "klr/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "klr/gram_operator.hpp"
#include "klr/input_matrix.hpp"
#include "klr/metrics.hpp"
#include "klr/orthonormal_basis.hpp"
#include "klr/rng.hpp"

namespace klr {

namespace {

struct PresetName {
  Preset preset;
  const char* name;
};

constexpr PresetName kPresetNames[] = {
    {Preset::gap_sweep, "gap_sweep"},   {Preset::block_size, "block_size"},
    {Preset::perturb_sweep, "perturb_sweep"}, {Preset::grid, "grid"},
    {Preset::ortho_stability, "ortho_stability"}, {Preset::schatten, "schatten"},
    {Preset::simultaneous, "simultaneous"},
};

std::vector<std::int64_t> range_budgets(std::int64_t first, std::int64_t last, std::int64_t step) {
  std::vector<std::int64_t> out;
  for (std::int64_t b = first; b <= last; b += step) out.push_back(b);
  return out;
}

SpectrumSpec spec(decltype(SpectrumSpec::kind) kind, Index n) { return SpectrumSpec{std::move(kind), n}; }

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_p(double p) {
  if (std::isinf(p)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

}  // namespace

const char* to_string(Preset preset) noexcept {
  for (const auto& p : kPresetNames)
    if (p.preset == preset) return p.name;
  return "unknown";
}

Preset parse_preset(std::string_view name) {
  for (const auto& p : kPresetNames)
    if (name == p.name) return p.preset;
  throw ContractError("unknown preset '" + std::string(name) + "'");
}

const std::vector<Preset>& all_presets() {
  static const std::vector<Preset> presets = [] {
    std::vector<Preset> v;
    for (const auto& p : kPresetNames) v.push_back(p.preset);
    return v;
  }();
  return presets;
}

void ExperimentConfig::validate() const {
  require(n >= 2, "n must be at least 2");
  require(k >= 1 && k < n, "k must lie in [1, n)");
  require(trials >= 1, "trials must be at least 1");
  require(!budgets.empty(), "at least one matvec budget is required");
  require(budgets.front() >= 1, "matvec budgets must be positive");
  for (std::size_t i = 1; i < budgets.size(); ++i)
    require(budgets[i] > budgets[i - 1], "matvec budgets must be strictly increasing");
  require(!spectra.empty(), "at least one spectrum is required");
  require(!series.empty(), "at least one series is required");
  for (const auto& s : series) {
    require(s.block_size >= 1, "block size must be positive");
    require(s.delta >= 0.0 && std::isfinite(s.delta), "delta must be finite and non-negative");
    if (s.method == Method::simultaneous_iteration) require(s.block_size >= k, "simultaneous iteration needs b >= k");
    if (s.method == Method::single_vector_simultaneous || s.method == Method::schatten)
      require(s.block_size == 1, "this method runs with block size 1");
  }
  require(memory >= 0, "memory must be non-negative");
  for (double p : p_values) require(p >= 1.0, "Schatten p must be at least 1");
}

ExperimentConfig default_config(Preset preset, Scale scale, Index k) {
  require(k >= 0, "k must be non-negative");
  const bool fast = scale == Scale::fast;
  const Index small_k = k > 0 ? k : 10;
  const Index large_k = k > 0 ? k : (fast ? 10 : 50);
  ExperimentConfig c;
  c.preset = preset;
  c.n = fast ? 200 : 1000;
  c.trials = fast ? 5 : 10;
  switch (preset) {
    case Preset::gap_sweep: {
      c.k = small_k;
      if (!fast) c.trials = 500;
      for (int j = 0; j < 8; ++j)
        c.spectra.push_back(spec(spectra::PairedGap{1.1, std::pow(10.0, -10.0 + 10.0 * j / 7.0)}, c.n));
      c.series = {Series{}};
      c.budgets = range_budgets(26, 35, 1);  // t = 25..34
      break;
    }
    case Preset::block_size: {
      c.k = large_k;
      c.spectra = {spec(spectra::RepeatedPairs{1.005, c.k}, c.n)};
      for (Index b : {Index{1}, Index{2}, Index{3}, c.k}) c.series.push_back(Series{Method::krylov, b});
      c.budgets = fast ? range_budgets(10, 200, 10) : range_budgets(50, 1000, 50);
      break;
    }
    case Preset::perturb_sweep: {
      c.k = large_k;
      c.spectra = {spec(spectra::RepeatedPairs{1.005, c.k}, c.n)};
      for (double d : {1e-6, 1e-10, 1e-14, 0.0}) c.series.push_back(Series{Method::krylov, 1, d});
      c.series.push_back(Series{Method::krylov, 2, 0.0});
      c.budgets = fast ? range_budgets(10, 200, 10) : range_budgets(50, 1000, 50);
      break;
    }
    case Preset::grid: {
      c.k = large_k;
      for (double a : {1.001, 1.01, 1.1}) c.spectra.push_back(spec(spectra::Exponential{a}, c.n));
      for (double b : {0.1, 0.5, 1.5}) c.spectra.push_back(spec(spectra::Polynomial{b}, c.n));
      c.spectra.push_back(spec(spectra::RepeatedPairs{1.005, c.k}, c.n));
      c.spectra.push_back(spec(spectra::WishartLB{}, c.n));
      for (Index b : {Index{1}, Index{2}, Index{3}, c.k, c.k + 4}) c.series.push_back(Series{Method::krylov, b});
      c.budgets = fast ? range_budgets(10, 200, 10) : range_budgets(50, 1000, 50);
      break;
    }
    case Preset::ortho_stability: {
      c.k = large_k;
      if (!fast) c.trials = 100;
      c.spectra = {spec(spectra::Exponential{1.1}, c.n)};
      for (OrthoPolicy pol : {OrthoPolicy::full_reorth, OrthoPolicy::lanczos_local})
        for (Index b : {Index{1}, Index{2}, c.k, c.k + 4}) c.series.push_back(Series{Method::krylov, b, 0.0, pol});
      c.budgets = fast ? range_budgets(10, 200, 10) : range_budgets(50, 600, 50);
      break;
    }
    case Preset::schatten: {
      c.k = small_k;
      c.spectra = {spec(spectra::Polynomial{1.5}, c.n)};
      c.series = {Series{Method::schatten, 1}};
      c.budgets = range_budgets(15, 60, 5);
      break;
    }
    case Preset::simultaneous: {
      c.k = small_k;
      c.spectra = {spec(spectra::Exponential{1.1}, c.n)};
      c.series = {Series{Method::krylov, 1}, Series{Method::single_vector_simultaneous, 1},
                  Series{Method::simultaneous_iteration, c.k}};
      c.budgets = range_budgets(20, 200, 10);
      break;
    }
  }
  return c;
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view cell, Index trial) {
  return Rng(base_seed ^ hash_label(cell), static_cast<std::uint64_t>(trial)).seed();
}

namespace {

struct CellResult {
  std::vector<ExperimentRecord> records;
  std::vector<CellFailure> failures;
};

ExperimentRecord make_record(const ExperimentConfig& cfg, const std::string& spectrum_id, const Series& s, Index trial,
                             std::int64_t matvecs, double eps) {
  ExperimentRecord r;
  r.preset = to_string(cfg.preset);
  r.spectrum_id = spectrum_id;
  r.block_size = s.block_size;
  r.delta = s.delta;
  r.ortho_policy = to_string(s.policy);
  r.trial_index = trial;
  r.matvecs = matvecs;
  r.eps_empirical_raw = eps;
  r.eps_empirical_floored = floor_epsilon(eps);
  return r;
}

void run_krylov_cell(const ExperimentConfig& cfg, const Series& s, const std::string& id, const Vector& sigma,
                     std::uint64_t seed, Index trial, CellResult& out) {
  const InputMatrix a = InputMatrix::diagonal(sigma);
  GramOperator op = s.delta > 0.0 ? perturb_diagonal(sigma, s.delta, Rng(seed).split(hash_label("perturbation")).seed())
                                  : as_operator(sigma);
  BlockKrylovIteration it(op, gaussian_start(cfg.n, s.block_size, seed), s.policy, cfg.drop_tol);
  Index extracted_at = -1;
  double eps = 0.0;
  for (std::int64_t budget : cfg.budgets) {
    if (it.matvecs() > budget) continue;
    while (!it.exhausted() && it.matvecs() + s.block_size <= budget) it.advance();
    if (it.iteration() != extracted_at) {
      eps = epsilon_empirical(a, it.extract(cfg.k).q, cfg.k);
      extracted_at = it.iteration();
    }
    out.records.push_back(make_record(cfg, id, s, trial, it.matvecs(), eps));
  }
}

void run_simultaneous_cell(const ExperimentConfig& cfg, const Series& s, const std::string& id, const Vector& sigma,
                           std::uint64_t seed, Index trial, CellResult& out) {
  const InputMatrix a = InputMatrix::diagonal(sigma);
  const Index memory = cfg.memory > 0 ? cfg.memory : cfg.k;
  for (std::int64_t budget : cfg.budgets) {
    GramOperator op = as_operator(sigma);
    SolverConfig sc;
    sc.target_rank = cfg.k;
    sc.seed = seed;
    sc.drop_tol = cfg.drop_tol;
    SolverResult res;
    if (s.method == Method::simultaneous_iteration) {
      const std::int64_t t = budget / s.block_size - 1;
      if (t < 0) continue;
      sc.block_size = s.block_size;
      sc.iterations = t;
      res = simultaneous_iteration(op, sc);
    } else {
      const std::int64_t t = budget - memory;
      if (t < memory - 1) continue;
      sc.iterations = t;
      res = single_vector_simultaneous(op, sc, memory);
    }
    out.records.push_back(make_record(cfg, id, s, trial, res.matvecs, epsilon_empirical(a, res.q, cfg.k)));
  }
}

void run_schatten_cell(const ExperimentConfig& cfg, const Series& s, const std::string& id, const Vector& sigma,
                       std::uint64_t seed, Index trial, CellResult& out) {
  const InputMatrix a = InputMatrix::diagonal(sigma);
  GramOperator op_t = as_operator(a.transposed());
  GramOperator op = as_operator(a);
  const Matrix start = gaussian_start(cfg.n, 1, seed);
  BlockKrylovIteration on_t(op_t, start, s.policy, cfg.drop_tol);
  BlockKrylovIteration direct(op, start, s.policy, cfg.drop_tol);
  std::vector<double> optimum;
  for (double p : cfg.p_values)
    optimum.push_back(optimal_residual(sigma, cfg.k, std::isinf(p) ? Norm::spectral() : Norm::schatten(p)));
  for (std::int64_t budget : cfg.budgets) {
    if (on_t.matvecs() > budget) continue;
    while (!on_t.exhausted() && on_t.matvecs() + 1 <= budget) on_t.advance();
    while (!direct.exhausted() && direct.matvecs() + 1 <= budget) direct.advance();
    const Matrix q = on_t.extract(cfg.k).q;
    const Matrix z = orthonormalize(a.multiply(q), cfg.drop_tol).matrix();
    const Vector two_step = residual_singular_values(a, z);
    const Vector one_step = residual_singular_values(a, direct.extract(cfg.k).q);
    for (std::size_t i = 0; i < cfg.p_values.size(); ++i) {
      const double p = cfg.p_values[i];
      const std::string suffix = ":p=" + format_p(p);
      out.records.push_back(make_record(cfg, id + "|two_step" + suffix, s, trial, on_t.matvecs(),
                                        (schatten_from_values(two_step, p) - optimum[i]) / optimum[i]));
      out.records.push_back(make_record(cfg, id + "|direct" + suffix, s, trial, direct.matvecs(),
                                        (schatten_from_values(one_step, p) - optimum[i]) / optimum[i]));
    }
  }
}

std::string series_suffix(const ExperimentConfig& cfg, const Series& s) {
  if (cfg.preset != Preset::simultaneous) return "";
  switch (s.method) {
    case Method::krylov:
      return "|krylov";
    case Method::simultaneous_iteration:
      return "|simultaneous_iteration";
    case Method::single_vector_simultaneous:
      return "|single_vector_simultaneous(ell=" + std::to_string(cfg.memory > 0 ? cfg.memory : cfg.k) + ")";
    case Method::schatten:
      return "";
  }
  return "";
}

CellResult run_cell(const ExperimentConfig& cfg, std::size_t spectrum_index, std::size_t series_index, Index trial) {
  CellResult out;
  SpectrumSpec sp = cfg.spectra[spectrum_index];
  sp.n = cfg.n;
  const Series& s = cfg.series[series_index];
  const std::string label = sp.label();
  const std::string id = label + series_suffix(cfg, s);
  try {
    const Vector sigma = generate(sp);
    const std::uint64_t seed = trial_seed(cfg.base_seed, label, trial);
    switch (s.method) {
      case Method::krylov:
        run_krylov_cell(cfg, s, id, sigma, seed, trial, out);
        break;
      case Method::simultaneous_iteration:
      case Method::single_vector_simultaneous:
        run_simultaneous_cell(cfg, s, id, sigma, seed, trial, out);
        break;
      case Method::schatten:
        run_schatten_cell(cfg, s, id, sigma, seed, trial, out);
        break;
    }
  } catch (const std::exception& e) {
    out.failures.push_back(CellFailure{id, s.block_size, trial, e.what()});
  }
  return out;
}

}  // namespace

ExperimentOutput run_preset(const ExperimentConfig& cfg, Execution exec) {
  cfg.validate();
  const std::size_t n_spec = cfg.spectra.size();
  const std::size_t n_series = cfg.series.size();
  const auto n_trials = static_cast<std::size_t>(cfg.trials);
  const std::size_t total = n_spec * n_series * n_trials;
  std::vector<CellResult> slots(total);

  auto run_one = [&](std::size_t task) {
    const std::size_t trial = task % n_trials;
    const std::size_t series = (task / n_trials) % n_series;
    const std::size_t spectrum = task / (n_trials * n_series);
    slots[task] = run_cell(cfg, spectrum, series, static_cast<Index>(trial));
  };

  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t task = 0; task < static_cast<std::int64_t>(total); ++task) run_one(static_cast<std::size_t>(task));
  } else {
    for (std::size_t task = 0; task < total; ++task) run_one(task);
  }

  ExperimentOutput out;
  for (auto& slot : slots) {
    std::move(slot.records.begin(), slot.records.end(), std::back_inserter(out.records));
    std::move(slot.failures.begin(), slot.failures.end(), std::back_inserter(out.failures));
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  require(!values.empty(), "quantile of an empty group");
  require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

namespace {

std::string column_value(const ExperimentRecord& r, const std::string& key) {
  if (key == "preset") return r.preset;
  if (key == "spectrum_id") return r.spectrum_id;
  if (key == "block_size") return std::to_string(r.block_size);
  if (key == "delta") return format_double(r.delta);
  if (key == "ortho_policy") return r.ortho_policy;
  if (key == "trial_index") return std::to_string(r.trial_index);
  if (key == "matvecs") return std::to_string(r.matvecs);
  throw ContractError("cannot group by column '" + key + "'");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::vector<AggregateRow> aggregate_quantiles(const std::vector<ExperimentRecord>& records,
                                              const std::vector<std::string>& group_keys, bool floored) {
  std::map<std::vector<std::string>, std::vector<double>> groups;
  std::vector<std::vector<std::string>> order;
  for (const auto& r : records) {
    std::vector<std::string> key;
    key.reserve(group_keys.size());
    for (const auto& g : group_keys) key.push_back(column_value(r, g));
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(floored ? r.eps_empirical_floored : r.eps_empirical_raw);
  }
  std::vector<AggregateRow> rows;
  rows.reserve(order.size());
  for (const auto& key : order) {
    const auto& v = groups.at(key);
    rows.push_back(AggregateRow{key, static_cast<Index>(v.size()), quantile(v, 0.25), quantile(v, 0.5), quantile(v, 0.75)});
  }
  return rows;
}

const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{"preset", "spectrum_id", "block_size", "delta", "ortho_policy",
                                             "trial_index", "matvecs", "eps_empirical_raw", "eps_empirical_floored"};
  return cols;
}

void write_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  const auto& cols = record_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    out << csv_field(r.preset) << ',' << csv_field(r.spectrum_id) << ',' << r.block_size << ','
        << format_double(r.delta) << ',' << csv_field(r.ortho_policy) << ',' << r.trial_index << ',' << r.matvecs
        << ',' << format_double(r.eps_empirical_raw) << ',' << format_double(r.eps_empirical_floored) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

void write_summary_csv(const std::vector<AggregateRow>& rows, const std::vector<std::string>& group_keys,
                       const std::filesystem::path& path) {
  std::ofstream out = open_for_write(path);
  for (const auto& k : group_keys) out << k << ',';
  out << "count,q25,median,q75\n";
  for (const auto& r : rows) {
    for (const auto& v : r.key) out << csv_field(v) << ',';
    out << r.count << ',' << format_double(r.q25) << ',' << format_double(r.median) << ',' << format_double(r.q75)
        << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::vector<ExperimentRecord> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path.string() + "'", 0);
  std::string line;
  std::int64_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  if (split_csv_line(line) != record_columns()) throw ParseError("unexpected header", 1);
  std::vector<ExperimentRecord> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != record_columns().size()) throw ParseError("wrong number of fields", lineno);
    try {
      ExperimentRecord r;
      r.preset = f[0];
      r.spectrum_id = f[1];
      r.block_size = std::stoll(f[2]);
      r.delta = std::strtod(f[3].c_str(), nullptr);
      r.ortho_policy = f[4];
      r.trial_index = std::stoll(f[5]);
      r.matvecs = std::stoll(f[6]);
      r.eps_empirical_raw = std::strtod(f[7].c_str(), nullptr);
      r.eps_empirical_floored = std::strtod(f[8].c_str(), nullptr);
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw ParseError("malformed integer field", lineno);
    }
  }
  return out;
}

std::filesystem::path output_directory(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("KLR_OUTPUT_DIR"); env != nullptr && *env != '\0') return env;
  return std::filesystem::current_path();
}

}  // namespace klr
