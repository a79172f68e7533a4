#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "klr/execution.hpp"
#include "klr/krylov.hpp"
#include "klr/spectrum.hpp"
#include "klr/types.hpp"

namespace klr {

enum class Preset { gap_sweep, block_size, perturb_sweep, grid, ortho_stability, schatten, simultaneous };
enum class Scale { paper, fast };

const char* to_string(Preset preset) noexcept;
Preset parse_preset(std::string_view name);  // ContractError on unknown names
const std::vector<Preset>& all_presets();

enum class Method {
  krylov,                      // block Krylov, block size from the series
  simultaneous_iteration,      // block of width block_size
  single_vector_simultaneous,  // window of `memory` vectors
  schatten,                    // run on Aᵀ then Z = orth(AQ), plus the direct run; every p
};

/// One curve within a preset: everything but the spectrum and the trial.
struct Series {
  Method method = Method::krylov;
  Index block_size = 1;
  double delta = 0.0;  // diagonal perturbation half-width, PSD route
  OrthoPolicy policy = OrthoPolicy::full_reorth;
};

struct ExperimentConfig {
  Preset preset = Preset::gap_sweep;
  Index n = 1000;
  Index k = 10;
  Index trials = 10;
  std::uint64_t base_seed = 0;
  std::vector<std::int64_t> budgets;  // matvec budgets, strictly increasing
  std::vector<SpectrumSpec> spectra;  // regenerated at n; their own n is ignored
  std::vector<Series> series;
  std::vector<double> p_values{1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
  Index memory = 0;  // single-vector simultaneous window; 0 means k
  double drop_tol = kDefaultDropTol;

  void validate() const;
};

/// The paper's parameters, or the reduced developer set (n = 200, k = 10,
/// trials = 5). k > 0 replaces the target rank, and with it the rank of
/// repeated-pairs spectra and the b = k series.
ExperimentConfig default_config(Preset preset, Scale scale = Scale::paper, Index k = 0);

struct ExperimentRecord {
  std::string preset;
  std::string spectrum_id;
  Index block_size = 1;
  double delta = 0.0;
  std::string ortho_policy;
  Index trial_index = 0;
  std::int64_t matvecs = 0;
  double eps_empirical_raw = 0.0;
  double eps_empirical_floored = 0.0;

  bool operator==(const ExperimentRecord&) const = default;
};

struct CellFailure {
  std::string spectrum_id;
  Index block_size = 1;
  Index trial_index = 0;
  std::string message;
};

struct ExperimentOutput {
  std::vector<ExperimentRecord> records;
  std::vector<CellFailure> failures;
};

/// Seed of one trial: a function of base seed, spectrum label and trial
/// index only, so every series of a preset sees the same start vectors.
std::uint64_t trial_seed(std::uint64_t base_seed, std::string_view cell, Index trial);

/// Runs every (spectrum, series, trial) cell. Cells go to OpenMP threads
/// under Execution::parallel; output order is the same either way.
ExperimentOutput run_preset(const ExperimentConfig& cfg, Execution exec = Execution::parallel);

/// Type-7 quantile (linear interpolation between order statistics).
double quantile(std::vector<double> values, double q);

struct AggregateRow {
  std::vector<std::string> key;
  Index count = 0;
  double q25 = 0.0, median = 0.0, q75 = 0.0;
};

/// Groups by the named record columns (any of preset, spectrum_id,
/// block_size, delta, ortho_policy, trial_index, matvecs) and takes
/// quartiles of eps_empirical_floored (or the raw value).
std::vector<AggregateRow> aggregate_quantiles(const std::vector<ExperimentRecord>& records,
                                              const std::vector<std::string>& group_keys, bool floored = true);

/// Column names of the record CSV, in order.
const std::vector<std::string>& record_columns();

void write_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path);
void write_summary_csv(const std::vector<AggregateRow>& rows, const std::vector<std::string>& group_keys,
                       const std::filesystem::path& path);
std::vector<ExperimentRecord> read_csv(const std::filesystem::path& path);

/// --out if given, else $KLR_OUTPUT_DIR, else the current directory.
std::filesystem::path output_directory(const std::string& flag_value);

}  // namespace klr
