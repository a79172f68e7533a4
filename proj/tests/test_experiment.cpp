#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "klr/experiment.hpp"

using namespace klr;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("klr_test_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_gap_sweep() {
  ExperimentConfig c = default_config(Preset::gap_sweep, Scale::fast);
  c.spectra.resize(2);
  c.trials = 3;
  c.budgets = {26, 28, 30};
  return c;
}

}  // namespace

TEST_CASE("quantile examples") {
  CHECK(quantile({1.0, 2.0, 3.0}, 0.5) == 2.0);
  CHECK(quantile({5.0}, 0.25) == 5.0);
  CHECK(quantile({5.0}, 0.75) == 5.0);
  CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == 2.5);
  CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
  CHECK_THROWS_AS(quantile({}, 0.5), ContractError);
}

TEST_CASE("presets parse and round trip") {
  for (Preset p : all_presets()) {
    CHECK(parse_preset(to_string(p)) == p);
    CHECK_NOTHROW(default_config(p, Scale::fast).validate());
    CHECK_NOTHROW(default_config(p, Scale::paper).validate());
  }
  CHECK_THROWS_AS(parse_preset("nope"), ContractError);
  const ExperimentConfig block = default_config(Preset::block_size, Scale::paper);
  CHECK(block.n == 1000);
  CHECK(block.k == 50);
  CHECK(block.series.back().block_size == 50);
  const ExperimentConfig k8 = default_config(Preset::block_size, Scale::fast, 8);
  CHECK(k8.series.back().block_size == 8);
}

TEST_CASE("config validation") {
  ExperimentConfig c = small_gap_sweep();
  c.trials = 0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = small_gap_sweep();
  c.budgets = {30, 28};
  CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("gap sweep record count") {
  ExperimentConfig c = default_config(Preset::gap_sweep, Scale::fast);
  c.spectra.resize(2);
  c.trials = 50;
  c.budgets.clear();
  for (int b = 26; b <= 35; ++b) c.budgets.push_back(b);
  const ExperimentOutput out = run_preset(c);
  CHECK(out.failures.empty());
  CHECK(out.records.size() == 2 * 10 * 50);
  for (const auto& r : out.records) {
    CHECK(r.eps_empirical_floored == std::max(r.eps_empirical_raw, 1e-15));
    CHECK(r.matvecs <= 35);
  }
}

TEST_CASE("serial and parallel runs are identical") {
  for (Preset p : {Preset::gap_sweep, Preset::ortho_stability, Preset::simultaneous, Preset::schatten}) {
    ExperimentConfig c = default_config(p, Scale::fast);
    c.trials = 2;
    c.n = 120;
    if (c.budgets.size() > 4) c.budgets.resize(4);
    const ExperimentOutput a = run_preset(c, Execution::serial);
    const ExperimentOutput b = run_preset(c, Execution::parallel);
    CHECK(a.records == b.records);
    CHECK(a.failures.size() == b.failures.size());
  }
}

TEST_CASE("same config gives byte-identical CSV") {
  const ExperimentConfig c = small_gap_sweep();
  write_csv(run_preset(c).records, scratch("a.csv"));
  write_csv(run_preset(c).records, scratch("b.csv"));
  CHECK(slurp(scratch("a.csv")) == slurp(scratch("b.csv")));
}

TEST_CASE("series share trial seeds") {
  CHECK(trial_seed(1, "x", 0) == trial_seed(1, "x", 0));
  CHECK(trial_seed(1, "x", 0) != trial_seed(1, "x", 1));
  CHECK(trial_seed(1, "x", 0) != trial_seed(1, "y", 0));
  CHECK(trial_seed(1, "x", 0) != trial_seed(2, "x", 0));
}

TEST_CASE("budget monotonicity of medians") {
  ExperimentConfig c = default_config(Preset::block_size, Scale::fast);
  c.trials = 3;
  c.budgets = {20, 40, 60, 80};
  const ExperimentOutput out = run_preset(c);
  const auto rows = aggregate_quantiles(out.records, {"block_size", "matvecs"});
  std::map<std::string, std::vector<std::pair<long, double>>> by_b;
  for (const auto& r : rows) by_b[r.key[0]].emplace_back(std::stol(r.key[1]), r.median);
  for (auto& [b, v] : by_b) {
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i].second <= v[i - 1].second * (1.0 + 1e-9) + 1e-12);
  }
}

TEST_CASE("trial order does not change quantiles") {
  const ExperimentOutput out = run_preset(small_gap_sweep());
  std::vector<ExperimentRecord> shuffled = out.records;
  std::mt19937 g(3);
  std::shuffle(shuffled.begin(), shuffled.end(), g);
  const std::vector<std::string> keys{"spectrum_id", "matvecs"};
  std::map<std::vector<std::string>, AggregateRow> a, b;
  for (const auto& r : aggregate_quantiles(out.records, keys)) a[r.key] = r;
  for (const auto& r : aggregate_quantiles(shuffled, keys)) b[r.key] = r;
  REQUIRE(a.size() == b.size());
  for (const auto& [key, row] : a) {
    CHECK(row.median == b.at(key).median);
    CHECK(row.q25 == b.at(key).q25);
    CHECK(row.q75 == b.at(key).q75);
  }
}

TEST_CASE("csv") {
  write_csv({}, scratch("empty.csv"));
  const std::string header = slurp(scratch("empty.csv"));
  CHECK(header ==
        "preset,spectrum_id,block_size,delta,ortho_policy,trial_index,matvecs,eps_empirical_raw,"
        "eps_empirical_floored\n");

  ExperimentRecord r;
  r.preset = "gap_sweep";
  r.spectrum_id = "paired_gap(1.1,0.01)";
  r.block_size = 2;
  r.delta = 1e-10;
  r.ortho_policy = "full_reorth";
  r.trial_index = 4;
  r.matvecs = 31;
  r.eps_empirical_raw = 0.1 + 0.2;
  r.eps_empirical_floored = 0.1 + 0.2;
  write_csv({r}, scratch("one.csv"));
  const std::string text = slurp(scratch("one.csv"));
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.find('\r') == std::string::npos);
  const auto back = read_csv(scratch("one.csv"));
  REQUIRE(back.size() == 1);
  CHECK(back[0] == r);

  const ExperimentOutput out = run_preset(small_gap_sweep());
  write_csv(out.records, scratch("many.csv"));
  CHECK(read_csv(scratch("many.csv")) == out.records);
}

TEST_CASE("summary csv") {
  const ExperimentOutput out = run_preset(small_gap_sweep());
  const std::vector<std::string> keys{"spectrum_id", "matvecs"};
  write_summary_csv(aggregate_quantiles(out.records, keys), keys, scratch("summary.csv"));
  const std::string text = slurp(scratch("summary.csv"));
  CHECK(text.rfind("spectrum_id,matvecs,count,q25,median,q75\n", 0) == 0);
  CHECK_THROWS_AS(aggregate_quantiles(out.records, {"nope"}), ContractError);
}

TEST_CASE("output directory resolution") {
  CHECK(output_directory("x/y") == fs::path("x/y"));
  ::setenv("KLR_OUTPUT_DIR", "/tmp/klr_env_dir", 1);
  CHECK(output_directory("") == fs::path("/tmp/klr_env_dir"));
  ::unsetenv("KLR_OUTPUT_DIR");
  CHECK(output_directory("") == fs::current_path());
}

TEST_CASE("cell failures do not stop the sweep") {
  ExperimentConfig c = small_gap_sweep();
  c.series.push_back(Series{Method::krylov, 1});
  c.spectra.push_back(SpectrumSpec{spectra::Explicit{Vector::Ones(3)}, 3});
  const ExperimentOutput out = run_preset(c);
  CHECK(!out.failures.empty());
  CHECK(!out.records.empty());
}
