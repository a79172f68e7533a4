#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <regex>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(KLR_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace

TEST_CASE("spectrum prints four decimals") {
  const Run r = cli("spectrum --kind exponential --alpha 1.1 --n 3");
  CHECK(r.code == 0);
  CHECK(r.out == "0.9091\n0.8264\n0.7513\n");
}

TEST_CASE("lowrank golden run") {
  const Run r = cli("lowrank --kind exponential --alpha 1.1 --n 200 --k 10 --t 60 --seed 7");
  CHECK(r.code == 0);
  std::smatch m;
  REQUIRE(std::regex_search(r.out, m, std::regex("eps_empirical=(\\S+) matvecs=(\\d+)")));
  CHECK(std::stod(m[1]) <= 1e-8);
  CHECK(std::stoi(m[2]) == 61);
}

TEST_CASE("experiment writes csv files") {
  const fs::path dir = fs::temp_directory_path() / "klr_cli_test";
  fs::remove_all(dir);
  const Run r = cli("experiment --preset gap_sweep --scale fast --trials 2 --out " + dir.string());
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "gap_sweep.csv"));
  CHECK(fs::exists(dir / "gap_sweep_summary.csv"));
  fs::remove_all(dir);
}

TEST_CASE("diagnose prints gaps and goodness") {
  const Run r = cli("diagnose --kind paired_gap --gap 0.01 --n 50 --k 4");
  CHECK(r.code == 0);
  CHECK(r.out.find("g_min_over_next 0.01") != std::string::npos);
  CHECK(r.out.find("goodness_L") != std::string::npos);
}

TEST_CASE("exit codes") {
  const Run unknown = cli("lowrank --no-such-flag");
  CHECK(unknown.code == 2);
  CHECK(unknown.out.find("Usage") != std::string::npos);
  CHECK(cli("").code == 2);
  CHECK(cli("frobnicate").code == 2);
  CHECK(cli("experiment --preset nope").code == 2);
  CHECK(cli("lowrank --n 20 --k 30").code == 2);
  CHECK(cli("lowrank --matrix /nonexistent/file.mtx --k 2").code == 1);
}
